//! Euclidean gradient of `V(0; S̃)` and modified steepest descent over the
//! unitary group.

use log::{debug, info};
use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{polar_factor, CMatrix6, RMatrix12, C64};
use crate::network::{stability_check, NopaParams, PassiveNetwork, QuadratureMap, StateSpace};
use crate::spectra::{dc_transfer, selectors};

/// Eigenvalues with real part at or above `-MARGINAL_EIG` count as unstable.
pub const MARGINAL_EIG: f64 = 1e-12;
/// Singular value floor for [`retract`].
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    pub d: CMatrix6,
    /// Largest singular value of `d`.
    pub operator_norm: f64,
}

/// `V(0)` at ψ₁ = ψ₂ = 0 for a raw 6×6 matrix (unitarity not required).
pub fn squeezing_cost(m: &CMatrix6, params: &NopaParams) -> Result<f64> {
    let ss = StateSpace::from_scattering(m, params)?;
    let h = dc_transfer(&ss)?;
    let w = selectors(0.0, 0.0).weight();
    Ok((h.transpose() * w * h).trace())
}

pub fn euclidean_gradient(net: &PassiveNetwork, params: &NopaParams) -> Result<GradientMatrix> {
    euclidean_gradient_at(net.entries(), params)
}

/// Same as [`euclidean_gradient`] for a matrix that need not be unitary.
pub fn euclidean_gradient_at(m: &CMatrix6, params: &NopaParams) -> Result<GradientMatrix> {
    let infeasible = |e: Error| Error::InfeasiblePoint {
        reason: e.to_string(),
    };
    let ss = StateSpace::from_scattering(m, params).map_err(infeasible)?;
    let h = dc_transfer(&ss).map_err(infeasible)?;
    let a_inv =
        ss.a.lu()
            .try_inverse()
            .ok_or_else(|| Error::InfeasiblePoint {
                reason: "A is singular".into(),
            })?;
    let sqrt_gamma = params.normalized().0.sqrt();

    let mm = h.transpose() * selectors(0.0, 0.0).weight(); // 12×4
    let s12 = ss.s12();
    let s21 = ss.s21();

    let mut e4 = SMatrix::<f64, 12, 4>::zeros();
    e4.fixed_view_mut::<4, 4>(0, 0).fill_with_identity();
    let mut e8 = SMatrix::<f64, 12, 8>::zeros();
    e8.fixed_view_mut::<8, 8>(4, 0).fill_with_identity();

    let left: SMatrix<f64, 12, 4> = e4 * e4.transpose() * mm
        + e8 * ss.x * s21 * e4.transpose() * mm
        - e8 * ss.x * a_inv * ss.b * mm * sqrt_gamma;
    let right: SMatrix<f64, 4, 12> = e4.transpose()
        + s12 * ss.x * e8.transpose()
        + ss.c * a_inv * ss.x * e8.transpose() * sqrt_gamma;
    let n: RMatrix12 = left * right;

    let k = QuadratureMap::k();
    let d = k.adjoint() * n.transpose().map(C64::from) * k * C64::from(2.0);
    let operator_norm = d.singular_values().max();
    Ok(GradientMatrix { d, operator_norm })
}

/// `Z = S̃ D* S̃ − D`.
pub fn descent_direction(net: &PassiveNetwork, grad: &GradientMatrix) -> CMatrix6 {
    let s = net.entries();
    s * grad.d.adjoint() * s - grad.d
}

/// `Re Tr[z1* (I − ½ S̃ S̃*) z2]`.
pub fn inner_product(net: &PassiveNetwork, z1: &CMatrix6, z2: &CMatrix6) -> f64 {
    let s = net.entries();
    let metric = CMatrix6::identity() - s * s.adjoint() * C64::from(0.5);
    (z1.adjoint() * metric * z2).trace().re
}

/// Nearest unitary `UV*` to `x = UΣV*`.
///
/// The factor is computed by Newton's polar iteration rather than from the
/// SVD factors, which keeps exact zero patterns of real block-structured
/// iterates intact (see [`polar_factor`]).
pub fn retract(x: &CMatrix6) -> Result<PassiveNetwork> {
    let sigma_min = x.singular_values().min();
    if !(sigma_min > RANK_TOL) {
        return Err(Error::RankDeficient { sigma_min });
    }
    let u = polar_factor(x).ok_or(Error::RankDeficient { sigma_min })?;
    Ok(PassiveNetwork::from_unitary(u))
}

/// Reason a point fails the guard, or `None` when feasible.
pub fn feasibility(net: &PassiveNetwork, params: &NopaParams) -> Option<String> {
    let ss = match StateSpace::from_scattering(net.entries(), params) {
        Ok(ss) => ss,
        Err(e) => return Some(e.to_string()),
    };
    let report = stability_check(&ss);
    if !report.a_invertible {
        return Some("A is singular".into());
    }
    if !(report.max_re_eig < -MARGINAL_EIG) {
        return Some(format!(
            "A is not Hurwitz (max Re eig(A) = {:.6e})",
            report.max_re_eig
        ));
    }
    None
}

pub fn feasible(net: &PassiveNetwork, params: &NopaParams) -> bool {
    feasibility(net, params).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Stop once `√⟨Z,Z⟩ < tol`.
    pub tol: f64,
    pub rho0: f64,
    pub max_iters: usize,
    pub rho_min: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            rho0: 1.0,
            max_iters: 10_000,
            rho_min: 1e-15,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.rho0 > 0.0) || !(self.rho_min < self.rho0) {
            return Err(Error::InvalidArgument(format!(
                "optimizer config needs tol > 0, rho0 > 0, rho_min < rho0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub v0: f64,
    pub db: f64,
    pub z_norm: f64,
    /// Step size accepted from this iterate (the current ρ for the last record).
    pub rho: f64,
    /// Candidates rejected by the feasibility guard while leaving this iterate.
    pub feasibility_rejections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIters,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub result: PassiveNetwork,
    pub trace: Vec<IterationRecord>,
    pub status: Status,
}

impl OptimizationResult {
    pub fn final_v(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.v0)
    }
}

/// A retracted candidate with its cost, or `None` if it fails the guard.
fn candidate(x: &CMatrix6, params: &NopaParams) -> Option<(PassiveNetwork, f64)> {
    let net = retract(x).ok()?;
    if !feasible(&net, params) {
        return None;
    }
    let v = squeezing_cost(net.entries(), params).ok()?;
    Some((net, v))
}

pub fn optimize(
    init: &PassiveNetwork,
    params: &NopaParams,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    if let Some(reason) = feasibility(init, params) {
        return Err(Error::InfeasibleStart { reason });
    }

    let mut current = init.clone();
    let mut v = squeezing_cost(current.entries(), params)?;
    let mut rho = cfg.rho0;
    let mut trace = Vec::new();

    for iter in 0..cfg.max_iters {
        let grad = euclidean_gradient(&current, params)?;
        let z = descent_direction(&current, &grad);
        let zz = inner_product(&current, &z, &z);
        let z_norm = zz.max(0.0).sqrt();
        let mut record = IterationRecord {
            iter,
            v0: v,
            db: 10.0 * v.log10(),
            z_norm,
            rho,
            feasibility_rejections: 0,
        };
        debug!("iter {iter}: V = {v:.6e}, |Z| = {z_norm:.4e}, rho = {rho:e}");

        if z_norm < cfg.tol {
            trace.push(record);
            info!("converged after {iter} iterations, V = {v:.6e}");
            return Ok(OptimizationResult {
                result: current,
                trace,
                status: Status::Converged,
            });
        }

        // Grow ρ while the doubled step still gives sufficient decrease.
        loop {
            match candidate(&(current.entries() + z * C64::from(2.0 * rho)), params) {
                Some((_, v1)) if v - v1 >= rho * zz => rho *= 2.0,
                Some(_) => break,
                None => {
                    record.feasibility_rejections += 1;
                    break;
                }
            }
        }

        // Shrink ρ until the plain step is feasible and decreases enough.
        let accepted = loop {
            match candidate(&(current.entries() + z * C64::from(rho)), params) {
                Some((net, v2)) if v - v2 >= 0.5 * rho * zz => break Some((net, v2)),
                Some(_) => {}
                None => record.feasibility_rejections += 1,
            }
            rho /= 2.0;
            if rho < cfg.rho_min {
                break None;
            }
        };

        record.rho = rho;
        trace.push(record);
        match accepted {
            Some((net, v2)) => {
                current = net;
                v = v2;
            }
            None => {
                info!("step size fell below {:e} at iteration {iter}", cfg.rho_min);
                return Ok(OptimizationResult {
                    result: current,
                    trace,
                    status: Status::StepUnderflow,
                });
            }
        }
    }

    // Report the final iterate too, so the trace ends where the result is.
    let grad = euclidean_gradient(&current, params)?;
    let z = descent_direction(&current, &grad);
    trace.push(IterationRecord {
        iter: cfg.max_iters,
        v0: v,
        db: 10.0 * v.log10(),
        z_norm: inner_product(&current, &z, &z).max(0.0).sqrt(),
        rho,
        feasibility_rejections: 0,
    });
    Ok(OptimizationResult {
        result: current,
        trace,
        status: Status::MaxIters,
    })
}

/// `max Re eig(A)` for a network, or `None` if the state space fails.
pub fn max_re_eig(net: &PassiveNetwork, params: &NopaParams) -> Option<f64> {
    StateSpace::from_scattering(net.entries(), params)
        .ok()
        .map(|ss| stability_check(&ss).max_re_eig)
}
