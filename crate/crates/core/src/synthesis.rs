//! Two-level unitary factorization of a 6×6 network and mapping of the
//! factors onto beam splitters and phase/swap elements.

use std::fmt;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{round_decimals, unitarity_residual, CMatrix6, C64};
use crate::network::{build_state_space, NopaParams, PassiveNetwork, UNITARY_TOL};
use crate::spectra::{two_mode_squeezing, SqueezingReport};

pub const PORTS: usize = 6;
/// `n(n − 1)/2` slots for `n = 6`.
pub const FACTOR_COUNT: usize = PORTS * (PORTS - 1) / 2;
/// Tolerance shared by all classification tests.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Elimination order over the ports, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationVector([usize; PORTS]);

impl PermutationVector {
    pub fn new(p: [usize; PORTS]) -> Result<Self> {
        let mut seen = [false; PORTS];
        for &v in &p {
            if !(1..=PORTS).contains(&v) || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{p:?} is not a permutation of 1..={PORTS}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self(p))
    }

    /// Parse `"6,5,4,3,2,1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != PORTS {
            return Err(Error::InvalidPermutation(format!(
                "expected {PORTS} comma-separated entries, got {}",
                parts.len()
            )));
        }
        let mut p = [0; PORTS];
        for (slot, part) in p.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::InvalidPermutation(format!("bad entry {part:?}")))?;
        }
        Self::new(p)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl Default for PermutationVector {
    fn default() -> Self {
        Self([6, 5, 4, 3, 2, 1])
    }
}

impl fmt::Display for PermutationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Identity,
    SwapLike,
    PhaseLike,
    Beamsplitter { alpha: f64, beta: f64 },
    General,
}

impl FactorKind {
    pub fn name(&self) -> &'static str {
        match self {
            FactorKind::Identity => "identity",
            FactorKind::SwapLike => "swap_like",
            FactorKind::PhaseLike => "phase_like",
            FactorKind::Beamsplitter { .. } => "beamsplitter",
            FactorKind::General => "general",
        }
    }
}

/// A unitary that differs from `I₆` only on rows/columns `i`, `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelFactor {
    /// 1-based, `i < j`.
    pub i: usize,
    pub j: usize,
    pub block: Matrix2<C64>,
    pub kind: FactorKind,
}

impl TwoLevelFactor {
    /// Validates indices and unitarity of the block and classifies it.
    pub fn new(i: usize, j: usize, block: Matrix2<C64>) -> Result<Self> {
        if !(1 <= i && i < j && j <= PORTS) {
            return Err(Error::InvalidFactor(format!(
                "indices ({i}, {j}) must satisfy 1 <= i < j <= {PORTS}"
            )));
        }
        let residual = (block.adjoint() * block - Matrix2::identity()).norm();
        if residual > UNITARY_TOL {
            return Err(Error::InvalidFactor(format!(
                "block on ({i}, {j}) is not unitary (residual {residual:.3e})"
            )));
        }
        Ok(Self::classified(i, j, block))
    }

    fn classified(i: usize, j: usize, block: Matrix2<C64>) -> Self {
        Self {
            i,
            j,
            block,
            kind: classify(&block),
        }
    }

    /// The full 6×6 matrix.
    pub fn embed(&self) -> CMatrix6 {
        let mut m = CMatrix6::identity();
        let (a, b) = (self.i - 1, self.j - 1);
        m[(a, a)] = self.block[(0, 0)];
        m[(a, b)] = self.block[(0, 1)];
        m[(b, a)] = self.block[(1, 0)];
        m[(b, b)] = self.block[(1, 1)];
        m
    }

    /// `α` for beamsplitter factors.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            FactorKind::Beamsplitter { alpha, .. } => Some(alpha),
            _ => None,
        }
    }
}

/// Which end of the factor list multiplies first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductOrder {
    /// `S̃ = S̃₁ S̃₂ ⋯ S̃₁₅`.
    FirstLeftmost,
    /// `S̃ = S̃₁₅ ⋯ S̃₂ S̃₁`.
    FirstRightmost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub factors: Vec<TwoLevelFactor>,
    pub order: ProductOrder,
    /// Frobenius distance between the product and the decomposed network.
    pub reconstruction_error: f64,
}

fn near(a: C64, re: f64) -> bool {
    (a - C64::from(re)).norm() <= CLASSIFY_TOL
}

/// Precedence: identity, swap_like, phase_like, beamsplitter, general.
pub fn classify(block: &Matrix2<C64>) -> FactorKind {
    let (b00, b01, b10, b11) = (block[(0, 0)], block[(0, 1)], block[(1, 0)], block[(1, 1)]);
    if near(b00, 1.0) && near(b01, 0.0) && near(b10, 0.0) && near(b11, 1.0) {
        return FactorKind::Identity;
    }
    let unit_real = |z: C64| near(z, 1.0) || near(z, -1.0);
    if near(b00, 0.0) && near(b11, 0.0) && unit_real(b01) && unit_real(b10) {
        return FactorKind::SwapLike;
    }
    let unit = |z: C64| (z.norm() - 1.0).abs() <= CLASSIFY_TOL;
    if near(b01, 0.0) && near(b10, 0.0) && unit(b00) && unit(b11) {
        return FactorKind::PhaseLike;
    }
    let real = block.iter().all(|z| z.im.abs() <= CLASSIFY_TOL);
    if real
        && (b00.re - b11.re).abs() <= CLASSIFY_TOL
        && (b01.re + b10.re).abs() <= CLASSIFY_TOL
        && (b00.re * b00.re + b01.re * b01.re - 1.0).abs() <= CLASSIFY_TOL
    {
        return FactorKind::Beamsplitter {
            alpha: b00.re,
            beta: b01.re,
        };
    }
    FactorKind::General
}

/// Apply the two-level matrix `g` on rows `(i, j)` from the left.
fn rotate_rows(w: &mut CMatrix6, i: usize, j: usize, g: &Matrix2<C64>) {
    for col in 0..PORTS {
        let (x, y) = (w[(i, col)], w[(j, col)]);
        w[(i, col)] = g[(0, 0)] * x + g[(0, 1)] * y;
        w[(j, col)] = g[(1, 0)] * x + g[(1, 1)] * y;
    }
}

/// Column sweep of two-level eliminations.
///
/// For column `p₁`, then `p₂`, …, the pairs `(p₅, p₆)`, `(p₄, p₅)`, …
/// push the column's weight up to row `p_col`. The last 2×2 block left
/// over is absorbed whole. Every slot is kept, identity or not, and the
/// factors come out in first-leftmost product order.
pub fn decompose(net: &PassiveNetwork, perm: &PermutationVector) -> Result<SynthesisReport> {
    let target = net.entries();
    let residual = unitarity_residual(target);
    if residual > UNITARY_TOL {
        return Err(Error::NonUnitaryInput { residual });
    }
    let q: Vec<usize> = perm.as_slice().iter().map(|p| p - 1).collect();
    let mut w = *target;
    let mut factors = Vec::with_capacity(FACTOR_COUNT);

    for col in 0..PORTS - 1 {
        for t in (col + 1..PORTS).rev() {
            let (i, j, c) = (q[t - 1], q[t], q[col]);
            let (a, b) = (w[(i, c)], w[(j, c)]);
            let r = a.norm().hypot(b.norm());
            let g = if r == 0.0 {
                Matrix2::identity()
            } else if col == PORTS - 2 {
                Matrix2::new(w[(i, i)], w[(i, j)], w[(j, i)], w[(j, j)]).adjoint()
            } else {
                Matrix2::new(a.conj(), b.conj(), -b, a) / C64::from(r)
            };
            rotate_rows(&mut w, i, j, &g);

            let mut block = g.adjoint();
            let (lo, hi) = if i < j {
                (i, j)
            } else {
                block = Matrix2::new(block[(1, 1)], block[(1, 0)], block[(0, 1)], block[(0, 0)]);
                (j, i)
            };
            factors.push(TwoLevelFactor::classified(lo + 1, hi + 1, block));
        }
    }

    let order = ProductOrder::FirstLeftmost;
    let reconstruction_error = (product(&factors, order) - target).norm();
    Ok(SynthesisReport {
        factors,
        order,
        reconstruction_error,
    })
}

fn product(factors: &[TwoLevelFactor], order: ProductOrder) -> CMatrix6 {
    let mut acc = CMatrix6::identity();
    for f in factors {
        acc = match order {
            ProductOrder::FirstLeftmost => acc * f.embed(),
            ProductOrder::FirstRightmost => f.embed() * acc,
        };
    }
    acc
}

/// The ordered product, projected onto the unitary group if rounding left
/// a small residual.
pub fn reconstruct(factors: &[TwoLevelFactor], order: ProductOrder) -> Result<PassiveNetwork> {
    PassiveNetwork::new(product(factors, order))
}

/// Round every beamsplitter `α` to `digits` decimals (half away from
/// zero), set `β = sign(β)√(1 − α²)`, and evaluate `V(0)` of the product.
/// `None` leaves the factors untouched.
pub fn quantize_sensitivity(
    report: &SynthesisReport,
    digits: Option<u32>,
    params: &NopaParams,
) -> Result<SqueezingReport> {
    let net = quantized_network(report, digits)?;
    let ss = build_state_space(&net, params)?;
    two_mode_squeezing(&ss, 0.0, 0.0, 0.0)
}

pub fn quantized_network(report: &SynthesisReport, digits: Option<u32>) -> Result<PassiveNetwork> {
    let Some(digits) = digits else {
        return reconstruct(&report.factors, report.order);
    };
    let factors: Vec<TwoLevelFactor> = report
        .factors
        .iter()
        .map(|f| match f.kind {
            FactorKind::Beamsplitter { alpha, beta } => {
                let a = round_decimals(alpha, digits);
                let b = (1.0 - a * a).max(0.0).sqrt().copysign(beta);
                let block = Matrix2::new(a, b, -b, a).map(C64::from);
                TwoLevelFactor {
                    i: f.i,
                    j: f.j,
                    block,
                    kind: FactorKind::Beamsplitter { alpha: a, beta: b },
                }
            }
            _ => f.clone(),
        })
        .collect();
    reconstruct(&factors, report.order)
}
