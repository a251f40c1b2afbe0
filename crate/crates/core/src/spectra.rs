//! Transfer functions and two-mode squeezing spectra of the closed loop.

use nalgebra::{RowVector4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RMatrix8, C64};
use crate::network::{StateSpace, SINGULAR_TOL};

/// `V < 4` certifies EPR entanglement.
pub const VACUUM_LEVEL: f64 = 4.0;

pub type TransferMatrix = SMatrix<C64, 4, 12>;

/// Row selectors picking `q₁ + q₂` and `p₁ − p₂` out of the rotated output
/// quadratures `[q₁, p₁, q₂, p₂]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorPair {
    pub e1: RowVector4<f64>,
    pub e2: RowVector4<f64>,
}

impl SelectorPair {
    /// `M = e1ᵀe1 + e2ᵀe2`.
    pub fn weight(&self) -> SMatrix<f64, 4, 4> {
        self.e1.transpose() * self.e1 + self.e2.transpose() * self.e2
    }
}

/// Selectors for the fields rotated by `e^{iψ₁}` and `e^{iψ₂}`.
///
/// Rotating a field by `e^{iψ}` maps its quadratures to
/// `q' = cos ψ q − sin ψ p`, `p' = sin ψ q + cos ψ p`.
pub fn selectors(psi1: f64, psi2: f64) -> SelectorPair {
    let (s1, c1) = psi1.sin_cos();
    let (s2, c2) = psi2.sin_cos();
    SelectorPair {
        e1: RowVector4::new(c1, -s1, c2, -s2),
        e2: RowVector4::new(s1, c1, -s2, -c2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub v_total: f64,
    pub db: f64,
    pub entangled: bool,
    pub psi1: f64,
    pub psi2: f64,
}

impl SqueezingReport {
    fn from_parts(omega: f64, v_plus: f64, v_minus: f64, psi1: f64, psi2: f64) -> Self {
        let v_total = v_plus + v_minus;
        Self {
            omega,
            v_plus,
            v_minus,
            v_total,
            db: 10.0 * v_total.log10(),
            entangled: v_total < VACUUM_LEVEL,
            psi1,
            psi2,
        }
    }
}

/// `H = D − C A⁻¹ B` at zero frequency (real).
pub fn dc_transfer(ss: &StateSpace) -> Result<SMatrix<f64, 4, 12>> {
    let svals = ss.a.singular_values();
    if !(svals.min() > SINGULAR_TOL * svals.max()) {
        return Err(Error::ResonantFrequency { omega: 0.0 });
    }
    let a_inv_b =
        ss.a.lu()
            .solve(&ss.b)
            .ok_or(Error::ResonantFrequency { omega: 0.0 })?;
    Ok(ss.d - ss.c * a_inv_b)
}

/// `H(iω) = C (iωI − A)⁻¹ B + D`, with `omega` in rad/s.
pub fn transfer_matrix(ss: &StateSpace, omega: f64) -> Result<TransferMatrix> {
    if omega == 0.0 {
        return dc_transfer(ss).map(|h| h.map(C64::from));
    }
    let w = omega / ss.rate_scale;
    let resolvent = RMatrix8::identity().map(|v| C64::new(0.0, w * v)) - ss.a.map(C64::from);
    let svals = resolvent.singular_values();
    if !(svals.min() > SINGULAR_TOL * svals.max()) {
        return Err(Error::ResonantFrequency { omega });
    }
    let solved = resolvent
        .lu()
        .solve(&ss.b.map(C64::from))
        .ok_or(Error::ResonantFrequency { omega })?;
    Ok(ss.c.map(C64::from) * solved + ss.d.map(C64::from))
}

fn row_energy(row: impl Iterator<Item = C64>) -> f64 {
    row.map(|z| z.norm_sqr()).sum()
}

/// `V± = Tr[H±* H±]` with `H+ = e1·H`, `H− = e2·H`.
pub fn two_mode_squeezing(
    ss: &StateSpace,
    omega: f64,
    psi1: f64,
    psi2: f64,
) -> Result<SqueezingReport> {
    let h = transfer_matrix(ss, omega)?;
    let sel = selectors(psi1, psi2);
    let e1 = sel.e1.map(C64::from);
    let e2 = sel.e2.map(C64::from);
    let v_plus = row_energy((e1 * h).iter().copied());
    let v_minus = row_energy((e2 * h).iter().copied());
    Ok(SqueezingReport::from_parts(
        omega, v_plus, v_minus, psi1, psi2,
    ))
}

/// `V(0)` at ψ₁ = ψ₂ = 0.
pub fn squeezing_at_dc(ss: &StateSpace) -> Result<SqueezingReport> {
    two_mode_squeezing(ss, 0.0, 0.0, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Reports in increasing ω, resonant points omitted.
    pub reports: Vec<SqueezingReport>,
    /// Frequencies (rad/s) skipped because `iωI − A` was singular.
    pub resonant: Vec<f64>,
}

/// Evaluate on `points` uniformly spaced frequencies in `[0, omega_max]`.
/// `V(iω) = V(−iω)` for a real system, so negative frequencies are not swept.
pub fn sweep_spectrum(
    ss: &StateSpace,
    omega_max: f64,
    points: usize,
    psi1: f64,
    psi2: f64,
) -> Result<Sweep> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!(
            "a sweep needs at least 2 points, got {points}"
        )));
    }
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    let step = omega_max / (points - 1) as f64;
    let mut sweep = Sweep {
        reports: Vec::with_capacity(points),
        resonant: Vec::new(),
    };
    for k in 0..points {
        let omega = if k + 1 == points {
            omega_max
        } else {
            k as f64 * step
        };
        match two_mode_squeezing(ss, omega, psi1, psi2) {
            Ok(report) => sweep.reports.push(report),
            Err(Error::ResonantFrequency { omega }) => sweep.resonant.push(omega),
            Err(e) => return Err(e),
        }
    }
    Ok(sweep)
}
