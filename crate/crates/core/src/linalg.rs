//! Fixed-size matrix aliases and the handful of dense kernels shared by the
//! network, spectra and optimizer modules.

use nalgebra::{Matrix6, SMatrix};
use num_complex::Complex64;

pub type C64 = Complex64;

/// 6×6 complex scattering matrix.
pub type CMatrix6 = Matrix6<C64>;
/// 12×12 real quadrature matrix.
pub type RMatrix12 = SMatrix<f64, 12, 12>;
pub type RMatrix8 = SMatrix<f64, 8, 8>;

pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Frobenius norm of `S*S - I`, the larger of the two one-sided residuals.
pub fn unitarity_residual(m: &CMatrix6) -> f64 {
    let id = CMatrix6::identity();
    let left = (m.adjoint() * m - id).norm();
    let right = (m * m.adjoint() - id).norm();
    left.max(right)
}

pub fn min_singular_value_c6(m: &CMatrix6) -> f64 {
    m.singular_values().min()
}

pub fn min_singular_value_r8(m: &RMatrix8) -> f64 {
    m.singular_values().min()
}

/// Unitary polar factor `U V*` of a nonsingular matrix `X = U Σ V*`.
///
/// Computed with the scaled Newton iteration `X <- (μX + X^{-*}/μ) / 2`.
/// The iterates only ever combine entries through LU inversion and
/// scalar arithmetic, so an exact zero pattern shared by `X` and `X^{-*}`
/// (e.g. a permuted block-diagonal structure) survives untouched.
/// Returns `None` when an iterate cannot be inverted.
pub fn polar_factor(x: &CMatrix6) -> Option<CMatrix6> {
    const MAX_ITERS: usize = 100;
    const STOP: f64 = 1e-14;
    const SCALE_UNTIL: f64 = 1e-2;

    let mut current = *x;
    let mut delta = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        let inv = current.lu().try_inverse()?;
        let inv_adj = inv.adjoint();
        let mu = if delta > SCALE_UNTIL {
            (inv.norm() / current.norm()).sqrt()
        } else {
            1.0
        };
        let next = (current * C64::from(mu) + inv_adj * C64::from(1.0 / mu)) * C64::from(0.5);
        delta = (next - current).norm();
        current = next;
        if delta <= STOP {
            break;
        }
    }
    if current
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return None;
    }
    Some(current)
}

/// Round to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let prec = digits.saturating_sub(1);
    format!("{x:.prec$e}").parse().unwrap_or(x)
}

/// Round to `decimals` places after the decimal point, half away from zero.
pub fn round_decimals(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}
