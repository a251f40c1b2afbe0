//! Passive scattering networks, their quadrature form, and the closed-loop
//! state-space model of two identical NOPAs wired through the network.
//!
//! Port ordering of the 6×6 scattering matrix `S̃`:
//!
//! ```text
//! outputs: [out_1, out_2, in_a1, in_b1, in_a2, in_b2]
//! inputs:  [in_1,  in_2,  out_a1, out_b1, out_a2, out_b2]
//! ```
//!
//! The first two rows/columns are the external fields, the remaining four
//! close the feedback loop through NOPA 1 (modes a1, b1) and NOPA 2 (a2, b2).
//!
//! Rates are normalized by `gamma_ref` before any matrix is built, so `A`,
//! `B`, `C`, `D` are dimensionless. `V(0)` only depends on rate ratios.

use log::warn;
use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    min_singular_value_r8, polar_factor, unitarity_residual, CMatrix6, RMatrix12, RMatrix8, C64,
    ONE,
};

/// Frobenius residual below which a matrix is accepted as unitary as-is.
pub const UNITARY_TOL: f64 = 1e-10;
/// Residuals between `UNITARY_TOL` and this value are projected back onto
/// the unitary group; anything larger is rejected.
pub const REPROJECT_TOL: f64 = 1e-6;
/// Smallest singular value below which `I - S22` (or `A`) counts as singular.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Reference mirror transmissivity rate, Hz.
pub const DEFAULT_GAMMA_REF: f64 = 7.2e7;

/// A static passive linear network: a 6×6 complex unitary scattering matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveNetwork {
    entries: CMatrix6,
    label: Option<String>,
}

impl PassiveNetwork {
    /// Validates unitarity. Inputs that are slightly off (as happens after a
    /// round trip through a text file) are projected to the nearest unitary.
    pub fn new(entries: CMatrix6) -> Result<Self> {
        let residual = unitarity_residual(&entries);
        if residual <= UNITARY_TOL {
            return Ok(Self::from_unitary(entries));
        }
        if residual <= REPROJECT_TOL {
            warn!("scattering matrix residual {residual:.3e} exceeds {UNITARY_TOL:e}; projecting to nearest unitary");
            let projected = polar_factor(&entries).ok_or(Error::NonUnitaryInput { residual })?;
            return Ok(Self::from_unitary(projected));
        }
        Err(Error::NonUnitaryInput { residual })
    }

    /// Build from real entries (row-major nested arrays).
    pub fn from_real(rows: [[f64; 6]; 6]) -> Result<Self> {
        Self::new(CMatrix6::from_fn(|i, j| C64::new(rows[i][j], 0.0)))
    }

    pub(crate) fn from_unitary(entries: CMatrix6) -> Self {
        Self {
            entries,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn entries(&self) -> &CMatrix6 {
        &self.entries
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.entries)
    }

    pub fn identity() -> Self {
        Self::from_unitary(CMatrix6::identity()).with_label("identity")
    }

    /// The dual-NOPA coherent-feedback wiring: a pure permutation.
    pub fn coherent_feedback() -> Self {
        let mut m = CMatrix6::zeros();
        for (row, col) in [(0, 4), (1, 3), (2, 0), (3, 5), (4, 2), (5, 1)] {
            m[(row, col)] = ONE;
        }
        Self::from_unitary(m).with_label("cfb")
    }

    /// The tabulated locally optimized network, given to 15 decimals.
    pub fn local_optimum() -> Self {
        let rows = PAPER_OPTIMUM;
        let m = CMatrix6::from_fn(|i, j| C64::new(rows[i][j], 0.0));
        // The tabulated digits leave a ~1e-15 residual, well inside UNITARY_TOL.
        Self::new(m)
            .expect("tabulated optimum is unitary to its stated precision")
            .with_label("lm-paper")
    }

    /// Named built-in networks: `"cfb"`, `"lm-paper"`, `"identity"`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "cfb" => Some(Self::coherent_feedback()),
            "lm-paper" => Some(Self::local_optimum()),
            "identity" => Some(Self::identity()),
            _ => None,
        }
    }
}

const PAPER_OPTIMUM: [[f64; 6]; 6] = [
    [
        -0.012305658659326,
        0.000000000000071,
        0.008576364236157,
        -0.000000000000142,
        0.999887502042829,
        0.000000000000110,
    ],
    [
        -0.000000000000071,
        -0.012305658659326,
        -0.000000000000109,
        0.999887502042830,
        0.000000000000142,
        0.008576364236157,
    ],
    [
        0.999887502042829,
        0.000000000000001,
        -0.008471156255372,
        0.000000000000069,
        0.012378318554964,
        -0.000000000000048,
    ],
    [
        0.000000000000051,
        0.008576364236158,
        0.000000000000085,
        -0.008471156255372,
        -0.000000000000112,
        0.999927340104363,
    ],
    [
        0.008576364236157,
        -0.000000000000050,
        0.999927340104363,
        0.000000000000111,
        -0.008471156255372,
        -0.000000000000085,
    ],
    [
        -0.000000000000001,
        0.999887502042829,
        0.000000000000047,
        0.012378318554963,
        -0.000000000000069,
        -0.008471156255373,
    ],
];

/// The constant map `K = I₆ ⊗ [1; -i]` between complex amplitudes and
/// (q, p) quadrature pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadratureMap;

impl QuadratureMap {
    pub fn k() -> SMatrix<C64, 12, 6> {
        let mut k = SMatrix::<C64, 12, 6>::zeros();
        for port in 0..6 {
            k[(2 * port, port)] = ONE;
            k[(2 * port + 1, port)] = C64::new(0.0, -1.0);
        }
        k
    }
}

/// Real 12×12 quadrature form of a scattering matrix, partitioned into the
/// external (first 4 rows/cols) and feedback (last 8) blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureNetwork {
    pub entries: RMatrix12,
}

impl QuadratureNetwork {
    pub fn s11(&self) -> SMatrix<f64, 4, 4> {
        self.entries.fixed_view::<4, 4>(0, 0).into_owned()
    }

    pub fn s12(&self) -> SMatrix<f64, 4, 8> {
        self.entries.fixed_view::<4, 8>(0, 4).into_owned()
    }

    pub fn s21(&self) -> SMatrix<f64, 8, 4> {
        self.entries.fixed_view::<8, 4>(4, 0).into_owned()
    }

    pub fn s22(&self) -> RMatrix8 {
        self.entries.fixed_view::<8, 8>(4, 4).into_owned()
    }

    /// `J = I₆ ⊗ [[0, 1], [-1, 0]]`.
    pub fn symplectic_form() -> RMatrix12 {
        let mut j = RMatrix12::zeros();
        for port in 0..6 {
            j[(2 * port, 2 * port + 1)] = 1.0;
            j[(2 * port + 1, 2 * port)] = -1.0;
        }
        j
    }

    pub fn orthogonality_residual(&self) -> f64 {
        (self.entries.transpose() * self.entries - RMatrix12::identity()).norm()
    }

    pub fn symplectic_residual(&self) -> f64 {
        let j = Self::symplectic_form();
        (self.entries * j * self.entries.transpose() - j).norm()
    }
}

/// `S = ½ K S̃ K* + ½ K^# S̃^# Kᵀ`, evaluated blockwise: each complex entry
/// `x + iy` becomes the 2×2 block `[[x, -y], [y, x]]`. Accepts any complex
/// matrix, unitary or not.
pub fn quadrature_matrix(m: &CMatrix6) -> RMatrix12 {
    let mut s = RMatrix12::zeros();
    for i in 0..6 {
        for j in 0..6 {
            let z = m[(i, j)];
            s[(2 * i, 2 * j)] = z.re;
            s[(2 * i, 2 * j + 1)] = -z.im;
            s[(2 * i + 1, 2 * j)] = z.im;
            s[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    s
}

pub fn quadrature_form(net: &PassiveNetwork) -> QuadratureNetwork {
    QuadratureNetwork {
        entries: quadrature_matrix(net.entries()),
    }
}

/// Inverse of [`quadrature_form`]: `S̃ = ½ K* S K`.
pub fn complex_form(qnet: &QuadratureNetwork) -> Result<PassiveNetwork> {
    let orthogonal = qnet.orthogonality_residual();
    let symplectic = qnet.symplectic_residual();
    if orthogonal > UNITARY_TOL || symplectic > UNITARY_TOL {
        return Err(Error::NonSymplecticInput {
            orthogonal,
            symplectic,
        });
    }
    let s = &qnet.entries;
    let m = CMatrix6::from_fn(|i, j| {
        let (q11, q12) = (s[(2 * i, 2 * j)], s[(2 * i, 2 * j + 1)]);
        let (q21, q22) = (s[(2 * i + 1, 2 * j)], s[(2 * i + 1, 2 * j + 1)]);
        C64::new(0.5 * (q11 + q22), 0.5 * (q21 - q12))
    });
    PassiveNetwork::new(m)
}

/// Coupling constants shared by both NOPAs, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NopaParams {
    /// Mirror damping rate.
    pub gamma: f64,
    /// Amplification-loss rate.
    pub kappa: f64,
    /// Pump coupling.
    pub epsilon: f64,
    /// Reference rate used to normalize the others.
    pub gamma_ref: f64,
}

impl NopaParams {
    pub fn new(gamma: f64, kappa: f64, epsilon: f64, gamma_ref: f64) -> Result<Self> {
        let p = Self {
            gamma,
            kappa,
            epsilon,
            gamma_ref,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rates given as multiples of [`DEFAULT_GAMMA_REF`].
    pub fn from_ratios(gamma: f64, kappa: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            gamma * DEFAULT_GAMMA_REF,
            kappa * DEFAULT_GAMMA_REF,
            epsilon * DEFAULT_GAMMA_REF,
            DEFAULT_GAMMA_REF,
        )
    }

    /// ε = 0.4 γ_r, γ = γ_r, κ = 0.
    pub fn reference() -> Self {
        Self::from_ratios(1.0, 0.0, 0.4).expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.kappa, self.epsilon, self.gamma_ref]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("rates must be finite".into()));
        }
        if self.gamma_ref <= 0.0 {
            return Err(Error::InvalidParams("gamma_ref must be positive".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams("gamma must be positive".into()));
        }
        if self.kappa < 0.0 || self.epsilon < 0.0 {
            return Err(Error::InvalidParams(
                "kappa and epsilon must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// `(gamma, kappa, epsilon) / gamma_ref`.
    pub fn normalized(&self) -> (f64, f64, f64) {
        (
            self.gamma / self.gamma_ref,
            self.kappa / self.gamma_ref,
            self.epsilon / self.gamma_ref,
        )
    }
}

/// Closed-loop model `ż = Az + Bξ`, `ξ_out = Cz + Dξ`, with
/// `ξ = [ξ_in (4 quadratures); ξ_loss (8)]`. All matrices are in units of
/// `rate_scale` (time measured in `1 / gamma_ref`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: RMatrix8,
    pub b: SMatrix<f64, 8, 12>,
    pub c: SMatrix<f64, 4, 8>,
    pub d: SMatrix<f64, 4, 12>,
    /// Free NOPA drift.
    pub r: RMatrix8,
    /// Feedback resolvent `(I₈ - S22)⁻¹`.
    pub x: RMatrix8,
    /// Rate (Hz) that one unit of `A` corresponds to.
    pub rate_scale: f64,
    pub(crate) quadrature: RMatrix12,
}

impl StateSpace {
    /// Assemble from an arbitrary complex 6×6 matrix; unitarity is not
    /// checked, which lets finite-difference probes leave the manifold.
    pub fn from_scattering(m: &CMatrix6, params: &NopaParams) -> Result<Self> {
        params.validate()?;
        let quadrature = quadrature_matrix(m);
        let (gamma, kappa, epsilon) = params.normalized();

        let s11 = quadrature.fixed_view::<4, 4>(0, 0).into_owned();
        let s12 = quadrature.fixed_view::<4, 8>(0, 4).into_owned();
        let s21 = quadrature.fixed_view::<8, 4>(4, 0).into_owned();
        let s22 = quadrature.fixed_view::<8, 8>(4, 4).into_owned();

        let loop_gain = RMatrix8::identity() - s22;
        let sigma_min = min_singular_value_r8(&loop_gain);
        if !(sigma_min > SINGULAR_TOL) {
            return Err(Error::IllPosedFeedback { sigma_min });
        }
        let x = loop_gain
            .lu()
            .try_inverse()
            .ok_or(Error::IllPosedFeedback { sigma_min })?;

        let r = nopa_drift(gamma, kappa, epsilon);
        let a = r - (x - RMatrix8::identity()) * gamma;

        let mut b = SMatrix::<f64, 8, 12>::zeros();
        b.fixed_view_mut::<8, 4>(0, 0)
            .copy_from(&(x * s21 * (-gamma.sqrt())));
        b.fixed_view_mut::<8, 8>(0, 4)
            .copy_from(&(RMatrix8::identity() * (-kappa.sqrt())));

        let c = s12 * x * gamma.sqrt();

        let mut d = SMatrix::<f64, 4, 12>::zeros();
        d.fixed_view_mut::<4, 4>(0, 0)
            .copy_from(&(s11 + s12 * x * s21));

        Ok(Self {
            a,
            b,
            c,
            d,
            r,
            x,
            rate_scale: params.gamma_ref,
            quadrature,
        })
    }

    pub fn s12(&self) -> SMatrix<f64, 4, 8> {
        self.quadrature.fixed_view::<4, 8>(0, 4).into_owned()
    }

    pub fn s21(&self) -> SMatrix<f64, 8, 4> {
        self.quadrature.fixed_view::<8, 4>(4, 0).into_owned()
    }
}

/// Block-diagonal drift of the two NOPAs in `z = [a1q, a1p, b1q, b1p, a2q, ...]`.
fn nopa_drift(gamma: f64, kappa: f64, epsilon: f64) -> RMatrix8 {
    let mut r = RMatrix8::identity() * (-(gamma + kappa) / 2.0);
    for base in [0, 4] {
        r[(base, base + 2)] = epsilon / 2.0;
        r[(base + 2, base)] = epsilon / 2.0;
        r[(base + 1, base + 3)] = -epsilon / 2.0;
        r[(base + 3, base + 1)] = -epsilon / 2.0;
    }
    r
}

pub fn build_state_space(net: &PassiveNetwork, params: &NopaParams) -> Result<StateSpace> {
    StateSpace::from_scattering(net.entries(), params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Largest real part among the eigenvalues of `A`, in units of `rate_scale`.
    pub max_re_eig: f64,
    pub hurwitz: bool,
    pub a_invertible: bool,
}

pub fn stability_check(ss: &StateSpace) -> StabilityReport {
    let max_re_eig =
        ss.a.complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
    let svals = ss.a.singular_values();
    let a_invertible = svals.min() > SINGULAR_TOL * svals.max();
    StabilityReport {
        max_re_eig,
        hurwitz: max_re_eig < 0.0,
        a_invertible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn phase(theta: f64) -> PassiveNetwork {
        let mut m = CMatrix6::identity();
        m[(0, 0)] = C64::from_polar(1.0, theta);
        PassiveNetwork::new(m).unwrap()
    }

    /// Literal `½ K S̃ K* + ½ K^# S̃^# Kᵀ`, for cross-checking the blockwise form.
    fn quadrature_via_k(m: &CMatrix6) -> RMatrix12 {
        let k = QuadratureMap::k();
        let conj_k = k.map(|z| z.conj());
        let half = C64::from(0.5);
        let full = k * m * k.adjoint() * half + conj_k * m.map(|z| z.conj()) * k.transpose() * half;
        assert!(full.iter().all(|z| z.im.abs() < 1e-14));
        full.map(|z| z.re)
    }

    #[test]
    fn k_star_k_is_twice_identity() {
        let k = QuadratureMap::k();
        assert_eq!(k.adjoint() * k, CMatrix6::identity() * C64::from(2.0));
    }

    #[test]
    fn identity_maps_to_identity() {
        let q = quadrature_form(&PassiveNetwork::identity());
        assert_eq!(q.entries, RMatrix12::identity());
    }

    #[test]
    fn phase_becomes_rotation_block() {
        let theta = 0.37;
        let q = quadrature_form(&phase(theta));
        let (s, c) = theta.sin_cos();
        let mut expected = RMatrix12::identity();
        expected[(0, 0)] = c;
        expected[(0, 1)] = -s;
        expected[(1, 0)] = s;
        expected[(1, 1)] = c;
        assert_abs_diff_eq!(q.entries, expected, epsilon = 1e-15);
    }

    #[test]
    fn blockwise_form_matches_k_formula() {
        for net in [phase(1.1), PassiveNetwork::local_optimum()] {
            let direct = quadrature_matrix(net.entries());
            assert_abs_diff_eq!(direct, quadrature_via_k(net.entries()), epsilon = 1e-15);
        }
    }

    #[test]
    fn cfb_is_permutation_kron_identity() {
        let q = quadrature_form(&PassiveNetwork::coherent_feedback());
        let perm = [(0, 4), (1, 3), (2, 0), (3, 5), (4, 2), (5, 1)];
        let mut expected = RMatrix12::zeros();
        for (r, c) in perm {
            expected[(2 * r, 2 * c)] = 1.0;
            expected[(2 * r + 1, 2 * c + 1)] = 1.0;
        }
        assert_eq!(q.entries, expected);
    }

    #[test]
    fn complex_form_inverts() {
        let back = complex_form(&quadrature_form(&phase(-0.8))).unwrap();
        assert!((back.entries() - phase(-0.8).entries()).norm() < 1e-15);

        let lm = PassiveNetwork::local_optimum();
        let back = complex_form(&quadrature_form(&lm)).unwrap();
        assert!((back.entries() - lm.entries()).norm() < 1e-12);

        let id = complex_form(&QuadratureNetwork {
            entries: RMatrix12::identity(),
        })
        .unwrap();
        assert_eq!(id.entries(), &CMatrix6::identity());
    }

    #[test]
    fn complex_form_rejects_non_symplectic() {
        let mut s = RMatrix12::identity();
        // Reflection of one quadrature: orthogonal but not symplectic.
        s[(0, 0)] = -1.0;
        let err = complex_form(&QuadratureNetwork { entries: s }).unwrap_err();
        assert!(matches!(err, Error::NonSymplecticInput { .. }));
    }

    #[test]
    fn non_unitary_rejected_and_near_unitary_projected() {
        let mut m = CMatrix6::identity();
        m[(0, 0)] = C64::new(1.1, 0.0);
        assert!(matches!(
            PassiveNetwork::new(m),
            Err(Error::NonUnitaryInput { .. })
        ));

        let mut m = *PassiveNetwork::coherent_feedback().entries();
        m[(0, 4)] += C64::new(1e-8, 0.0);
        let net = PassiveNetwork::new(m).unwrap();
        assert!(net.unitarity_residual() < 1e-13);
    }

    #[test]
    fn identity_network_is_ill_posed() {
        let err =
            build_state_space(&PassiveNetwork::identity(), &NopaParams::reference()).unwrap_err();
        assert!(matches!(err, Error::IllPosedFeedback { .. }));
    }

    #[test]
    fn cfb_state_space_is_hurwitz() {
        let ss = build_state_space(
            &PassiveNetwork::coherent_feedback(),
            &NopaParams::reference(),
        )
        .unwrap();
        let report = stability_check(&ss);
        assert!(report.hurwitz);
        assert!(report.a_invertible);
        assert!(report.max_re_eig < 0.0);
        assert!(
            (ss.x
                * (RMatrix8::identity()
                    - quadrature_form(&PassiveNetwork::coherent_feedback()).s22())
                - RMatrix8::identity())
            .norm()
                < 1e-10
        );
    }

    #[test]
    fn local_optimum_is_hurwitz() {
        let ss =
            build_state_space(&PassiveNetwork::local_optimum(), &NopaParams::reference()).unwrap();
        let report = stability_check(&ss);
        assert!(report.hurwitz, "max Re eig = {}", report.max_re_eig);
    }

    #[test]
    fn no_pump_drift_is_scalar() {
        let params = NopaParams::from_ratios(1.0, 0.3, 0.0).unwrap();
        let ss = build_state_space(&PassiveNetwork::coherent_feedback(), &params).unwrap();
        assert_eq!(ss.r, RMatrix8::identity() * (-(1.0 + 0.3) / 2.0));
        let expected = ss.r - (ss.x - RMatrix8::identity()) * 1.0;
        assert_abs_diff_eq!(ss.a, expected, epsilon = 1e-15);
    }

    #[test]
    fn lossless_b_has_zero_loss_columns() {
        let ss =
            build_state_space(&PassiveNetwork::local_optimum(), &NopaParams::reference()).unwrap();
        for col in 4..12 {
            for row in 0..8 {
                assert_eq!(ss.b[(row, col)], 0.0);
            }
        }
    }

    #[test]
    fn minus_identity_a_is_stable() {
        let mut ss = build_state_space(
            &PassiveNetwork::coherent_feedback(),
            &NopaParams::reference(),
        )
        .unwrap();
        ss.a = -RMatrix8::identity();
        let report = stability_check(&ss);
        assert!(report.hurwitz);
        assert_abs_diff_eq!(report.max_re_eig, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(NopaParams::from_ratios(0.0, 0.0, 0.4).is_err());
        assert!(NopaParams::from_ratios(1.0, -0.1, 0.4).is_err());
        assert!(NopaParams::from_ratios(1.0, 0.0, -0.4).is_err());
        assert!(NopaParams::new(1.0, 0.0, 0.4, 0.0).is_err());
        let p = NopaParams::reference();
        assert_eq!(p.normalized(), (1.0, 0.0, 0.4));
    }

    #[test]
    fn partitions_reassemble() {
        let q = quadrature_form(&PassiveNetwork::local_optimum());
        let mut rebuilt = RMatrix12::zeros();
        rebuilt.fixed_view_mut::<4, 4>(0, 0).copy_from(&q.s11());
        rebuilt.fixed_view_mut::<4, 8>(0, 4).copy_from(&q.s12());
        rebuilt.fixed_view_mut::<8, 4>(4, 0).copy_from(&q.s21());
        rebuilt.fixed_view_mut::<8, 8>(4, 4).copy_from(&q.s22());
        assert_eq!(rebuilt, q.entries);
    }
}
