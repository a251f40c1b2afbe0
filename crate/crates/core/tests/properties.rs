mod common;

use eprnet::linalg::unitarity_residual;
use eprnet::{
    build_state_space, complex_form, decompose, quadrature_form, quantize_sensitivity, reconstruct,
    two_mode_squeezing, NopaParams, PassiveNetwork, PermutationVector, DEFAULT_GAMMA_REF,
};
use proptest::prelude::*;

fn permutation() -> impl Strategy<Value = PermutationVector> {
    Just(vec![1usize, 2, 3, 4, 5, 6])
        .prop_shuffle()
        .prop_map(|v| PermutationVector::new(v.try_into().unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_form_is_orthogonal_symplectic(seed in any::<u64>()) {
        let net = PassiveNetwork::new(common::haar(&mut common::rng(seed))).unwrap();
        let q = quadrature_form(&net);
        prop_assert!(q.orthogonality_residual() < 1e-10);
        prop_assert!(q.symplectic_residual() < 1e-10);
        let back = complex_form(&q).unwrap();
        prop_assert!((back.entries() - net.entries()).norm() < 1e-12);
    }

    #[test]
    fn decomposition_round_trips_for_any_order(seed in any::<u64>(), perm in permutation()) {
        let net = PassiveNetwork::new(common::haar(&mut common::rng(seed))).unwrap();
        let report = decompose(&net, &perm).unwrap();
        prop_assert_eq!(report.factors.len(), 15);
        prop_assert!(report.reconstruction_error < 1e-9);
        for f in &report.factors {
            prop_assert!(f.i < f.j);
            prop_assert!((f.embed().determinant().norm() - 1.0).abs() < 1e-10);
        }
        let back = reconstruct(&report.factors, report.order).unwrap();
        prop_assert!(unitarity_residual(back.entries()) < 1e-10);
    }

    #[test]
    fn spectra_are_even_and_nonnegative(seed in any::<u64>(), w in 0.001f64..3.0, psi1 in -3.2f64..3.2, psi2 in -3.2f64..3.2) {
        let net = PassiveNetwork::new(common::haar(&mut common::rng(seed))).unwrap();
        // Ill-posed or resonant draws are simply skipped.
        if let Ok(ss) = build_state_space(&net, &NopaParams::reference()) {
            let omega = w * DEFAULT_GAMMA_REF;
            if let (Ok(a), Ok(b)) = (
                two_mode_squeezing(&ss, omega, psi1, psi2),
                two_mode_squeezing(&ss, -omega, psi1, psi2),
            ) {
                prop_assert!(a.v_plus >= 0.0 && a.v_minus >= 0.0);
                prop_assert!((a.v_total - b.v_total).abs() <= 1e-12 * a.v_total.max(1.0));
                let shifted = two_mode_squeezing(&ss, omega, psi1 + std::f64::consts::PI, psi2 + std::f64::consts::PI).unwrap();
                prop_assert!((shifted.v_total - a.v_total).abs() <= 1e-12 * a.v_total.max(1.0));
            }
        }
    }
}

#[test]
fn unlimited_digits_reproduce_unquantized_value() {
    let params = NopaParams::reference();
    let report = decompose(
        &PassiveNetwork::local_optimum(),
        &PermutationVector::default(),
    )
    .unwrap();
    let exact = quantize_sensitivity(&report, None, &params).unwrap();
    let direct = two_mode_squeezing(
        &build_state_space(&PassiveNetwork::local_optimum(), &params).unwrap(),
        0.0,
        0.0,
        0.0,
    )
    .unwrap();
    assert!((exact.db - direct.db).abs() < 1e-6);
}

#[test]
fn optimum_beats_cfb_by_about_47_5_db() {
    let params = NopaParams::reference();
    let db = |net: PassiveNetwork| {
        two_mode_squeezing(&build_state_space(&net, &params).unwrap(), 0.0, 0.0, 0.0)
            .unwrap()
            .db
    };
    let gap = db(PassiveNetwork::coherent_feedback()) - db(PassiveNetwork::local_optimum());
    assert!((gap - 47.551).abs() < 0.01, "gap = {gap}");
}

#[test]
fn rate_scale_does_not_change_db() {
    let net = PassiveNetwork::coherent_feedback();
    let a = NopaParams::from_ratios(1.0, 0.1, 0.4).unwrap();
    let b = NopaParams::new(2.0, 0.2, 0.8, 2.0).unwrap();
    let va = two_mode_squeezing(&build_state_space(&net, &a).unwrap(), 0.0, 0.0, 0.0).unwrap();
    let vb = two_mode_squeezing(&build_state_space(&net, &b).unwrap(), 0.0, 0.0, 0.0).unwrap();
    assert!((va.db - vb.db).abs() < 1e-12);
}
