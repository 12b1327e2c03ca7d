use birkhoff::diagnostics::symplectic_residual;
use birkhoff::oscillator::{scheme_first_order, scheme_second_order, DampedOscillator};
use birkhoff::selfadjoint::{check_self_adjointness, reconstruct_f, sample_box, DEFAULT_QUAD_NODES};
use birkhoff::{sigma, vector_field, AlphaTransform, Matrix, PhasePoint, Vector};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = Vector> {
    prop::array::uniform2(-3.0..3.0f64).prop_map(|a| Vector::from_row_slice(&a))
}

fn matrix() -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(-2.0..2.0f64).prop_map(|a| Matrix::from_row_slice(2, 2, &a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn alpha_inverse_undoes_forward(nu in 0.0..1.5f64, zh in state(), z in state(), t in -1.0..2.0f64, t0 in -1.0..2.0f64) {
        let alpha = DampedOscillator::new(nu).unwrap().alpha();
        let (wh, w) = alpha.forward(&zh, &z, t, t0).unwrap();
        let (zh2, z2) = alpha.inverse(&wh, &w, t, t0).unwrap();
        prop_assert!((zh2 - &zh).amax() < 1e-12 * zh.amax().max(1.0));
        prop_assert!((z2 - &z).amax() < 1e-12 * z.amax().max(1.0));
    }

    #[test]
    fn sigma_round_trip(nu in 0.0..1.5f64, zh in state(), z in state(), t0 in -1.0..2.0f64, tau in 0.01..0.5f64, m in matrix()) {
        let alpha = DampedOscillator::new(nu).unwrap().alpha();
        let fwd = alpha.blocks(&zh, &z, t0 + tau, t0).unwrap();
        let (wh, w) = alpha.forward(&zh, &z, t0 + tau, t0).unwrap();
        let inv = alpha.inverse_blocks(&wh, &w, t0 + tau, t0).unwrap();
        if let Ok(n) = sigma(&fwd, &m) {
            if let Ok(back) = sigma(&inv, &n) {
                let scale = m.amax().max(1.0) * n.amax().max(1.0);
                prop_assert!((back - &m).amax() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn sigma_of_k_symplectic_matrix_is_symmetric(nu in 0.0..1.5f64, tau in 0.001..0.5f64, t0 in -1.0..2.0f64, z in state()) {
        let alpha = DampedOscillator::new(nu).unwrap().alpha();
        for a in [scheme_first_order(nu, tau), scheme_second_order(nu, tau)] {
            let zh = &a * &z;
            let n = sigma(&alpha.blocks(&zh, &z, t0 + tau, t0).unwrap(), &a).unwrap();
            prop_assert!((&n - n.transpose()).amax() < 1e-10 * n.amax().max(1.0));
        }
    }

    #[test]
    fn closed_forms_are_k_symplectic_anywhere(nu in 0.0..1.5f64, tau in 0.001..0.5f64, t0 in -2.0..2.0f64, z in state()) {
        let sys = DampedOscillator::new(nu).unwrap().system();
        for a in [scheme_first_order(nu, tau), scheme_second_order(nu, tau)] {
            let res = symplectic_residual(&sys, &a, &z, t0, &(&a * &z), t0 + tau).unwrap();
            prop_assert!(res < 1e-12 * (nu * (t0 + tau)).exp().max(1.0));
        }
    }

    #[test]
    fn oscillator_field_is_time_independent(nu in 0.0..1.5f64, z in state(), t in -2.0..3.0f64) {
        let sys = DampedOscillator::new(nu).unwrap().system();
        let v = vector_field(&sys, &PhasePoint::new(z.clone(), t)).unwrap();
        let expected = Vector::from_vec(vec![z[1], -z[0] - nu * z[1]]);
        prop_assert!((v - expected).amax() < 1e-12 * z.amax().max(1.0));
    }

    #[test]
    fn reconstructed_f_matches_representation(nu in 0.0..1.5f64, z in state(), t in -1.0..2.0f64) {
        let osc = DampedOscillator::new(nu).unwrap();
        let p = PhasePoint::new(z.clone(), t);
        let f = reconstruct_f(&osc.raw(0.0), &p, DEFAULT_QUAD_NODES).unwrap();
        let exact = osc.system().f(&z, t).unwrap();
        prop_assert!((f - &exact).amax() < 1e-12 * exact.amax().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn looser_tolerance_never_flips_a_pass(perturb in -0.2..0.2f64, tol in 1e-9..1e-1f64, seed in any::<u64>()) {
        let raw = DampedOscillator::new(0.5).unwrap().raw(perturb);
        let report = check_self_adjointness(&raw, &sample_box(1, 8, 2.0, (0.0, 1.0), seed), tol).unwrap();
        if report.passes_at(tol) {
            prop_assert!(report.passes_at(2.0 * tol));
        }
        prop_assert_eq!(report.passed, report.passes_at(tol));
    }
}
