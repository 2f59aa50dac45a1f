use gausslearn_core::bounds::{self, trace_bracket};
use gausslearn_core::estimation::{empirical_estimates, project_covariance, project_hamiltonian};
use gausslearn_core::gaussian::{self, GaussianState};
use gausslearn_core::graph::NeighborhoodStructure;
use gausslearn_core::learning::kernel_matrix;
use gausslearn_core::linalg::{max_abs, max_abs_c, symmetrize, RMat, RVec};
use gausslearn_core::locality::local_inverse;
use gausslearn_core::sampling::{heterodyne_sample, SampleBatch};
use gausslearn_core::symplectic::{omega, random_form, williamson, Tolerances, WilliamsonForm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn form(m: usize, seed: u64) -> WilliamsonForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_form(m, 2.0, 0.3, 1.5, &mut rng)
}

fn state_of(f: &WilliamsonForm, shift: f64) -> GaussianState {
    let v = gaussian::v_from_form(f);
    let t = RVec::from_fn(v.nrows(), |k, _| shift * (k as f64 + 1.0).sin());
    GaussianState { t, v }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn williamson_recovers_invariants(m in 1usize..5, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let f = form(m, seed);
        let h = symmetrize(&f.reconstruct());
        let w = williamson(&h, &tol).unwrap();
        let om = omega(m);
        prop_assert!(max_abs(&(&w.s * &om * w.s.transpose() - &om)) <= 1e-9);
        prop_assert!(max_abs(&(w.reconstruct() - &h)) <= 1e-8 * (1.0 + max_abs(&h)));
        for (a, b) in w.d.iter().zip(&f.d) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b));
        }
    }

    #[test]
    fn hamiltonian_covariance_round_trip(m in 1usize..5, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let h = symmetrize(&form(m, seed).reconstruct());
        let v = gaussian::v_from_h(&h, &tol).unwrap();
        let back = gaussian::h_from_v(&v, &tol).unwrap();
        prop_assert!(max_abs(&(back - &h)) <= 1e-8 * (1.0 + max_abs(&h)));
    }

    #[test]
    fn estimates_shift_with_displacement(seed in any::<u64>(), c in -3.0f64..3.0) {
        let f = form(2, seed);
        let st = state_of(&f, 0.5);
        let batch = heterodyne_sample(&st, 200, seed, 0).unwrap();
        let shifted = SampleBatch { data: batch.data.map(|x| x + c), ..batch.clone() };
        let a = empirical_estimates(&batch).unwrap();
        let b = empirical_estimates(&shifted).unwrap();
        prop_assert!((b.t_hat - a.t_hat).map(|x| x - c).amax() <= 1e-9 * (1.0 + c.abs()));
        prop_assert!(max_abs(&(b.v_hat_raw - a.v_hat_raw)) <= 1e-9 * (1.0 + c * c));
    }

    #[test]
    fn covariance_projection_is_idempotent(seed in any::<u64>(), eps in 0.01f64..0.3) {
        let tol = Tolerances::default();
        let v = gaussian::v_from_form(&form(2, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let noise = symmetrize(&RMat::from_fn(4, 4, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0) * eps));
        let p = project_covariance(&(&v + noise), eps, &tol).unwrap();
        let q = project_covariance(&p.value, eps, &tol).unwrap();
        prop_assert_eq!(q.iterations, 0);
        prop_assert_eq!(q.value, p.value);
    }

    #[test]
    fn hamiltonian_projection_is_idempotent(seed in any::<u64>(), eps in 0.01f64..0.3) {
        let tol = Tolerances::default();
        let h = symmetrize(&form(2, seed).reconstruct());
        let p = project_hamiltonian(&h, eps, 0.01, None, &tol).unwrap();
        prop_assert_eq!(p.iterations, 0);
        prop_assert_eq!(p.value, h);
    }

    #[test]
    fn bracket_is_symmetric_and_nonnegative(m in 1usize..4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let tol = Tolerances::default();
        let (fa, fb) = (form(m, s1), form(m, s2));
        let (a, b) = (state_of(&fa, 0.3), state_of(&fb, -0.2));
        let (ha, hb) = (symmetrize(&fa.reconstruct()), symmetrize(&fb.reconstruct()));
        let ab = trace_bracket(&a, &ha, &b, &hb).unwrap();
        let ba = trace_bracket(&b, &hb, &a, &ha).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab.abs()));
        prop_assert!(ab >= -1e-9 * (1.0 + ab.abs()));
        let d = gaussian::relative_entropy(&a, &ha, &b, &hb, &tol).unwrap() + gaussian::relative_entropy(&b, &hb, &a, &ha, &tol).unwrap();
        prop_assert!((ab - 2.0 * d).abs() <= 1e-8 * (1.0 + ab.abs()));
    }

    #[test]
    fn continuity_certificates_hold(m in 1usize..4, seed in any::<u64>(), frac in 0.01f64..1.0) {
        let tol = Tolerances::default();
        let f = form(m, seed);
        let v1 = gaussian::v_from_form(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let dir = symmetrize(&RMat::from_fn(2 * m, 2 * m, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)));
        let scale = frac * bounds::hv_radius(f.s_norm(), f.d_max) / gausslearn_core::linalg::op_norm(&dir).max(1e-12);
        let v2 = &v1 + dir * scale;
        let cert = bounds::bound_h_from_v(&v1, &v2, &f, &tol).unwrap();
        prop_assert!(!cert.is_violation(), "{:?}", cert);
    }

    #[test]
    fn full_neighborhood_inverse_is_exact(m in 1usize..4, seed in any::<u64>()) {
        let v = gaussian::v_from_form(&form(m, seed));
        let n = kernel_matrix(&v);
        let li = local_inverse(&n, &NeighborhoodStructure::full(m), 1e-12).unwrap();
        let exact = n.clone().try_inverse().unwrap();
        prop_assert!(max_abs_c(&(li - &exact)) <= 1e-9 * (1.0 + max_abs_c(&exact)));
    }
}
