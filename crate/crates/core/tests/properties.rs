use std::sync::Arc;

use faer::c64;
use proptest::prelude::*;
use tenfold::clifford;
use tenfold::invariants;
use tenfold::lattice::{self, BoundaryCondition, DisorderConfig, Geometry};
use tenfold::linalg::{self, dist, CMat};
use tenfold::structured::{self, NambuContext, RealStructure, StructuredMatrix};

fn cmat(n: usize, vals: &[(f64, f64)]) -> CMat {
    faer::Mat::from_fn(n, n, |i, j| {
        let (a, b) = vals[i * n + j];
        c64::new(a, b)
    })
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
}

fn structures() -> impl Strategy<Value = Arc<RealStructure>> {
    prop_oneof![
        Just(Arc::new(RealStructure::nambu(2))),
        Just(Arc::new(RealStructure::quaternion(2))),
        Just(Arc::new(RealStructure::trivial(4))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_is_antilinear_involution(ctx in structures(), v in entries(4), z in (-2.0f64..2.0, -2.0f64..2.0)) {
        let l = StructuredMatrix::new(cmat(4, &v), ctx).unwrap();
        let back = structured::conjugate(&structured::conjugate(&l).unwrap()).unwrap();
        prop_assert!(dist(&back.m, &l.m) < 1e-12);
        let z = c64::new(z.0, z.1);
        let lz = l.with(linalg::scale(&l.m, z));
        let lhs = structured::conjugate(&lz).unwrap().m;
        let rhs = linalg::scale(&structured::conjugate(&l).unwrap().m, z.conj());
        prop_assert!(dist(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn car_transpose_reverses_products(ctx in structures(), a in entries(4), b in entries(4)) {
        let a = StructuredMatrix::new(cmat(4, &a), ctx.clone()).unwrap();
        let b = StructuredMatrix::new(cmat(4, &b), ctx).unwrap();
        let ct = |x: &StructuredMatrix| structured::car_transpose(x).unwrap();
        prop_assert!(dist(&ct(&ct(&a)).m, &a.m) < 1e-12);
        prop_assert!(dist(&ct(&a.mul(&b)).m, &ct(&b).mul(&ct(&a)).m) < 1e-12);
    }

    #[test]
    fn sign_is_idempotent_and_squares_to_one(v in entries(6)) {
        let m = cmat(6, &v);
        let h = linalg::hermitian_part(&(&m + linalg::adjoint(&m)));
        prop_assume!(structured::min_abs_eig(&h) > 1e-3);
        let s = structured::sign_matrix(&h, 1e-6).unwrap();
        prop_assert!(dist(&(&s * &s), &linalg::eye(6)) < 1e-9);
        let ss = structured::sign_matrix(&s, 1e-6).unwrap();
        prop_assert!(dist(&ss, &s) < 1e-9);
    }

    #[test]
    fn flattened_bdg_is_iqpv(h in entries(3), d in entries(3)) {
        let nc = NambuContext::new(3);
        let h = cmat(3, &h);
        let h = linalg::hermitian_part(&(&h + linalg::adjoint(&h)));
        let d = cmat(3, &d);
        let delta = &d - linalg::transpose(&d);
        let big = nc.bdg(&h, &delta);
        prop_assume!(structured::min_abs_eig(&big) > 1e-3);
        let sh = nc.structured(big).unwrap();
        let j = lattice::flatten(&sh, 1e-6).unwrap();
        let p = structured::check_predicates_tol(&j, 1e-9);
        prop_assert!(p.is_real && p.is_skew && p.is_unitary, "{p:?}");
        prop_assert!(dist(&(&j.m * &j.m), &linalg::scale_re(&linalg::eye(6), -1.0)) < 1e-9);
    }

    #[test]
    fn covariance_is_bit_exact(seed in 0u64..10_000, x in -7i64..7, model in 0usize..3) {
        let m = [lattice::kitaev_chain(1.0, 0.8, 0.5), lattice::ssh(1.0, 2.0), lattice::ssh(0.7, 1.1).with_spin()][model].clone();
        let dims = [9usize];
        let dis = DisorderConfig::sample(&dims, m.disorder_dim(), 0.4, seed);
        let geom = Geometry::torus(&dims);
        let h = lattice::assemble_geom(&m, &dis, &geom);
        let lhs = lattice::translate_operator(&h, &geom, m.dim_w(), &[x]);
        let rhs = lattice::assemble_geom(&m, &lattice::translate_config(&dis, &[x]), &geom);
        prop_assert!(lattice::bit_equal(&lhs, &rhs));
    }

    #[test]
    fn covariance_2d(seed in 0u64..10_000, x in -4i64..4, y in -4i64..4) {
        let m = lattice::qwz(1.3);
        let dims = [4usize, 5];
        let dis = DisorderConfig::sample(&dims, m.disorder_dim(), 0.4, seed);
        let geom = Geometry::torus(&dims);
        let h = lattice::assemble_geom(&m, &dis, &geom);
        let lhs = lattice::translate_operator(&h, &geom, m.dim_w(), &[x, y]);
        let rhs = lattice::assemble_geom(&m, &lattice::translate_config(&dis, &[x, y]), &geom);
        prop_assert!(lattice::bit_equal(&lhs, &rhs));
    }

    #[test]
    fn disorder_is_seed_deterministic(seed in any::<u64>()) {
        let a = DisorderConfig::sample(&[7, 3], 2, 0.5, seed);
        let b = DisorderConfig::sample(&[7, 3], 2, 0.5, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.omega.iter().all(|w| (-1.0..=1.0).contains(w)));
    }

    #[test]
    fn pfaffian_squares_to_determinant(v in entries(6)) {
        let m = cmat(6, &v);
        let a = &m - linalg::transpose(&m);
        let pf = invariants::pfaffian(&a);
        let det = a.determinant();
        prop_assert!((pf * pf - det).norm() < 1e-9 * (1.0 + det.norm()));
        let oracle = invariants::pfaffian_expansion(&a);
        prop_assert!((pf - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
    }

    #[test]
    fn standard_reps_verify(r in 0usize..5, s in 0usize..5) {
        prop_assume!(r + s >= 1);
        let rep = clifford::standard_rep(r, s).unwrap();
        let rep_report = clifford::verify_rep(&rep);
        prop_assert!(rep_report.pass, "{rep_report:?}");
    }

    #[test]
    fn clean_hamiltonian_is_translation_invariant(x in -5i64..5) {
        let m = lattice::kitaev_chain(1.0, 0.6, 1.1);
        let dis = DisorderConfig::clean(&[8], 1);
        let h = lattice::assemble(&m, &dis, BoundaryCondition::PeriodicTorus);
        let geom = Geometry::torus(&[8]);
        prop_assert!(lattice::bit_equal(&lattice::translate_operator(&h.m, &geom, 2, &[x]), &h.m));
    }
}
