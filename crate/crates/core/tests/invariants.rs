mod common;

use common::{load, v};
use homfinsler::curvature::{flag_curvature_go, riemannian_sectional, u_map};
use homfinsler::rigidity::classify_solvable_negative;
use homfinsler::{models, ReductiveDecomposition};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn vec_in(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim).prop_map(DVector::from_vec)
}

fn nonzero_scalar() -> impl Strategy<Value = f64> {
    prop_oneof![-5.0f64..-0.2, 0.2f64..5.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn u_map_is_symmetric_and_bilinear(
        anchor in vec_in(4),
        u in vec_in(4),
        v1 in vec_in(4),
        v2 in vec_in(4),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        prop_assume!(anchor.norm() > 1e-2);
        let s = load("saddle4");
        let (d, n) = (&s.decomposition, &s.norm);
        let uv = u_map(d, n, &anchor, &u, &v1).unwrap();
        let vu = u_map(d, n, &anchor, &v1, &u).unwrap();
        prop_assert!((&uv - &vu).amax() <= 1e-12 * (1.0 + uv.amax()));

        let combo = &v1 * a + &v2 * b;
        let lhs = u_map(d, n, &anchor, &u, &combo).unwrap();
        let rhs = u_map(d, n, &anchor, &u, &v1).unwrap() * a + u_map(d, n, &anchor, &u, &v2).unwrap() * b;
        prop_assert!((&lhs - &rhs).amax() <= 1e-10 * (1.0 + rhs.amax()));
    }

    #[test]
    fn flag_curvature_is_scale_invariant_abelian(
        u in vec_in(2),
        v0 in vec_in(2),
        lambda in nonzero_scalar(),
        mu in nonzero_scalar(),
        kappa in -3.0f64..3.0,
    ) {
        let s = load("abelian2");
        let (d, n) = (&s.decomposition, &s.norm);
        prop_assume!(u.norm() > 1e-2 && v0.norm() > 1e-2);
        prop_assume!((u[0] * v0[1] - u[1] * v0[0]).abs() > 1e-2 * u.norm() * v0.norm());
        let base = flag_curvature_go(d, n, &u, &v0, 1e-8).unwrap().curvature;
        let moved = flag_curvature_go(d, n, &(&u * lambda.abs()), &(&v0 * mu + &u * kappa), 1e-8).unwrap().curvature;
        prop_assert!((base - moved).abs() <= 1e-10);
    }

    #[test]
    fn flag_curvature_is_scale_invariant_rotation(
        lambda in 0.2f64..5.0,
        mu in nonzero_scalar(),
        kappa in -3.0f64..3.0,
        axis in 0usize..2,
    ) {
        let s = load("rotation21");
        let (d, n) = (&s.decomposition, &s.norm);
        let (ui, vi) = if axis == 0 { (1, 2) } else { (2, 1) };
        let e = |i: usize| { let mut x = DVector::zeros(3); x[i] = 1.0; x };
        let base = flag_curvature_go(d, n, &e(ui), &e(vi), 1e-8).unwrap().curvature;
        let moved = flag_curvature_go(d, n, &(e(ui) * lambda), &(e(vi) * mu + e(ui) * kappa), 1e-8)
            .unwrap()
            .curvature;
        prop_assert!((base - moved).abs() <= 1e-10);
    }

    #[test]
    fn sectional_depends_only_on_plane(
        x in vec_in(3),
        y in vec_in(3),
        m in prop::collection::vec(-2.0f64..2.0, 4),
        which in 0usize..3,
    ) {
        let name = ["heisenberg", "hyperbolic3", "rotation21"][which];
        let s = load(name);
        let (d, n) = (&s.decomposition, &s.norm);
        prop_assume!(x.norm() > 1e-2 && y.norm() > 1e-2);
        prop_assume!(x.cross(&y).norm() > 1e-2 * x.norm() * y.norm());
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let k1 = riemannian_sectional(d, n, &x, &y, 1e-8).unwrap();
        let x2 = &x * m[0] + &y * m[1];
        let y2 = &x * m[2] + &y * m[3];
        let k2 = riemannian_sectional(d, n, &x2, &y2, 1e-8).unwrap();
        prop_assert!((k1 - k2).abs() <= 1e-8 * (1.0 + k1.abs()), "{name}: {k1} vs {k2}");
    }

    #[test]
    fn normalized_spectrum_is_basis_invariant(
        p in prop::collection::vec(-0.8f64..0.8, 9),
        which in 0usize..3,
    ) {
        let alg = [models::diagonal(1.0, 2.0), models::diagonal(1.0, -1.0), models::rotation(2.0, 1.0)][which].clone();
        let p = DMatrix::from_fn(3, 3, |i, j| p[3 * i + j] + if i == j { 1.0 } else { 0.0 });
        let sv = p.singular_values();
        prop_assume!(sv.min() > 0.2 * sv.max());
        let reference = classify_solvable_negative(&alg, 1e-9);
        let moved = classify_solvable_negative(&alg.change_basis(&p).unwrap(), 1e-9);
        prop_assert_eq!(reference.admits_negative_metric, moved.admits_negative_metric);
        prop_assert_eq!(reference.failure_reason, moved.failure_reason);
        let (a, b) = (reference.normalized_eigenvalues(), moved.normalized_eigenvalues());
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn ad_on_derived_algebra_ignores_derived_shift(
        z in vec_in(2),
        t in 0.2f64..3.0,
        which in 0usize..3,
    ) {
        let alg = [models::diagonal(1.0, -1.0), models::rotation(2.0, 1.0), models::hyperbolic(3)][which].clone();
        let derived = alg.derived_series(1e-9).derived_algebra().clone();
        let u = v(&[t, 0.0, 0.0]);
        let shifted = &u + &derived * &z;
        let a = alg.ad_restricted(&u, &derived, 1e-9).unwrap().matrix;
        let b = alg.ad_restricted(&shifted, &derived, 1e-9).unwrap().matrix;
        prop_assert!((&a - &b).amax() <= 1e-10 * (1.0 + a.amax()));
    }
}

#[test]
fn trivial_isotropy_has_empty_h() {
    let d = ReductiveDecomposition::trivial(models::heisenberg());
    assert_eq!(d.h_dim(), 0);
    assert_eq!(d.m_dim(), 3);
}
