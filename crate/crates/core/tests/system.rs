mod common;

use common::*;
use planar_lcs::{
    canonicalize, check_larc, classify, equilibrium, CanonicalShape, Error, Mat2, Sign, SystemSpec, Vec2, ZeroPosition,
};
use proptest::prelude::*;

#[test]
fn larc_examples() {
    assert_eq!(check_larc(&spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.)), -1.0);
    assert_eq!(check_larc(&spec([[1., 0.], [0., -1.]], [1., 0.], -1., 1.)), 0.0);
    assert_eq!(check_larc(&spec([[1., 0.], [0., -1.]], [1., 1.], -1., 1.)), -2.0);
}

#[test]
fn classify_examples() {
    let t = classify(&spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.)).unwrap();
    assert_eq!(
        (t.det_sign, t.tr_sign, t.zero_position),
        (Sign::Zero, Sign::Zero, ZeroPosition::Interior)
    );

    let t = classify(&spec([[1., 0.], [0., -1.]], [1., 1.], 0., 2.)).unwrap();
    assert_eq!(
        (t.det_sign, t.tr_sign, t.zero_position),
        (Sign::Negative, Sign::Zero, ZeroPosition::Boundary)
    );

    let t = classify(&spec([[2., 0.], [0., 1.]], [1., 1.], 0., 2.)).unwrap();
    assert_eq!(
        (t.det_sign, t.tr_sign, t.zero_position),
        (Sign::Positive, Sign::Positive, ZeroPosition::Boundary)
    );

    let t = classify(&spec([[-1., 0.], [0., -2.]], [1., 1.], 1., 2.)).unwrap();
    assert_eq!(t.zero_position, ZeroPosition::Outside);

    assert!(matches!(
        classify(&spec([[1., 0.], [0., -1.]], [1., 0.], -1., 1.)),
        Err(Error::LarcViolated { .. })
    ));
    assert!(matches!(
        classify(&spec([[0., 1.], [-1., 0.]], [1., 0.], -1., 1.)),
        Err(Error::ComplexEigenvalues { .. })
    ));
}

#[test]
fn spec_rejects_bad_input() {
    assert!(SystemSpec::new(Mat2::IDENTITY, Vec2::ZERO, -1.0, 1.0).is_err());
    assert!(SystemSpec::new(Mat2::IDENTITY, Vec2::new(1.0, 0.0), 1.0, 1.0).is_err());
    assert!(SystemSpec::new(Mat2::new(f64::NAN, 0.0, 0.0, 1.0), Vec2::new(1.0, 0.0), -1.0, 1.0).is_err());
}

#[test]
fn canonicalize_examples() {
    let c = canonicalize(&spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.)).unwrap();
    assert_eq!(c.basis, Mat2::IDENTITY);
    assert_eq!(c.zeta_can, Vec2::new(0.0, 1.0));
    assert_eq!(c.shape, CanonicalShape::Nilpotent);

    let c = canonicalize(&spec([[-1., 0.], [0., 0.]], [1., 1.], -1., 1.)).unwrap();
    assert!((c.a_can - Mat2::diag(-1.0, 0.0)).norm() < 1e-15);
    assert!(c.zeta_can.distance(Vec2::new(1.0, 1.0)) < 1e-15);

    let mut rng = rng(41);
    for _ in 0..100 {
        let p = basis(&mut rng);
        let a = p * Mat2::diag(1.0, -1.0) * p.inverse().unwrap();
        let z = Vec2::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0));
        let Ok(s) = SystemSpec::new(a, z, -1.0, 1.0) else {
            continue;
        };
        if classify(&s).is_err() {
            continue;
        }
        let c = canonicalize(&s).unwrap();
        assert!((c.a_can - Mat2::diag(1.0, -1.0)).norm() <= 1e-10);
    }
}

#[test]
fn equilibrium_examples() {
    let v = equilibrium(&spec([[1., 0.], [0., -1.]], [1., 1.], -1., 1.), 1.0).unwrap();
    assert!(v.distance(Vec2::new(-1.0, 1.0)) < 1e-15);
    let v = equilibrium(&spec([[-1., 1.], [0., -1.]], [0., 1.], -1., 1.), 1.0).unwrap();
    assert!(v.distance(Vec2::new(1.0, 1.0)) < 1e-15);
    assert_eq!(
        equilibrium(&spec([[2., 1.], [0., 3.]], [1., 1.], -1., 1.), 0.0).unwrap(),
        Vec2::ZERO
    );
    assert!(matches!(
        equilibrium(&spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.), 0.5),
        Err(Error::SingularMatrix)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larc_vanishes_on_eigenvectors(seed: u64) {
        let mut rng = rng(seed);
        let p = basis(&mut rng);
        let a = p * Mat2::diag(uniform(&mut rng, -2.0, 2.0), uniform(&mut rng, -2.0, 2.0)) * p.inverse().unwrap();
        for j in 0..2 {
            let s = SystemSpec::new(a, p.col(j), -1.0, 1.0).unwrap();
            let tol = 1e-12 * a.norm().max(1.0) * p.col(j).dot(p.col(j));
            prop_assert!(check_larc(&s).abs() <= tol);
        }
    }

    #[test]
    fn classification_is_basis_invariant(seed: u64, k in 0usize..5) {
        let mut rng = rng(seed);
        let s = any_case(&mut rng, k);
        let q = basis(&mut rng);
        let qi = q.inverse().unwrap();
        let moved = SystemSpec::new(qi * s.a * q, qi * s.zeta, s.omega.min, s.omega.max).unwrap();
        prop_assert_eq!(classify(&moved).unwrap(), classify(&s).unwrap());
    }

    #[test]
    fn canonical_template_and_round_trip(seed: u64, k in 0usize..5) {
        let mut rng = rng(seed);
        let s = any_case(&mut rng, k);
        let c = canonicalize(&s).unwrap();
        let conj = c.basis_inv * s.a * c.basis;
        prop_assert!((conj - c.a_can).norm() <= 1e-10 * s.a.norm());
        prop_assert!(c.a_can == c.shape.matrix());
        match c.shape {
            CanonicalShape::Nilpotent => prop_assert_eq!(c.zeta_can, Vec2::new(0.0, 1.0)),
            CanonicalShape::Diagonal { first, second } if first * second < 0.0 => {
                prop_assert!(second < 0.0 && first > 0.0);
                prop_assert!(c.zeta_can.x != 0.0 && c.zeta_can.y != 0.0);
            }
            CanonicalShape::RankOne { .. } => prop_assert!(c.zeta_can.x != 0.0 && c.zeta_can.y != 0.0),
            _ => {}
        }
        for _ in 0..16 {
            let v = point(&mut rng, 10.0);
            prop_assert!(c.from_canonical(c.to_canonical(v)).distance(v) <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn equilibrium_residual(seed: u64) {
        let mut rng = rng(seed);
        for k in 0..16 {
            // Nonsingular cases only.
            let s = any_case(&mut rng, [2, 3, 4][k % 3]);
            let u = uniform(&mut rng, s.omega.min, s.omega.max);
            let v = equilibrium(&s, u).unwrap();
            let residual = (s.a * v + s.zeta.scale(u)).norm();
            prop_assert!(residual <= 1e-12 * (1.0 + u.abs() * s.zeta.norm()), "{}", residual);
        }
    }
}
