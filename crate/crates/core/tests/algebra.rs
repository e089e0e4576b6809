mod common;

use common::*;
use planar_lcs::{adapted_norm, eig2, expm2, rotate_quarter, EigenKind, Error, Mat2, Vec2};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Random matrix with real spectrum in [-r, r]; one in four is a Jordan block.
fn real_matrix(rng: &mut ChaCha8Rng, r: f64) -> Mat2 {
    let p = basis(rng);
    let l1 = uniform(rng, -r, r);
    let template = if uniform(rng, 0.0, 1.0) < 0.25 {
        Mat2::new(l1, uniform(rng, 0.3, 1.5), 0.0, l1)
    } else {
        Mat2::diag(l1, uniform(rng, -r, r))
    };
    p * template * p.inverse().unwrap()
}

fn stable_matrix(rng: &mut ChaCha8Rng) -> Mat2 {
    let p = basis(rng);
    let l1 = -uniform(rng, 0.1, 2.0);
    let template = if uniform(rng, 0.0, 1.0) < 0.25 {
        Mat2::new(l1, uniform(rng, 0.3, 1.5), 0.0, l1)
    } else {
        Mat2::diag(l1, -uniform(rng, 0.1, 2.0))
    };
    p * template * p.inverse().unwrap()
}

/// Taylor series on A t / 2^k followed by k squarings.
fn expm_series(a: &Mat2, t: f64) -> Mat2 {
    let k = 12;
    let m = a.scale(t / f64::from(1 << k));
    let mut term = Mat2::IDENTITY;
    let mut sum = Mat2::IDENTITY;
    for n in 1..30 {
        term = term * m;
        term = term.scale(1.0 / n as f64);
        sum = sum + term;
    }
    for _ in 0..k {
        sum = sum * sum;
    }
    sum
}

#[test]
fn quarter_turn_examples() {
    assert_eq!(rotate_quarter(Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
    assert_eq!(rotate_quarter(Vec2::new(0.0, 1.0)), Vec2::new(-1.0, 0.0));
    assert_eq!(rotate_quarter(Vec2::new(3.0, -2.0)), Vec2::new(2.0, 3.0));
}

#[test]
fn eigen_examples() {
    let e = eig2(&Mat2::diag(1.0, -1.0)).unwrap();
    assert_eq!(e.kind, EigenKind::DistinctReal);
    assert_eq!(e.eigenvalues, [1.0, -1.0]);
    assert!((e.reconstruct() - Mat2::diag(1.0, -1.0)).norm() < 1e-15);
    // Columns stay on the coordinate axes.
    assert_eq!(e.basis.a21, 0.0);
    assert_eq!(e.basis.a12, 0.0);

    let j = eig2(&Mat2::new(-1.0, 1.0, 0.0, -1.0)).unwrap();
    assert_eq!(j.kind, EigenKind::Jordan);
    assert_eq!(j.eigenvalues, [-1.0, -1.0]);

    let scalar = eig2(&Mat2::diag(2.0, 2.0)).unwrap();
    assert_eq!(scalar.kind, EigenKind::RepeatedDiagonalizable);

    assert!(matches!(
        eig2(&Mat2::new(0.0, 1.0, -1.0, 0.0)),
        Err(Error::ComplexEigenvalues { .. })
    ));
}

#[test]
fn exponential_examples() {
    let d = expm2(&Mat2::diag(1.0, -1.0), 2f64.ln()).unwrap();
    assert!((d - Mat2::diag(2.0, 0.5)).norm() < 1e-14);

    for t in [-3.0, 0.5, 7.0] {
        let n = expm2(&Mat2::new(0.0, 1.0, 0.0, 0.0), t).unwrap();
        assert_eq!(n, Mat2::new(1.0, t, 0.0, 1.0));
    }

    let a = Mat2::new(-1.0, 1.0, 0.0, -1.0);
    let closed = expm2(&a, 1.0).unwrap();
    let oracle = expm_series(&a, 1.0);
    assert!((closed - oracle).norm() < 1e-12, "{closed:?} vs {oracle:?}");
    let e = (-1f64).exp();
    assert!((closed - Mat2::new(e, e, 0.0, e)).norm() < 1e-15);
    assert!((closed.a11 - 0.36788).abs() < 1e-5);
}

#[test]
fn exponential_matches_series_oracle() {
    let mut rng = rng(31);
    for _ in 0..300 {
        let a = real_matrix(&mut rng, 3.0);
        let t = uniform(&mut rng, -2.0, 2.0);
        let closed = expm2(&a, t).unwrap();
        let oracle = expm_series(&a, t);
        assert!((closed - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()), "{a:?} t={t}");
    }
}

#[test]
fn adapted_norm_examples() {
    let n = adapted_norm(&Mat2::diag(-1.0, -2.0)).unwrap();
    assert_eq!(n.delta, 1.0);
    assert_eq!(n.transform, Mat2::IDENTITY);

    let j = adapted_norm(&Mat2::new(-1.0, 1.0, 0.0, -1.0)).unwrap();
    assert_eq!(j.delta, 0.5);
    assert!((j.transform - Mat2::diag(1.0, 2.0)).norm() < 1e-15);

    assert!(matches!(
        adapted_norm(&Mat2::diag(1.0, -1.0)),
        Err(Error::NotStable { .. })
    ));
}

#[test]
fn jordan_norm_contracts_on_samples() {
    let a = Mat2::new(-1.0, 1.0, 0.0, -1.0);
    let n = adapted_norm(&a).unwrap();
    let mut rng = rng(32);
    for _ in 0..1000 {
        let t = uniform(&mut rng, 0.0, 10.0);
        let v = point(&mut rng, 5.0);
        let lhs = n.norm(expm2(&a, t).unwrap() * v);
        assert!(lhs <= (-n.delta * t).exp() * n.norm(v) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quarter_turn_twice_negates(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let v = Vec2::new(x, y);
        prop_assert_eq!(rotate_quarter(rotate_quarter(v)), -v);
    }

    #[test]
    fn exponential_semigroup(seed: u64) {
        let mut rng = rng(seed);
        // Spectrum in [-1, 1] so the factors of the product stay near its size.
        for _ in 0..16 {
            let a = real_matrix(&mut rng, 1.0);
            let (s, t) = (uniform(&mut rng, -5.0, 5.0), uniform(&mut rng, -5.0, 5.0));
            let whole = expm2(&a, s + t).unwrap();
            let split = expm2(&a, s).unwrap() * expm2(&a, t).unwrap();
            prop_assert!((whole - split).norm() <= 1e-10 * (1.0 + whole.norm()));
        }
    }

    #[test]
    fn exponential_at_zero_is_identity(seed: u64) {
        let mut rng = rng(seed);
        let a = real_matrix(&mut rng, 3.0);
        prop_assert_eq!(expm2(&a, 0.0).unwrap(), Mat2::IDENTITY);
    }

    #[test]
    fn eigen_reconstruction(seed: u64) {
        let mut rng = rng(seed);
        for _ in 0..16 {
            let a = real_matrix(&mut rng, 3.0);
            let e = eig2(&a).unwrap();
            prop_assert!(e.eigenvalues[0] >= e.eigenvalues[1]);
            prop_assert!(e.basis.det().abs() > 0.0);
            let tr = a.trace();
            let band = 1e-9 * (1.0 + tr * tr);
            let disc = tr * tr - 4.0 * a.det();
            let residual = (e.reconstruct() - a).norm();
            if disc.abs() <= band {
                // Inside the zero-discriminant band the matrix is read as defective,
                // so it is reconstructed only up to the square root of the band.
                let scalar = a.a12 == 0.0 && a.a21 == 0.0 && a.a11 == a.a22;
                prop_assert!(scalar || e.kind == EigenKind::Jordan);
                prop_assert!(residual <= 2.0 * band.sqrt() + 1e-12 * a.norm(), "{:?}", a);
            } else {
                prop_assert!(residual <= 1e-12 * a.norm(), "{:?}", a);
            }
        }
    }

    #[test]
    fn adapted_norm_contracts(seed: u64) {
        let mut rng = rng(seed);
        let a = stable_matrix(&mut rng);
        let n = adapted_norm(&a).unwrap();
        prop_assert!(n.delta > 0.0);
        for _ in 0..64 {
            let t = uniform(&mut rng, 1e-6, 10.0);
            let v = point(&mut rng, 10.0);
            let lhs = n.norm(expm2(&a, t).unwrap() * v);
            prop_assert!(lhs <= (-n.delta * t).exp() * n.norm(v) * (1.0 + 1e-12), "{:?} t={}", a, t);
        }
    }
}
