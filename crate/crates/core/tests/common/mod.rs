#![allow(dead_code)]

use planar_lcs::{classify, Case, LinearSystem, Mat2, SystemSpec, Vec2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spec(a: [[f64; 2]; 2], z: [f64; 2], lo: f64, hi: f64) -> SystemSpec {
    SystemSpec::new(Mat2::from_rows(a), z.into(), lo, hi).unwrap()
}

/// Classic RK4 on `v' = A v + u ζ` with step at most `h`.
pub fn rk4(spec: &SystemSpec, v: Vec2, u: f64, t: f64, h: f64) -> Vec2 {
    let steps = (t.abs() / h).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let f = |p: Vec2| spec.a * p + spec.zeta.scale(u);
    let mut p = v;
    for _ in 0..steps {
        let k1 = f(p);
        let k2 = f(p + k1.scale(0.5 * dt));
        let k3 = f(p + k2.scale(0.5 * dt));
        let k4 = f(p + k3.scale(dt));
        p = p + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    }
    p
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn point(rng: &mut ChaCha8Rng, r: f64) -> Vec2 {
    Vec2::new(uniform(rng, -r, r), uniform(rng, -r, r))
}

fn magnitude(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = uniform(rng, lo, hi);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

/// Well-conditioned change of basis.
pub fn basis(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let p = Mat2::new(
            uniform(rng, -1.0, 1.0),
            uniform(rng, -1.0, 1.0),
            uniform(rng, -1.0, 1.0),
            uniform(rng, -1.0, 1.0),
        );
        let n = p.norm();
        if p.det().abs() >= 0.3 * n * n && n > 0.5 {
            return p;
        }
    }
}

/// Control range with zero in the interior.
pub fn omega(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (-uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0))
}

/// Conjugates `template` by a random basis and picks ζ with a LARC margin.
fn conjugated(rng: &mut ChaCha8Rng, template: Mat2, want: Case, range: (f64, f64)) -> SystemSpec {
    loop {
        let p = basis(rng);
        let a = p * template * p.inverse().unwrap();
        let z = Vec2::new(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5));
        if z.norm() < 0.3 {
            continue;
        }
        // Margin against the non-scalar part, which is all the rank condition sees.
        let shift = 0.5 * a.trace();
        let off = (a - Mat2::diag(shift, shift)).norm();
        let larc = (a * z).cross(z).abs();
        if larc < 0.1 * off * z.dot(z) {
            continue;
        }
        let Ok(s) = SystemSpec::new(a, z, range.0, range.1) else {
            continue;
        };
        if classify(&s).map(|t| t.case()) == Ok(want) {
            return s;
        }
    }
}

pub fn nilpotent(rng: &mut ChaCha8Rng) -> SystemSpec {
    let c = magnitude(rng, 0.5, 1.5);
    let range = omega(rng);
    conjugated(rng, Mat2::new(0.0, c, 0.0, 0.0), Case::Nilpotent, range)
}

pub fn nilpotent_with(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SystemSpec {
    let c = magnitude(rng, 0.5, 1.5);
    conjugated(rng, Mat2::new(0.0, c, 0.0, 0.0), Case::Nilpotent, (lo, hi))
}

pub fn rank_one(rng: &mut ChaCha8Rng) -> SystemSpec {
    let mu = magnitude(rng, 0.2, 1.0);
    let range = omega(rng);
    conjugated(rng, Mat2::diag(mu, 0.0), Case::RankOne, range)
}

pub fn saddle(rng: &mut ChaCha8Rng) -> SystemSpec {
    let mu = uniform(rng, 0.2, 1.0);
    let lambda = -uniform(rng, 0.2, 1.0);
    let range = omega(rng);
    conjugated(rng, Mat2::diag(mu, lambda), Case::Saddle, range)
}

/// Node with eigenvalues of magnitude in [0.2, 1]; one in four is a Jordan block.
pub fn node(rng: &mut ChaCha8Rng, stable: bool) -> SystemSpec {
    let sign = if stable { -1.0 } else { 1.0 };
    let range = omega(rng);
    let want = if stable { Case::StableNode } else { Case::UnstableNode };
    let template = if rng.random_range(0..4) == 0 {
        let l = sign * uniform(rng, 0.2, 1.0);
        Mat2::new(l, uniform(rng, 0.3, 1.0), 0.0, l)
    } else {
        let l1 = uniform(rng, 0.2, 1.0);
        let l2 = loop {
            let l = uniform(rng, 0.2, 1.0);
            if (l - l1).abs() > 0.05 {
                break l;
            }
        };
        Mat2::diag(sign * l1, sign * l2)
    };
    conjugated(rng, template, want, range)
}

/// One system of each case tag with det, tr nonzero or zero, chosen by index.
pub fn any_case(rng: &mut ChaCha8Rng, k: usize) -> SystemSpec {
    match k % 5 {
        0 => nilpotent(rng),
        1 => rank_one(rng),
        2 => saddle(rng),
        3 => node(rng, true),
        _ => node(rng, false),
    }
}

pub fn system(spec: &SystemSpec) -> LinearSystem {
    LinearSystem::new(*spec).unwrap()
}
