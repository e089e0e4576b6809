mod common;

use common::*;
use planar_lcs::{
    adapted_norm, closed_orbit_saddle, control_set, invariant_f, invariant_g, propagate, steer, steer_nilpotent,
    steer_node, steer_node_with_relax, steer_rank1, steer_unstable_node, ControlSetDescription, Error, NodeMap,
    SteeringResult, SystemSpec, Vec2,
};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn s3() -> SystemSpec {
    spec([[1., 0.], [0., -1.]], [1., 1.], -1., 1.)
}

fn s4() -> SystemSpec {
    spec([[-1., 1.], [0., -1.]], [0., 1.], -1., 1.)
}

/// Independent replay of a result: controls admissible and the reported
/// error reproduced by propagation.
fn replays(s: &SystemSpec, v0: Vec2, v1: Vec2, r: &SteeringResult) -> bool {
    let sys = system(s);
    let Ok(traj) = propagate(&sys, v0, &r.schedule) else {
        return false;
    };
    let err = traj.endpoint().distance(v1);
    let admissible = r.schedule.segments.iter().all(|g| s.omega.contains(g.u) && g.dt >= 0.0);
    admissible && (err - r.endpoint_error).abs() <= 1e-12 * (1.0 + v1.norm())
}

/// Random point strictly inside a canonical interval box, mapped back.
fn box_point(rng: &mut ChaCha8Rng, s: &SystemSpec, x: [f64; 2], y: [f64; 2]) -> Vec2 {
    let sys = system(s);
    let pick = |rng: &mut ChaCha8Rng, iv: [f64; 2]| iv[0] + uniform(rng, 0.03, 0.97) * (iv[1] - iv[0]);
    let w = Vec2::new(pick(rng, x), pick(rng, y));
    sys.canon.from_canonical(w)
}

#[test]
fn nilpotent_examples() {
    let s = spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.);
    let v = Vec2::new(0.4, -1.2);
    let r = steer_nilpotent(&s, v, v).unwrap();
    assert!(r.schedule.is_empty());
    assert_eq!(r.endpoint_error, 0.0);

    let r = steer_nilpotent(&s, Vec2::ZERO, Vec2::new(2.0, 2.0)).unwrap();
    assert!(r.endpoint_error <= 1e-6);
    assert_eq!(r.schedule.len(), 1);
    assert_eq!((r.schedule.segments[0].u, r.schedule.segments[0].dt), (1.0, 2.0));

    assert!(matches!(
        steer_nilpotent(&s3(), Vec2::ZERO, Vec2::ZERO),
        Err(Error::WrongCase { .. })
    ));
}

#[test]
fn nilpotent_random_pairs_and_stage_one() {
    let mut rng = rng(71);
    for k in 0..200 {
        let s = if k % 4 == 0 {
            spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.)
        } else {
            nilpotent(&mut rng)
        };
        let v0 = point(&mut rng, 10.0);
        let v1 = point(&mut rng, 10.0);
        let r = steer_nilpotent(&s, v0, v1).unwrap();
        assert!(r.endpoint_error <= 1e-6, "{}", r.endpoint_error);
        assert!(replays(&s, v0, v1, &r));
        let controls: Vec<f64> = r.schedule.segments.iter().map(|g| g.u).collect();
        assert!(controls
            .iter()
            .all(|&u| u == s.omega.min || u == 0.0 || u == s.omega.max));

        // The first u0 leg starts strictly inside the u1 sublevel of the target.
        let sys = system(&s);
        let c = &sys.canon;
        let u1 = s.omega.max;
        let mut p = v0;
        for g in &r.schedule.segments {
            if g.u == s.omega.min {
                assert!(invariant_f(u1, c.to_canonical(p)) < invariant_f(u1, c.to_canonical(v1)));
                break;
            }
            p = sys.flow(g.dt, p, g.u);
        }
    }
}

#[test]
fn rank_one_examples() {
    let s = spec([[-1., 0.], [0., 0.]], [1., 1.], -1., 1.);
    let v = Vec2::new(0.2, 0.7);
    assert!(steer_rank1(&s, v, v).unwrap().schedule.is_empty());

    let r = steer_rank1(&s, Vec2::ZERO, Vec2::new(0.5, 3.0)).unwrap();
    assert!(r.endpoint_error <= 1e-6);
    assert!(replays(&s, Vec2::ZERO, Vec2::new(0.5, 3.0), &r));
    assert!((1..=4).contains(&r.schedule.len()));

    assert!(matches!(
        steer_rank1(&s, Vec2::ZERO, Vec2::new(1.5, 0.0)),
        Err(Error::TargetOutsideControlSet)
    ));
    assert!(matches!(
        steer_rank1(&s, Vec2::new(-2.0, 0.0), Vec2::ZERO),
        Err(Error::StartOutsideControlSet)
    ));
}

#[test]
fn rank_one_random_pairs() {
    let mut rng = rng(72);
    for _ in 0..200 {
        let s = rank_one(&mut rng);
        let ControlSetDescription::Strip { x_interval, .. } = control_set(&s).unwrap() else {
            unreachable!()
        };
        let v0 = box_point(&mut rng, &s, x_interval, [-4.0, 4.0]);
        let v1 = box_point(&mut rng, &s, x_interval, [-4.0, 4.0]);
        let r = steer_rank1(&s, v0, v1).unwrap();
        assert!(r.endpoint_error <= 1e-6, "{}", r.endpoint_error);
        assert!(r.schedule.len() <= 4);
        assert!(replays(&s, v0, v1, &r));
    }
}

#[test]
fn saddle_examples() {
    let v = Vec2::ZERO;
    assert!(closed_orbit_saddle(&s3(), v, v).unwrap().schedule.is_empty());

    let w = Vec2::new(0.3, -0.2);
    let r = closed_orbit_saddle(&s3(), v, w).unwrap();
    let traj = propagate(&system(&s3()), v, &r.schedule).unwrap();
    assert!(traj.endpoint().distance(v) <= 1e-8);
    assert!(traj.joints().iter().any(|p| p.distance(w) <= 1e-8));
    assert!(r.schedule.segments.iter().all(|g| g.u == -1.0 || g.u == 1.0));

    // Swapping the pair exchanges the roles internally.
    let back = closed_orbit_saddle(&s3(), w, v).unwrap();
    let traj = propagate(&system(&s3()), w, &back.schedule).unwrap();
    assert!(traj.endpoint().distance(w) <= 1e-8);
    assert!(traj.joints().iter().any(|p| p.distance(v) <= 1e-8));

    assert!(matches!(
        closed_orbit_saddle(&s3(), Vec2::new(1.0, 0.0), w),
        Err(Error::PointOutside)
    ));
    assert!(matches!(closed_orbit_saddle(&s4(), v, w), Err(Error::WrongCase { .. })));
}

#[test]
fn saddle_witnesses_share_level_sets() {
    let mut rng = rng(73);
    for _ in 0..100 {
        let s = saddle(&mut rng);
        let sys = system(&s);
        let c = &sys.canon;
        let ControlSetDescription::SaddleBox {
            x_interval, y_interval, ..
        } = control_set(&s).unwrap()
        else {
            unreachable!()
        };
        let v = box_point(&mut rng, &s, x_interval, y_interval);
        let w = box_point(&mut rng, &s, x_interval, y_interval);
        let r = closed_orbit_saddle(&s, v, w).unwrap();
        assert_eq!(r.witness.len(), 4);
        let (a, b) = (s.omega.min, s.omega.max);
        let g = |u: f64, p: Vec2| invariant_g(c, u, c.to_canonical(p)).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
        // All four crossings lie on one level set of the u⁺ invariant.
        let level = g(b, r.witness[0]);
        for p in &r.witness {
            assert!(close(g(b, *p), level), "{} vs {level}", g(b, *p));
        }
        // Pairs sit on the u⁻ orbits through v and through w.
        let (gv, gw) = (g(a, v), g(a, w));
        let on = |p: Vec2| close(g(a, p), gv) || close(g(a, p), gw);
        assert!(r.witness.iter().all(|&p| on(p)));
        assert!(replays(&s, v, v, &r));
    }
}

#[test]
fn node_examples() {
    let sys = system(&s4());
    let map = NodeMap::for_control_set(&sys).unwrap();
    let anchor = sys.equilibrium(-1.0).unwrap();
    let target = map.point(1.0, 1.0);
    let r = steer_node(&s4(), anchor, target, 1e-9).unwrap();
    assert!(r.endpoint_error <= 1e-9);
    assert_eq!(r.schedule.len(), 2);
    assert_eq!(r.schedule.segments[0].u, 1.0);

    let v0 = Vec2::new(5.0, 5.0);
    let tol = 1e-6;
    let r = steer_node(&s4(), v0, Vec2::ZERO, tol).unwrap();
    assert!(r.endpoint_error <= tol, "{}", r.endpoint_error);
    let norm = adapted_norm(&s4().a).unwrap();
    let relax = r.schedule.segments[0].dt;
    assert_eq!(r.schedule.segments[0].u, -1.0);
    assert!(relax >= (norm.norm(v0 - anchor) / tol).ln() / norm.delta);
    assert!(replays(&s4(), v0, Vec2::ZERO, &r));

    let unstable = spec([[1., 1.], [0., 1.]], [0., 1.], -1., 1.);
    assert!(matches!(
        steer_node(&unstable, v0, Vec2::ZERO, tol),
        Err(Error::WrongCase { .. })
    ));
    assert!(matches!(
        steer_node(&s4(), v0, Vec2::new(40.0, -40.0), tol),
        Err(Error::TargetNotInInterior)
    ));
}

#[test]
fn node_error_decays_with_relaxation() {
    let mut rng = rng(74);
    for _ in 0..20 {
        let s = node(&mut rng, true);
        let sys = system(&s);
        let map = NodeMap::for_control_set(&sys).unwrap();
        let norm = adapted_norm(&s.a).unwrap();
        let target = map.point(uniform(&mut rng, 0.3, 2.0), uniform(&mut rng, 0.3, 2.0));
        let v0 = point(&mut rng, 3.0);
        let mut previous: Option<(f64, f64)> = None;
        for relax in [0.0, 1.0, 2.0, 3.0, 4.0] {
            let r = steer_node_with_relax(&s, v0, target, relax).unwrap();
            let end = sys.endpoint(v0, &r.schedule);
            let err = norm.norm(end - target);
            if let Some((t0, e0)) = previous {
                let floor = 1e-12 * (1.0 + target.norm());
                assert!(
                    err <= (-norm.delta * (relax - t0)).exp() * e0 * (1.0 + 1e-9) + floor,
                    "{err} vs {e0}"
                );
            }
            previous = Some((relax, err));
        }
    }
}

#[test]
fn dispatch_examples() {
    let whole = spec([[0., 1.], [0., 0.]], [0., 1.], -1., 1.);
    let (v0, v1) = (Vec2::new(1.0, -2.0), Vec2::new(-3.0, 0.5));
    assert_eq!(
        steer(&whole, v0, v1, 1e-6).unwrap(),
        steer_nilpotent(&whole, v0, v1).unwrap()
    );

    let none = spec([[0., 1.], [0., 0.]], [0., 1.], 1., 2.);
    assert!(matches!(steer(&none, v0, v1, 1e-6), Err(Error::NoSteeringPossible(_))));

    let w = Vec2::new(0.3, -0.2);
    let r = steer(&s3(), Vec2::ZERO, w, 1e-6).unwrap();
    assert!(r.endpoint_error <= 1e-8);
    assert!(replays(&s3(), Vec2::ZERO, w, &r));
    assert!(r.schedule.segments.iter().all(|g| g.u.abs() == 1.0));

    let r = steer(&s4(), Vec2::new(2.0, -1.0), Vec2::new(0.1, 0.2), 1e-7).unwrap();
    assert!(r.endpoint_error <= 1e-7);
}

#[test]
fn unstable_node_by_time_reversal() {
    let mut rng = rng(75);
    for k in 0..200 {
        let s = node(&mut rng, false);
        let sys = system(&s);
        let map = NodeMap::for_control_set(&sys).unwrap();
        let v0 = map.point(uniform(&mut rng, 0.2, 3.0), uniform(&mut rng, 0.2, 3.0));
        let v1 = if k % 2 == 0 {
            map.point(uniform(&mut rng, 0.2, 3.0), uniform(&mut rng, 0.2, 3.0))
        } else {
            point(&mut rng, 3.0)
        };
        let r = steer(&s, v0, v1, 1e-6).unwrap();
        assert!(r.endpoint_error <= 1e-6, "{} {s:?} {v0:?} {v1:?}", r.endpoint_error);
        assert!(replays(&s, v0, v1, &r));
        assert!(r.schedule.len() <= 3);
        assert!(r
            .schedule
            .segments
            .iter()
            .all(|g| g.u == s.omega.min || g.u == s.omega.max));
    }

    // The start must be interior; the stable planner refuses this case.
    let s = spec([[2., 0.], [0., 1.]], [1., 1.], -1., 1.);
    assert!(matches!(
        steer_unstable_node(&s, Vec2::new(5.0, 5.0), Vec2::ZERO, 1e-6),
        Err(Error::StartOutsideControlSet)
    ));
    assert!(matches!(
        steer_unstable_node(&s4(), Vec2::ZERO, Vec2::ZERO, 1e-6),
        Err(Error::WrongCase { .. })
    ));
    assert!(matches!(
        steer_node(&s, Vec2::ZERO, Vec2::ZERO, 1e-6),
        Err(Error::WrongCase { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_result_replays(seed: u64, k in 0usize..5) {
        let mut rng = rng(seed);
        let s = any_case(&mut rng, k);
        let desc = control_set(&s).unwrap();
        let (v0, v1) = match desc {
            ControlSetDescription::WholePlane => (point(&mut rng, 5.0), point(&mut rng, 5.0)),
            ControlSetDescription::Strip { x_interval, .. } => (
                box_point(&mut rng, &s, x_interval, [-3.0, 3.0]),
                box_point(&mut rng, &s, x_interval, [-3.0, 3.0]),
            ),
            ControlSetDescription::SaddleBox { x_interval, y_interval, .. } => (
                box_point(&mut rng, &s, x_interval, y_interval),
                box_point(&mut rng, &s, x_interval, y_interval),
            ),
            ControlSetDescription::NodeRegion { .. } => {
                let map = NodeMap::for_control_set(&system(&s)).unwrap();
                let inner = map.point(uniform(&mut rng, 0.2, 3.0), uniform(&mut rng, 0.2, 3.0));
                // Stable nodes steer into the region, unstable ones out of it.
                if map.epsilon() > 0.0 {
                    (point(&mut rng, 3.0), inner)
                } else {
                    (inner, point(&mut rng, 3.0))
                }
            }
            other => panic!("unexpected {other:?}"),
        };
        let r = steer(&s, v0, v1, 1e-6).unwrap();
        prop_assert!(replays(&s, v0, v1, &r));
        prop_assert!(r.endpoint_error <= 1e-6, "{}", r.endpoint_error);
    }
}
