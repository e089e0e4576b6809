//! Explicit piecewise-constant controls between points of a control set.
//!
//! The nilpotent, rank-one and saddle planners work in canonical coordinates
//! with closed-form segment times (quadratic roots and logarithms). Schedules
//! do not depend on the coordinate frame, so they replay directly on the
//! original system. The node planner is approximate: it relaxes toward
//! `v(u⁻)` and then follows the inverse of the node map.

use serde::{Deserialize, Serialize};

use crate::algebra::{adapted_norm, expm2, Mat2, Vec2};
use crate::control_set::{describe, ControlSetDescription, NodeMap, NodeRegionSet};
use crate::dynamics::{invariant_f, Schedule};
use crate::error::{Error, Result};
use crate::system::{Case, LinearSystem, SystemSpec, ZeroPosition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringResult {
    pub schedule: Schedule,
    /// Distance between the replayed endpoint and the target.
    pub endpoint_error: f64,
    /// Intermediate points of the construction, original coordinates.
    pub witness: Vec<Vec2>,
}

fn finish(
    system: &LinearSystem,
    v0: Vec2,
    target: Vec2,
    schedule: Schedule,
    witness: Vec<Vec2>,
) -> Result<SteeringResult> {
    let schedule = schedule.compact();
    schedule.validate(&system.omega())?;
    let endpoint_error = system.endpoint(v0, &schedule).distance(target);
    Ok(SteeringResult {
        schedule,
        endpoint_error,
        witness,
    })
}

fn same_point(a: Vec2, b: Vec2) -> bool {
    a.distance(b) <= 1e-14 * (1.0 + a.norm().max(b.norm()))
}

/// Parabola concatenation for `det A = tr A = 0` with `0 ∈ int Ω`.
pub fn steer_nilpotent(spec: &SystemSpec, v0: Vec2, v1: Vec2) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    let tag = system.tag();
    if system.case() != Case::Nilpotent || tag.zero_position != ZeroPosition::Interior {
        return Err(system.wrong_case("det A = tr A = 0 with 0 in the interior of the control range"));
    }
    let canon = &system.canon;
    let (u0, u1) = (system.omega().min, system.omega().max);
    let mut schedule = Schedule::empty();
    let mut witness = Vec::new();
    if same_point(v0, v1) {
        return finish(&system, v0, v1, schedule, witness);
    }
    let start = canon.to_canonical(v0);
    let target = canon.to_canonical(v1);
    let c1 = invariant_f(u1, target);
    let c0 = invariant_f(u0, target);
    let level_tol = 1e-12 * (1.0 + c1.abs().max(c0.abs()));

    // Already on one of the two parabolas that end at the target.
    if (invariant_f(u1, start) - c1).abs() <= level_tol && start.y <= target.y {
        schedule.push(u1, (target.y - start.y) / u1);
        return finish(&system, v0, v1, schedule, witness);
    }
    if (invariant_f(u0, start) - c0).abs() <= level_tol && start.y >= target.y {
        schedule.push(u0, (target.y - start.y) / u0);
        return finish(&system, v0, v1, schedule, witness);
    }

    // Stage 1: enter the open region F_{u1} < c1 to the right of the
    // u1-parabola through the target.
    let margin = 1.0 + 0.1 * c1.abs();
    let mut p = start;
    let f_start = invariant_f(u1, start);
    if f_start > c1 - margin {
        let lift = start.y.max(1.0);
        let t_up = (lift - start.y) / u1;
        schedule.push(u1, t_up);
        let t_coast = (f_start - (c1 - margin)) / (2.0 * u1 * lift);
        schedule.push(0.0, t_coast);
        p = canon.flow(t_coast, canon.flow(t_up, start, u1), 0.0);
        witness.push(canon.from_canonical(p));
    }

    // Stage 2: u0 until the u1-parabola through the target is reached again.
    // F_{u1} along the u0 flow is F + (u0-u1)(2 y t + u0 t^2).
    let fp = invariant_f(u1, p);
    let qa = u0 * (u0 - u1);
    let qb = 2.0 * p.y * (u0 - u1);
    let qc = fp - c1;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    // qa > 0 and qc < 0: one positive root, computed without cancellation.
    let t2 = if qb <= 0.0 {
        (-qb + disc.sqrt()) / (2.0 * qa)
    } else {
        2.0 * qc / (-qb - disc.sqrt())
    };
    schedule.push(u0, t2);
    let q = canon.flow(t2, p, u0);
    witness.push(canon.from_canonical(q));

    if q.y <= target.y {
        schedule.push(u1, (target.y - q.y) / u1);
    } else {
        // The crossing lies between the target and the vertex: go over the
        // top to the mirror point, then come down along the u0-parabola.
        let mirror = Vec2::new(target.x, target.y.abs());
        schedule.push(u1, (mirror.y - q.y) / u1);
        witness.push(canon.from_canonical(mirror));
        schedule.push(u0, (target.y - mirror.y) / u0);
    }
    finish(&system, v0, v1, schedule, witness)
}

/// Fiber geometry of the rank-one case in canonical coordinates
/// `x' = μx + uζ₁, y' = uζ₂`.
struct Fibers {
    mu: f64,
    z1: f64,
    z2: f64,
    lo: f64,
    hi: f64,
    strip: [f64; 2],
}

impl Fibers {
    /// Control holding the fiber `x` fixed.
    fn hold(&self, x: f64) -> f64 {
        -self.mu * x / self.z1
    }

    fn rate(&self, x: f64) -> f64 {
        self.hold(x) * self.z2
    }

    fn rest(&self, u: f64) -> f64 {
        -u * self.z1 / self.mu
    }

    /// Extreme control and time moving from fiber `x0` to fiber `x1`.
    fn drift(&self, x0: f64, x1: f64) -> (f64, f64) {
        if x0 == x1 {
            return (self.lo, 0.0);
        }
        let rightward = x1 > x0;
        // Stable fibers: rest point beyond the target. Unstable: behind the start.
        let want_rest_right = rightward == (self.mu < 0.0);
        let u = [self.lo, self.hi]
            .into_iter()
            .find(|&u| (self.rest(u) > self.strip[0] + 0.5 * (self.strip[1] - self.strip[0])) == want_rest_right)
            .expect("one extreme rest point lies on each side");
        let xe = self.rest(u);
        let t = ((x1 - xe) / (x0 - xe)).ln() / self.mu;
        (u, t.max(0.0))
    }
}

/// Holds the canonical fiber `x_fiber` until canonical y reaches `goal`.
/// The control is the constant one that brings x back onto the fiber at the
/// end of the hold, so an offset left by earlier legs is not amplified on an
/// unstable fiber.
fn hold_on_fiber(
    system: &LinearSystem,
    fib: &Fibers,
    state: Vec2,
    x_fiber: f64,
    goal: f64,
    schedule: &mut Schedule,
) -> Vec2 {
    let w = system.canon.to_canonical(state);
    let owed = goal - w.y;
    let mut u = fib.hold(x_fiber);
    let mut tau = owed / (u * fib.z2);
    if !tau.is_finite() || tau <= 0.0 {
        return state;
    }
    for _ in 0..4 {
        let e = (fib.mu * tau).exp();
        let rest = (x_fiber - w.x * e) / (1.0 - e);
        u = (-fib.mu * rest / fib.z1).clamp(fib.lo, fib.hi);
        tau = owed / (u * fib.z2);
    }
    schedule.push(u, tau);
    system.flow(tau, state, u)
}

/// Strip traversal for `det A = 0`, `tr A ≠ 0`, `0 ∈ int Ω`.
pub fn steer_rank1(spec: &SystemSpec, v0: Vec2, v1: Vec2) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    if system.case() != Case::RankOne || system.tag().zero_position != ZeroPosition::Interior {
        return Err(system.wrong_case("det A = 0, tr A != 0 with 0 in the interior of the control range"));
    }
    let ControlSetDescription::Strip { x_interval, .. } = describe(&system) else {
        unreachable!("rank-one interior case is a strip");
    };
    let canon = &system.canon;
    let omega = system.omega();
    let fib = Fibers {
        mu: canon.a_can.a11,
        z1: canon.zeta_can.x,
        z2: canon.zeta_can.y,
        lo: omega.min,
        hi: omega.max,
        strip: x_interval,
    };
    let start = canon.to_canonical(v0);
    let target = canon.to_canonical(v1);
    let inner = |x: f64| x > x_interval[0] && x < x_interval[1];
    if !inner(start.x) {
        return Err(Error::StartOutsideControlSet);
    }
    if !inner(target.x) {
        return Err(Error::TargetOutsideControlSet);
    }
    let mut schedule = Schedule::empty();
    let mut witness = Vec::new();
    if same_point(v0, v1) {
        return finish(&system, v0, v1, schedule, witness);
    }
    let y_tol = 1e-15 * (1.0 + start.y.abs().max(target.y.abs()));

    // Candidate plans as legs (control, time, final drift?). Holding on an
    // unstable fiber amplifies any offset, so the shortest plan wins and a
    // closing drift is re-timed from the replayed state.
    let mut plans: Vec<Vec<(f64, f64, bool)>> = Vec::new();
    let (ud, td) = fib.drift(start.x, target.x);
    let gap = target.y - start.y - ud * fib.z2 * td;
    if gap.abs() <= y_tol {
        plans.push(vec![(ud, td, true)]);
    }
    let (r0, r1) = (fib.rate(start.x), fib.rate(target.x));
    if r0 * gap > 0.0 {
        plans.push(vec![(fib.hold(start.x), gap / r0, false), (ud, td, true)]);
    }
    if r1 * gap > 0.0 {
        plans.push(vec![(ud, td, false), (fib.hold(target.x), gap / r1, false)]);
    }
    for u in [fib.hi, fib.lo] {
        for f in [0.9, 0.75, 0.5, 0.25] {
            let u_mid = f * u;
            let x_mid = fib.rest(u_mid);
            let (ua, ta) = fib.drift(start.x, x_mid);
            let (ub, tb) = fib.drift(x_mid, target.x);
            let gap = target.y - start.y - (ua * ta + ub * tb) * fib.z2;
            let hold = gap / fib.rate(x_mid);
            if hold >= 0.0 && hold.is_finite() {
                plans.push(vec![(ua, ta, false), (u_mid, hold, false), (ub, tb, true)]);
            }
        }
    }
    let duration = |p: &Vec<(f64, f64, bool)>| p.iter().map(|l| l.1).sum::<f64>();
    let Some(plan) = plans.into_iter().min_by(|p, q| duration(p).total_cmp(&duration(q))) else {
        return Err(Error::NoSteeringPossible("no fiber plan closes the gap".into()));
    };
    // Replay as we go: holds pull x back onto their fiber and the closing
    // drift is timed from the replayed position.
    let closing_gain = plan.last().filter(|l| l.2).map_or(0.0, |l| l.0 * l.1 * fib.z2);
    let mut state = v0;
    for (k, &(u, dt, closing)) in plan.iter().enumerate() {
        let w = canon.to_canonical(state);
        if closing {
            let dt = fib.drift(w.x, target.x).1;
            schedule.push(u, dt);
            state = system.flow(dt, state, u);
        } else if plan.get(k + 1).is_some_and(|next| next.2) || k + 1 == plan.len() {
            // A hold: the y still owed before any closing drift.
            let goal = target.y - closing_gain;
            let x_fiber = if k + 1 == plan.len() { target.x } else { w.x };
            state = hold_on_fiber(&system, &fib, state, x_fiber, goal, &mut schedule);
        } else {
            schedule.push(u, dt);
            state = system.flow(dt, state, u);
        }
        if k + 1 < plan.len() {
            witness.push(state);
        }
    }
    finish(&system, v0, v1, schedule, witness)
}

/// Saddle geometry in the frame `X = x/q₁, Y = y/q₂` where the box is
/// `(a, b)²` and the rest point of control `u` is `(u, u)`.
struct SaddleFrame {
    mu: f64,
    lambda: f64,
    q: Vec2,
}

impl SaddleFrame {
    fn to_frame(&self, w: Vec2) -> Vec2 {
        Vec2::new(w.x / self.q.x, w.y / self.q.y)
    }

    fn unframe(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x * self.q.x, p.y * self.q.y)
    }

    fn flow(&self, t: f64, p: Vec2, u: f64) -> Vec2 {
        Vec2::new(
            u + (p.x - u) * (self.mu * t).exp(),
            u + (p.y - u) * (self.lambda * t).exp(),
        )
    }

    fn log_g(&self, u: f64, p: Vec2) -> f64 {
        -self.lambda * (p.x - u).abs().ln() + self.mu * (p.y - u).abs().ln()
    }

    /// Time for control `u` to carry X-coordinate `from` to `to`.
    fn time_x(&self, u: f64, from: f64, to: f64) -> f64 {
        ((to - u) / (from - u)).ln() / self.mu
    }
}

/// Crossings of both a-orbits with the b-level `alpha`, ordered so both
/// b-legs run forward, plus the ideal loop time.
fn saddle_plan(frame: &SaddleFrame, a: f64, b: f64, alpha: f64, pv: Vec2, pw: Vec2) -> Option<(f64, bool, [Vec2; 4])> {
    let (v_before, v_after) = level_crossings(frame, a, b, alpha, pv);
    let (w_before, w_after) = level_crossings(frame, a, b, alpha, pw);
    let fits = |i_after: Vec2, o_before: Vec2, o_after: Vec2, i_before: Vec2| {
        i_after.x >= o_before.x && o_after.x >= i_before.x
    };
    let v_first = if fits(v_after, w_before, w_after, v_before) {
        true
    } else if fits(w_after, v_before, v_after, w_before) {
        false
    } else {
        return None;
    };
    let (pi, i0, i1, po, o0, o1) = if v_first {
        (pv, v_before, v_after, pw, w_before, w_after)
    } else {
        (pw, w_before, w_after, pv, v_before, v_after)
    };
    let legs = [
        (a, pi, i1),
        (b, i1, o0),
        (a, o0, po),
        (a, po, o1),
        (b, o1, i0),
        (a, i0, pi),
    ];
    let mut total = 0.0;
    for (u, from, to) in legs {
        let dt = frame.time_x(u, from.x, to.x);
        if !dt.is_finite() {
            return None;
        }
        total += dt.max(0.0);
    }
    Some((total, v_first, [v_before, v_after, w_before, w_after]))
}

/// Points where the `a`-orbit through `p` meets the level `log g_b = α`,
/// before and after `p`.
fn level_crossings(frame: &SaddleFrame, a: f64, b: f64, alpha: f64, p: Vec2) -> (Vec2, Vec2) {
    let h = |t: f64| frame.log_g(b, frame.flow(t, p, a)) - alpha;
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if h(mid) > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    // Exit times through X = b forward and Y = b backward.
    let t_fwd = frame.time_x(a, p.x, b);
    let t_bwd = ((b - a) / (p.y - a)).ln() / frame.lambda;
    let after = bisect(0.0, t_fwd);
    let before = bisect(0.0, t_bwd);
    (frame.flow(before, p, a), frame.flow(after, p, a))
}

/// Closed trajectory with extreme controls starting and ending at `v` and
/// passing through `w`, for `det A < 0`. The last joint equal to `w` is kept
/// so the loop can be cut there.
pub fn closed_orbit_saddle(spec: &SystemSpec, v: Vec2, w: Vec2) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    Ok(saddle_loop(&system, v, w)?.0)
}

/// Returns the loop and the number of leading segments that end at `w`.
fn saddle_loop(system: &LinearSystem, v: Vec2, w: Vec2) -> Result<(SteeringResult, usize)> {
    if system.case() != Case::Saddle {
        return Err(system.wrong_case("det A < 0"));
    }
    let canon = &system.canon;
    let (mu, lambda) = (canon.a_can.a11, canon.a_can.a22);
    let z = canon.zeta_can;
    let frame = SaddleFrame {
        mu,
        lambda,
        q: Vec2::new(-z.x / mu, -z.y / lambda),
    };
    let (a, b) = (system.omega().min, system.omega().max);
    let pv = frame.to_frame(canon.to_canonical(v));
    let pw = frame.to_frame(canon.to_canonical(w));
    let open = |p: Vec2| p.x > a && p.x < b && p.y > a && p.y < b;
    if !open(pv) || !open(pw) {
        return Err(Error::PointOutside);
    }
    if same_point(v, w) {
        let result = finish(system, v, v, Schedule::empty(), vec![v])?;
        return Ok((result, 0));
    }

    // Replay error grows like exp(mu * T), so pick the level with the
    // shortest loop among a few candidates below both points.
    let top = frame.log_g(b, pv).min(frame.log_g(b, pw));
    let mut best: Option<(f64, bool, [Vec2; 4])> = None;
    for delta in [0.01, 0.03, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        let Some((total, v_first, cr)) = saddle_plan(&frame, a, b, top - delta, pv, pw) else {
            continue;
        };
        if best.is_none_or(|(t, _, _)| total < t) {
            best = Some((total, v_first, cr));
        }
    }
    let Some((_, v_first, [v_before, v_after, w_before, w_after])) = best else {
        return Err(Error::NoSteeringPossible(
            "saddle level crossings are not ordered".into(),
        ));
    };
    let (pi, i0, i1, po, o0, o1) = if v_first {
        (pv, v_before, v_after, pw, w_before, w_after)
    } else {
        (pw, w_before, w_after, pv, v_before, v_after)
    };
    // Loop legs as (control, target X). Each time is measured from the state
    // exactly as a replay reproduces it, so rounding is not amplified open loop.
    let legs = [(a, i1.x), (b, o0.x), (a, po.x), (a, o1.x), (b, i0.x), (a, pi.x)];
    let order: [usize; 6] = if v_first {
        [0, 1, 2, 3, 4, 5]
    } else {
        [3, 4, 5, 0, 1, 2]
    };
    let mut schedule = Schedule::empty();
    let mut state = v;
    for &k in &order {
        let (u, x_target) = legs[k];
        let x_now = frame.to_frame(canon.to_canonical(state)).x;
        let dt = frame.time_x(u, x_now, x_target);
        let dt = if dt.is_finite() { dt.max(0.0) } else { 0.0 };
        schedule.push(u, dt);
        state = system.flow(dt, state, u);
    }
    let to_orig = |p: Vec2| canon.from_canonical(frame.unframe(p));
    let crossings = if v_first { [i1, o0, o1, i0] } else { [o1, i0, i1, o0] };
    let witness = crossings.iter().map(|&p| to_orig(p)).collect();
    // Keep zero-length legs so the index of the w joint is stable.
    schedule.validate(&system.omega())?;
    let endpoint_error = system.endpoint(v, &schedule).distance(v);
    Ok((
        SteeringResult {
            schedule,
            endpoint_error,
            witness,
        },
        3,
    ))
}

/// Relax-then-shoot steering into the interior of a stable node control set,
/// with the relaxation time chosen so the error is at most `tol`.
pub fn steer_node(spec: &SystemSpec, v0: Vec2, v1: Vec2, tol: f64) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    let node = node_region(&system)?;
    let norm = adapted_norm(&system.spec.a)?;
    let anchor = system.equilibrium(system.omega().min)?;
    let radius = norm.euclidean_bound() * norm.norm(v0 - anchor);
    let relax = if radius > 0.0 {
        ((radius / (0.5 * tol)).ln() / norm.delta).max(0.0)
    } else {
        0.0
    };
    shoot(&system, &node, v0, v1, relax, tol)
}

/// Same construction with an explicit relaxation time.
pub fn steer_node_with_relax(spec: &SystemSpec, v0: Vec2, v1: Vec2, relax: f64) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    let node = node_region(&system)?;
    shoot(&system, &node, v0, v1, relax, 1e-12)
}

fn node_region(system: &LinearSystem) -> Result<NodeRegionSet> {
    if system.case() != Case::StableNode {
        return Err(system.wrong_case("det A > 0 and tr A < 0"));
    }
    Ok(NodeRegionSet::new(NodeMap::for_control_set(system)?))
}

fn shoot(
    system: &LinearSystem,
    node: &NodeRegionSet,
    v0: Vec2,
    v1: Vec2,
    relax: f64,
    tol: f64,
) -> Result<SteeringResult> {
    if !relax.is_finite() || relax < 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "relaxation time {relax} must be finite and nonnegative"
        )));
    }
    let scale = 1.0 + v1.norm();
    let (s, t) = node
        .invert(v1, (0.25 * tol).min(1e-12 * scale))
        .map_err(|_| Error::TargetNotInInterior)?;
    let omega = system.omega();
    let anchor = system.equilibrium(omega.min)?;
    let mut schedule = Schedule::empty();
    schedule.push(omega.min, relax);
    schedule.push(omega.max, t);
    schedule.push(omega.min, s);
    let relaxed = system.flow(relax, v0, omega.min);
    let turn = system.flow(t, relaxed, omega.max);
    let schedule_len = schedule.len();
    let result = finish(system, v0, v1, schedule, vec![anchor, relaxed, turn])?;
    debug_assert!(result.schedule.len() <= schedule_len);
    Ok(result)
}

/// Steering out of an unstable node control set by time reversal.
///
/// The reversed system is a stable node with the same equilibria. Inverting
/// the node map at `v0` gives two legs `(u⁻, s), (u⁺, t)` carrying `v0`
/// exactly onto `v(u⁻)`. A closing `u⁻` leg of length `relax` cannot leave
/// the equilibrium, so the two leg times are corrected by Newton to land on
/// `φ(−relax, v1, u⁻)` instead, which lies close to `v(u⁻)` once `relax` is
/// long enough. The closing leg is then shortened by continuation, since it
/// amplifies any leftover error. `v0` must be interior; `v1` may be any
/// point, since the forward orbit of the interior is the whole plane.
pub fn steer_unstable_node(spec: &SystemSpec, v0: Vec2, v1: Vec2, tol: f64) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    if system.case() != Case::UnstableNode {
        return Err(system.wrong_case("det A > 0 and tr A > 0"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance {tol} must be positive")));
    }
    let node = NodeRegionSet::new(NodeMap::for_control_set(&system)?);
    let (s0, t0) = node
        .invert(v0, 1e-12 * (1.0 + v0.norm()))
        .map_err(|_| Error::StartOutsideControlSet)?;
    let omega = system.omega();
    let (lo, hi) = (omega.min, omega.max);
    let a = system.spec.a;
    let zeta = system.spec.zeta;
    let anchor = system.equilibrium(lo)?;
    if same_point(v0, v1) {
        return finish(&system, v0, v1, Schedule::empty(), Vec::new());
    }

    let scale = 1.0 + anchor.norm();
    let land = |s: f64, t: f64, relax: f64| {
        let p1 = system.flow(s, v0, lo);
        let p2 = system.flow(t, p1, hi);
        (p1, p2, system.flow(relax, p2, lo))
    };
    // Newton on the two leg times, residual measured against `goal` after a
    // closing leg of length `relax` (zero for the backward problem).
    let newton = |s: f64, t: f64, relax: f64, goal: Vec2, stop: f64| -> Result<(f64, f64, f64)> {
        let exp_relax = expm2(&a, relax)?;
        let (mut s, mut t) = (s, t);
        let (_, _, mut end) = land(s, t, relax);
        let mut residual = end.distance(goal);
        for _ in 0..64 {
            if residual <= stop {
                break;
            }
            let (p1, p2, _) = land(s, t, relax);
            let ds = exp_relax * expm2(&a, t)? * (a * p1 + zeta.scale(lo));
            let dt = exp_relax * (a * p2 + zeta.scale(hi));
            let Some(inv) = Mat2::from_cols(ds, dt).inverse() else {
                break;
            };
            let step = inv * (goal - end);
            // Halve until the residual drops and both times stay admissible.
            let mut k = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let (sn, tn) = (s + k * step.x, t + k * step.y);
                if sn >= 0.0 && tn >= 0.0 {
                    let (_, _, e) = land(sn, tn, relax);
                    let r = e.distance(goal);
                    if r < residual {
                        (s, t, end, residual) = (sn, tn, e, r);
                        improved = true;
                        break;
                    }
                }
                k *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok((s, t, residual))
    };
    let back_tol = 1e-13 * scale;
    let gap = v1 - anchor;
    let mut best: Option<(f64, [f64; 3])> = None;
    for offset in [1e-3, 1e-4, 1e-5, 1e-6] {
        let mut relax = 0.0;
        while (expm2(&a, -relax)? * gap).norm() > offset * scale && relax < 1e3 {
            relax += 0.125;
        }
        // Backward landing point for closing time r; it tends to v(u⁻).
        let goal = |r: f64| system.flow(-r, v1, lo);
        let (mut s, mut t, res) = newton(s0, t0, 0.0, goal(relax), back_tol)?;
        if res <= back_tol {
            // Shorten the closing leg while the backward problem stays
            // solvable: amplification of leftover error grows with it.
            let mut h = 0.25 * relax;
            while h > 1e-4 * relax.max(1.0) && relax > 0.0 {
                let r = (relax - h).max(0.0);
                let (sn, tn, res) = newton(s, t, 0.0, goal(r), back_tol)?;
                if res <= back_tol {
                    (s, t, relax) = (sn, tn, r);
                    h *= 2.0;
                } else {
                    h *= 0.5;
                }
            }
        }
        let stop = 0.25 * tol.min(1e-9 * (1.0 + v1.norm()));
        let (s, t, residual) = newton(s, t, relax, v1, stop)?;
        if best.is_none_or(|(r, _)| residual < r) {
            best = Some((residual, [s, t, relax]));
        }
        if residual <= tol {
            break;
        }
    }
    let Some((_, [s, t, relax])) = best else {
        return Err(Error::NoSteeringPossible(
            "time-reversed shooting did not converge".into(),
        ));
    };
    let mut schedule = Schedule::empty();
    schedule.push(lo, s);
    schedule.push(hi, t);
    schedule.push(lo, relax);
    let (p1, p2, _) = land(s, t, relax);
    finish(&system, v0, v1, schedule, vec![p1, p2])
}

/// Dispatch on the classification.
pub fn steer(spec: &SystemSpec, v0: Vec2, v1: Vec2, tol: f64) -> Result<SteeringResult> {
    let system = LinearSystem::new(*spec)?;
    match describe(&system) {
        ControlSetDescription::WholePlane => steer_nilpotent(spec, v0, v1),
        ControlSetDescription::Strip { .. } => steer_rank1(spec, v0, v1),
        ControlSetDescription::SaddleBox { .. } => {
            let (full, cut) = saddle_loop(&system, v0, v1)?;
            let schedule = Schedule::new(full.schedule.segments[..cut].to_vec());
            let witness = full.witness[..cut.min(2)].to_vec();
            finish(&system, v0, v1, schedule, witness)
        }
        ControlSetDescription::NodeRegion { epsilon: 1, .. } => steer_node(spec, v0, v1, tol),
        ControlSetDescription::NodeRegion { .. } => steer_unstable_node(spec, v0, v1, tol),
        ControlSetDescription::PointFamily { base, direction } => {
            let on_line = (v0 - base).cross(direction).abs() <= 1e-12 * direction.norm() * (1.0 + v0.norm());
            if same_point(v0, v1) && on_line {
                finish(&system, v0, v1, Schedule::empty(), Vec::new())
            } else {
                Err(Error::NoSteeringPossible(
                    "control range has zero on its boundary: every control set is a single point".into(),
                ))
            }
        }
        ControlSetDescription::NoControlSet => Err(Error::NoSteeringPossible(
            "zero is outside the control range: the system has no control set".into(),
        )),
    }
}
