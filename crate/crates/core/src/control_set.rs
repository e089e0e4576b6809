//! Control sets for every classification cell.
//!
//! The strip and box shapes are interval products in canonical coordinates.
//! The node region is the image of the two-parameter flow map
//! `f(s, t) = φ(εs, φ(εt, v(u₁), u₂), u₁)`; its boundary is the pair of flow
//! arcs leaving the two extreme equilibria. Membership in the node region is
//! decided by a crossing-number test on a dense arc-length polyline, with an
//! exact distance to the flow arcs and Newton inversion of `f` for points
//! close to the boundary.

use serde::{Deserialize, Serialize};

use crate::algebra::{expm2, Mat2, Vec2};
use crate::error::{Error, Result};
use crate::system::{Case, LinearSystem, SystemSpec, ZeroPosition};

/// Default width of the band reported as `Boundary`.
pub const TOL_BAND: f64 = 1e-6;

/// Points per arc of the polyline kept for membership queries.
const DENSE_ARC_POINTS: usize = 1024;

/// Log-parameter box for the Newton inversion of the node map. A root pinned
/// to an edge of this box is a boundary point, not an interior one.
const LOG_PARAM_MIN: f64 = -30.0;
const LOG_PARAM_MAX: f64 = 10.0;
const NEWTON_MAX_ITERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ControlSetDescription {
    /// The system is controllable.
    WholePlane,
    /// `x ∈ x_interval` (canonical coordinates), any `y`.
    Strip {
        x_interval: [f64; 2],
        x_open: [bool; 2],
    },
    /// Open in `x`, closed in `y` when `y_closed` (canonical coordinates).
    SaddleBox {
        x_interval: [f64; 2],
        y_interval: [f64; 2],
        y_closed: bool,
    },
    /// Closure of the image of the node map; `epsilon = +1` when `tr A < 0`.
    NodeRegion {
        u_minus: f64,
        u_plus: f64,
        epsilon: i8,
        closed: bool,
    },
    /// Every point of the line `base + ℝ·direction` is a one-point control set.
    PointFamily {
        base: Vec2,
        direction: Vec2,
    },
    NoControlSet,
}

impl ControlSetDescription {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ControlSetDescription::WholePlane => "WholePlane",
            ControlSetDescription::Strip { .. } => "Strip",
            ControlSetDescription::SaddleBox { .. } => "SaddleBox",
            ControlSetDescription::NodeRegion { .. } => "NodeRegion",
            ControlSetDescription::PointFamily { .. } => "PointFamily",
            ControlSetDescription::NoControlSet => "NoControlSet",
        }
    }

    /// True for the variants with nonempty interior.
    pub fn has_interior(&self) -> bool {
        !matches!(
            self,
            ControlSetDescription::PointFamily { .. } | ControlSetDescription::NoControlSet
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

fn sorted(a: f64, b: f64) -> [f64; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn describe(system: &LinearSystem) -> ControlSetDescription {
    let omega = system.omega();
    let tag = system.tag();
    let canon = &system.canon;
    let z = canon.zeta_can;
    match system.case() {
        Case::Nilpotent => match tag.zero_position {
            ZeroPosition::Interior => ControlSetDescription::WholePlane,
            ZeroPosition::Boundary => ControlSetDescription::PointFamily {
                base: Vec2::ZERO,
                direction: system.spec.a * system.spec.zeta,
            },
            ZeroPosition::Outside => ControlSetDescription::NoControlSet,
        },
        Case::RankOne => {
            let mu = canon.a_can.a11;
            match tag.zero_position {
                ZeroPosition::Interior => {
                    let open = mu > 0.0;
                    ControlSetDescription::Strip {
                        x_interval: sorted(-z.x / mu * omega.min, -z.x / mu * omega.max),
                        x_open: [open, open],
                    }
                }
                ZeroPosition::Boundary => ControlSetDescription::PointFamily {
                    base: Vec2::ZERO,
                    direction: canon.basis.col(1),
                },
                ZeroPosition::Outside => ControlSetDescription::NoControlSet,
            }
        }
        Case::Saddle => {
            let (mu, lambda) = (canon.a_can.a11, canon.a_can.a22);
            ControlSetDescription::SaddleBox {
                x_interval: sorted(-z.x / mu * omega.min, -z.x / mu * omega.max),
                y_interval: sorted(-z.y / lambda * omega.min, -z.y / lambda * omega.max),
                y_closed: true,
            }
        }
        Case::StableNode | Case::UnstableNode => {
            let stable = system.case() == Case::StableNode;
            ControlSetDescription::NodeRegion {
                u_minus: omega.min,
                u_plus: omega.max,
                epsilon: if stable { 1 } else { -1 },
                closed: stable,
            }
        }
    }
}

pub fn control_set(spec: &SystemSpec) -> Result<ControlSetDescription> {
    Ok(describe(&LinearSystem::new(*spec)?))
}

/// `f(s, t) = φ(εs, φ(εt, v(u₁), u₂), u₁)` for a system with `det A > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeMap {
    system: LinearSystem,
    u1: f64,
    u2: f64,
    epsilon: f64,
    v1: Vec2,
    v2: Vec2,
}

impl NodeMap {
    pub fn new(system: &LinearSystem, u1: f64, u2: f64) -> Result<Self> {
        let epsilon = match system.case() {
            Case::StableNode => 1.0,
            Case::UnstableNode => -1.0,
            _ => return Err(system.wrong_case("det A > 0")),
        };
        if u1.partial_cmp(&u2) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidSpec(format!("node map needs u1 < u2, got {u1}, {u2}")));
        }
        Ok(Self {
            system: *system,
            u1,
            u2,
            epsilon,
            v1: system.equilibrium(u1)?,
            v2: system.equilibrium(u2)?,
        })
    }

    /// The map whose image is the interior of the control set.
    pub fn for_control_set(system: &LinearSystem) -> Result<Self> {
        let omega = system.omega();
        Self::new(system, omega.min, omega.max)
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn controls(&self) -> (f64, f64) {
        (self.u1, self.u2)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(v(u₁), v(u₂))`.
    pub fn equilibria(&self) -> (Vec2, Vec2) {
        (self.v1, self.v2)
    }

    /// `φ(s, φ(t, v(u₁), u₂), u₁)` with signed times and no ε.
    pub fn raw(&self, s: f64, t: f64) -> Vec2 {
        let mid = self.system.flow(t, self.v1, self.u2);
        self.system.flow(s, mid, self.u1)
    }

    /// The same map through `(u₂ − u₁) A⁻¹ e^{sA} (e^{tA} − I) ζ − u₁ A⁻¹ ζ`
    /// on the raw matrix.
    pub fn raw_via_exponentials(&self, s: f64, t: f64) -> Result<Vec2> {
        let a = self.system.spec.a;
        let zeta = self.system.spec.zeta;
        let inv = a.inverse().ok_or(Error::SingularMatrix)?;
        let es = expm2(&a, s)?;
        let et = expm2(&a, t)?;
        let core = inv * (es * ((et - Mat2::IDENTITY) * zeta));
        Ok(core.scale(self.u2 - self.u1) - (inv * zeta).scale(self.u1))
    }

    /// Columns `∂f/∂s = (u₂−u₁) e^{sA}(e^{tA}−I)ζ` and
    /// `∂f/∂t = (u₂−u₁) e^{(s+t)A} ζ` of the raw map.
    pub fn raw_jacobian(&self, s: f64, t: f64) -> Mat2 {
        let du = self.u2 - self.u1;
        let zeta = self.system.spec.zeta;
        let et_zeta = self.system.exp_apply(t, zeta);
        let ds = self.system.exp_apply(s, et_zeta - zeta).scale(du);
        let dt = self.system.exp_apply(s, et_zeta).scale(du);
        Mat2::from_cols(ds, dt)
    }

    /// `f(s, t)` including the time direction ε.
    pub fn point(&self, s: f64, t: f64) -> Vec2 {
        self.raw(self.epsilon * s, self.epsilon * t)
    }

    pub fn jacobian(&self, s: f64, t: f64) -> Mat2 {
        self.raw_jacobian(self.epsilon * s, self.epsilon * t)
            .scale(self.epsilon)
    }

    /// Damped Newton in log-parameters from one start. Returns `(s, t, residual)`
    /// when the iteration ends strictly inside the parameter box.
    fn newton_from(&self, p: Vec2, mut a: f64, mut b: f64) -> Option<(f64, f64, f64)> {
        let residual = |a: f64, b: f64| self.point(a.exp(), b.exp()) - p;
        let mut r = residual(a, b);
        let mut rn = r.norm();
        for _ in 0..NEWTON_MAX_ITERS {
            if rn == 0.0 {
                break;
            }
            let (s, t) = (a.exp(), b.exp());
            let j = self.jacobian(s, t);
            let jl = Mat2::from_cols(j.col(0).scale(s), j.col(1).scale(t));
            let Some(inv) = jl.inverse() else { break };
            let mut step = -(inv * r);
            let len = step.norm();
            if !len.is_finite() {
                break;
            }
            if len > 2.0 {
                step = step.scale(2.0 / len);
            }
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let na = (a + damping * step.x).clamp(LOG_PARAM_MIN, LOG_PARAM_MAX);
                let nb = (b + damping * step.y).clamp(LOG_PARAM_MIN, LOG_PARAM_MAX);
                let nr = residual(na, nb);
                let nn = nr.norm();
                if nn < rn {
                    let moved = (na - a).abs() + (nb - b).abs();
                    a = na;
                    b = nb;
                    r = nr;
                    rn = nn;
                    accepted = moved > 0.0;
                    break;
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let margin = 1.0;
        let interior = a > LOG_PARAM_MIN + margin
            && a < LOG_PARAM_MAX - margin
            && b > LOG_PARAM_MIN + margin
            && b < LOG_PARAM_MAX - margin;
        // A residual comparable to the smallest singular value means the map
        // is flat there (corner or far tail), not an isolated root.
        let (s, t) = (a.exp(), b.exp());
        let j = self.jacobian(s, t);
        let jl = Mat2::from_cols(j.col(0).scale(s), j.col(1).scale(t));
        let sigma_min = jl.det().abs() / jl.spectral_norm();
        let floor = f64::EPSILON * (1.0 + p.norm());
        let isolated = rn + floor <= 1e-3 * sigma_min;
        (interior && isolated).then_some((s, t, rn))
    }

    /// Multistart damped Newton over the grid `{2^k} × {2^k}`, `k = −6..6`,
    /// starts ordered by initial residual.
    pub fn newton_invert(&self, p: Vec2, tol: f64) -> Option<(f64, f64)> {
        let ln2 = std::f64::consts::LN_2;
        let mut starts: Vec<(f64, f64, f64)> = (-6..=6)
            .flat_map(|i| (-6..=6).map(move |j| (i as f64 * ln2, j as f64 * ln2)))
            .map(|(a, b)| (a, b, (self.point(a.exp(), b.exp()) - p).norm()))
            .collect();
        starts.sort_by(|x, y| x.2.total_cmp(&y.2));
        starts.into_iter().find_map(|(a, b, _)| {
            self.newton_from(p, a, b)
                .filter(|&(_, _, rn)| rn <= tol)
                .map(|(s, t, _)| (s, t))
        })
    }
}

pub fn f_map(system: &LinearSystem, u1: f64, u2: f64, s: f64, t: f64) -> Result<Vec2> {
    Ok(NodeMap::new(system, u1, u2)?.raw(s, t))
}

pub fn f_jacobian(system: &LinearSystem, u1: f64, u2: f64, s: f64, t: f64) -> Result<Mat2> {
    Ok(NodeMap::new(system, u1, u2)?.raw_jacobian(s, t))
}

pub fn invert_f(system: &LinearSystem, u1: f64, u2: f64, p: Vec2, tol: f64) -> Result<(f64, f64)> {
    NodeRegionSet::new(NodeMap::new(system, u1, u2)?).invert(p, tol)
}

/// One boundary arc `τ ↦ φ(ετ, start, control)` sampled at equal arc length.
#[derive(Clone, Debug)]
struct Arc {
    start: Vec2,
    control: f64,
    params: Vec<f64>,
    points: Vec<Vec2>,
}

impl Arc {
    fn trace(map: &NodeMap, start: Vec2, control: f64, target: Vec2, n: usize) -> Arc {
        let sys = map.system;
        let eps = map.epsilon;
        let at = |tau: f64| sys.flow(eps * tau, start, control);
        let scale = 1.0 + start.distance(target);
        let mut horizon = 1.0;
        while at(horizon).distance(target) > 1e-13 * scale && horizon < 1e5 {
            horizon *= 2.0;
        }
        let fine = 16 * n;
        let taus: Vec<f64> = (0..=fine).map(|k| horizon * k as f64 / fine as f64).collect();
        let pts: Vec<Vec2> = taus.iter().map(|&t| at(t)).collect();
        let mut cumulative = vec![0.0; pts.len()];
        for k in 1..pts.len() {
            cumulative[k] = cumulative[k - 1] + pts[k].distance(pts[k - 1]);
        }
        let total = cumulative[fine];
        let mut params = Vec::with_capacity(n);
        let mut k = 0;
        for j in 0..n {
            let goal = total * j as f64 / (n - 1) as f64;
            while k + 1 < fine && cumulative[k + 1] < goal {
                k += 1;
            }
            let span = cumulative[k + 1] - cumulative[k];
            let frac = if span > 0.0 {
                ((goal - cumulative[k]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            params.push(taus[k] + frac * (taus[k + 1] - taus[k]));
        }
        params[0] = 0.0;
        params[n - 1] = horizon;
        let mut points: Vec<Vec2> = params.iter().map(|&t| at(t)).collect();
        points[0] = start;
        points[n - 1] = target;
        Arc {
            start,
            control,
            params,
            points,
        }
    }

    fn eval(&self, map: &NodeMap, tau: f64) -> Vec2 {
        map.system.flow(map.epsilon * tau, self.start, self.control)
    }

    /// Largest distance between a chord midpoint and the arc point at the
    /// mid-parameter.
    fn chord_deviation(&self, map: &NodeMap) -> f64 {
        self.params
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, p)| {
                let mid = self.eval(map, 0.5 * (t[0] + t[1]));
                mid.distance((p[0] + p[1]).scale(0.5))
            })
            .fold(0.0, f64::max)
    }

    fn nearest_segment(&self, p: Vec2) -> (usize, f64) {
        self.points
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, segment_distance(p, w[0], w[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("arc has at least two points")
    }

    /// Exact distance from `p` to the arc near segment `i`, by golden-section
    /// search on the flow parameter.
    fn refine_distance(&self, map: &NodeMap, p: Vec2, i: usize) -> f64 {
        let last = self.params.len() - 1;
        let mut lo = self.params[i.saturating_sub(1)];
        let mut hi = self.params[(i + 2).min(last)];
        let dist = |t: f64| self.eval(map, t).distance(p);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        let (mut fc, mut fd) = (dist(c), dist(d));
        for _ in 0..120 {
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = dist(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = dist(d);
            }
        }
        let endpoints = [self.points[i], self.points[(i + 1).min(last)]];
        endpoints.iter().map(|q| q.distance(p)).fold(fc.min(fd), f64::min)
    }
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab.scale(t))
}

/// Even-odd crossing test against a closed polygon.
fn polygon_contains(points: &[Vec2], p: Vec2) -> bool {
    let mut inside = false;
    let n = points.len();
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// The node region with its cached boundary.
#[derive(Clone, Debug)]
pub struct NodeRegionSet {
    map: NodeMap,
    arcs: [Arc; 2],
    polygon: Vec<Vec2>,
    near_band: f64,
    scale: f64,
}

impl NodeRegionSet {
    pub fn new(map: NodeMap) -> Self {
        let (v1, v2) = map.equilibria();
        let (u1, u2) = map.controls();
        let first = Arc::trace(&map, v1, u2, v2, DENSE_ARC_POINTS);
        let second = Arc::trace(&map, v2, u1, v1, DENSE_ARC_POINTS);
        let mut polygon = first.points.clone();
        polygon.extend_from_slice(&second.points[1..second.points.len() - 1]);
        let scale = 1.0 + v1.norm().max(v2.norm()) + v1.distance(v2);
        let deviation = first.chord_deviation(&map).max(second.chord_deviation(&map));
        Self {
            map,
            arcs: [first, second],
            polygon,
            near_band: 4.0 * deviation + 1e-9 * scale,
            scale,
        }
    }

    pub fn map(&self) -> &NodeMap {
        &self.map
    }

    /// Exact distance to the boundary curves.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.arcs
            .iter()
            .map(|arc| {
                let (i, _) = arc.nearest_segment(p);
                arc.refine_distance(&self.map, p, i)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2, band: f64) -> Membership {
        let d = self.boundary_distance(p);
        if d <= band {
            return Membership::Boundary;
        }
        let inside = if d > self.near_band {
            polygon_contains(&self.polygon, p)
        } else {
            self.map.newton_invert(p, 1e-12 * self.scale).is_some()
        };
        if inside {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Preimage `(s, t)` of `p` under the node map.
    pub fn invert(&self, p: Vec2, tol: f64) -> Result<(f64, f64)> {
        if let Some(st) = self.map.newton_invert(p, tol) {
            return Ok(st);
        }
        let d = self.boundary_distance(p);
        if d > self.near_band.max(tol) && polygon_contains(&self.polygon, p) {
            Err(Error::InversionFailed)
        } else {
            Err(Error::NotInImage)
        }
    }

    /// Closed boundary with `n` arc-length-spaced points per arc, starting at
    /// `v(u₁)` and passing through `v(u₂)`.
    pub fn polyline(&self, n: usize) -> Polyline {
        let n = n.max(2);
        let (v1, v2) = self.map.equilibria();
        let (u1, u2) = self.map.controls();
        let first = Arc::trace(&self.map, v1, u2, v2, n);
        let second = Arc::trace(&self.map, v2, u1, v1, n);
        let mut points = first.points;
        points.extend_from_slice(&second.points[1..n - 1]);
        Polyline { points, closed: true }
    }
}

/// Ordered boundary points; `closed` joins the last point back to the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl Polyline {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# closed={}\nx,y\n", self.closed);
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.x, p.y));
        }
        out
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        let n = self.points.len();
        if n == 1 {
            return p.distance(self.points[0]);
        }
        let edges = if self.closed { n } else { n - 1 };
        (0..edges)
            .map(|i| segment_distance(p, self.points[i], self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn interval_membership(x: f64, iv: [f64; 2], band: f64) -> Membership {
    if x < iv[0] - band || x > iv[1] + band {
        Membership::Outside
    } else if x - iv[0] <= band || iv[1] - x <= band {
        Membership::Boundary
    } else {
        Membership::Inside
    }
}

fn combine(a: Membership, b: Membership) -> Membership {
    use Membership::*;
    match (a, b) {
        (Outside, _) | (_, Outside) => Outside,
        (Boundary, _) | (_, Boundary) => Boundary,
        _ => Inside,
    }
}

/// A control set together with whatever it needs to answer membership and
/// boundary queries.
#[derive(Clone, Debug)]
pub struct ControlSet {
    system: LinearSystem,
    description: ControlSetDescription,
    node: Option<NodeRegionSet>,
}

impl ControlSet {
    pub fn new(system: &LinearSystem) -> Self {
        let description = describe(system);
        let node = match description {
            ControlSetDescription::NodeRegion { .. } => Some(NodeRegionSet::new(
                NodeMap::for_control_set(system).expect("node case has a node map"),
            )),
            _ => None,
        };
        Self {
            system: *system,
            description,
            node,
        }
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        Ok(Self::new(&LinearSystem::new(*spec)?))
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn description(&self) -> &ControlSetDescription {
        &self.description
    }

    pub fn node(&self) -> Option<&NodeRegionSet> {
        self.node.as_ref()
    }

    pub fn contains(&self, p: Vec2, band: f64) -> Membership {
        let canon = &self.system.canon;
        match self.description {
            ControlSetDescription::WholePlane => Membership::Inside,
            ControlSetDescription::NoControlSet => Membership::Outside,
            ControlSetDescription::PointFamily { base, direction } => {
                let d = direction.scale(1.0 / direction.norm());
                let off = p - base;
                if off.cross(d).abs() <= band {
                    Membership::Boundary
                } else {
                    Membership::Outside
                }
            }
            ControlSetDescription::Strip { x_interval, .. } => {
                interval_membership(canon.to_canonical(p).x, x_interval, band)
            }
            ControlSetDescription::SaddleBox {
                x_interval, y_interval, ..
            } => {
                let w = canon.to_canonical(p);
                combine(
                    interval_membership(w.x, x_interval, band),
                    interval_membership(w.y, y_interval, band),
                )
            }
            ControlSetDescription::NodeRegion { .. } => self
                .node
                .as_ref()
                .expect("node region carries its boundary")
                .contains(p, band),
        }
    }

    /// Boundary for rendering: node arcs, rectangle edges clipped to
    /// `|y| ≤ extent` (strip, canonical coordinates) or a segment of the line
    /// of one-point control sets.
    pub fn boundary_polyline(&self, n: usize, extent: f64) -> Result<Polyline> {
        let n = n.max(2);
        let canon = &self.system.canon;
        let rect = |x: [f64; 2], y: [f64; 2]| {
            let corners = [
                Vec2::new(x[0], y[0]),
                Vec2::new(x[1], y[0]),
                Vec2::new(x[1], y[1]),
                Vec2::new(x[0], y[1]),
            ];
            let mut points = Vec::with_capacity(4 * (n - 1));
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                for k in 0..n - 1 {
                    let f = k as f64 / (n - 1) as f64;
                    points.push(canon.from_canonical(a + (b - a).scale(f)));
                }
            }
            Polyline { points, closed: true }
        };
        match self.description {
            ControlSetDescription::WholePlane => Err(Error::WrongVariant("WholePlane")),
            ControlSetDescription::NoControlSet => Err(Error::WrongVariant("NoControlSet")),
            ControlSetDescription::Strip { x_interval, .. } => Ok(rect(x_interval, [-extent, extent])),
            ControlSetDescription::SaddleBox {
                x_interval, y_interval, ..
            } => Ok(rect(x_interval, y_interval)),
            ControlSetDescription::PointFamily { base, direction } => {
                let d = direction.scale(1.0 / direction.norm());
                let points = (0..n)
                    .map(|k| base + d.scale(extent * (2.0 * k as f64 / (n - 1) as f64 - 1.0)))
                    .collect();
                Ok(Polyline { points, closed: false })
            }
            ControlSetDescription::NodeRegion { .. } => Ok(self
                .node
                .as_ref()
                .expect("node region carries its boundary")
                .polyline(n)),
        }
    }

    /// A point in the interior, when there is an interior.
    pub fn interior_probe(&self) -> Option<Vec2> {
        let canon = &self.system.canon;
        let mid = |iv: [f64; 2]| 0.5 * (iv[0] + iv[1]);
        match self.description {
            ControlSetDescription::WholePlane => Some(Vec2::ZERO),
            ControlSetDescription::Strip { x_interval, .. } => {
                Some(canon.from_canonical(Vec2::new(mid(x_interval), 0.0)))
            }
            ControlSetDescription::SaddleBox {
                x_interval, y_interval, ..
            } => Some(canon.from_canonical(Vec2::new(mid(x_interval), mid(y_interval)))),
            ControlSetDescription::NodeRegion { .. } => {
                let node = self.node.as_ref()?;
                let candidate = self.system.equilibrium(self.system.omega().midpoint()).ok()?;
                if node.contains(candidate, TOL_BAND) == Membership::Inside {
                    Some(candidate)
                } else {
                    Some(node.map().point(1.0, 1.0))
                }
            }
            ControlSetDescription::PointFamily { .. } | ControlSetDescription::NoControlSet => None,
        }
    }
}

pub fn boundary_polyline(spec: &SystemSpec, desc: &ControlSetDescription, n: usize, extent: f64) -> Result<Polyline> {
    let set = ControlSet::from_spec(spec)?;
    if set.description() != desc {
        return Err(Error::WrongVariant(desc.variant_name()));
    }
    set.boundary_polyline(n, extent)
}

pub fn contains(spec: &SystemSpec, desc: &ControlSetDescription, p: Vec2, band: f64) -> Result<Membership> {
    let set = ControlSet::from_spec(spec)?;
    if set.description() != desc {
        return Err(Error::WrongVariant(desc.variant_name()));
    }
    Ok(set.contains(p, band))
}
