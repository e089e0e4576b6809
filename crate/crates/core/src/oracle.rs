//! Monte Carlo reachability.
//!
//! Random piecewise-constant controls approximate positive orbits. Every
//! trial draws from its own ChaCha stream keyed by `(seed, trial index)`, so
//! results do not depend on how trials are scheduled across threads.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::algebra::Vec2;
use crate::control_set::{ControlSet, Membership};
use crate::dynamics::Schedule;
use crate::error::{Error, Result};
use crate::system::{ControlRange, LinearSystem, SystemSpec};

/// Cap on the sub-samples checked along one segment.
const MAX_SUBSTEPS: usize = 1 << 16;
const TARGET_SALT: u64 = 0x5eed_7a49_e7c0_ffee;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachConfig {
    pub horizon: f64,
    pub segments_per_trial: usize,
    pub trials: usize,
    pub seed: u64,
    /// Hit tolerance.
    pub epsilon: f64,
    /// Probability that a segment uses an extreme control.
    pub bang_bias: f64,
}

impl Default for ReachConfig {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            segments_per_trial: 20,
            trials: 400,
            seed: 0,
            epsilon: 1e-2,
            bang_bias: 0.8,
        }
    }
}

impl ReachConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("reach config: {msg}")));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(0.0..=1.0).contains(&self.bang_bias) {
            return bad("bang_bias must lie in [0, 1]");
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// The random schedule of one trial.
pub fn trial_schedule(omega: &ControlRange, cfg: &ReachConfig, trial: usize) -> Schedule {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut schedule = Schedule::empty();
    if cfg.segments_per_trial == 0 {
        return schedule;
    }
    let durations = Exp::new(cfg.segments_per_trial as f64 / cfg.horizon).expect("positive rate");
    for _ in 0..cfg.segments_per_trial {
        let dt = durations.sample(&mut rng);
        let u = if rng.random::<f64>() < cfg.bang_bias {
            if rng.random::<bool>() {
                omega.max
            } else {
                omega.min
            }
        } else {
            rng.random_range(omega.min..=omega.max)
        };
        schedule.push(u, dt);
    }
    schedule
}

#[cfg(feature = "parallel")]
fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn any_indexed<F>(n: usize, f: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().any(f)
}

#[cfg(not(feature = "parallel"))]
fn any_indexed<F>(n: usize, f: F) -> bool
where
    F: Fn(usize) -> bool,
{
    (0..n).any(f)
}

/// Segment endpoints of every trial, trial-major: `trials × (segments + 1)`
/// points, the first of each trial being `v`.
pub fn sample_reachable(spec: &SystemSpec, v: Vec2, cfg: &ReachConfig) -> Result<Vec<Vec2>> {
    cfg.validate()?;
    let system = LinearSystem::new(*spec)?;
    let omega = system.omega();
    let per_trial = map_indexed(cfg.trials, |trial| {
        let schedule = trial_schedule(&omega, cfg, trial);
        let mut points = Vec::with_capacity(schedule.len() + 1);
        let mut p = v;
        points.push(p);
        for seg in &schedule.segments {
            p = system.flow(seg.dt, p, seg.u);
            points.push(p);
        }
        points
    });
    Ok(per_trial.into_iter().flatten().collect())
}

/// Walks the trajectory of `schedule` from `v` at spacing about `spacing`,
/// stopping early when `visit` returns true.
/// Visits points along every segment until `visit` returns true. Steps are
/// sized by a Gronwall bound so no stretch of path longer than `spacing` is
/// skipped while it is within `spacing` of the zone described by `gap`.
fn walk(
    system: &LinearSystem,
    v: Vec2,
    schedule: &Schedule,
    spacing: f64,
    gap: impl Fn(Vec2) -> f64,
    mut visit: impl FnMut(Vec2) -> bool,
) -> bool {
    let a_norm = system.spec.a.spectral_norm();
    let z_norm = system.spec.zeta.norm();
    let mut p = v;
    if visit(p) {
        return true;
    }
    for seg in &schedule.segments {
        let end = system.flow(seg.dt, p, seg.u);
        let (mut t, mut q, mut steps) = (0.0, p, 0);
        loop {
            let reach = spacing.max(gap(q));
            let speed = a_norm * q.norm() + seg.u.abs() * z_norm;
            let h = if speed <= 0.0 {
                f64::INFINITY
            } else if a_norm > 0.0 {
                (a_norm * reach / speed).ln_1p() / a_norm
            } else {
                reach / speed
            };
            t += h.max(1e-12 * seg.dt);
            steps += 1;
            if t >= seg.dt || steps >= MAX_SUBSTEPS || !q.is_finite() {
                break;
            }
            q = system.flow(t, p, seg.u);
            if visit(q) {
                return true;
            }
        }
        if !end.is_finite() {
            return false;
        }
        p = end;
        if visit(p) {
            return true;
        }
    }
    false
}

fn reaches(system: &LinearSystem, v: Vec2, w: Vec2, cfg: &ReachConfig) -> bool {
    let omega = system.omega();
    any_indexed(cfg.trials, |trial| {
        let schedule = trial_schedule(&omega, cfg, trial);
        walk(
            system,
            v,
            &schedule,
            0.5 * cfg.epsilon,
            |p| p.distance(w) - cfg.epsilon,
            |p| p.distance(w) <= cfg.epsilon,
        )
    })
}

/// True when sampled trajectories pass within `epsilon` of `w` from `v` and
/// of `v` from `w`.
pub fn mutually_reachable(spec: &SystemSpec, v: Vec2, w: Vec2, cfg: &ReachConfig) -> Result<bool> {
    cfg.validate()?;
    let system = LinearSystem::new(*spec)?;
    if v == w {
        return Ok(true);
    }
    Ok(reaches(&system, v, w, cfg) && reaches(&system, w, v, cfg))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(x_range) || !ok(y_range) || nx == 0 || ny == 0 {
            return Err(Error::InvalidSpec(
                "grid needs increasing finite ranges and nonzero resolution".into(),
            ));
        }
        Ok(Self {
            x_range,
            y_range,
            nx,
            ny,
        })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new([-half_width, half_width], [-half_width, half_width], n, n)
    }

    pub fn cell_size(&self) -> Vec2 {
        Vec2::new(
            (self.x_range[1] - self.x_range[0]) / self.nx as f64,
            (self.y_range[1] - self.y_range[0]) / self.ny as f64,
        )
    }

    /// Centers in row-major order (x fastest).
    pub fn centers(&self) -> Vec<Vec2> {
        let h = self.cell_size();
        (0..self.ny)
            .flat_map(|j| {
                (0..self.nx).map(move |i| {
                    Vec2::new(
                        self.x_range[0] + (i as f64 + 0.5) * h.x,
                        self.y_range[0] + (j as f64 + 0.5) * h.y,
                    )
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    /// Reached from the probe and reaches back.
    In,
    /// Not reached from the probe.
    Out,
    /// Reached from the probe, no return found within the budget.
    Unknown,
}

impl CellLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CellLabel::In => "In",
            CellLabel::Out => "Out",
            CellLabel::Unknown => "Unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEstimate {
    pub grid: Grid,
    pub probe: Vec2,
    pub centers: Vec<Vec2>,
    pub labels: Vec<CellLabel>,
}

impl GridEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,label\n");
        for (c, l) in self.centers.iter().zip(&self.labels) {
            out.push_str(&format!("{},{},{}\n", c.x, c.y, l.as_str()));
        }
        out
    }

    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Compares labels with closed-form membership. A cell agrees when it is
    /// `In` exactly when its center is `Inside`. Cells whose center lies
    /// within one cell diagonal of the boundary are skipped.
    pub fn agreement(&self, set: &ControlSet) -> Agreement {
        let ring = self.grid.cell_size().norm();
        let mut agreement = Agreement::default();
        for (c, &l) in self.centers.iter().zip(&self.labels) {
            match set.contains(*c, ring) {
                Membership::Boundary => agreement.excluded += 1,
                m => {
                    agreement.compared += 1;
                    if (l == CellLabel::In) == (m == Membership::Inside) {
                        agreement.agreeing += 1;
                    }
                }
            }
        }
        agreement
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub compared: usize,
    pub agreeing: usize,
    pub excluded: usize,
}

impl Agreement {
    pub fn fraction(&self) -> f64 {
        if self.compared == 0 {
            1.0
        } else {
            self.agreeing as f64 / self.compared as f64
        }
    }
}

/// Points visited from the probe, bucketed at the hit tolerance.
struct Cloud {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<Vec2>>,
}

impl Cloud {
    fn key(&self, p: Vec2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: Vec2) {
        if p.is_finite() {
            let k = self.key(p);
            self.buckets.entry(k).or_default().push(p);
        }
    }

    fn hits(&self, w: Vec2) -> bool {
        let (i, j) = self.key(w);
        (i - 1..=i + 1).any(|a| {
            (j - 1..=j + 1).any(|b| {
                self.buckets
                    .get(&(a, b))
                    .is_some_and(|pts| pts.iter().any(|p| p.distance(w) <= self.cell))
            })
        })
    }
}

/// Trials per growth round of [`sweep`].
const BATCH: usize = 4;

/// Approximates the orbit of `v` over the grid. After the first round each
/// trial restarts from an already reached point, the one covering the cell
/// nearest a random target, so every sample is still an exact endpoint of a
/// concatenated schedule from `v`. Targets are drawn from `wanted` cells not
/// covered yet when given, else uniformly over the grid.
fn sweep(system: &LinearSystem, v: Vec2, grid: &Grid, cfg: &ReachConfig, wanted: Option<&[bool]>) -> Cloud {
    let margin = cfg.epsilon;
    let gap = |p: Vec2| {
        let dx = (grid.x_range[0] - margin - p.x)
            .max(p.x - grid.x_range[1] - margin)
            .max(0.0);
        let dy = (grid.y_range[0] - margin - p.y)
            .max(p.y - grid.y_range[1] - margin)
            .max(0.0);
        dx.hypot(dy)
    };
    let h = grid.cell_size();
    let cell_of = |p: Vec2| {
        let i = ((p.x - grid.x_range[0]) / h.x).floor();
        let j = ((p.y - grid.y_range[0]) / h.y).floor();
        let inside = i >= 0.0 && j >= 0.0 && i < grid.nx as f64 && j < grid.ny as f64;
        inside.then(|| j as usize * grid.nx + i as usize)
    };
    let centers = grid.centers();
    let omega = system.omega();
    let mut seeds: Vec<Option<Vec2>> = vec![None; centers.len()];
    let mut covered: Vec<usize> = Vec::new();
    let mut cloud = Cloud {
        cell: cfg.epsilon,
        buckets: HashMap::new(),
    };
    let mut first = 0;
    while first < cfg.trials {
        let last = (first + BATCH).min(cfg.trials);
        let paths = map_indexed(last - first, |k| {
            let trial = first + k;
            let start = if covered.is_empty() {
                v
            } else {
                let mut rng = trial_rng(cfg.seed ^ TARGET_SALT, trial);
                let open: Vec<usize> = match wanted {
                    Some(w) => (0..centers.len()).filter(|&c| w[c] && seeds[c].is_none()).collect(),
                    None => Vec::new(),
                };
                let nearest = if rng.random::<bool>() {
                    let target = if open.is_empty() {
                        Vec2::new(
                            rng.random_range(grid.x_range[0]..grid.x_range[1]),
                            rng.random_range(grid.y_range[0]..grid.y_range[1]),
                        )
                    } else {
                        centers[open[rng.random_range(0..open.len())]]
                    };
                    covered
                        .iter()
                        .copied()
                        .min_by(|&i, &j| centers[i].distance(target).total_cmp(&centers[j].distance(target)))
                        .expect("nonempty")
                } else {
                    covered[rng.random_range(0..covered.len())]
                };
                seeds[nearest].expect("covered cells have seeds")
            };
            let schedule = trial_schedule(&omega, cfg, trial);
            let mut pts = Vec::new();
            walk(system, start, &schedule, 0.5 * cfg.epsilon, gap, |p| {
                if gap(p) == 0.0 {
                    pts.push(p);
                }
                false
            });
            pts
        });
        for p in paths.into_iter().flatten() {
            cloud.insert(p);
            if let Some(c) = cell_of(p) {
                if seeds[c].is_none() {
                    seeds[c] = Some(p);
                    covered.push(c);
                }
            }
        }
        first = last;
    }
    cloud
}

/// Labels every grid cell center by mutual reachability with an interior
/// probe point of the control set.
pub fn estimate_control_set(spec: &SystemSpec, grid: &Grid, cfg: &ReachConfig) -> Result<GridEstimate> {
    cfg.validate()?;
    let system = LinearSystem::new(*spec)?;
    let set = ControlSet::new(&system);
    let probe = set
        .interior_probe()
        .ok_or(Error::NoProbeAvailable(set.description().variant_name()))?;
    let omega = system.omega();

    let forward = sweep(&system, probe, grid, cfg, None);
    let hit: Vec<bool> = grid.centers().iter().map(|&c| forward.hits(c)).collect();
    // Points that reach the probe are the forward orbit of the probe under
    // the reversed system, so one backward sweep replaces a search per cell.
    let reversed = SystemSpec::new(spec.a.scale(-1.0), -spec.zeta, omega.min, omega.max)?;
    let backward = sweep(&LinearSystem::new(reversed)?, probe, grid, cfg, Some(&hit));

    let centers = grid.centers();
    let labels = centers
        .iter()
        .map(|&c| match (forward.hits(c), backward.hits(c)) {
            (false, _) => CellLabel::Out,
            (true, true) => CellLabel::In,
            (true, false) => CellLabel::Unknown,
        })
        .collect();
    Ok(GridEstimate {
        grid: *grid,
        probe,
        centers,
        labels,
    })
}
