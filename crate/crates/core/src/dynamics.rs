//! Closed-form solutions for constant and piecewise-constant controls.
//!
//! Flows are evaluated in canonical coordinates and mapped back through the
//! canonical basis. Negative times are allowed everywhere and give the
//! backward flow.

use serde::{Deserialize, Serialize};

use crate::algebra::Vec2;
use crate::error::{Error, Result};
use crate::system::{CanonicalForm, CanonicalShape, Case, ControlRange, LinearSystem};

/// Hold control `u` for `dt` time units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub u: f64,
    pub dt: f64,
}

impl Segment {
    pub fn new(u: f64, dt: f64) -> Self {
        Self { u, dt }
    }
}

/// A piecewise-constant control. Serializes as a JSON list of
/// `{"u": …, "dt": …}` objects.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn push(&mut self, u: f64, dt: f64) {
        self.segments.push(Segment::new(u, dt));
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    pub fn concat(&self, other: &Schedule) -> Schedule {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Schedule { segments }
    }

    /// Drop zero-length segments.
    pub fn compact(mut self) -> Schedule {
        self.segments.retain(|s| s.dt > 0.0);
        self
    }

    pub fn validate(&self, omega: &ControlRange) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            if !s.u.is_finite() || !omega.contains(s.u) {
                return Err(Error::InvalidSchedule(format!(
                    "segment {i}: control {} outside [{}, {}]",
                    s.u, omega.min, omega.max
                )));
            }
            if !s.dt.is_finite() || s.dt < 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "segment {i}: duration {} must be finite and nonnegative",
                    s.dt
                )));
            }
        }
        Ok(())
    }
}

fn flow_canonical(shape: &CanonicalShape, zc: Vec2, t: f64, w: Vec2, u: f64) -> Vec2 {
    match *shape {
        CanonicalShape::Nilpotent => Vec2::new(w.x + t * (w.y + u * zc.x) + 0.5 * u * zc.y * t * t, w.y + u * zc.y * t),
        CanonicalShape::RankOne { mu } => {
            Vec2::new(w.x + (w.x + u * zc.x / mu) * (mu * t).exp_m1(), w.y + u * zc.y * t)
        }
        CanonicalShape::Diagonal { first, second } => Vec2::new(
            w.x + (w.x + u * zc.x / first) * (first * t).exp_m1(),
            w.y + (w.y + u * zc.y / second) * (second * t).exp_m1(),
        ),
        CanonicalShape::Jordan { lambda } => {
            let eq = Vec2::new(-u * (zc.x / lambda - zc.y / (lambda * lambda)), -u * zc.y / lambda);
            let d = w - eq;
            let m = (lambda * t).exp_m1();
            Vec2::new(w.x + m * d.x + (lambda * t).exp() * t * d.y, w.y + m * d.y)
        }
    }
}

impl CanonicalForm {
    /// `φ(t, w, u)` with `w` in canonical coordinates.
    pub fn flow(&self, t: f64, w: Vec2, u: f64) -> Vec2 {
        flow_canonical(&self.shape, self.zeta_can, t, w, u)
    }
}

impl LinearSystem {
    /// `φ(t, v, u)` for a constant control.
    pub fn flow(&self, t: f64, v: Vec2, u: f64) -> Vec2 {
        if t == 0.0 {
            return v;
        }
        let w = self.canon.to_canonical(v);
        self.canon.from_canonical(self.canon.flow(t, w, u))
    }

    /// `e^{tA} v`.
    pub fn exp_apply(&self, t: f64, v: Vec2) -> Vec2 {
        self.flow(t, v, 0.0)
    }

    /// Endpoint of a schedule without validation.
    pub fn endpoint(&self, v: Vec2, schedule: &Schedule) -> Vec2 {
        schedule.segments.iter().fold(v, |p, s| self.flow(s.dt, p, s.u))
    }

    pub fn propagate(&self, v: Vec2, schedule: &Schedule) -> Result<Trajectory> {
        schedule.validate(&self.spec.omega)?;
        let mut joints = Vec::with_capacity(schedule.len() + 1);
        let mut times = Vec::with_capacity(schedule.len() + 1);
        let (mut p, mut t) = (v, 0.0);
        joints.push(p);
        times.push(t);
        for s in &schedule.segments {
            p = self.flow(s.dt, p, s.u);
            t += s.dt;
            joints.push(p);
            times.push(t);
        }
        Ok(Trajectory {
            system: *self,
            schedule: schedule.clone(),
            joints,
            times,
        })
    }
}

pub fn solve_constant(system: &LinearSystem, t: f64, v: Vec2, u: f64) -> Vec2 {
    system.flow(t, v, u)
}

pub fn propagate(system: &LinearSystem, v: Vec2, schedule: &Schedule) -> Result<Trajectory> {
    system.propagate(v, schedule)
}

/// The solution of a schedule from a start point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    system: LinearSystem,
    schedule: Schedule,
    joints: Vec<Vec2>,
    times: Vec<f64>,
}

impl Trajectory {
    pub fn start(&self) -> Vec2 {
        self.joints[0]
    }

    pub fn endpoint(&self) -> Vec2 {
        *self.joints.last().expect("at least the start point")
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Points at segment boundaries, start and endpoint included.
    pub fn joints(&self) -> &[Vec2] {
        &self.joints
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("at least time zero")
    }

    /// State at `time`, clamped to `[0, duration]`.
    pub fn at(&self, time: f64) -> Vec2 {
        if time <= 0.0 {
            return self.start();
        }
        if time >= self.duration() {
            return self.endpoint();
        }
        // Last joint with times[i] <= time.
        let i = self.times.partition_point(|&t| t <= time) - 1;
        let s = self.schedule.segments[i];
        self.system.flow(time - self.times[i], self.joints[i], s.u)
    }

    /// `n` samples uniform in time over `[0, duration]`, endpoints included.
    pub fn sample_uniform(&self, n: usize) -> Vec<(f64, Vec2)> {
        let n = n.max(2);
        let total = self.duration();
        (0..n)
            .map(|k| {
                let t = if k + 1 == n {
                    total
                } else {
                    total * k as f64 / (n - 1) as f64
                };
                (t, self.at(t))
            })
            .collect()
    }

    /// Samples every segment at `per_segment` evenly spaced interior times
    /// plus its joints. Used for drawing.
    pub fn sample_segments(&self, per_segment: usize) -> Vec<Vec2> {
        let mut out = vec![self.start()];
        for (i, s) in self.schedule.segments.iter().enumerate() {
            for k in 1..=per_segment {
                let tau = s.dt * k as f64 / (per_segment + 1) as f64;
                out.push(self.system.flow(tau, self.joints[i], s.u));
            }
            out.push(self.joints[i + 1]);
        }
        out
    }
}

/// `F_u(x, y) = y² − 2ux`, conserved along the constant-`u` flow in
/// nilpotent canonical coordinates.
pub fn invariant_f(u: f64, v: Vec2) -> f64 {
    v.y * v.y - 2.0 * u * v.x
}

/// `G_u(x, y) = |x + uζ₁/μ|^{−λ} |y + uζ₂/λ|^{μ}`, conserved along the
/// constant-`u` flow in saddle canonical coordinates.
pub fn invariant_g(canon: &CanonicalForm, u: f64, v: Vec2) -> Result<f64> {
    match (canon.tag.case(), canon.shape) {
        (
            Case::Saddle,
            CanonicalShape::Diagonal {
                first: mu,
                second: lambda,
            },
        ) => {
            let z = canon.zeta_can;
            let a = (v.x + u * z.x / mu).abs();
            let b = (v.y + u * z.y / lambda).abs();
            Ok(a.powf(-lambda) * b.powf(mu))
        }
        _ => Err(Error::WrongCase {
            expected: "saddle (det A < 0)",
            actual: canon.tag.case().name().to_string(),
        }),
    }
}
