//! Browser bindings for the static demo in `www/`.
//!
//! The plain functions take and return JSON strings so they can be tested
//! natively; the `*_json` exports wrap them for JavaScript.

use planar_lcs::{
    classify_report, parse_spec, steer, ControlSet, ControlSetDescription, Error, LinearSystem, Sign, Vec2,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points drawn per steered segment.
const SAMPLES_PER_SEGMENT: usize = 48;

fn system(config: &str) -> Result<LinearSystem, String> {
    let spec = parse_spec(config).map_err(|e| e.to_string())?;
    LinearSystem::new(spec).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Classification report as JSON.
pub fn classify(config: &str) -> Result<String, String> {
    let system = system(config)?;
    to_json(&classify_report(&system.spec).map_err(|e| e.to_string())?)
}

#[derive(Serialize)]
struct Boundary {
    variant: &'static str,
    summary: String,
    whole_plane: bool,
    closed: bool,
    points: Vec<[f64; 2]>,
    equilibria: Vec<[f64; 2]>,
}

/// Boundary polyline of the control set plus the extreme equilibria.
pub fn boundary(config: &str, n: usize, extent: f64) -> Result<String, String> {
    let system = system(config)?;
    let report = classify_report(&system.spec).map_err(|e| e.to_string())?;
    let set = ControlSet::new(&system);
    let (points, closed) = match set.boundary_polyline(n, extent) {
        Ok(line) => (line.points.iter().map(|p| p.to_array()).collect(), line.closed),
        Err(Error::WrongVariant(_)) => (Vec::new(), false),
        Err(e) => return Err(e.to_string()),
    };
    let omega = system.omega();
    let equilibria = if system.tag().det_sign != Sign::Zero {
        [omega.min, omega.max]
            .iter()
            .filter_map(|&u| system.equilibrium(u).ok())
            .map(Vec2::to_array)
            .collect()
    } else {
        Vec::new()
    };
    to_json(&Boundary {
        variant: set.description().variant_name(),
        summary: report.summary,
        whole_plane: matches!(set.description(), ControlSetDescription::WholePlane),
        closed,
        points,
        equilibria,
    })
}

#[derive(Serialize)]
struct Steered {
    segments: Vec<[f64; 2]>,
    endpoint_error: f64,
    duration: f64,
    path: Vec<[f64; 2]>,
}

/// Steering schedule from `from` to `to` and its sampled trajectory.
pub fn steer_between(config: &str, from: [f64; 2], to: [f64; 2], tol: f64) -> Result<String, String> {
    let system = system(config)?;
    let (v0, v1) = (Vec2::from(from), Vec2::from(to));
    let result = steer(&system.spec, v0, v1, tol).map_err(|e| e.to_string())?;
    let traj = system.propagate(v0, &result.schedule).map_err(|e| e.to_string())?;
    to_json(&Steered {
        segments: result.schedule.segments.iter().map(|s| [s.u, s.dt]).collect(),
        endpoint_error: result.endpoint_error,
        duration: result.schedule.total_duration(),
        path: traj
            .sample_segments(SAMPLES_PER_SEGMENT)
            .into_iter()
            .map(Vec2::to_array)
            .collect(),
    })
}

#[wasm_bindgen]
pub fn classify_json(config: &str) -> Result<String, JsError> {
    classify(config).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn boundary_json(config: &str, n: usize, extent: f64) -> Result<String, JsError> {
    boundary(config, n, extent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn steer_json(config: &str, x0: f64, y0: f64, x1: f64, y1: f64, tol: f64) -> Result<String, JsError> {
    steer_between(config, [x0, y0], [x1, y1], tol).map_err(|e| JsError::new(&e))
}
