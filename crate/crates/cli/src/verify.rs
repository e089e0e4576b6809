//! Cross-validation of the closed forms against the reachability oracle.

use planar_lcs::{
    estimate_control_set, mutually_reachable, propagate, steer, CellLabel, ControlSet, Error, Grid, LinearSystem,
    Membership, ReachConfig, Vec2,
};
use rand::seq::IndexedRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{emit, load};
use crate::Input;

/// Endpoint tolerance for steering checks.
const STEER_TOL: f64 = 1e-6;
const AGREEMENT_MIN: f64 = 0.95;
/// Canonical half-height of the strip window.
const STRIP_EXTENT: f64 = 2.0;
const PLANE_EXTENT: f64 = 2.0;
/// A single pair gets a larger budget than one grid sweep.
const PAIR_TRIAL_FACTOR: usize = 10;

#[derive(Serialize)]
struct Property {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    case: &'static str,
    control_set: &'static str,
    seed: u64,
    trials: usize,
    properties: Vec<Property>,
    pass: bool,
}

/// Grid over the control set's bounding box plus 20% on each side.
fn window(set: &ControlSet, cells: usize) -> anyhow::Result<Grid> {
    let pts = match set.boundary_polyline(256, STRIP_EXTENT) {
        Ok(line) => line.points,
        Err(Error::WrongVariant(_)) => vec![
            Vec2::new(-PLANE_EXTENT, -PLANE_EXTENT),
            Vec2::new(PLANE_EXTENT, PLANE_EXTENT),
        ],
        Err(e) => return Err(e.into()),
    };
    let lo = pts.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |a, p| {
        Vec2::new(a.x.min(p.x), a.y.min(p.y))
    });
    let hi = pts
        .iter()
        .fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, p| {
            Vec2::new(a.x.max(p.x), a.y.max(p.y))
        });
    let pad = (hi - lo).scale(0.2);
    Ok(Grid::new(
        [lo.x - pad.x, hi.x + pad.x],
        [lo.y - pad.y, hi.y + pad.y],
        cells,
        cells,
    )?)
}

fn steering_checks(system: &LinearSystem, inside: &[Vec2], pairs: usize, rng: &mut ChaCha8Rng) -> Property {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..pairs {
        let (Some(&v0), Some(&v1)) = (inside.choose(rng), inside.choose(rng)) else {
            break;
        };
        match steer(&system.spec, v0, v1, STEER_TOL) {
            Ok(r) => {
                let replayed = propagate(system, v0, &r.schedule).map(|t| t.endpoint().distance(v1));
                match replayed {
                    Ok(err) if err <= STEER_TOL => worst = worst.max(err),
                    Ok(err) => failures.push(format!("({}, {}) -> ({}, {}): error {err:e}", v0.x, v0.y, v1.x, v1.y)),
                    Err(e) => failures.push(e.to_string()),
                }
            }
            Err(e) => failures.push(format!("({}, {}) -> ({}, {}): {e}", v0.x, v0.y, v1.x, v1.y)),
        }
    }
    Property {
        name: "steering_replay",
        pass: failures.is_empty() && !inside.is_empty(),
        detail: if failures.is_empty() {
            format!("{pairs} pairs replay within {STEER_TOL:e}, worst {worst:.3e}")
        } else {
            format!("{} of {pairs} failed; first: {}", failures.len(), failures[0])
        },
    }
}

pub fn run(input: &Input, seed: u64, trials: usize, cells: usize, pairs: usize) -> anyhow::Result<bool> {
    let system = load(&input.config)?;
    let set = ControlSet::new(&system);
    let desc = *set.description();
    let mut properties = Vec::new();

    if desc.has_interior() {
        let grid = window(&set, cells)?;
        let cell = grid.cell_size();
        let cfg = ReachConfig {
            horizon: 12.0,
            segments_per_trial: 24,
            trials,
            seed,
            epsilon: 0.75 * cell.x.max(cell.y),
            bang_bias: 0.9,
        };
        let estimate = estimate_control_set(&system.spec, &grid, &cfg)?;
        let agreement = estimate.agreement(&set);
        properties.push(Property {
            name: "grid_agreement",
            pass: agreement.fraction() >= AGREEMENT_MIN,
            detail: format!(
                "{} of {} cells agree ({:.1}%), {} near the boundary skipped; labels In {}, Out {}, Unknown {}",
                agreement.agreeing,
                agreement.compared,
                100.0 * agreement.fraction(),
                agreement.excluded,
                estimate.count(CellLabel::In),
                estimate.count(CellLabel::Out),
                estimate.count(CellLabel::Unknown)
            ),
        });

        let band = cell.norm();
        let inside: Vec<Vec2> = estimate
            .centers
            .iter()
            .copied()
            .filter(|&c| set.contains(c, band) == Membership::Inside)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        properties.push(steering_checks(&system, &inside, pairs, &mut rng));

        // The partner sits well inside so a plain random search can return.
        let probe = estimate.probe;
        let depth = 0.15 * Vec2::new(grid.x_range[1] - grid.x_range[0], grid.y_range[1] - grid.y_range[0]).norm();
        let deep: Vec<Vec2> = inside
            .iter()
            .copied()
            .filter(|&c| set.contains(c, depth) == Membership::Inside)
            .collect();
        let partner = deep.choose(&mut rng).or_else(|| inside.choose(&mut rng)).copied();
        let (pass, detail) = match partner {
            Some(w) => {
                let pair_cfg = ReachConfig {
                    trials: PAIR_TRIAL_FACTOR * trials,
                    ..cfg
                };
                let ok = mutually_reachable(&system.spec, probe, w, &pair_cfg)?;
                (
                    ok,
                    format!(
                        "probe ({}, {}) and ({}, {}), epsilon {:.3e}",
                        probe.x, probe.y, w.x, w.y, cfg.epsilon
                    ),
                )
            }
            None => (false, "no interior grid cell".into()),
        };
        properties.push(Property {
            name: "oracle_mutual_reachability",
            pass,
            detail,
        });
    } else {
        let grid = Grid::square(PLANE_EXTENT, cells)?;
        let cfg = ReachConfig {
            trials,
            seed,
            ..ReachConfig::default()
        };
        let no_probe = matches!(
            estimate_control_set(&system.spec, &grid, &cfg),
            Err(Error::NoProbeAvailable(_))
        );
        properties.push(Property {
            name: "no_interior",
            pass: no_probe,
            detail: format!("{} has no interior to probe", desc.variant_name()),
        });
    }

    let pass = properties.iter().all(|p| p.pass);
    let report = Report {
        case: system.case().name(),
        control_set: desc.variant_name(),
        seed,
        trials,
        properties,
        pass,
    };
    emit(input, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(pass)
}
