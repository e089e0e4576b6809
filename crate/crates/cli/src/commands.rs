use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use planar_lcs::{
    classify_report, parse_spec, propagate, steer as plan, ControlSet, ControlSetDescription, Error, LinearSystem,
    Schedule, SteeringResult, Vec2, ZeroPosition,
};
use serde::{Deserialize, Serialize};

use crate::svg::{self, Overlay};
use crate::Input;

pub fn load(path: &Path) -> anyhow::Result<LinearSystem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = parse_spec(&text).with_context(|| format!("parsing {}", path.display()))?;
    let system = LinearSystem::new(spec).with_context(|| format!("classifying {}", path.display()))?;
    Ok(system)
}

pub fn emit(input: &Input, text: &str) -> anyhow::Result<()> {
    match &input.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Names the case that rules a request out.
pub fn refusal(system: &LinearSystem, set: &ControlSetDescription) -> String {
    let zero = match system.tag().zero_position {
        ZeroPosition::Interior => "in the interior of",
        ZeroPosition::Boundary => "on the boundary of",
        ZeroPosition::Outside => "outside",
    };
    format!(
        "{} system with 0 {zero} the control range, control set {}",
        system.case().name(),
        set.variant_name()
    )
}

pub fn classify(input: &Input) -> anyhow::Result<()> {
    let system = load(&input.config)?;
    let report = classify_report(&system.spec)?;
    emit(input, &(serde_json::to_string_pretty(&report)? + "\n"))
}

pub fn control_set(input: &Input, points: usize, extent: f64) -> anyhow::Result<()> {
    let system = load(&input.config)?;
    let report = classify_report(&system.spec)?;
    let set = ControlSet::new(&system);
    let mut text = format!("# {}: {}\n", report.control_set.variant_name(), report.summary);
    match set.boundary_polyline(points, extent) {
        Ok(line) => text.push_str(&line.to_csv()),
        Err(Error::WrongVariant(_)) => text.push_str("x,y\n"),
        Err(e) => return Err(e.into()),
    }
    emit(input, &text)
}

/// Schedule files hold either a bare segment list or a `steer` report.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Bare(Schedule),
    Report { schedule: Schedule },
}

pub fn read_schedule(path: &Path) -> anyhow::Result<Schedule> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| Error::InvalidSchedule(format!("{}: {e}", path.display())))?;
    Ok(match file {
        ScheduleFile::Bare(s) | ScheduleFile::Report { schedule: s } => s,
    })
}

pub fn simulate(input: &Input, init: Vec2, schedule: &Path, samples: usize) -> anyhow::Result<()> {
    let system = load(&input.config)?;
    let schedule = read_schedule(schedule)?;
    let traj = propagate(&system, init, &schedule)?;
    let mut text = String::from("t,x,y\n");
    for (t, p) in traj.sample_uniform(samples) {
        text.push_str(&format!("{t},{},{}\n", p.x, p.y));
    }
    emit(input, &text)
}

#[derive(Serialize)]
struct SteerReport<'a> {
    from: Vec2,
    to: Vec2,
    endpoint: Vec2,
    #[serde(flatten)]
    result: &'a SteeringResult,
}

pub fn steer(input: &Input, from: Vec2, to: Vec2, tol: f64) -> anyhow::Result<()> {
    let system = load(&input.config)?;
    let set = ControlSet::new(&system);
    let result = plan(&system.spec, from, to, tol).with_context(|| refusal(&system, set.description()))?;
    let report = SteerReport {
        from,
        to,
        endpoint: system.endpoint(from, &result.schedule),
        result: &result,
    };
    emit(input, &(serde_json::to_string_pretty(&report)? + "\n"))
}

pub fn plot(
    input: &Input,
    canonical: bool,
    trajectories: &[std::path::PathBuf],
    inits: &[Vec2],
    extent: f64,
    points: usize,
) -> anyhow::Result<()> {
    if trajectories.len() != inits.len() {
        return Err(Error::InvalidSchedule(format!(
            "{} trajectory files but {} --init points",
            trajectories.len(),
            inits.len()
        ))
        .into());
    }
    let system = load(&input.config)?;
    let mut overlays = Vec::new();
    for (path, &init) in trajectories.iter().zip(inits) {
        let schedule = read_schedule(path)?;
        let traj = propagate(&system, init, &schedule)?;
        overlays.push(Overlay {
            points: traj.sample_segments(32),
        });
    }
    let doc = svg::render(&system, &overlays, canonical, extent, points)?;
    emit(input, &doc)
}
