//! Classification report shared by the front ends.

use serde::{Deserialize, Serialize};

use crate::algebra::Vec2;
use crate::control_set::{describe, ControlSetDescription};
use crate::error::Result;
use crate::system::{check_larc, CaseTag, LinearSystem, Sign, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibria {
    pub u_minus: Vec2,
    pub u_plus: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub larc_value: f64,
    pub case: String,
    pub tag: CaseTag,
    pub control_set: ControlSetDescription,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<Equilibria>,
}

fn summary(desc: &ControlSetDescription) -> String {
    match desc {
        ControlSetDescription::WholePlane => "controllable: the whole plane is the control set".into(),
        ControlSetDescription::Strip { x_open, .. } => format!(
            "strip in canonical coordinates, {}",
            if x_open[0] { "open" } else { "closed" }
        ),
        ControlSetDescription::SaddleBox { .. } => {
            "box in canonical coordinates, open in the unstable direction, closed in the stable one".into()
        }
        ControlSetDescription::NodeRegion { closed, .. } => format!(
            "{} region bounded by two flow arcs between the extreme equilibria",
            if *closed { "closed" } else { "open" }
        ),
        ControlSetDescription::PointFamily { .. } => {
            "line of one-point control sets, no control set with interior".into()
        }
        ControlSetDescription::NoControlSet => "no control set".into(),
    }
}

pub fn classify_report(spec: &SystemSpec) -> Result<ClassifyReport> {
    let system = LinearSystem::new(*spec)?;
    let tag = system.tag();
    let control_set = describe(&system);
    let equilibria = if tag.det_sign != Sign::Zero {
        Some(Equilibria {
            u_minus: system.equilibrium(spec.omega.min)?,
            u_plus: system.equilibrium(spec.omega.max)?,
        })
    } else {
        None
    };
    Ok(ClassifyReport {
        larc_value: check_larc(spec),
        case: system.case().name().to_string(),
        tag,
        summary: summary(&control_set),
        control_set,
        equilibria,
    })
}
