//! JSON system description `{"A": [[a, b], [c, d]], "zeta": [z1, z2], "omega": [umin, umax]}`.

use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Vec2};
use crate::error::{Error, Result};
use crate::system::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "A")]
    pub a: [[f64; 2]; 2],
    pub zeta: [f64; 2],
    pub omega: [f64; 2],
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("malformed system config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite numbers serialize")
    }

    pub fn to_spec(&self) -> Result<SystemSpec> {
        SystemSpec::new(
            Mat2::from_rows(self.a),
            Vec2::from(self.zeta),
            self.omega[0],
            self.omega[1],
        )
    }

    pub fn from_spec(spec: &SystemSpec) -> Self {
        Self {
            a: spec.a.rows(),
            zeta: spec.zeta.to_array(),
            omega: [spec.omega.min, spec.omega.max],
        }
    }
}

pub fn parse_spec(text: &str) -> Result<SystemSpec> {
    SystemConfig::from_json(text)?.to_spec()
}
