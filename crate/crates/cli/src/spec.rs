//! The system description read by every command.

use std::path::Path;

use filippov_core::{FreeParams, InelasticPair, Mat3, SwitchingManifold};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Explicit `B` must match the companion pattern this closely.
pub const PATTERN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub manifold: SwitchingManifold,
    #[serde(rename = "A")]
    pub a: [[f64; 3]; 3],
    #[serde(default)]
    pub b21: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b31: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b32: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[[f64; 3]; 3]>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: SystemSpec = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let finite = spec.a.iter().flatten().all(|v| v.is_finite())
            && spec.b.iter().flatten().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(CliError::Parse("matrix entries must be finite".into()));
        }
        if spec.manifold == SwitchingManifold::Torus && (spec.b31.is_some() || spec.b32.is_some()) {
            return Err(CliError::Parse("torus specs take only b21".into()));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn a(&self) -> Mat3 {
        Mat3::from_rows(self.a)
    }

    pub fn explicit_b(&self) -> Option<Mat3> {
        self.b.map(Mat3::from_rows)
    }

    pub fn free(&self) -> FreeParams {
        match self.manifold {
            SwitchingManifold::Sphere => FreeParams::Sphere {
                b21: self.b21,
                b31: self.b31.unwrap_or(0.0),
                b32: self.b32.unwrap_or(0.0),
            },
            SwitchingManifold::Torus => FreeParams::Torus { b21: self.b21 },
        }
    }

    /// The pair described by the spec; an explicit `B` overrides the free
    /// parameters and must match the companion pattern.
    pub fn pair(&self) -> Result<InelasticPair, CliError> {
        match self.explicit_b() {
            Some(b) => InelasticPair::from_explicit(self.a(), b, self.manifold, PATTERN_TOL).map_err(CliError::Pattern),
            None => Ok(InelasticPair::new(self.a(), self.free())),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&canonical)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
