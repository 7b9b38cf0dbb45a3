use std::path::{Path, PathBuf};

use nondeg_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "NONDEG_CONFIG";

/// Run parameters shared by every command and echoed into every report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Samples per curve (per twist for wires).
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_margin_tol")]
    pub margin_tol: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_density() -> f64 {
    4096.0
}
fn default_margin_tol() -> f64 {
    1e-3
}
fn default_delta() -> f64 {
    0.05
}
fn default_n_max() -> usize {
    256
}
fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            density: default_density(),
            margin_tol: default_margin_tol(),
            delta: default_delta(),
            n_max: default_n_max(),
            seed: 0,
            out_dir: default_out_dir(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("density", self.density), ("margin_tol", self.margin_tol), ("delta", self.delta)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("config field {name} must be positive, got {v}")));
            }
        }
        if self.n_max < 2 {
            return Err(Error::Input("config field n_max must be at least 2".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"delta": 0.1, "seed": 7}"#).unwrap();
        assert_eq!(c.delta, 0.1);
        assert_eq!(c.seed, 7);
        assert_eq!(c.n_max, 256);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_and_nonpositive_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"margin_tol": 0}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
