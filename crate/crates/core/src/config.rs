//! Run configuration: every tolerance and path a command uses.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::builder::BuildConfig;
use crate::dynamics::{CoverConfig, Window};
use crate::error::Result;
use crate::verify::VerifyConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub out_dir: PathBuf,
    /// Builder settings; `build.kernel` is the kernel configuration for
    /// every command.
    pub build: BuildConfig,
    pub verify: VerifyConfig,
    pub cover: CoverConfig,
    pub window: Window,
    /// Grid size of phi dumps.
    pub phi_samples: usize,
    /// Truncation abscissa for boundary dumps; R[N-1] + 20 when absent.
    pub x_max: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            out_dir: PathBuf::from("out"),
            build: BuildConfig::default(),
            verify: VerifyConfig::default(),
            cover: CoverConfig::default(),
            window: Window::default(),
            phi_samples: 2000,
            x_max: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_fill_defaults() {
        let c: Config = serde_json::from_str(r#"{"phi_samples": 10, "build": {"stages": 2}}"#).unwrap();
        assert_eq!(c.build.stages, 2);
        assert_eq!(c.phi_samples, 10);
        assert_eq!(c.build.n_guard, 4);
        let back: Config = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back.to_json().unwrap(), c.to_json().unwrap());
    }
}
