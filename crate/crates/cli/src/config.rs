//! Run configuration, read from the JSON file named by `DIPOLE_COUPLER_CONFIG`.

use std::path::{Path, PathBuf};

use dipole_coupler::constants::{HBAR, SPEED_OF_LIGHT};
use dipole_coupler::PhysicalConstants;
use serde::Deserialize;

use crate::error::CliError;
use crate::output::Format;

pub const CONFIG_ENV: &str = "DIPOLE_COUPLER_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative parameter step at which the saturation fit stops.
    pub fit_xtol: f64,
    /// Radial samples for pupil overlaps.
    pub pupil_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fit_xtol: 1e-8,
            pupil_samples: dipole_coupler::pupil::DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hbar: f64,
    pub c: f64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hbar: HBAR,
            c: SPEED_OF_LIGHT,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("."),
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            hbar: self.hbar,
            c: self.c,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and > 0, got {v}"))
            }
        };
        positive("hbar", self.hbar)?;
        positive("c", self.c)?;
        positive("tolerances.fit_xtol", self.tolerances.fit_xtol)?;
        if self.tolerances.pupil_samples < 3 {
            return Err(format!(
                "tolerances.pupil_samples must be at least 3, got {}",
                self.tolerances.pupil_samples
            ));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::io("reading config", path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// The file named by the environment variable, or the defaults.
    pub fn from_env() -> Result<RunConfig, CliError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => RunConfig::load(Path::new(&p)),
            _ => Ok(RunConfig::default()),
        }
    }
}
