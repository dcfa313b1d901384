//! JSON run configuration.
//!
//! Every field is optional. A minimal file overriding two model parameters
//! and one array looks like:
//!
//! ```json
//! {
//!   "model": { "read_noise_gamma": 0.02, "drifted": true },
//!   "arrays": [ { "size": 16, "g_max": 1.5e-5 } ]
//! }
//! ```

use std::path::Path;

use anafft_core::cost::EnergyTable;
use anafft_core::device::HardwareModel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Partial overrides are merged over the standard model.
    pub model: Option<HardwareModel>,
    pub energy_table: Option<EnergyTable>,
    pub spectrogram: SpectrogramSettings,
    /// Replace the preset conductance range or tiling of individual arrays.
    pub arrays: Vec<ArraySetting>,
    pub input_bits: Option<u32>,
    pub intermediate_bits: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrogramSettings {
    pub window: usize,
    pub hop: usize,
    /// `auto`, `direct` or factors such as `16x16` (first factor is the
    /// second-stage DFT size).
    pub plan: String,
    /// Display floor in dBFS.
    pub db_floor: f64,
    /// Write dBFS relative to the spectrogram maximum instead of magnitudes.
    pub normalize: bool,
}

impl Default for SpectrogramSettings {
    fn default() -> Self {
        Self { window: 256, hop: 128, plan: "16x16".into(), db_floor: -80.0, normalize: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySetting {
    pub size: usize,
    pub g_max: Option<f64>,
    pub n_tiles: Option<usize>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let cfg: Self = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(m) = &self.model {
            m.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(t) = &self.energy_table {
            t.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        let s = &self.spectrogram;
        if s.window == 0 || s.hop == 0 || s.hop > s.window {
            return Err(CliError::Config(format!("spectrogram window {} / hop {} must satisfy 0 < hop <= window", s.window, s.hop)));
        }
        for a in &self.arrays {
            if a.g_max.is_some_and(|g| !(g.is_finite() && g > 0.0)) || a.n_tiles == Some(0) || a.size == 0 {
                return Err(CliError::Config(format!("invalid array setting for size {}", a.size)));
            }
        }
        for b in [self.input_bits, self.intermediate_bits].into_iter().flatten() {
            if !(2..=31).contains(&b) {
                return Err(CliError::Config(format!("bit width {b} outside 2..=31")));
            }
        }
        Ok(())
    }
}

/// A hardware model file: the same fields as `RunConfig::model`.
pub fn load_model(path: &Path) -> CliResult<HardwareModel> {
    let m: HardwareModel = read_json(path)?;
    m.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(m)
}
