//! JSON run and atlas configurations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{AtlasSpec, DEFAULT_RATIO};
use crate::propagator::PropagationSettings;
use crate::pulse::PulseSpec;
use crate::qubit::{Complex2State, SystemParams};
use crate::regimes::RegimeKind;

pub const UNITS_NOTE: &str =
    "natural units: delta_e, V and hbar share one arbitrary unit system (hbar = 1 unless set); times are in hbar / energy";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Numeric meaning of "much less than".
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    DEFAULT_RATIO
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { ratio: DEFAULT_RATIO }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File name prefix for everything written by a command.
    pub prefix: String,
    /// Emit SVG heatmaps alongside atlas CSVs.
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("."), prefix: "run".into(), svg: true }
    }
}

impl OutputConfig {
    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}", self.prefix))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units_note: Option<String>,
    pub system: SystemParams,
    pub pulse: PulseSpec,
    /// Required by `evolve` and `compare`; `classify` ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub initial_state: Complex2State,
    #[serde(default)]
    pub propagation: PropagationSettings,
    /// Regimes to evaluate in `compare`; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes_to_compare: Option<Vec<RegimeKind>>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_config(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.pulse.validate()?;
        self.initial_state.validate()?;
        self.propagation.validate()?;
        check_ratio(self.thresholds.ratio)?;
        if let Some(t) = self.t_final {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("t_final must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn t_final(&self) -> Result<f64> {
        self.t_final.ok_or_else(|| Error::Config("t_final is required for this command".into()))
    }

    /// Regimes to compare, in canonical order and without duplicates.
    pub fn regimes(&self) -> Vec<RegimeKind> {
        match &self.regimes_to_compare {
            None => RegimeKind::ALL.to_vec(),
            Some(list) => RegimeKind::ALL.into_iter().filter(|k| list.contains(k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units_note: Option<String>,
    #[serde(default)]
    pub grid: AtlasSpec,
    #[serde(default = "atlas_output")]
    pub output: OutputConfig,
}

fn atlas_output() -> OutputConfig {
    OutputConfig { prefix: "atlas".into(), ..OutputConfig::default() }
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig { units_note: None, grid: AtlasSpec::default(), output: atlas_output() }
    }
}

impl AtlasConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: AtlasConfig = serde_json::from_str(text)?;
        cfg.grid.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_config(path)?)
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("thresholds.ratio must be in (0, 1), got {ratio}")));
    }
    Ok(())
}
