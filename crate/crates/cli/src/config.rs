//! Experiment configuration.

use std::path::{Path, PathBuf};

use lattice_wiretap::channel::{ChannelModel, FadingKind};
use lattice_wiretap::numberfield::catalog_names;
use lattice_wiretap::receiver::DecodeMode;
use lattice_wiretap::wiretap::NestingSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobChannel {
    #[serde(flatten)]
    pub fading: FadingKind,
    /// Bob's SNR grid `P/σ_b²` in dB.
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

fn default_delta() -> f64 {
    0.5
}

fn default_mode() -> DecodeMode {
    DecodeMode::Map
}

fn default_draws() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field_name: String,
    pub k: usize,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "R_target")]
    pub rate_target: f64,
    #[serde(rename = "R_prime")]
    pub r_prime: f64,
    pub nesting_spec: NestingSpec,
    pub bob: BobChannel,
    pub eve: ChannelModel,
    pub trials: usize,
    pub seed: u64,
    /// Outage slack above Eve's ergodic capacity.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_mode")]
    pub decode_mode: DecodeMode,
    /// Fading draws for the per-draw bound tables.
    #[serde(default = "default_draws")]
    pub bound_draws: usize,
    /// Quadrature leakage for `k ≤ 2` codes.
    #[serde(default)]
    pub empirical_leakage: bool,
    /// Widths at which `analyze-lattice` tabulates the flatness factor.
    #[serde(default)]
    pub flatness_sigmas: Vec<f64>,
    pub output: OutputConfig,
}

/// 1-based line of the first `"key"` in `text`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map_or(1, |i| i + 1)
}

impl ExperimentConfig {
    pub fn from_str_at(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        cfg.validate().map_err(|(key, msg)| {
            CliError::Config(format!("{origin}:{}: `{key}`: {msg}", line_of(text, key)))
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_str_at(&text, &path.display().to_string())
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let names = catalog_names();
        if !names.contains(&self.field_name) {
            return Err((
                "field_name",
                format!(
                    "unknown field `{}`; catalog: {}",
                    self.field_name,
                    names.join(", ")
                ),
            ));
        }
        if self.k == 0 {
            return Err(("k", "must be positive".into()));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(("P", format!("must be positive, got {}", self.power)));
        }
        if !(self.rate_target >= 0.0 && self.rate_target.is_finite()) {
            return Err((
                "R_target",
                format!("must be nonnegative, got {}", self.rate_target),
            ));
        }
        if !self.r_prime.is_finite() {
            return Err(("R_prime", "must be finite".into()));
        }
        if self.trials == 0 {
            return Err(("trials", "must be at least 1".into()));
        }
        if self.bob.snr_db.is_empty() || self.bob.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(("snr_db", "must be a nonempty list of finite values".into()));
        }
        ChannelModel::new(self.bob.fading.clone(), 1.0).map_err(|e| ("bob", e.to_string()))?;
        self.eve.validate().map_err(|e| ("eve", e.to_string()))?;
        if !(self.delta > 0.0) {
            return Err(("delta", format!("must be positive, got {}", self.delta)));
        }
        if self.flatness_sigmas.iter().any(|s| !(*s > 0.0)) {
            return Err(("flatness_sigmas", "widths must be positive".into()));
        }
        Ok(())
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        self.bob
            .snr_db
            .iter()
            .map(|d| 10f64.powf(d / 10.0))
            .collect()
    }

    /// Bob's channel at linear SNR `snr`.
    pub fn bob_model(&self, snr: f64) -> ChannelModel {
        ChannelModel {
            kind: self.bob.fading.clone(),
            noise_variance: self.power / snr,
        }
    }

    pub fn sigma_e(&self) -> f64 {
        self.eve.noise_variance.sqrt()
    }
}
