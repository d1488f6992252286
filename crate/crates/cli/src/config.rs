//! Run configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 1
//! arch = "2ff2fb"
//! variant = "full"
//! regime = "sequential"
//! epochs = 10
//! injection = "input"
//! granularity = "sample"
//! snapshots = true
//! input_noise = 0.0
//!
//! [params]
//! lr = 0.001
//! beta = 1.0
//! alpha = 0.01
//! ```

use std::path::Path;

use fbhebb_core::protocol::InputNoise;
use fbhebb_core::{
    Architecture, InjectionMode, ModelError, ProtocolSpec, Regime, RuleParams, RuleVariant,
    UpdateGranularity, DEFAULT_EPOCHS,
};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub arch: Architecture,
    pub variant: RuleVariant,
    pub regime: Regime,
    /// Epochs per phase.
    pub epochs: usize,
    pub injection: InjectionMode,
    pub granularity: UpdateGranularity,
    /// Write full weight snapshots at the baseline and each phase end.
    pub snapshots: bool,
    /// Amplitude of uniform additive input noise; 0 disables it.
    pub input_noise: f64,
    pub params: RuleParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            arch: Architecture::Ff2Fb2,
            variant: RuleVariant::Full,
            regime: Regime::Sequential,
            epochs: DEFAULT_EPOCHS,
            injection: InjectionMode::Input,
            granularity: UpdateGranularity::Sample,
            snapshots: true,
            input_noise: 0.0,
            params: RuleParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| HarnessError::Config(e.message().to_string() + &span_hint(&e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if let Err(e) = self.params.validate() {
            return Err(HarnessError::Config(match e {
                ModelError::InvalidParams { field, reason } => format!("params.{field}: {reason}"),
                other => other.to_string(),
            }));
        }
        if !(0.0..=1.0).contains(&self.input_noise) {
            return Err(HarnessError::Config(format!(
                "input_noise: must lie in [0, 1], got {}",
                self.input_noise
            )));
        }
        Ok(())
    }

    pub fn protocol(&self) -> ProtocolSpec {
        let mut spec = ProtocolSpec::for_regime(self.regime, self.epochs);
        if self.input_noise > 0.0 {
            spec.input_noise = Some(InputNoise {
                amplitude: self.input_noise,
                seed: self.seed,
            });
        }
        spec
    }

    /// Directory name for this run's artifacts.
    pub fn run_name(&self) -> String {
        format!(
            "{}_{}_{}_s{}",
            self.arch.as_str(),
            self.variant.as_str(),
            self.regime.as_str(),
            self.seed
        )
    }
}

fn span_hint(e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => format!(" (at byte {})", span.start),
        None => String::new(),
    }
}
