use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::MaskPolicy;
use super::replay::ReplayConfig;
use crate::align::{NwScoring, DEFAULT_DISCARD_THRESHOLD};
use crate::error::{Error, Result};
use crate::loss::{DpoConfig, EditSideForm, LossWeights, ReplayVariant, SaltVariant};
use crate::model::{DecodeConfig, Reduction};

/// Training objective: a SALT variant, SALT with replay, or DPO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Variant {
    Salt(SaltVariant),
    Rsalt { salt: SaltVariant, replay: ReplayVariant },
    Dpo,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Salt(SaltVariant::L),
        Variant::Salt(SaltVariant::Ld),
        Variant::Salt(SaltVariant::Li),
        Variant::Salt(SaltVariant::U),
        Variant::Salt(SaltVariant::Lu),
        Variant::Rsalt { salt: SaltVariant::L, replay: ReplayVariant::L },
        Variant::Rsalt { salt: SaltVariant::Lu, replay: ReplayVariant::L },
        Variant::Rsalt { salt: SaltVariant::L, replay: ReplayVariant::Lu },
        Variant::Rsalt { salt: SaltVariant::Lu, replay: ReplayVariant::Lu },
        Variant::Dpo,
    ];

    pub fn uses_replay(self) -> bool {
        matches!(self, Variant::Rsalt { .. })
    }

    /// Weights used when the config does not set them.
    pub fn preset_weights(self) -> LossWeights {
        match self {
            Variant::Salt(s) | Variant::Rsalt { salt: s, .. } => s.preset_weights(),
            Variant::Dpo => LossWeights::default(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Salt(s) => f.write_str(s.name()),
            Variant::Rsalt { salt, replay } => {
                let r = match replay {
                    ReplayVariant::L => "rsalt_l",
                    ReplayVariant::Lu => "rsalt_lu",
                };
                write!(f, "{}_{}", salt.name(), r)
            }
            Variant::Dpo => f.write_str("dpo"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

impl TryFrom<String> for Variant {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.to_string()
    }
}

fn default_steps() -> usize {
    500
}
fn default_batch() -> usize {
    16
}
fn default_lr() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_discard() -> Option<f64> {
    Some(DEFAULT_DISCARD_THRESHOLD)
}

/// Everything a training run needs besides data. Loaded from JSON; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Variant,
    /// Overrides the variant's preset weights.
    #[serde(default)]
    pub weights: Option<LossWeights>,
    #[serde(default)]
    pub edit_form: EditSideForm,
    #[serde(default)]
    pub dpo: DpoConfig,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub decode: DecodeConfig,
    #[serde(default)]
    pub alignment: NwScoring,
    /// Smoothing of imitation-edit masks.
    #[serde(default = "default_true")]
    pub smoothing: bool,
    /// Imitation examples whose AI change fraction exceeds this are dropped; `null` keeps all.
    #[serde(default = "default_discard")]
    pub discard_threshold: Option<f64>,
    /// Also smooth and filter human-edit data.
    #[serde(default)]
    pub mask_unseen: bool,
    #[serde(default)]
    pub replay_ratio: Option<(u32, u32)>,
    /// Rebuild seen AI summaries by decoding the initial checkpoint, when there is one.
    #[serde(default = "default_true")]
    pub regenerate_seen: bool,
    #[serde(default)]
    pub reduction: Reduction,
    /// Standard deviation of the random initialisation when no checkpoint is given.
    #[serde(default)]
    pub init_scale: f64,
}

impl ExperimentConfig {
    pub fn new(variant: Variant) -> Self {
        ExperimentConfig {
            variant,
            weights: None,
            edit_form: EditSideForm::default(),
            dpo: DpoConfig::default(),
            steps: default_steps(),
            batch_size: default_batch(),
            lr: default_lr(),
            seed: 0,
            decode: DecodeConfig::default(),
            alignment: NwScoring::default(),
            smoothing: true,
            discard_threshold: default_discard(),
            mask_unseen: false,
            replay_ratio: None,
            regenerate_seen: true,
            reduction: Reduction::default(),
            init_scale: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn effective_weights(&self) -> LossWeights {
        self.weights.unwrap_or_else(|| self.variant.preset_weights())
    }

    pub fn mask_policy(&self) -> MaskPolicy {
        MaskPolicy::new(self.alignment, self.smoothing, self.discard_threshold, self.mask_unseen)
    }

    pub fn replay(&self) -> ReplayConfig {
        ReplayConfig {
            ratio_unseen_to_seen: self.replay_ratio.unwrap_or((2, 1)),
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config("lr must be positive".into()));
        }
        if let Some(t) = self.discard_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config("discard_threshold must lie in [0, 1]".into()));
            }
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Config("init_scale must be non-negative".into()));
        }
        self.effective_weights().validate()?;
        self.dpo.validate()?;
        self.decode.validate()?;
        self.alignment.validate()?;
        self.replay().validate()
    }
}
