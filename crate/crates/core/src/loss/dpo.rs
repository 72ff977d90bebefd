//! Preference loss with the edit as the chosen summary and the AI summary
//! as the rejected one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpoConfig {
    pub beta: f64,
}

impl Default for DpoConfig {
    fn default() -> Self {
        DpoConfig { beta: 0.1 }
    }
}

impl DpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config("dpo beta must be positive".into()));
        }
        Ok(())
    }
}

/// Sequence log-probabilities of one preference pair under the trained
/// and the frozen reference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoLogProbs {
    pub chosen_theta: f64,
    pub rejected_theta: f64,
    pub chosen_ref: f64,
    pub rejected_ref: f64,
}

impl DpoLogProbs {
    /// `lRatio_theta - lRatio_ref`.
    pub fn margin(&self) -> f64 {
        (self.chosen_theta - self.rejected_theta) - (self.chosen_ref - self.rejected_ref)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log sigmoid(beta * (lRatio_theta - lRatio_ref))`.
pub fn dpo_loss(
    logp_chosen_theta: f64,
    logp_rejected_theta: f64,
    logp_chosen_ref: f64,
    logp_rejected_ref: f64,
    cfg: &DpoConfig,
) -> f64 {
    let lp = DpoLogProbs {
        chosen_theta: logp_chosen_theta,
        rejected_theta: logp_rejected_theta,
        chosen_ref: logp_chosen_ref,
        rejected_ref: logp_rejected_ref,
    };
    softplus(-cfg.beta * lp.margin())
}

/// Derivative of [`dpo_loss`] with respect to `lRatio_theta`.
pub fn dpo_loss_slope(lp: &DpoLogProbs, cfg: &DpoConfig) -> f64 {
    -cfg.beta * sigmoid(-cfg.beta * lp.margin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardStats {
    pub chosen_rewards: Vec<f64>,
    pub rejected_rewards: Vec<f64>,
    /// Fraction of pairs whose chosen reward strictly exceeds the rejected one.
    pub accuracy: f64,
}

pub fn rewards_and_accuracy(pairs: &[DpoLogProbs], cfg: &DpoConfig) -> Result<RewardStats> {
    if pairs.is_empty() {
        return Err(Error::EmptyBatch("reward accuracy needs at least one pair"));
    }
    let chosen: Vec<f64> = pairs
        .iter()
        .map(|p| cfg.beta * (p.chosen_theta - p.chosen_ref))
        .collect();
    let rejected: Vec<f64> = pairs
        .iter()
        .map(|p| cfg.beta * (p.rejected_theta - p.rejected_ref))
        .collect();
    let wins = chosen.iter().zip(&rejected).filter(|(c, r)| c > r).count();
    Ok(RewardStats {
        accuracy: wins as f64 / pairs.len() as f64,
        chosen_rewards: chosen,
        rejected_rewards: rejected,
    })
}
