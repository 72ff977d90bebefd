//! Training objectives over per-token probabilities.
//!
//! Each objective returns a [`LossBreakdown`] whose per-token entries carry
//! both the weighted loss value and its derivative with respect to the log
//! probability of the scored token. The model module back-propagates those
//! derivatives through the softmax.

mod dpo;
mod salt;

pub use dpo::{dpo_loss, dpo_loss_slope, rewards_and_accuracy, DpoConfig, DpoLogProbs, RewardStats};
pub use salt::{
    loss_ai_side, loss_edit_side, loss_rsalt, loss_salt, EditSideForm, LossWeights, ReplayVariant,
    SaltVariant, ScoredExample,
};

use serde::{Deserialize, Serialize};

use crate::align::Side;

/// Probability floor and ceiling applied before any logarithm.
pub const PROB_EPS: f64 = 1e-7;

/// Probability of each realized token, clamped to `[PROB_EPS, 1 - PROB_EPS]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenProbs {
    values: Vec<f64>,
    clamped: Vec<bool>,
}

impl TokenProbs {
    pub fn new(raw: impl IntoIterator<Item = f64>) -> Self {
        let (values, clamped) = raw
            .into_iter()
            .map(|p| {
                let c = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
                (c, c != p)
            })
            .unzip();
        TokenProbs { values, clamped }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True where the clamp was active (the derivative through it is zero).
    pub fn is_clamped(&self, t: usize) -> bool {
        self.clamped[t]
    }

    /// Sum of log probabilities: the sequence log-likelihood.
    pub fn log_prob(&self) -> f64 {
        self.values.iter().map(|p| p.ln()).sum()
    }
}

/// `-log(1 - p)`: penalizes probability placed on an unwanted token.
pub fn term_unlikelihood(p: f64) -> f64 {
    -(1.0 - p.clamp(PROB_EPS, 1.0 - PROB_EPS)).ln()
}

/// `-log p`: standard negative log-likelihood.
pub fn term_likelihood(p: f64) -> f64 {
    -p.clamp(PROB_EPS, 1.0 - PROB_EPS).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Likelihood,
    Unlikelihood,
}

impl TermKind {
    pub fn value(self, p: f64) -> f64 {
        match self {
            TermKind::Likelihood => term_likelihood(p),
            TermKind::Unlikelihood => term_unlikelihood(p),
        }
    }

    /// Derivative of the unweighted term with respect to `log p`.
    pub fn dlogp(self, p: f64) -> f64 {
        match self {
            TermKind::Likelihood => -1.0,
            TermKind::Unlikelihood => p / (1.0 - p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenTerm {
    /// Index of the example within the scored batch.
    pub example: usize,
    pub side: Side,
    pub position: usize,
    pub kind: TermKind,
    /// Weighted loss contribution.
    pub value: f64,
    /// Weighted derivative with respect to the token's log probability.
    pub dlogp: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub ai_side: f64,
    pub edit_side: f64,
    pub per_token: Vec<TokenTerm>,
}

impl LossBreakdown {
    pub(crate) fn push(&mut self, term: TokenTerm) {
        match term.side {
            Side::Ai => self.ai_side += term.value,
            Side::Edit => self.edit_side += term.value,
        }
        self.total += term.value;
        self.per_token.push(term);
    }

    /// Adds `other`'s terms, relabelling them as example `example`.
    pub fn absorb(&mut self, other: LossBreakdown, example: usize) {
        for mut term in other.per_token {
            term.example = example;
            self.push(term);
        }
    }

    /// Sum of per-token values (equals `total` up to rounding).
    pub fn per_token_sum(&self) -> f64 {
        self.per_token.iter().map(|t| t.value).sum()
    }
}
