use serde::{Deserialize, Serialize};

use super::{LossBreakdown, TermKind, TokenProbs, TokenTerm};
use crate::align::{EditMasks, Side};
use crate::error::{Error, Result};
use crate::example::TrainingExample;

/// Per-class weight magnitudes. The term kind (likelihood or unlikelihood)
/// carries the direction, so all weights are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub w_ai_c: f64,
    pub w_ai_nc: f64,
    pub w_e_c: f64,
    pub w_e_nc: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            w_ai_c: 1.0,
            w_ai_nc: 1.0,
            w_e_c: 1.0,
            w_e_nc: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_ai_c, self.w_ai_nc, self.w_e_c, self.w_e_nc];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("loss weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// How changed edit-side tokens are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditSideForm {
    /// Both changed and unchanged edit tokens get the likelihood term.
    #[default]
    Likelihood,
    /// Changed edit tokens get the unlikelihood term, as the printed equation reads.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaltVariant {
    /// Likelihood on the edit only.
    #[serde(rename = "salt_l")]
    L,
    /// As `L` with changed edit tokens down-weighted.
    #[serde(rename = "salt_ld")]
    Ld,
    /// As `L` with changed edit tokens up-weighted.
    #[serde(rename = "salt_li")]
    Li,
    /// AI side only: unlikelihood on changed, likelihood on unchanged tokens.
    #[serde(rename = "salt_u")]
    U,
    /// Both sides.
    #[serde(rename = "salt_lu")]
    Lu,
}

impl SaltVariant {
    pub fn uses_ai_side(self) -> bool {
        matches!(self, SaltVariant::U | SaltVariant::Lu)
    }

    pub fn uses_edit_side(self) -> bool {
        !matches!(self, SaltVariant::U)
    }

    pub fn preset_weights(self) -> LossWeights {
        let base = LossWeights::default();
        match self {
            SaltVariant::Li => LossWeights { w_e_c: 1.2, ..base },
            SaltVariant::Ld => LossWeights { w_e_c: 0.5, ..base },
            _ => base,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SaltVariant::L => "salt_l",
            SaltVariant::Ld => "salt_ld",
            SaltVariant::Li => "salt_li",
            SaltVariant::U => "salt_u",
            SaltVariant::Lu => "salt_lu",
        }
    }
}

/// Objective applied to replayed seen examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReplayVariant {
    /// Likelihood on the imitation edit (plain replay).
    #[serde(rename = "rsalt_l")]
    L,
    /// Both sides, treating replayed data as imitation edits.
    #[serde(rename = "rsalt_lu")]
    Lu,
}

impl ReplayVariant {
    pub fn as_salt(self) -> SaltVariant {
        match self {
            ReplayVariant::L => SaltVariant::L,
            ReplayVariant::Lu => SaltVariant::Lu,
        }
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { what, expected, got });
    }
    Ok(())
}

fn term(side: Side, t: usize, kind: TermKind, weight: f64, probs: &TokenProbs) -> TokenTerm {
    let p = probs.values()[t];
    let slope = if probs.is_clamped(t) { 0.0 } else { kind.dlogp(p) };
    TokenTerm {
        example: 0,
        side,
        position: t,
        kind,
        value: weight * kind.value(p),
        dlogp: weight * slope,
    }
}

/// AI-side loss: unlikelihood on changed tokens, likelihood on unchanged ones.
pub fn loss_ai_side(probs: &TokenProbs, masks: &EditMasks, w: &LossWeights) -> Result<LossBreakdown> {
    check_len("ai probabilities", masks.ai_changed().len(), probs.len())?;
    let mut out = LossBreakdown::default();
    for (t, &changed) in masks.ai_changed().iter().enumerate() {
        out.push(if changed {
            term(Side::Ai, t, TermKind::Unlikelihood, w.w_ai_c, probs)
        } else {
            term(Side::Ai, t, TermKind::Likelihood, w.w_ai_nc, probs)
        });
    }
    Ok(out)
}

/// Edit-side loss with class-specific weights.
pub fn loss_edit_side(
    probs: &TokenProbs,
    masks: &EditMasks,
    w: &LossWeights,
    form: EditSideForm,
) -> Result<LossBreakdown> {
    check_len("edit probabilities", masks.e_changed().len(), probs.len())?;
    let changed_kind = match form {
        EditSideForm::Likelihood => TermKind::Likelihood,
        EditSideForm::Literal => TermKind::Unlikelihood,
    };
    let mut out = LossBreakdown::default();
    for (t, &changed) in masks.e_changed().iter().enumerate() {
        out.push(if changed {
            term(Side::Edit, t, changed_kind, w.w_e_c, probs)
        } else {
            term(Side::Edit, t, TermKind::Likelihood, w.w_e_nc, probs)
        });
    }
    Ok(out)
}

/// SALT loss of one example under `variant`.
pub fn loss_salt(
    example: &TrainingExample,
    probs_ai: &TokenProbs,
    probs_edit: &TokenProbs,
    w: &LossWeights,
    variant: SaltVariant,
    form: EditSideForm,
) -> Result<LossBreakdown> {
    example.check()?;
    let mut out = LossBreakdown::default();
    if variant.uses_ai_side() {
        out.absorb(loss_ai_side(probs_ai, &example.masks, w)?, 0);
    }
    if variant.uses_edit_side() {
        out.absorb(loss_edit_side(probs_edit, &example.masks, w, form)?, 0);
    }
    Ok(out)
}

/// An example together with the model's probabilities for both summaries.
#[derive(Debug, Clone, Copy)]
pub struct ScoredExample<'a> {
    pub example: &'a TrainingExample,
    pub ai: &'a TokenProbs,
    pub edit: &'a TokenProbs,
}

/// Summed SALT loss over new (unseen) examples plus replay loss over seen ones.
///
/// Per-token entries are labelled with the example index: unseen examples
/// first, then seen ones.
pub fn loss_rsalt(
    unseen: &[ScoredExample<'_>],
    seen: &[ScoredExample<'_>],
    w: &LossWeights,
    variant: SaltVariant,
    replay: ReplayVariant,
    form: EditSideForm,
) -> Result<LossBreakdown> {
    if unseen.is_empty() {
        return Err(Error::EmptyBatch("replay needs at least one unseen example"));
    }
    let mut out = LossBreakdown::default();
    let tagged = unseen
        .iter()
        .map(|s| (s, variant))
        .chain(seen.iter().map(|s| (s, replay.as_salt())));
    for (idx, (s, v)) in tagged.enumerate() {
        out.absorb(loss_salt(s.example, s.ai, s.edit, w, v, form)?, idx);
    }
    Ok(out)
}
