//! The unit of training: an input, the AI summary, its (human or imitation)
//! edit and the masks relating them.

use serde::{Deserialize, Serialize};

use crate::align::{
    align_nw, derive_masks, filter_by_change_ratio, smooth_ai_mask, Alignment, EditMasks,
    NwScoring,
};
use crate::error::{Error, Result};
use crate::textproc::{Token, TokenSeq, Vocab, EOS};

/// Whether an example comes from data the base model was already trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Seen,
    Unseen,
}

/// How masks are post-processed after alignment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaskOptions {
    pub scoring: NwScoring,
    pub smooth: bool,
    /// Discard when the AI-side change fraction exceeds this; `None` keeps everything.
    pub discard_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub id: String,
    pub input: TokenSeq,
    pub s_ai: TokenSeq,
    pub s_edit: TokenSeq,
    pub masks: EditMasks,
    pub origin: Origin,
    pub kept: bool,
}

impl TrainingExample {
    /// Aligns the two summaries and derives (optionally smoothed and filtered) masks.
    pub fn build(
        id: impl Into<String>,
        input: TokenSeq,
        s_ai: TokenSeq,
        s_edit: TokenSeq,
        origin: Origin,
        opts: &MaskOptions,
    ) -> (Self, Alignment) {
        let alignment = align_nw(&s_ai, &s_edit, &opts.scoring);
        let mut masks = derive_masks(&alignment);
        if opts.smooth {
            masks = smooth_ai_mask(&masks);
        }
        let kept = opts
            .discard_threshold
            .is_none_or(|t| filter_by_change_ratio(&masks, t));
        let example = TrainingExample {
            id: id.into(),
            input,
            s_ai,
            s_edit,
            masks,
            origin,
            kept,
        };
        (example, alignment)
    }

    pub fn check(&self) -> Result<()> {
        let check = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::LengthMismatch { what, expected, got })
            }
        };
        check("ai mask", self.s_ai.len(), self.masks.ai_changed().len())?;
        check("edit mask", self.s_edit.len(), self.masks.e_changed().len())
    }

    /// Copy with EOS appended to both summaries and marked unchanged, so that
    /// training also scores the end of each summary.
    pub fn with_terminal_eos(&self, vocab: &Vocab) -> TrainingExample {
        let eos: Token = vocab.token(EOS);
        let mut out = self.clone();
        out.s_ai.tokens.push(eos.clone());
        out.s_edit.tokens.push(eos);
        out.masks.push_unchanged();
        out
    }
}
