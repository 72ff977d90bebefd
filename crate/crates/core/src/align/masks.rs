use serde::{Deserialize, Serialize};

use super::{Alignment, OpKind};
use crate::error::{Error, Result};
use crate::textproc::TokenSeq;

pub const DEFAULT_DISCARD_THRESHOLD: f64 = 0.60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Ai,
    Edit,
}

/// Per-token changed/unchanged indicators for both summaries.
///
/// Only the changed bits are stored; the unchanged vectors are their
/// complements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EditMasks {
    ai_changed: Vec<bool>,
    e_changed: Vec<bool>,
}

impl EditMasks {
    pub fn new(ai_changed: Vec<bool>, e_changed: Vec<bool>) -> Self {
        EditMasks {
            ai_changed,
            e_changed,
        }
    }

    /// All positions unchanged.
    pub fn unchanged(ai_len: usize, edit_len: usize) -> Self {
        EditMasks::new(vec![false; ai_len], vec![false; edit_len])
    }

    pub fn ai_changed(&self) -> &[bool] {
        &self.ai_changed
    }

    pub fn e_changed(&self) -> &[bool] {
        &self.e_changed
    }

    pub fn ai_unchanged(&self) -> Vec<bool> {
        self.ai_changed.iter().map(|c| !c).collect()
    }

    pub fn e_unchanged(&self) -> Vec<bool> {
        self.e_changed.iter().map(|c| !c).collect()
    }

    pub fn changed(&self, side: Side) -> &[bool] {
        match side {
            Side::Ai => &self.ai_changed,
            Side::Edit => &self.e_changed,
        }
    }

    pub fn len(&self, side: Side) -> usize {
        self.changed(side).len()
    }

    /// Appends one unchanged position on each side (used for a shared terminal token).
    pub fn push_unchanged(&mut self) {
        self.ai_changed.push(false);
        self.e_changed.push(false);
    }
}

/// A position is unchanged iff a C op covers it.
pub fn derive_masks(alignment: &Alignment) -> EditMasks {
    let (n, m) = alignment.lengths();
    let mut masks = EditMasks::new(vec![true; n], vec![true; m]);
    for op in alignment.ops.iter().filter(|op| op.kind == OpKind::C) {
        if let (Some(i), Some(j)) = (op.ai_index, op.edit_index) {
            masks.ai_changed[i] = false;
            masks.e_changed[j] = false;
        }
    }
    masks
}

/// Drops isolated single changed positions on the AI side; runs of two or
/// more are kept. The edit side is left alone.
pub fn smooth_ai_mask(masks: &EditMasks) -> EditMasks {
    let c = &masks.ai_changed;
    let smoothed = (0..c.len())
        .map(|i| {
            let left = i > 0 && c[i - 1];
            let right = i + 1 < c.len() && c[i + 1];
            c[i] && (left || right)
        })
        .collect();
    EditMasks::new(smoothed, masks.e_changed.clone())
}

/// Fraction of changed positions on one side.
pub fn change_fraction(masks: &EditMasks, side: Side) -> Result<f64> {
    let bits = masks.changed(side);
    if bits.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64)
}

/// Keep unless strictly more than `threshold` of the AI tokens are changed.
/// An empty AI summary is kept.
pub fn filter_by_change_ratio(masks: &EditMasks, threshold: f64) -> bool {
    match change_fraction(masks, Side::Ai) {
        Ok(f) => f <= threshold,
        Err(_) => true,
    }
}

/// One line of the mask export file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub id: String,
    pub ai_tokens: Vec<String>,
    pub edit_tokens: Vec<String>,
    pub ops: String,
    pub ai_changed: Vec<u8>,
    pub e_changed: Vec<u8>,
    pub kept: bool,
    pub change_fraction: f64,
}

impl MaskRecord {
    pub fn new(
        id: &str,
        ai: &TokenSeq,
        edit: &TokenSeq,
        alignment: &Alignment,
        masks: &EditMasks,
        kept: bool,
    ) -> Self {
        let bits = |v: &[bool]| v.iter().map(|&b| b as u8).collect();
        MaskRecord {
            id: id.to_string(),
            ai_tokens: ai.surfaces().iter().map(|s| s.to_string()).collect(),
            edit_tokens: edit.surfaces().iter().map(|s| s.to_string()).collect(),
            ops: alignment.ops_string(),
            ai_changed: bits(masks.ai_changed()),
            e_changed: bits(masks.e_changed()),
            kept,
            change_fraction: change_fraction(masks, Side::Ai).unwrap_or(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{align_nw, NwScoring};
    use crate::textproc::{tokenize, SeqRole, Vocab};

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    fn from_unchanged(v: &[u8]) -> EditMasks {
        EditMasks::new(v.iter().map(|&b| b == 0).collect(), vec![])
    }

    #[test]
    fn worked_example_masks() {
        let mut v = Vocab::new();
        let ai = tokenize("patient takes one aspirin daily", &mut v, true, SeqRole::AiSummary);
        let e = tokenize("patient doesn't want to take aspirin", &mut v, true, SeqRole::EditSummary);
        let m = derive_masks(&align_nw(&ai, &e, &NwScoring::default()));
        assert_eq!(m.ai_changed(), bits(&[0, 1, 1, 0, 1]));
        assert_eq!(m.ai_unchanged(), bits(&[1, 0, 0, 1, 0]));
        assert_eq!(m.e_changed(), bits(&[0, 1, 1, 1, 1, 0]));
        assert_eq!(m.e_unchanged(), bits(&[1, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn identity_masks_are_clear() {
        let mut v = Vocab::new();
        let a = tokenize("x y z", &mut v, true, SeqRole::AiSummary);
        let m = derive_masks(&align_nw(&a, &a, &NwScoring::default()));
        assert!(m.ai_changed().iter().all(|c| !c));
        assert!(m.e_changed().iter().all(|c| !c));
    }

    #[test]
    fn smoothing_examples() {
        let m = smooth_ai_mask(&from_unchanged(&[1, 0, 1, 1, 0, 0, 1]));
        assert_eq!(m.ai_unchanged(), bits(&[1, 1, 1, 1, 0, 0, 1]));

        let m = smooth_ai_mask(&from_unchanged(&[1, 1, 1]));
        assert_eq!(m.ai_unchanged(), bits(&[1, 1, 1]));

        let m = smooth_ai_mask(&EditMasks::new(bits(&[1, 1, 0, 1]), bits(&[1, 0])));
        assert_eq!(m.ai_changed(), bits(&[1, 1, 0, 0]));
        assert_eq!(m.e_changed(), bits(&[1, 0]));
    }

    #[test]
    fn fractions() {
        let m = EditMasks::new(bits(&[0, 1, 1, 0, 1]), vec![]);
        assert!((change_fraction(&m, Side::Ai).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(change_fraction(&EditMasks::unchanged(3, 0), Side::Ai).unwrap(), 0.0);
        let all = EditMasks::new(vec![true; 4], vec![true; 2]);
        assert_eq!(change_fraction(&all, Side::Edit).unwrap(), 1.0);
        assert!(matches!(
            change_fraction(&all, Side::Edit).and(change_fraction(&EditMasks::default(), Side::Ai)),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn discard_filter() {
        let seven = from_unchanged(&[0, 0, 0, 0, 0, 0, 0, 1, 1, 1]);
        assert!(!filter_by_change_ratio(&seven, DEFAULT_DISCARD_THRESHOLD));
        assert!(filter_by_change_ratio(&from_unchanged(&[1; 10]), 0.6));
        let six = from_unchanged(&[0, 0, 0, 0, 0, 0, 1, 1, 1, 1]);
        assert!(filter_by_change_ratio(&six, 0.6));
        assert!(filter_by_change_ratio(&EditMasks::default(), 0.6));
    }
}
