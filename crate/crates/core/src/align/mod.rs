//! Global (Needleman-Wunsch) alignment of an AI summary against its edit,
//! and the changed/unchanged indicator masks derived from it.

mod masks;

pub use masks::{
    change_fraction, derive_masks, filter_by_change_ratio, smooth_ai_mask, EditMasks, MaskRecord,
    Side, DEFAULT_DISCARD_THRESHOLD,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{is_punctuation, Token, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    /// Correspondence: identical tokens on both sides.
    C,
    /// Substitution.
    S,
    /// Token present only in the edit.
    I,
    /// Token present only in the AI summary.
    D,
}

impl OpKind {
    pub fn as_char(self) -> char {
        match self {
            OpKind::C => 'C',
            OpKind::S => 'S',
            OpKind::I => 'I',
            OpKind::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'C' => Some(OpKind::C),
            'S' => Some(OpKind::S),
            'I' => Some(OpKind::I),
            'D' => Some(OpKind::D),
            _ => None,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignOp {
    pub kind: OpKind,
    pub ai_index: Option<usize>,
    pub edit_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<AlignOp>,
    pub score: i64,
}

impl Alignment {
    /// Op kinds as a compact string such as `"CIIISDCD"`.
    pub fn ops_string(&self) -> String {
        self.ops.iter().map(|op| op.kind.as_char()).collect()
    }

    pub fn kinds(&self) -> Vec<OpKind> {
        self.ops.iter().map(|op| op.kind).collect()
    }

    /// Number of AI-side and edit-side positions covered.
    pub fn lengths(&self) -> (usize, usize) {
        let ai = self.ops.iter().filter(|op| op.ai_index.is_some()).count();
        let edit = self.ops.iter().filter(|op| op.edit_index.is_some()).count();
        (ai, edit)
    }
}

/// How two tokens compare for the diagonal move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Same,
    /// Different tokens with near-identical spelling (`takes` / `take`).
    Related,
    Different,
}

/// Integer alignment scores.
///
/// A substitution between related surfaces scores `related`, any other
/// substitution scores `mismatch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NwScoring {
    #[serde(rename = "match")]
    pub match_score: i64,
    pub mismatch: i64,
    pub related: i64,
    pub gap: i64,
}

impl Default for NwScoring {
    fn default() -> Self {
        NwScoring {
            match_score: 1,
            mismatch: -2,
            related: -1,
            gap: -1,
        }
    }
}

impl NwScoring {
    pub fn validate(&self) -> Result<()> {
        if self.match_score <= self.mismatch {
            return Err(Error::Config("alignment match must exceed mismatch".into()));
        }
        if self.gap >= 0 {
            return Err(Error::Config("alignment gap must be negative".into()));
        }
        if self.related < self.mismatch || self.related >= self.match_score {
            return Err(Error::Config(
                "alignment related score must lie in [mismatch, match)".into(),
            ));
        }
        Ok(())
    }

    pub fn pair_score(&self, class: PairClass) -> i64 {
        match class {
            PairClass::Same => self.match_score,
            PairClass::Related => self.related,
            PairClass::Different => self.mismatch,
        }
    }
}

/// Surface-level relatedness: character edit distance at most a quarter of
/// the longer word.
pub fn related_surfaces(a: &str, b: &str) -> bool {
    if a == b || is_punctuation(a) || is_punctuation(b) {
        return false;
    }
    let longest = a.chars().count().max(b.chars().count());
    4 * strsim::levenshtein(a, b) <= longest
}

pub fn classify(a: &Token, b: &Token) -> PairClass {
    if a.same_as(b) {
        PairClass::Same
    } else if related_surfaces(&a.surface, &b.surface) {
        PairClass::Related
    } else {
        PairClass::Different
    }
}

/// Aligns an AI summary against an edited (or imitation) summary.
pub fn align_nw(ai: &TokenSeq, edit: &TokenSeq, scoring: &NwScoring) -> Alignment {
    align_by(ai.len(), edit.len(), |i, j| classify(&ai.tokens[i], &edit.tokens[j]), scoring)
}

/// Needleman-Wunsch over abstract sequences of lengths `n` (AI side) and `m`
/// (edit side).
///
/// Among equal-score alignments the one with the most matches, then the most
/// substitutions, wins. Those counts do not depend on which side is which, so
/// swapping the roles only exchanges I and D. Remaining ties go to the
/// diagonal, then a deletion (consume AI), then an insertion (consume edit).
pub fn align_by<F>(n: usize, m: usize, class: F, scoring: &NwScoring) -> Alignment
where
    F: Fn(usize, usize) -> PairClass,
{
    let classes: Vec<PairClass> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| class(i, j))
        .collect();
    let cls = |i: usize, j: usize| classes[i * m + j];
    // (score, matches, substitutions), compared lexicographically.
    let diag_step = |c: PairClass| -> Cell {
        match c {
            PairClass::Same => (scoring.match_score, 1, 0),
            other => (scoring.pair_score(other), 0, 1),
        }
    };
    type Cell = (i64, u32, u32);
    let add = |a: Cell, b: Cell| (a.0 + b.0, a.1 + b.1, a.2 + b.2);
    let gap: Cell = (scoring.gap, 0, 0);

    let w = m + 1;
    let mut cell: Vec<Cell> = vec![(0, 0, 0); (n + 1) * w];
    for i in 1..=n {
        cell[i * w] = (scoring.gap * i as i64, 0, 0);
    }
    for (j, c) in cell[1..=m].iter_mut().enumerate() {
        *c = (scoring.gap * (j + 1) as i64, 0, 0);
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = add(cell[(i - 1) * w + j - 1], diag_step(cls(i - 1, j - 1)));
            let up = add(cell[(i - 1) * w + j], gap);
            let left = add(cell[i * w + j - 1], gap);
            cell[i * w + j] = diag.max(up).max(left);
        }
    }

    let mut ops = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cell[i * w + j];
        if i > 0 && j > 0 {
            let c = cls(i - 1, j - 1);
            if here == add(cell[(i - 1) * w + j - 1], diag_step(c)) {
                let kind = if c == PairClass::Same { OpKind::C } else { OpKind::S };
                ops.push(AlignOp {
                    kind,
                    ai_index: Some(i - 1),
                    edit_index: Some(j - 1),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && (j == 0 || here == add(cell[(i - 1) * w + j], gap)) {
            ops.push(AlignOp {
                kind: OpKind::D,
                ai_index: Some(i - 1),
                edit_index: None,
            });
            i -= 1;
        } else {
            ops.push(AlignOp {
                kind: OpKind::I,
                ai_index: None,
                edit_index: Some(j - 1),
            });
            j -= 1;
        }
    }
    ops.reverse();
    Alignment {
        ops,
        score: cell[n * w + m].0,
    }
}

/// Sums the per-op contributions of an alignment.
pub fn rescore<F>(alignment: &Alignment, class: F, scoring: &NwScoring) -> i64
where
    F: Fn(usize, usize) -> PairClass,
{
    alignment
        .ops
        .iter()
        .map(|op| match (op.ai_index, op.edit_index) {
            (Some(i), Some(j)) => scoring.pair_score(class(i, j)),
            _ => scoring.gap,
        })
        .sum()
}
