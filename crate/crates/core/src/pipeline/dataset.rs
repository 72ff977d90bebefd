//! Line-delimited JSON datasets of (input, AI summary, edit) records.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{Alignment, MaskRecord, NwScoring, DEFAULT_DISCARD_THRESHOLD};
use crate::error::{Error, Result};
use crate::example::{MaskOptions, Origin, TrainingExample};
use crate::textproc::{encode, tokenize, SeqRole, TokenSeq, Vocab};

/// One dataset line. Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub input: String,
    pub ai_summary: String,
    pub edit_summary: String,
    pub origin: Origin,
}

/// Parses JSONL; blank lines are skipped and errors carry the 1-based line number.
pub fn parse_records(text: &str, source: &str) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Data {
            path: source.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text, &path.display().to_string())
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Mask post-processing per origin. Imitation (seen) data is smoothed and
/// filtered by default; human edits are used as aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskPolicy {
    pub seen: MaskOptions,
    pub unseen: MaskOptions,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        MaskPolicy::new(NwScoring::default(), true, Some(DEFAULT_DISCARD_THRESHOLD), false)
    }
}

impl MaskPolicy {
    /// `smooth` and `discard_threshold` apply to seen data, and to unseen data
    /// too when `also_unseen` is set.
    pub fn new(scoring: NwScoring, smooth: bool, discard_threshold: Option<f64>, also_unseen: bool) -> Self {
        let seen = MaskOptions {
            scoring,
            smooth,
            discard_threshold,
        };
        let plain = MaskOptions {
            scoring,
            ..MaskOptions::default()
        };
        MaskPolicy {
            seen,
            unseen: if also_unseen { seen } else { plain },
        }
    }

    pub fn for_origin(&self, origin: Origin) -> &MaskOptions {
        match origin {
            Origin::Seen => &self.seen,
            Origin::Unseen => &self.unseen,
        }
    }
}

/// Tokenized and aligned records, including discarded ones.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub examples: Vec<TrainingExample>,
    pub alignments: Vec<Alignment>,
}

impl Dataset {
    pub fn kept(&self) -> impl Iterator<Item = &TrainingExample> {
        self.examples.iter().filter(|e| e.kept)
    }

    pub fn kept_count(&self) -> usize {
        self.kept().count()
    }

    pub fn discarded_count(&self) -> usize {
        self.examples.len() - self.kept_count()
    }

    pub fn mask_records(&self) -> Vec<MaskRecord> {
        self.examples
            .iter()
            .zip(&self.alignments)
            .map(|(e, a)| MaskRecord::new(&e.id, &e.s_ai, &e.s_edit, a, &e.masks, e.kept))
            .collect()
    }
}

/// How record text becomes token ids.
#[derive(Debug)]
pub enum Encoding<'a> {
    /// Unknown words are added to the vocabulary.
    Grow(&'a mut Vocab),
    /// Unknown words become UNK.
    Frozen(&'a Vocab),
}

type Triple = (TokenSeq, TokenSeq, TokenSeq);

fn tokenize_records(records: &[DatasetRecord], enc: Encoding<'_>) -> Vec<Triple> {
    match enc {
        // Sequential so ids are assigned in file order.
        Encoding::Grow(vocab) => records
            .iter()
            .map(|r| {
                (
                    tokenize(&r.input, vocab, true, SeqRole::Input),
                    tokenize(&r.ai_summary, vocab, true, SeqRole::AiSummary),
                    tokenize(&r.edit_summary, vocab, true, SeqRole::EditSummary),
                )
            })
            .collect(),
        Encoding::Frozen(vocab) => records
            .par_iter()
            .map(|r| {
                (
                    encode(&r.input, vocab, SeqRole::Input),
                    encode(&r.ai_summary, vocab, SeqRole::AiSummary),
                    encode(&r.edit_summary, vocab, SeqRole::EditSummary),
                )
            })
            .collect(),
    }
}

/// Tokenizes, aligns and masks every record.
pub fn build_dataset(records: &[DatasetRecord], enc: Encoding<'_>, policy: &MaskPolicy) -> Dataset {
    let seqs = tokenize_records(records, enc);
    let (examples, alignments) = records
        .par_iter()
        .zip(seqs)
        .map(|(r, (input, ai, edit))| {
            let edit = if r.origin == Origin::Seen {
                edit.with_role(SeqRole::ImitationSummary)
            } else {
                edit
            };
            TrainingExample::build(&r.id, input, ai, edit, r.origin, policy.for_origin(r.origin))
        })
        .unzip();
    Dataset { examples, alignments }
}

pub fn load_dataset(path: impl AsRef<Path>, enc: Encoding<'_>, policy: &MaskPolicy) -> Result<Dataset> {
    Ok(build_dataset(&read_records(path)?, enc, policy))
}
