//! A seeded synthetic corpus of doctor/patient exchanges, AI summaries with
//! systematic errors, and edits that fix them.
//!
//! Errors are tied to cue words in the input, so a model trained on the AI
//! summaries learns to repeat them:
//! - `um` swaps the symptom for a look-alike word,
//! - `uh` inserts a modifier that the conversation never mentions (some
//!   patients do describe their symptom with one, and then it belongs in
//!   the summary),
//! - `anyway` drops the dosing frequency.
//!
//! Editors fix each error with probability `fix_rate`, so some mistakes
//! survive into the edits. The generator records which AI positions differ
//! from the edit so alignment can be checked against ground truth.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{write_jsonl, DatasetRecord};
use crate::error::{Error, Result};
use crate::example::Origin;
use crate::textproc::ConceptLexicon;

const SYMPTOMS: [(&str, &str); 12] = [
    ("fever", "fervor"),
    ("cough", "cuff"),
    ("rash", "trash"),
    ("headache", "headway"),
    ("dizziness", "busyness"),
    ("wheezing", "sneezing"),
    ("fatigue", "fatigues"),
    ("swelling", "spelling"),
    ("itching", "etching"),
    ("cramps", "camps"),
    ("chills", "chill"),
    ("numbness", "dumbness"),
];
const SITES: [&str; 12] = [
    "chest", "back", "knee", "ankle", "shoulder", "neck", "wrist", "hip", "elbow", "stomach",
    "throat", "foot",
];
const MEDS: [&str; 12] = [
    "ibuprofen", "amoxicillin", "lisinopril", "metformin", "albuterol", "prednisone",
    "omeprazole", "sertraline", "atorvastatin", "cetirizine", "naproxen", "insulin",
];
const FREQS: [&str; 6] = ["daily", "nightly", "weekly", "hourly", "biweekly", "monthly"];
const MODIFIERS: [&str; 4] = ["severe", "chronic", "mild", "acute"];
/// Share of patients who describe their symptom with a modifier.
const MODIFIER_RATE: f64 = 0.25;
const FILLERS: [&str; 6] = ["okay", "so", "well", "right", "yeah", "alright"];

pub const CUE_SWAP: &str = "um";
pub const CUE_INSERT: &str = "uh";
pub const CUE_DROP: &str = "anyway";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub seed: u64,
    /// Total records across the train, seen-pool and eval splits.
    pub size: usize,
    /// Approximate number of content word types; clamped to what the word lists hold.
    pub vocab_size: usize,
    /// Probability of each error kind, independently per record.
    pub error_rate: f64,
    /// Probability that an editor fixes a given error.
    pub fix_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            size: 1000,
            vocab_size: 40,
            error_rate: 0.3,
            fix_rate: 0.7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.vocab_size == 0 {
            return Err(Error::Config("size and vocab_size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.error_rate) || !(0.0..=1.0).contains(&self.fix_rate) {
            return Err(Error::Config("error_rate and fix_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Values per slot category.
    fn per_category(&self) -> usize {
        (self.vocab_size / 4).clamp(2, SYMPTOMS.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Swap,
    Insert,
    Drop,
}

/// Where the generator corrupted one AI summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: String,
    pub errors: Vec<ErrorKind>,
    /// Errors the editor left in place.
    pub unfixed: Vec<ErrorKind>,
    /// Token positions of the AI summary that the edit changed.
    pub ai_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    /// Unseen records with human-style edits.
    pub train: Vec<DatasetRecord>,
    /// Seen records whose edit is an independently written reference summary.
    pub seen_pool: Vec<DatasetRecord>,
    /// Held-out unseen records.
    pub eval: Vec<DatasetRecord>,
    pub truth: Vec<TruthRecord>,
    pub lexicon: ConceptLexicon,
}

struct Slots {
    /// Modifier the patient actually used.
    modifier: Option<usize>,
    sym: usize,
    site: usize,
    med: usize,
    freq: usize,
}

fn join(words: &[&str]) -> String {
    words.join(" ")
}

fn input_text(s: &Slots, cues: &[&str], fillers: &[&str]) -> String {
    let mut w: Vec<&str> = vec!["doctor", ":", "what", "brings", "you", "in", "?", "patient", ":"];
    w.extend_from_slice(fillers);
    w.extend_from_slice(cues);
    w.extend_from_slice(&["i", "have"]);
    w.extend(s.modifier.map(|m| MODIFIERS[m]));
    w.extend_from_slice(&[SYMPTOMS[s.sym].0, "in", "my", SITES[s.site], "."]);
    w.extend_from_slice(&["doctor", ":", "let", "us", "start", MEDS[s.med], FREQS[s.freq], "."]);
    join(&w)
}

fn gold_summary(s: &Slots) -> Vec<&'static str> {
    let mut w = vec!["patient", "reports"];
    w.extend(s.modifier.map(|m| MODIFIERS[m]));
    w.extend_from_slice(&[SYMPTOMS[s.sym].0, "in", "the", SITES[s.site], ";", "started", MEDS[s.med], FREQS[s.freq], "."]);
    w
}

/// Gold summary with `errors` applied, plus the positions of the swapped
/// and inserted tokens.
fn corrupt(s: &Slots, errors: &[ErrorKind]) -> (Vec<&'static str>, Vec<(ErrorKind, usize)>) {
    let mut words = gold_summary(s);
    let mut marks = Vec::new();
    let sym_at = 2 + s.modifier.is_some() as usize;
    // Apply right to left so earlier indices stay valid.
    if errors.contains(&ErrorKind::Drop) {
        words.remove(sym_at + 7);
    }
    if errors.contains(&ErrorKind::Swap) {
        words[sym_at] = SYMPTOMS[s.sym].1;
    }
    // A patient-supplied modifier leaves no room for an invented one.
    let inserted = errors.contains(&ErrorKind::Insert) && s.modifier.is_none();
    if inserted {
        words.insert(2, MODIFIERS[s.site % MODIFIERS.len()]);
        marks.push((ErrorKind::Insert, 2));
    }
    if errors.contains(&ErrorKind::Swap) {
        marks.push((ErrorKind::Swap, sym_at + inserted as usize));
    }
    (words, marks)
}

/// AI summary with the requested errors and the positions an edit fixing
/// `fixed` would change.
fn ai_summary(s: &Slots, errors: &[ErrorKind], fixed: &[ErrorKind]) -> (Vec<&'static str>, Vec<usize>) {
    let (words, marks) = corrupt(s, errors);
    let positions = marks.into_iter().filter(|(k, _)| fixed.contains(k)).map(|(_, p)| p).collect();
    (words, positions)
}

/// Reference summary written independently of the AI summary. Most follow
/// the same template, some reword it lightly, a few rewrite it completely.
fn imitation_summary(s: &Slots, style: u32) -> String {
    let (sym, site, med, freq) = (SYMPTOMS[s.sym].0, SITES[s.site], MEDS[s.med], FREQS[s.freq]);
    let m: Vec<&str> = s.modifier.map(|m| MODIFIERS[m]).into_iter().collect();
    match style {
        0 => join(&gold_summary(s)),
        1 => join(&[&["patient", "has"][..], &m, &[sym, "in", "the", site, ";", "taking", med, freq, "."]].concat()),
        2 => join(&[&[site][..], &m, &[sym, "noted", ";", med, "given", freq]].concat()),
        _ => join(&[&["plan", ":", med, freq, "for"][..], &m, &[sym, ",", site]].concat()),
    }
}

fn build_lexicon(k: usize) -> Result<ConceptLexicon> {
    let mut lex = ConceptLexicon::new();
    for (i, (sym, look_alike)) in SYMPTOMS.iter().take(k).enumerate() {
        lex.insert(sym, &format!("S{i:02}"))?;
        lex.insert(look_alike, &format!("X{i:02}"))?;
    }
    for (i, site) in SITES.iter().take(k).enumerate() {
        lex.insert(site, &format!("B{i:02}"))?;
    }
    for (i, med) in MEDS.iter().take(k).enumerate() {
        lex.insert(med, &format!("D{i:02}"))?;
    }
    for (i, m) in MODIFIERS.iter().enumerate() {
        lex.insert(m, &format!("M{i:02}"))?;
    }
    Ok(lex)
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let k = cfg.per_category();
    let n_eval = cfg.size / 5;
    let n_seen = cfg.size * 7 / 20;
    let n_train = cfg.size - n_eval - n_seen;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut corpus = SynthCorpus {
        train: Vec::with_capacity(n_train),
        seen_pool: Vec::with_capacity(n_seen),
        eval: Vec::with_capacity(n_eval),
        truth: Vec::with_capacity(cfg.size),
        lexicon: build_lexicon(k)?,
    };

    for i in 0..cfg.size {
        let (split, origin) = if i < n_train {
            ("train", Origin::Unseen)
        } else if i < n_train + n_seen {
            ("seen", Origin::Seen)
        } else {
            ("eval", Origin::Unseen)
        };
        let id = format!("{split}-{i:05}");
        let slots = Slots {
            modifier: rng.random_bool(MODIFIER_RATE).then(|| rng.random_range(0..MODIFIERS.len())),
            sym: rng.random_range(0..k),
            site: rng.random_range(0..k),
            med: rng.random_range(0..k),
            freq: rng.random_range(0..FREQS.len()),
        };
        let mut errors = Vec::new();
        let mut cues = Vec::new();
        for (kind, cue) in [
            (ErrorKind::Swap, CUE_SWAP),
            (ErrorKind::Insert, CUE_INSERT),
            (ErrorKind::Drop, CUE_DROP),
        ] {
            if rng.random_bool(cfg.error_rate) && !(kind == ErrorKind::Insert && slots.modifier.is_some()) {
                errors.push(kind);
                cues.push(cue);
            }
        }
        let n_fill = rng.random_range(0..=2);
        let fillers: Vec<&str> = (0..n_fill).map(|_| *FILLERS.choose(&mut rng).unwrap()).collect();
        let input = input_text(&slots, &cues, &fillers);
        let (unfixed, fixed): (Vec<ErrorKind>, Vec<ErrorKind>) = match origin {
            Origin::Unseen => errors.iter().partition(|_| !rng.random_bool(cfg.fix_rate)),
            Origin::Seen => (Vec::new(), errors.clone()),
        };
        let (ai_words, ai_positions) = ai_summary(&slots, &errors, &fixed);
        let edit = match origin {
            Origin::Unseen => join(&corrupt(&slots, &unfixed).0),
            Origin::Seen => {
                let r: f64 = rng.random();
                let style = match r {
                    r if r < 0.45 => 0,
                    r if r < 0.8 => 1,
                    r if r < 0.9 => 2,
                    _ => 3,
                };
                imitation_summary(&slots, style)
            }
        };
        let record = DatasetRecord {
            id: id.clone(),
            input,
            ai_summary: join(&ai_words),
            edit_summary: edit,
            origin,
        };
        corpus.truth.push(TruthRecord {
            id,
            errors,
            unfixed,
            ai_positions,
        });
        match split {
            "train" => corpus.train.push(record),
            "seen" => corpus.seen_pool.push(record),
            _ => corpus.eval.push(record),
        }
    }
    Ok(corpus)
}

impl SynthCorpus {
    /// Writes `train.jsonl`, `seen_pool.jsonl`, `eval.jsonl`, `truth.jsonl`
    /// and `lexicon.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_jsonl(dir.join("train.jsonl"), &self.train)?;
        write_jsonl(dir.join("seen_pool.jsonl"), &self.seen_pool)?;
        write_jsonl(dir.join("eval.jsonl"), &self.eval)?;
        write_jsonl(dir.join("truth.jsonl"), &self.truth)?;
        let mut lex = self.lexicon.to_lines().join("\n");
        lex.push('\n');
        let path = dir.join("lexicon.tsv");
        fs::write(&path, lex).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_add_up() {
        let c = gen_synthetic(&SynthConfig { size: 100, ..Default::default() }).unwrap();
        assert_eq!(c.train.len() + c.seen_pool.len() + c.eval.len(), 100);
        assert_eq!(c.truth.len(), 100);
        assert!(c.seen_pool.iter().all(|r| r.origin == Origin::Seen));
    }

    #[test]
    fn no_errors_means_identical_summaries() {
        let c = gen_synthetic(&SynthConfig { error_rate: 0.0, size: 60, ..Default::default() }).unwrap();
        assert!(c.train.iter().chain(&c.eval).all(|r| r.ai_summary == r.edit_summary));
        assert!(c.truth.iter().all(|t| t.ai_positions.is_empty()));
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = SynthConfig { size: 50, ..Default::default() };
        assert_eq!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&cfg).unwrap());
        let other = gen_synthetic(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(other.train, gen_synthetic(&cfg).unwrap().train);
    }

    #[test]
    fn errors_follow_their_cues() {
        let c = gen_synthetic(&SynthConfig { size: 200, error_rate: 0.5, ..Default::default() }).unwrap();
        let records = c.train.iter().chain(&c.seen_pool).chain(&c.eval);
        for (r, t) in records.zip(&c.truth) {
            let words: Vec<&str> = r.input.split(' ').collect();
            assert_eq!(words.contains(&CUE_SWAP), t.errors.contains(&ErrorKind::Swap));
            let spoken = words.iter().any(|w| MODIFIERS.contains(w));
            assert!(!(spoken && t.errors.contains(&ErrorKind::Insert)));
            let full = 11 + spoken as usize + t.errors.contains(&ErrorKind::Insert) as usize;
            assert_eq!(words.contains(&CUE_DROP), r.ai_summary.split(' ').count() < full);
        }
    }

    #[test]
    fn combined_errors_positions() {
        let s = Slots { modifier: None, sym: 0, site: 1, med: 0, freq: 0 };
        let all = [ErrorKind::Swap, ErrorKind::Insert, ErrorKind::Drop];
        let (w, p) = ai_summary(&s, &all, &all);
        assert_eq!(join(&w), "patient reports chronic fervor in the back ; started ibuprofen .");
        assert_eq!(p, vec![2, 3]);
        let (_, p) = ai_summary(&s, &all, &[ErrorKind::Swap]);
        assert_eq!(p, vec![3]);
    }

    #[test]
    fn unfixed_errors_stay_in_the_edit() {
        let c = gen_synthetic(&SynthConfig { size: 300, error_rate: 0.5, fix_rate: 0.0, ..Default::default() }).unwrap();
        assert!(c.train.iter().chain(&c.eval).all(|r| r.ai_summary == r.edit_summary));
        let c = gen_synthetic(&SynthConfig { size: 300, error_rate: 0.5, fix_rate: 1.0, ..Default::default() }).unwrap();
        let records = c.train.iter().chain(&c.seen_pool).chain(&c.eval);
        assert!(records.zip(&c.truth).all(|(_, t)| t.unfixed.is_empty()));
    }
}
