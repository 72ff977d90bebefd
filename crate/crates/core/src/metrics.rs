//! ROUGE and SAGE.
//!
//! SAGE sorts the words (or concepts) of a new summary into three groups
//! defined by the AI summary and its edit: AI-only (G1, mistakes the edit
//! removed), edit-only (G2, content the user added) and shared (G3, content
//! the user kept).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{extract_concepts, strip_stop_punct, ConceptLexicon, Stopwords, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        let precision = if candidate == 0 { 0.0 } else { overlap as f64 / candidate as f64 };
        let recall = if reference == 0 { 0.0 } else { overlap as f64 / reference as f64 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore { precision, recall, f1 }
    }
}

fn ngram_counts<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 {
        for w in seq.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// ROUGE-N with clipped n-gram counts; `n = 0` scores zero.
pub fn rouge_n_by<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_counts(overlap, cand.values().sum(), refc.values().sum())
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

pub fn rouge_l_by<T: PartialEq>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

/// ROUGE-N over token surfaces (no stemming, no stopword removal).
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> RougeScore {
    rouge_n_by(&candidate.surfaces(), &reference.surfaces(), n)
}

pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> RougeScore {
    rouge_l_by(&candidate.surfaces(), &reference.surfaces())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SageCounts {
    pub g1: usize,
    pub g2: usize,
    pub g3: usize,
}

impl Add for SageCounts {
    type Output = SageCounts;
    fn add(self, o: SageCounts) -> SageCounts {
        SageCounts {
            g1: self.g1 + o.g1,
            g2: self.g2 + o.g2,
            g3: self.g3 + o.g3,
        }
    }
}

impl AddAssign for SageCounts {
    fn add_assign(&mut self, o: SageCounts) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SageReport {
    pub word: SageCounts,
    pub concept: SageCounts,
}

impl Add for SageReport {
    type Output = SageReport;
    fn add(self, o: SageReport) -> SageReport {
        SageReport {
            word: self.word + o.word,
            concept: self.concept + o.concept,
        }
    }
}

/// How words of the new summary are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SageCountMode {
    /// Each distinct word once.
    #[default]
    Types,
    /// Every occurrence.
    Tokens,
}

fn classify_items<'a, I>(items: I, ai: &HashSet<&str>, edit: &HashSet<&str>) -> SageCounts
where
    I: IntoIterator<Item = &'a str>,
{
    let mut c = SageCounts::default();
    for w in items {
        match (ai.contains(w), edit.contains(w)) {
            (true, false) => c.g1 += 1,
            (false, true) => c.g2 += 1,
            (true, true) => c.g3 += 1,
            (false, false) => {}
        }
    }
    c
}

pub fn sage_word(s_new: &TokenSeq, s_ai: &TokenSeq, s_edit: &TokenSeq, stopwords: &Stopwords) -> SageCounts {
    sage_word_with_mode(s_new, s_ai, s_edit, stopwords, SageCountMode::Types)
}

pub fn sage_word_with_mode(
    s_new: &TokenSeq,
    s_ai: &TokenSeq,
    s_edit: &TokenSeq,
    stopwords: &Stopwords,
    mode: SageCountMode,
) -> SageCounts {
    let new = strip_stop_punct(s_new, stopwords);
    let ai = strip_stop_punct(s_ai, stopwords);
    let edit = strip_stop_punct(s_edit, stopwords);
    let ai: HashSet<&str> = ai.surfaces().into_iter().collect();
    let edit: HashSet<&str> = edit.surfaces().into_iter().collect();
    let words = new.surfaces();
    match mode {
        SageCountMode::Types => {
            let distinct: BTreeSet<&str> = words.into_iter().collect();
            classify_items(distinct, &ai, &edit)
        }
        SageCountMode::Tokens => classify_items(words, &ai, &edit),
    }
}

/// Same grouping over lexicon concepts; concepts are always counted once.
pub fn sage_concept(s_new: &TokenSeq, s_ai: &TokenSeq, s_edit: &TokenSeq, lex: &ConceptLexicon) -> SageCounts {
    let new = extract_concepts(s_new, lex);
    let ai = extract_concepts(s_ai, lex);
    let edit = extract_concepts(s_edit, lex);
    let ai: HashSet<&str> = ai.iter().map(String::as_str).collect();
    let edit: HashSet<&str> = edit.iter().map(String::as_str).collect();
    classify_items(new.iter().map(String::as_str), &ai, &edit)
}

/// `system / baseline` per group; `None` where the baseline count is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RatioTriple {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SageRatios {
    pub word: RatioTriple,
    pub concept: RatioTriple,
}

fn ratio(system: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| system / baseline)
}

fn ratio_triple(s: SageCounts, b: SageCounts) -> RatioTriple {
    RatioTriple {
        g1: ratio(s.g1 as f64, b.g1 as f64),
        g2: ratio(s.g2 as f64, b.g2 as f64),
        g3: ratio(s.g3 as f64, b.g3 as f64),
    }
}

pub fn corpus_sage(reports: &[SageReport]) -> SageReport {
    reports.iter().copied().fold(SageReport::default(), Add::add)
}

/// Ratios of corpus-summed counts.
pub fn sage_ratio_report(system: &SageReport, baseline: &SageReport) -> SageRatios {
    SageRatios {
        word: ratio_triple(system.word, baseline.word),
        concept: ratio_triple(system.concept, baseline.concept),
    }
}

/// Mean of the per-example ratios, skipping examples whose baseline count is
/// zero. The two slices must describe the same examples in the same order.
pub fn sage_ratio_report_per_example(system: &[SageReport], baseline: &[SageReport]) -> SageRatios {
    let mean = |pick: &dyn Fn(&SageReport) -> usize| -> Option<f64> {
        let rs: Vec<f64> = system
            .iter()
            .zip(baseline)
            .filter_map(|(s, b)| ratio(pick(s) as f64, pick(b) as f64))
            .collect();
        (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64)
    };
    SageRatios {
        word: RatioTriple {
            g1: mean(&|r| r.word.g1),
            g2: mean(&|r| r.word.g2),
            g3: mean(&|r| r.word.g3),
        },
        concept: RatioTriple {
            g1: mean(&|r| r.concept.g1),
            g2: mean(&|r| r.concept.g2),
            g3: mean(&|r| r.concept.g3),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioAggregation {
    #[default]
    Corpus,
    PerExample,
}

/// Scores of one decoded example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleMetrics {
    pub id: String,
    pub output: String,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub sage: SageReport,
}

/// Evaluation summary written as JSON. ROUGE values are mean F1 over examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub variant: String,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub sage: SageReport,
    pub ratios_vs_baseline: Option<SageRatios>,
    #[serde(default)]
    pub reward_acc: Option<f64>,
    /// Vocabulary of the evaluated checkpoint; baselines must share it.
    #[serde(default)]
    pub vocab_hash: String,
    #[serde(default)]
    pub examples: Vec<ExampleMetrics>,
}

impl MetricReport {
    pub fn from_examples(variant: &str, examples: Vec<ExampleMetrics>) -> Self {
        let n = examples.len().max(1) as f64;
        let mean = |f: &dyn Fn(&ExampleMetrics) -> f64| examples.iter().map(f).sum::<f64>() / n;
        let sage: Vec<SageReport> = examples.iter().map(|e| e.sage).collect();
        MetricReport {
            variant: variant.to_string(),
            rouge1: mean(&|e| e.rouge1),
            rouge2: mean(&|e| e.rouge2),
            rouge_l: mean(&|e| e.rouge_l),
            sage: corpus_sage(&sage),
            ratios_vs_baseline: None,
            reward_acc: None,
            vocab_hash: String::new(),
            examples,
        }
    }

    /// Fills `ratios_vs_baseline` against another report.
    pub fn attach_baseline(&mut self, baseline: &MetricReport, how: RatioAggregation) -> Result<()> {
        if !self.vocab_hash.is_empty() && !baseline.vocab_hash.is_empty() && self.vocab_hash != baseline.vocab_hash {
            return Err(Error::VocabMismatch {
                expected: baseline.vocab_hash.clone(),
                found: self.vocab_hash.clone(),
            });
        }
        self.ratios_vs_baseline = Some(match how {
            RatioAggregation::Corpus => sage_ratio_report(&self.sage, &baseline.sage),
            RatioAggregation::PerExample => {
                let by_id: HashMap<&str, SageReport> =
                    baseline.examples.iter().map(|e| (e.id.as_str(), e.sage)).collect();
                let (sys, base): (Vec<_>, Vec<_>) = self
                    .examples
                    .iter()
                    .filter_map(|e| by_id.get(e.id.as_str()).map(|b| (e.sage, *b)))
                    .unzip();
                sage_ratio_report_per_example(&sys, &base)
            }
        });
        Ok(())
    }
}
