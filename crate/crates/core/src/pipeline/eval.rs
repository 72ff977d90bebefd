use std::collections::HashMap;

use rayon::prelude::*;

use super::dataset::{build_dataset, DatasetRecord, Encoding, MaskPolicy};
use crate::align::NwScoring;
use crate::error::{Error, Result};
use crate::example::TrainingExample;
use crate::loss::{rewards_and_accuracy, DpoConfig, DpoLogProbs};
use crate::metrics::{
    rouge_l, rouge_n, sage_concept, sage_word_with_mode, ExampleMetrics, MetricReport,
    RatioAggregation, SageCountMode, SageReport,
};
use crate::model::{decode, sequence_log_prob, Checkpoint, DecodeConfig, TinyLmParams};
use crate::textproc::{encode, ConceptLexicon, SeqRole, Stopwords, TokenSeq, Vocab};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub decode: DecodeConfig,
    pub stopwords: Stopwords,
    pub lexicon: ConceptLexicon,
    pub count_mode: SageCountMode,
    pub ratio: RatioAggregation,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            decode: DecodeConfig::default(),
            stopwords: Stopwords::english(),
            lexicon: ConceptLexicon::new(),
            count_mode: SageCountMode::default(),
            ratio: RatioAggregation::default(),
        }
    }
}

impl EvalOptions {
    /// Uses the decode settings stored with a checkpoint by training, if any.
    pub fn for_checkpoint(ck: &Checkpoint) -> Self {
        let decode = ck
            .meta
            .get("config")
            .and_then(|c| c.get("decode"))
            .and_then(|d| serde_json::from_value(d.clone()).ok())
            .unwrap_or_default();
        EvalOptions {
            decode,
            ..EvalOptions::default()
        }
    }
}

/// Fraction of examples where the edit earns a strictly higher implicit
/// reward than the AI summary, relative to `reference`.
pub fn reward_accuracy(
    params: &TinyLmParams,
    reference: &TinyLmParams,
    examples: &[TrainingExample],
    vocab: &Vocab,
) -> Result<f64> {
    let pairs: Vec<DpoLogProbs> = examples
        .par_iter()
        .map(|e| {
            let e = e.with_terminal_eos(vocab);
            let (u, c, r) = (e.input.ids(), e.s_edit.ids(), e.s_ai.ids());
            Ok(DpoLogProbs {
                chosen_theta: sequence_log_prob(params, &u, &c)?,
                rejected_theta: sequence_log_prob(params, &u, &r)?,
                chosen_ref: sequence_log_prob(reference, &u, &c)?,
                rejected_ref: sequence_log_prob(reference, &u, &r)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(rewards_and_accuracy(&pairs, &DpoConfig::default())?.accuracy)
}

fn score_example(out: &TokenSeq, e: &TrainingExample, opts: &EvalOptions) -> ExampleMetrics {
    let word = sage_word_with_mode(out, &e.s_ai, &e.s_edit, &opts.stopwords, opts.count_mode);
    let concept = sage_concept(out, &e.s_ai, &e.s_edit, &opts.lexicon);
    ExampleMetrics {
        id: e.id.clone(),
        output: out.text(),
        rouge1: rouge_n(out, &e.s_edit, 1).f1,
        rouge2: rouge_n(out, &e.s_edit, 2).f1,
        rouge_l: rouge_l(out, &e.s_edit).f1,
        sage: SageReport { word, concept },
    }
}

/// Scores outputs produced elsewhere, matched to records by id. Records
/// without an output are skipped; an output without a record is a data error.
pub fn score_outputs(
    variant: &str,
    records: &[DatasetRecord],
    outputs: &[(String, String)],
    opts: &EvalOptions,
) -> Result<MetricReport> {
    let mut vocab = Vocab::new();
    let policy = MaskPolicy::new(NwScoring::default(), false, None, false);
    let data = build_dataset(records, Encoding::Grow(&mut vocab), &policy);
    let by_id: HashMap<&str, &TrainingExample> = data.examples.iter().map(|e| (e.id.as_str(), e)).collect();
    let examples = outputs
        .iter()
        .map(|(id, text)| {
            let e = by_id.get(id.as_str()).ok_or_else(|| Error::Data {
                path: "outputs".into(),
                line: 0,
                message: format!("no record with id {id:?}"),
            })?;
            Ok(score_example(&encode(text, &vocab, SeqRole::Generated), e, opts))
        })
        .collect::<Result<Vec<_>>>()?;
    if examples.is_empty() {
        return Err(Error::EmptyBatch("no outputs to score"));
    }
    Ok(MetricReport::from_examples(variant, examples))
}

/// Decodes every record and scores the outputs against the edits.
pub fn run_eval(
    ck: &Checkpoint,
    records: &[DatasetRecord],
    baseline: Option<&MetricReport>,
    opts: &EvalOptions,
) -> Result<MetricReport> {
    if records.is_empty() {
        return Err(Error::EmptyBatch("evaluation set is empty"));
    }
    let policy = MaskPolicy::new(NwScoring::default(), false, None, false);
    let data = build_dataset(records, Encoding::Frozen(&ck.vocab), &policy);
    let examples: Vec<ExampleMetrics> = data
        .examples
        .par_iter()
        .map(|e| Ok(score_example(&decode(&ck.params, &ck.vocab, &e.input, &opts.decode)?, e, opts)))
        .collect::<Result<_>>()?;
    let variant = ck.variant.clone().unwrap_or_else(|| "unknown".into());
    let mut report = MetricReport::from_examples(&variant, examples);
    report.vocab_hash = ck.vocab.hash();
    if let Some(reference) = &ck.reference {
        report.reward_acc = Some(reward_accuracy(&ck.params, reference, &data.examples, &ck.vocab)?);
    }
    if let Some(base) = baseline {
        report.attach_baseline(base, opts.ratio)?;
    }
    Ok(report)
}
