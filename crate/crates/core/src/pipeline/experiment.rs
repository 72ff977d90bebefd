//! End-to-end comparison of training variants on a synthetic corpus: train a
//! base model on AI summaries, fine-tune it with each variant on the edits,
//! and score every variant against the `salt_l` run.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Variant};
use super::dataset::DatasetRecord;
use super::eval::{run_eval, EvalOptions};
use super::synth::{SynthConfig, SynthCorpus};
use super::train::{run_training, TrainInputs, TrainOutcome};
use crate::error::Result;
use crate::loss::{DpoConfig, SaltVariant};
use crate::metrics::MetricReport;
use crate::model::{Checkpoint, DecodeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub synth: SynthConfig,
    pub pretrain_steps: usize,
    pub pretrain_lr: f64,
    pub steps: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub dpo: DpoConfig,
    pub decode: DecodeConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            synth: SynthConfig::default(),
            pretrain_steps: 300,
            pretrain_lr: 0.05,
            steps: 500,
            lr: 0.01,
            batch_size: 16,
            seed: 0,
            dpo: DpoConfig::default(),
            decode: DecodeConfig {
                min_len: 4,
                max_len: 30,
                ..DecodeConfig::default()
            },
        }
    }
}

impl SuiteConfig {
    pub fn experiment(&self, variant: Variant, steps: usize) -> ExperimentConfig {
        ExperimentConfig {
            steps,
            lr: self.lr,
            batch_size: self.batch_size,
            seed: self.seed,
            dpo: self.dpo,
            decode: self.decode,
            ..ExperimentConfig::new(variant)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub variant: Variant,
    pub outcome: TrainOutcome,
    pub report: MetricReport,
}

/// The model whose outputs the edits correct: plain likelihood training on
/// the AI summaries of the seen split.
pub fn pretrain_base(corpus: &SynthCorpus, cfg: &SuiteConfig) -> Result<Checkpoint> {
    let exp = ExperimentConfig {
        lr: cfg.pretrain_lr,
        ..cfg.experiment(Variant::Salt(SaltVariant::L), cfg.pretrain_steps)
    };
    let records: Vec<DatasetRecord> = corpus
        .seen_pool
        .iter()
        .map(|r| DatasetRecord {
            edit_summary: r.ai_summary.clone(),
            ..r.clone()
        })
        .collect();
    let inputs = TrainInputs {
        train: &records,
        seen_pool: None,
        init: None,
    };
    let mut ck = run_training(&exp, inputs)?.checkpoint;
    ck.variant = Some("base".into());
    Ok(ck)
}

/// Fine-tunes `base` with each variant and evaluates on the held-out split.
/// Ratios are filled in against the `salt_l` run when it is part of the suite.
pub fn run_suite(corpus: &SynthCorpus, base: &Checkpoint, variants: &[Variant], cfg: &SuiteConfig) -> Result<Vec<SuiteRun>> {
    let opts = EvalOptions {
        decode: cfg.decode,
        lexicon: corpus.lexicon.clone(),
        ..EvalOptions::default()
    };
    let mut runs = Vec::with_capacity(variants.len());
    for &variant in variants {
        let inputs = TrainInputs {
            train: &corpus.train,
            seen_pool: Some(&corpus.seen_pool),
            init: Some(base),
        };
        let outcome = run_training(&cfg.experiment(variant, cfg.steps), inputs)?;
        let report = run_eval(&outcome.checkpoint, &corpus.eval, None, &opts)?;
        runs.push(SuiteRun {
            variant,
            outcome,
            report,
        });
    }
    let baseline = runs
        .iter()
        .find(|r| r.variant == Variant::Salt(SaltVariant::L))
        .map(|r| r.report.clone());
    if let Some(base) = baseline {
        for r in &mut runs {
            r.report.attach_baseline(&base, opts.ratio)?;
        }
    }
    Ok(runs)
}
