use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ExperimentConfig, Variant};
use super::dataset::{build_dataset, DatasetRecord, Encoding, MaskPolicy};
use super::replay::mix_replay;
use crate::error::{Error, Result};
use crate::example::{Origin, TrainingExample};
use crate::loss::SaltVariant;
use crate::model::{decode, evaluate, AdamState, Checkpoint, DpoBatchStats, Objective, SaltItem, TinyLmParams};
use crate::textproc::{SeqRole, Vocab};

/// One line of the loss log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub variant: String,
    pub total: f64,
    pub ai_side: f64,
    pub edit_side: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dpo: Option<DpoBatchStats>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainInputs<'a> {
    pub train: &'a [DatasetRecord],
    /// Required by replay variants, ignored otherwise.
    pub seen_pool: Option<&'a [DatasetRecord]>,
    /// Starting point; its parameters also serve as the preference reference.
    pub init: Option<&'a Checkpoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataStats {
    pub train_kept: usize,
    pub train_discarded: usize,
    pub seen_kept: usize,
    pub seen_discarded: usize,
    pub seen_sampled: usize,
    /// Where seen-pool AI summaries came from: `record` or `decoded_initial_checkpoint`.
    pub seen_ai_source: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: Vec<LossRecord>,
    pub stats: DataStats,
}

/// Decodes the initial model over seen inputs and realigns against the imitation edits.
fn regenerate_seen(
    seen: &[TrainingExample],
    params: &TinyLmParams,
    vocab: &Vocab,
    cfg: &ExperimentConfig,
    policy: &MaskPolicy,
) -> Result<Vec<TrainingExample>> {
    seen.par_iter()
        .map(|e| {
            let s_ai = decode(params, vocab, &e.input, &cfg.decode)?.with_role(SeqRole::AiSummary);
            let (ex, _) = TrainingExample::build(
                e.id.clone(),
                e.input.clone(),
                s_ai,
                e.s_edit.clone(),
                Origin::Seen,
                policy.for_origin(Origin::Seen),
            );
            Ok(ex)
        })
        .collect()
}

fn item_variant(variant: Variant, origin: Origin) -> SaltVariant {
    match (variant, origin) {
        (Variant::Rsalt { replay, .. }, Origin::Seen) => replay.as_salt(),
        (Variant::Salt(s) | Variant::Rsalt { salt: s, .. }, _) => s,
        // Unused: preference batches do not carry SALT items.
        (Variant::Dpo, _) => SaltVariant::L,
    }
}

/// Trains one variant. Deterministic for a given config, seed and data.
pub fn run_training(cfg: &ExperimentConfig, inputs: TrainInputs<'_>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let policy = cfg.mask_policy();
    let mut vocab = inputs.init.map(|c| c.vocab.clone()).unwrap_or_default();
    let train = build_dataset(inputs.train, Encoding::Grow(&mut vocab), &policy);
    let seen = if cfg.variant.uses_replay() {
        let pool = inputs
            .seen_pool
            .ok_or_else(|| Error::Config(format!("variant {} needs a seen pool", cfg.variant)))?;
        Some(build_dataset(pool, Encoding::Grow(&mut vocab), &policy))
    } else {
        None
    };

    let mut params = match inputs.init {
        Some(ck) => ck.params.grown(vocab.len())?,
        None if cfg.init_scale > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            TinyLmParams::random(vocab.len(), cfg.init_scale, &mut rng)
        }
        None => TinyLmParams::zeros(vocab.len()),
    };
    let reference = params.clone();

    let mut stats = DataStats {
        train_kept: train.kept_count(),
        train_discarded: train.discarded_count(),
        ..DataStats::default()
    };
    let stream = match seen {
        Some(seen) => {
            let seen_examples = match inputs.init {
                Some(_) if cfg.regenerate_seen => {
                    stats.seen_ai_source = Some("decoded_initial_checkpoint".into());
                    regenerate_seen(&seen.examples, &reference, &vocab, cfg, &policy)?
                }
                _ => {
                    stats.seen_ai_source = Some("record".into());
                    seen.examples
                }
            };
            stats.seen_kept = seen_examples.iter().filter(|e| e.kept).count();
            stats.seen_discarded = seen_examples.len() - stats.seen_kept;
            let mixed = mix_replay(&train.examples, &seen_examples, &cfg.replay())?;
            stats.seen_sampled = mixed.len() - stats.train_kept;
            mixed
        }
        None => train.examples.into_iter().filter(|e| e.kept).collect(),
    };
    if stream.is_empty() {
        return Err(Error::EmptyBatch("no kept training examples"));
    }
    let stream: Vec<TrainingExample> = stream.iter().map(|e| e.with_terminal_eos(&vocab)).collect();

    let mut adam = AdamState::new(params.len(), cfg.lr);
    let mut order: Vec<usize> = (0..stream.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut cursor = 0;
    let mut log = Vec::with_capacity(cfg.steps);
    let weights = cfg.effective_weights();
    let name = cfg.variant.to_string();

    for step in 1..=cfg.steps {
        if cursor == 0 {
            order.shuffle(&mut rng);
        }
        let end = (cursor + cfg.batch_size).min(order.len());
        let batch: Vec<&TrainingExample> = order[cursor..end].iter().map(|&i| &stream[i]).collect();
        cursor = if end == order.len() { 0 } else { end };

        let eval = match cfg.variant {
            Variant::Dpo => evaluate(
                &params,
                &Objective::Dpo {
                    examples: &batch,
                    reference: &reference,
                    config: cfg.dpo,
                },
                cfg.reduction,
            )?,
            v => {
                let items: Vec<SaltItem<'_>> = batch
                    .iter()
                    .map(|e| SaltItem {
                        example: e,
                        variant: item_variant(v, e.origin),
                    })
                    .collect();
                evaluate(
                    &params,
                    &Objective::Salt {
                        items: &items,
                        weights,
                        form: cfg.edit_form,
                    },
                    cfg.reduction,
                )?
            }
        };
        if !eval.loss.is_finite() {
            return Err(Error::Diverged { step });
        }
        adam.step(params.as_mut_slice(), &eval.grad).map_err(|e| match e {
            Error::Diverged { .. } => Error::Diverged { step },
            other => other,
        })?;
        log.push(LossRecord {
            step,
            variant: name.clone(),
            total: eval.loss,
            ai_side: eval.breakdown.ai_side,
            edit_side: eval.breakdown.edit_side,
            dpo: eval.dpo,
        });
    }

    let mut checkpoint = Checkpoint::new(vocab, params)?;
    checkpoint.step = cfg.steps;
    checkpoint.variant = Some(name);
    checkpoint.reference = Some(reference);
    checkpoint.meta.insert("seed".into(), Value::from(cfg.seed));
    checkpoint.meta.insert("config".into(), serde_json::to_value(cfg)?);
    checkpoint.meta.insert("data".into(), serde_json::to_value(&stats)?);
    Ok(TrainOutcome {
        checkpoint,
        log,
        stats,
    })
}
