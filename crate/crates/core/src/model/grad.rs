//! Loss values and exact parameter gradients for every training objective.
//!
//! The loss module reports, per scored token, the derivative of the loss
//! with respect to `log p(token)`. Through the softmax,
//! `d log p_y / d z_k = [k == y] - p_k`, and every logit `z` is a plain sum of
//! one `E_prev` row, the `E_in` rows of the input bag and `b`, so each
//! logit gradient is scattered back to those rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sequence_probs_ids, TinyLmParams};
use crate::align::Side;
use crate::error::Result;
use crate::example::TrainingExample;
use crate::loss::{
    dpo_loss, dpo_loss_slope, loss_salt, rewards_and_accuracy, DpoConfig, DpoLogProbs,
    EditSideForm, LossBreakdown, LossWeights, SaltVariant, TokenProbs,
};
use crate::textproc::{TokenId, BOS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Sum,
    /// Sum per sequence, average over the batch.
    #[default]
    Mean,
}

#[derive(Debug, Clone, Copy)]
pub struct SaltItem<'a> {
    pub example: &'a TrainingExample,
    pub variant: SaltVariant,
}

#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    /// SALT over a batch; replayed examples simply carry their replay variant.
    Salt {
        items: &'a [SaltItem<'a>],
        weights: LossWeights,
        form: EditSideForm,
    },
    /// Preference loss with the edit chosen over the AI summary.
    Dpo {
        examples: &'a [&'a TrainingExample],
        reference: &'a TinyLmParams,
        config: DpoConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoBatchStats {
    pub loss: f64,
    pub reward_acc: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: f64,
    /// Per-token decomposition (SALT objectives only).
    pub breakdown: LossBreakdown,
    pub dpo: Option<DpoBatchStats>,
    pub grad: Vec<f64>,
}

pub fn sequence_log_prob(params: &TinyLmParams, input: &[TokenId], target: &[TokenId]) -> Result<f64> {
    Ok(sequence_probs_ids(params, input, target)?.log_prob())
}

/// Accumulates the gradient of `sum_t coef[t] * log p(target[t])` into `grad`.
fn backprop_sequence(
    params: &TinyLmParams,
    input: &[TokenId],
    target: &[TokenId],
    coef: &[f64],
    grad: &mut [f64],
) {
    let v = params.vocab_size();
    let ctx = params.context_logits(input);
    let mut ctx_grad = vec![0.0; v];
    let mut prev = BOS;
    for (&y, &c) in target.iter().zip(coef) {
        if c != 0.0 {
            let p = params.dist_with_context(&ctx, prev);
            let off = params.prev_offset(prev);
            for k in 0..v {
                let dz = if k == y as usize { c * (1.0 - p[k]) } else { -c * p[k] };
                grad[off + k] += dz;
                ctx_grad[k] += dz;
            }
        }
        prev = y;
    }
    let b = params.bias_offset();
    for k in 0..v {
        grad[b + k] += ctx_grad[k];
    }
    for &u in input {
        let off = params.input_offset(u);
        for k in 0..v {
            grad[off + k] += ctx_grad[k];
        }
    }
}

fn coefficients(breakdown: &LossBreakdown, side: Side, len: usize) -> Vec<f64> {
    let mut coef = vec![0.0; len];
    for t in breakdown.per_token.iter().filter(|t| t.side == side) {
        coef[t.position] += t.dlogp;
    }
    coef
}

fn salt_item(
    params: &TinyLmParams,
    item: &SaltItem<'_>,
    weights: &LossWeights,
    form: EditSideForm,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let ex = item.example;
    let input = ex.input.ids();
    let ai = ex.s_ai.ids();
    let edit = ex.s_edit.ids();
    let probs_ai = sequence_probs_ids(params, &input, &ai)?;
    let probs_edit = sequence_probs_ids(params, &input, &edit)?;
    let breakdown = loss_salt(ex, &probs_ai, &probs_edit, weights, item.variant, form)?;
    let mut grad = vec![0.0; params.len()];
    let coef_ai = coefficients(&breakdown, Side::Ai, ai.len());
    let coef_edit = coefficients(&breakdown, Side::Edit, edit.len());
    // The loss is reported as a function of log p, so its gradient is
    // `sum dL/dlogp * dlogp/dtheta`.
    backprop_sequence(params, &input, &ai, &coef_ai, &mut grad);
    backprop_sequence(params, &input, &edit, &coef_edit, &mut grad);
    Ok((breakdown, grad))
}

fn dpo_item(
    params: &TinyLmParams,
    reference: &TinyLmParams,
    ex: &TrainingExample,
    cfg: &DpoConfig,
) -> Result<(DpoLogProbs, f64, Vec<f64>)> {
    let input = ex.input.ids();
    let chosen = ex.s_edit.ids();
    let rejected = ex.s_ai.ids();
    let pc: TokenProbs = sequence_probs_ids(params, &input, &chosen)?;
    let pr: TokenProbs = sequence_probs_ids(params, &input, &rejected)?;
    let lp = DpoLogProbs {
        chosen_theta: pc.log_prob(),
        rejected_theta: pr.log_prob(),
        chosen_ref: sequence_log_prob(reference, &input, &chosen)?,
        rejected_ref: sequence_log_prob(reference, &input, &rejected)?,
    };
    let loss = dpo_loss(lp.chosen_theta, lp.rejected_theta, lp.chosen_ref, lp.rejected_ref, cfg);
    let slope = dpo_loss_slope(&lp, cfg);
    let coef = |probs: &TokenProbs, sign: f64| -> Vec<f64> {
        (0..probs.len())
            .map(|t| if probs.is_clamped(t) { 0.0 } else { sign * slope })
            .collect()
    };
    let mut grad = vec![0.0; params.len()];
    backprop_sequence(params, &input, &chosen, &coef(&pc, 1.0), &mut grad);
    backprop_sequence(params, &input, &rejected, &coef(&pr, -1.0), &mut grad);
    Ok((lp, loss, grad))
}

/// Loss and gradient of `objective` at `params`.
///
/// Examples are evaluated in parallel; the reduction runs sequentially in
/// batch order so results are bit-reproducible.
pub fn evaluate(params: &TinyLmParams, objective: &Objective<'_>, reduction: Reduction) -> Result<Evaluation> {
    let (mut loss, mut breakdown, mut dpo, mut grad, n) = match objective {
        Objective::Salt { items, weights, form } => {
            let parts: Vec<_> = items
                .par_iter()
                .map(|item| salt_item(params, item, weights, *form))
                .collect::<Result<_>>()?;
            let mut breakdown = LossBreakdown::default();
            let mut grad = vec![0.0; params.len()];
            for (idx, (b, g)) in parts.into_iter().enumerate() {
                breakdown.absorb(b, idx);
                add_into(&mut grad, &g);
            }
            (breakdown.total, breakdown, None, grad, items.len())
        }
        Objective::Dpo { examples, reference, config } => {
            let parts: Vec<_> = examples
                .par_iter()
                .map(|ex| dpo_item(params, reference, ex, config))
                .collect::<Result<_>>()?;
            let mut grad = vec![0.0; params.len()];
            let mut loss = 0.0;
            let mut pairs = Vec::with_capacity(parts.len());
            for (lp, l, g) in parts {
                loss += l;
                pairs.push(lp);
                add_into(&mut grad, &g);
            }
            let reward_acc = if pairs.is_empty() {
                0.0
            } else {
                rewards_and_accuracy(&pairs, config)?.accuracy
            };
            let stats = DpoBatchStats { loss, reward_acc };
            (loss, LossBreakdown::default(), Some(stats), grad, examples.len())
        }
    };
    if reduction == Reduction::Mean && n > 0 {
        let scale = 1.0 / n as f64;
        loss *= scale;
        grad.iter_mut().for_each(|g| *g *= scale);
        breakdown.total *= scale;
        breakdown.ai_side *= scale;
        breakdown.edit_side *= scale;
        for t in &mut breakdown.per_token {
            t.value *= scale;
            t.dlogp *= scale;
        }
        if let Some(d) = dpo.as_mut() {
            d.loss *= scale;
        }
    }
    Ok(Evaluation {
        loss,
        breakdown,
        dpo,
        grad,
    })
}

fn add_into(acc: &mut [f64], g: &[f64]) {
    for (a, b) in acc.iter_mut().zip(g) {
        *a += b;
    }
}
