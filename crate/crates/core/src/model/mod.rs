//! A tiny conditional next-token model with exact gradients.
//!
//! The logits for the next token are
//! `E_prev[prev] + sum(E_in[u] for u in input) + b`: a previous-token
//! table plus a bag-of-input table plus a bias, followed by a softmax over
//! the whole vocabulary. Small enough to differentiate by hand and to
//! overfit desk-scale corpora.

mod adam;
mod checkpoint;
mod decode;
mod grad;

pub use adam::AdamState;
pub use checkpoint::Checkpoint;
pub use decode::{decode, decode_ids, no_repeat_violation, DecodeConfig};
pub use grad::{evaluate, sequence_log_prob, DpoBatchStats, Evaluation, Objective, Reduction, SaltItem};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::loss::TokenProbs;
use crate::textproc::{TokenId, TokenSeq, BOS};

/// Parameters stored flat: `E_prev` (V x V), then `E_in` (V x V), then `b` (V).
#[derive(Debug, Clone, PartialEq)]
pub struct TinyLmParams {
    vocab_size: usize,
    data: Vec<f64>,
}

impl TinyLmParams {
    pub fn zeros(vocab_size: usize) -> Self {
        TinyLmParams {
            vocab_size,
            data: vec![0.0; 2 * vocab_size * vocab_size + vocab_size],
        }
    }

    /// Entries drawn from N(0, scale^2).
    pub fn random<R: Rng>(vocab_size: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(vocab_size);
        for x in &mut p.data {
            let z: f64 = StandardNormal.sample(rng);
            *x = scale * z;
        }
        p
    }

    pub fn from_parts(vocab_size: usize, e_prev: &[f64], e_in: &[f64], bias: &[f64]) -> Result<Self> {
        let vv = vocab_size * vocab_size;
        if e_prev.len() != vv || e_in.len() != vv || bias.len() != vocab_size {
            return Err(Error::Config(format!(
                "parameter shapes do not match vocabulary size {vocab_size}"
            )));
        }
        let mut data = Vec::with_capacity(2 * vv + vocab_size);
        data.extend_from_slice(e_prev);
        data.extend_from_slice(e_in);
        data.extend_from_slice(bias);
        Ok(TinyLmParams { vocab_size, data })
    }

    /// Copy embedded in a larger vocabulary; new rows and columns are zero.
    pub fn grown(&self, vocab_size: usize) -> Result<Self> {
        let old = self.vocab_size;
        if vocab_size < old {
            return Err(Error::Config(format!("cannot shrink parameters from {old} to {vocab_size}")));
        }
        let mut out = Self::zeros(vocab_size);
        for r in 0..old {
            for c in 0..old {
                out.data[r * vocab_size + c] = self.data[r * old + c];
                out.data[vocab_size * vocab_size + r * vocab_size + c] = self.data[old * old + r * old + c];
            }
        }
        let (b_new, b_old) = (2 * vocab_size * vocab_size, 2 * old * old);
        out.data[b_new..b_new + old].copy_from_slice(&self.data[b_old..b_old + old]);
        Ok(out)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn vv(&self) -> usize {
        self.vocab_size * self.vocab_size
    }

    pub(crate) fn prev_offset(&self, prev: TokenId) -> usize {
        prev as usize * self.vocab_size
    }

    pub(crate) fn input_offset(&self, u: TokenId) -> usize {
        self.vv() + u as usize * self.vocab_size
    }

    pub(crate) fn bias_offset(&self) -> usize {
        2 * self.vv()
    }

    pub fn e_prev(&self) -> &[f64] {
        &self.data[..self.vv()]
    }

    pub fn e_in(&self) -> &[f64] {
        &self.data[self.vv()..2 * self.vv()]
    }

    pub fn bias(&self) -> &[f64] {
        &self.data[2 * self.vv()..]
    }

    pub fn e_prev_mut(&mut self, prev: TokenId, next: TokenId) -> &mut f64 {
        let i = self.prev_offset(prev) + next as usize;
        &mut self.data[i]
    }

    pub fn e_in_mut(&mut self, input: TokenId, next: TokenId) -> &mut f64 {
        let i = self.input_offset(input) + next as usize;
        &mut self.data[i]
    }

    pub fn bias_mut(&mut self, next: TokenId) -> &mut f64 {
        let i = self.bias_offset() + next as usize;
        &mut self.data[i]
    }

    pub fn check_ids(&self, ids: &[TokenId]) -> Result<()> {
        match ids.iter().find(|&&id| id as usize >= self.vocab_size) {
            Some(&id) => Err(Error::TokenOutOfRange {
                id,
                size: self.vocab_size,
            }),
            None => Ok(()),
        }
    }

    /// Input-dependent part of the logits: `sum(E_in[u]) + b`.
    pub fn context_logits(&self, input: &[TokenId]) -> Vec<f64> {
        let mut ctx = self.bias().to_vec();
        for &u in input {
            let row = &self.data[self.input_offset(u)..self.input_offset(u) + self.vocab_size];
            for (c, r) in ctx.iter_mut().zip(row) {
                *c += r;
            }
        }
        ctx
    }

    /// Next-token distribution given a precomputed context.
    pub fn dist_with_context(&self, context: &[f64], prev: TokenId) -> Vec<f64> {
        let off = self.prev_offset(prev);
        let row = &self.data[off..off + self.vocab_size];
        let mut z: Vec<f64> = context.iter().zip(row).map(|(c, r)| c + r).collect();
        softmax_in_place(&mut z);
        z
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in z.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in z.iter_mut() {
        *x /= sum;
    }
}

/// `p(. | prev, input bag)` over the whole vocabulary.
pub fn next_token_dist(params: &TinyLmParams, input_bag: &[TokenId], prev: TokenId) -> Result<Vec<f64>> {
    params.check_ids(input_bag)?;
    params.check_ids(&[prev])?;
    Ok(params.dist_with_context(&params.context_logits(input_bag), prev))
}

/// Probability of each target token given the previous one (BOS first) and the input.
pub fn sequence_probs_ids(params: &TinyLmParams, input: &[TokenId], target: &[TokenId]) -> Result<TokenProbs> {
    params.check_ids(input)?;
    params.check_ids(target)?;
    let ctx = params.context_logits(input);
    let mut prev = BOS;
    let mut raw = Vec::with_capacity(target.len());
    for &y in target {
        raw.push(params.dist_with_context(&ctx, prev)[y as usize]);
        prev = y;
    }
    Ok(TokenProbs::new(raw))
}

pub fn sequence_probs(params: &TinyLmParams, input: &TokenSeq, target: &TokenSeq) -> Result<TokenProbs> {
    sequence_probs_ids(params, &input.ids(), &target.ids())
}
