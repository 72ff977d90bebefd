use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TinyLmParams;
use crate::error::{Error, Result};
use crate::textproc::{SeqRole, TokenId, TokenSeq, Vocab, BOS, EOS, PAD, UNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecodeConfig {
    pub beam_size: usize,
    /// 0 disables the constraint.
    pub no_repeat_ngram: usize,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam_size: 4,
            no_repeat_ngram: 2,
            min_len: 10,
            max_len: 100,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_size == 0 {
            return Err(Error::Config("beam_size must be at least 1".into()));
        }
        if self.min_len > self.max_len {
            return Err(Error::Config("min_len must not exceed max_len".into()));
        }
        Ok(())
    }
}

/// True when some n-gram of `tokens` occurs more than once.
pub fn no_repeat_violation(tokens: &[TokenId], n: usize) -> bool {
    if n == 0 || tokens.len() < n {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    tokens.windows(n).any(|w| !seen.insert(w))
}

/// Would appending `next` repeat an n-gram already present in `tokens`?
fn blocks(tokens: &[TokenId], next: TokenId, n: usize) -> bool {
    if n == 0 || tokens.len() + 1 < n {
        return false;
    }
    let prefix = &tokens[tokens.len() + 1 - n..];
    tokens
        .windows(n)
        .any(|w| w[..n - 1] == *prefix && w[n - 1] == next)
}

#[derive(Debug, Clone)]
struct Hyp {
    tokens: Vec<TokenId>,
    score: f64,
}

/// Higher score first, then the lexicographically smaller id sequence.
fn rank(a: &Hyp, b: &Hyp) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search over token ids; the result excludes the final EOS.
///
/// Reserved ids other than EOS are never generated. Search ends once the
/// best finished hypothesis scores at least as well as every live beam
/// (extensions can only lower a score), or at `max_len`. When the
/// no-repeat rule leaves nothing admissible the best unfinished hypothesis
/// is returned, even if it is shorter than `min_len`.
pub fn decode_ids(params: &TinyLmParams, input: &[TokenId], cfg: &DecodeConfig) -> Result<Vec<TokenId>> {
    cfg.validate()?;
    params.check_ids(input)?;
    let v = params.vocab_size();
    let ctx = params.context_logits(input);
    let mut beams = vec![Hyp {
        tokens: Vec::new(),
        score: 0.0,
    }];
    let mut finished: Vec<Hyp> = Vec::new();

    for _ in 0..cfg.max_len {
        let mut cands = Vec::new();
        for h in &beams {
            let prev = h.tokens.last().copied().unwrap_or(BOS);
            let dist = params.dist_with_context(&ctx, prev);
            for k in 0..v as TokenId {
                if k == PAD || k == BOS || k == UNK {
                    continue;
                }
                if k == EOS && h.tokens.len() < cfg.min_len {
                    continue;
                }
                if k != EOS && blocks(&h.tokens, k, cfg.no_repeat_ngram) {
                    continue;
                }
                let mut tokens = h.tokens.clone();
                tokens.push(k);
                cands.push(Hyp {
                    tokens,
                    score: h.score + dist[k as usize].ln(),
                });
            }
        }
        if cands.is_empty() {
            break;
        }
        cands.sort_by(rank);
        cands.truncate(cfg.beam_size);
        beams.clear();
        for c in cands {
            if c.tokens.last() == Some(&EOS) {
                finished.push(c);
            } else {
                beams.push(c);
            }
        }
        finished.sort_by(rank);
        if let Some(best) = finished.first() {
            if beams.first().is_none_or(|b| best.score >= b.score) {
                break;
            }
        }
    }

    let mut pool = finished;
    pool.extend(beams);
    pool.sort_by(rank);
    let mut out = pool.into_iter().next().map(|h| h.tokens).unwrap_or_default();
    if out.last() == Some(&EOS) {
        out.pop();
    }
    Ok(out)
}

pub fn decode(params: &TinyLmParams, vocab: &Vocab, input: &TokenSeq, cfg: &DecodeConfig) -> Result<TokenSeq> {
    if vocab.len() != params.vocab_size() {
        return Err(Error::VocabMismatch {
            expected: params.vocab_size().to_string(),
            found: vocab.len().to_string(),
        });
    }
    let ids = decode_ids(params, &input.ids(), cfg)?;
    Ok(TokenSeq::from_ids(&ids, vocab, SeqRole::Generated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_repeats() {
        assert!(no_repeat_violation(&[4, 5, 4, 5], 2));
        assert!(!no_repeat_violation(&[4, 5, 5, 4], 2));
        assert!(!no_repeat_violation(&[4, 4], 0));
        assert!(blocks(&[4, 5, 4], 5, 2));
        assert!(!blocks(&[4, 5, 4], 6, 2));
        assert!(blocks(&[7], 7, 1));
    }

    #[test]
    fn zero_params_respect_lengths() {
        let p = TinyLmParams::zeros(8);
        let cfg = DecodeConfig {
            beam_size: 3,
            no_repeat_ngram: 0,
            min_len: 2,
            max_len: 5,
        };
        let out = decode_ids(&p, &[4], &cfg).unwrap();
        // Uniform: EOS has the smallest id, so it wins the tie as soon as it is allowed.
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|&t| t >= 4));
    }

    #[test]
    fn bad_config() {
        let p = TinyLmParams::zeros(5);
        let cfg = DecodeConfig {
            min_len: 4,
            max_len: 3,
            ..DecodeConfig::default()
        };
        assert!(decode_ids(&p, &[], &cfg).is_err());
    }
}
