//! Independent reference implementations shared by the integration tests
//! and the acceptance runner. Nothing here calls the routine it checks.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use salt::align::{NwScoring, PairClass};
use salt::example::{MaskOptions, Origin, TrainingExample};
use salt::model::{evaluate, Objective, Reduction, TinyLmParams};
use salt::textproc::{SeqRole, TokenId, TokenSeq, Vocab, BOS, EOS, PAD, UNK};

/// Best score over every global alignment, found by walking all of them.
pub fn brute_force_alignment_score<F>(n: usize, m: usize, class: &F, scoring: &NwScoring) -> i64
where
    F: Fn(usize, usize) -> PairClass,
{
    fn walk<F: Fn(usize, usize) -> PairClass>(i: usize, j: usize, n: usize, m: usize, class: &F, s: &NwScoring) -> i64 {
        if i == n && j == m {
            return 0;
        }
        let mut best = i64::MIN;
        if i < n && j < m {
            let pair = match class(i, j) {
                PairClass::Same => s.match_score,
                PairClass::Related => s.related,
                PairClass::Different => s.mismatch,
            };
            best = best.max(pair + walk(i + 1, j + 1, n, m, class, s));
        }
        if i < n {
            best = best.max(s.gap + walk(i + 1, j, n, m, class, s));
        }
        if j < m {
            best = best.max(s.gap + walk(i, j + 1, n, m, class, s));
        }
        best
    }
    walk(0, 0, n, m, class, scoring)
}

fn is_subsequence<T: PartialEq>(sub: &[T], of: &[T]) -> bool {
    let mut it = of.iter();
    sub.iter().all(|x| it.any(|y| y == x))
}

/// Longest common subsequence by trying every subsequence of `a`.
pub fn brute_force_lcs<T: PartialEq + Clone>(a: &[T], b: &[T]) -> usize {
    (0u32..1 << a.len())
        .filter_map(|mask| {
            let sub: Vec<T> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i].clone()).collect();
            is_subsequence(&sub, b).then_some(sub.len())
        })
        .max()
        .unwrap_or(0)
}

/// Largest relative error between the analytic gradient and central
/// differences over `probes` coordinates (half drawn from the nonzero
/// analytic entries, so the check is not dominated by structural zeros).
pub fn fd_rel_err(params: &TinyLmParams, obj: &Objective<'_>, probes: usize, rng: &mut ChaCha8Rng) -> f64 {
    let grad = evaluate(params, obj, Reduction::Mean).unwrap().grad;
    let nonzero: Vec<usize> = (0..grad.len()).filter(|&i| grad[i] != 0.0).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..probes {
        let i = if k % 2 == 0 && !nonzero.is_empty() {
            nonzero[rng.random_range(0..nonzero.len())]
        } else {
            rng.random_range(0..params.len())
        };
        let mut p = params.clone();
        p.as_mut_slice()[i] += h;
        let up = evaluate(&p, obj, Reduction::Mean).unwrap().loss;
        p.as_mut_slice()[i] -= 2.0 * h;
        let down = evaluate(&p, obj, Reduction::Mean).unwrap().loss;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-5));
    }
    worst
}

/// Vocabulary of the four reserved ids plus `w0..w{k-1}`.
pub fn word_vocab(k: usize) -> Vocab {
    let mut v = Vocab::new();
    for i in 0..k {
        v.intern(&format!("w{i}"));
    }
    v
}

pub fn first_word_id(vocab: &Vocab) -> TokenId {
    vocab.id("w0").unwrap()
}

pub fn random_ids(rng: &mut ChaCha8Rng, vocab: &Vocab, min: usize, max: usize) -> Vec<TokenId> {
    let lo = first_word_id(vocab);
    let hi = vocab.len() as TokenId;
    let n = rng.random_range(min..=max);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// An example whose edit is the AI summary with a few random changes, so
/// the masks mix changed and unchanged tokens.
pub fn random_example(rng: &mut ChaCha8Rng, vocab: &Vocab, id: usize, origin: Origin) -> TrainingExample {
    let input = random_ids(rng, vocab, 1, 5);
    let ai = random_ids(rng, vocab, 1, 6);
    let mut edit = ai.clone();
    for _ in 0..rng.random_range(1..=3) {
        let lo = first_word_id(vocab);
        let tok = rng.random_range(lo..vocab.len() as TokenId);
        match rng.random_range(0..3) {
            0 if !edit.is_empty() => {
                let i = rng.random_range(0..edit.len());
                edit[i] = tok;
            }
            1 if edit.len() > 1 => {
                edit.remove(rng.random_range(0..edit.len()));
            }
            _ => edit.insert(rng.random_range(0..=edit.len()), tok),
        }
    }
    let seq = |ids: &[TokenId], role| TokenSeq::from_ids(ids, vocab, role);
    let opts = MaskOptions {
        smooth: rng.random_bool(0.5),
        ..MaskOptions::default()
    };
    TrainingExample::build(
        format!("r{id}"),
        seq(&input, SeqRole::Input),
        seq(&ai, SeqRole::AiSummary),
        seq(&edit, SeqRole::EditSummary),
        origin,
        &opts,
    )
    .0
}

/// `p(. | prev, input)` computed straight from the parameter blocks.
pub fn reference_dist(params: &TinyLmParams, input: &[TokenId], prev: TokenId) -> Vec<f64> {
    let v = params.vocab_size();
    let z: Vec<f64> = (0..v)
        .map(|k| {
            let bag: f64 = input.iter().map(|&u| params.e_in()[u as usize * v + k]).sum();
            params.e_prev()[prev as usize * v + k] + bag + params.bias()[k]
        })
        .collect();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = z.iter().map(|x| (x - max).exp()).sum();
    z.iter().map(|x| (x - max).exp() / total).collect()
}

pub fn reference_log_prob(params: &TinyLmParams, input: &[TokenId], target: &[TokenId]) -> f64 {
    let mut prev = BOS;
    let mut lp = 0.0;
    for &y in target {
        lp += reference_dist(params, input, prev)[y as usize].ln();
        prev = y;
    }
    lp
}

fn repeats_ngram(tokens: &[TokenId], n: usize) -> bool {
    if n == 0 {
        return false;
    }
    for i in 0..tokens.len() {
        for j in i + 1..tokens.len() {
            if j + n <= tokens.len() && tokens[i..i + n] == tokens[j..j + n] {
                return true;
            }
        }
    }
    false
}

fn generable(k: TokenId) -> bool {
    k != PAD && k != BOS && k != UNK && k != EOS
}

/// Exhaustive search over every admissible output: bodies of length
/// `min_len..max_len` closed by EOS, plus unterminated bodies of exactly
/// `max_len`. Returns the winning body and its score; ties go to the
/// lexicographically smaller id sequence (EOS included).
pub fn exhaustive_decode(
    params: &TinyLmParams,
    input: &[TokenId],
    min_len: usize,
    max_len: usize,
    no_repeat: usize,
) -> Option<(Vec<TokenId>, f64)> {
    let v = params.vocab_size() as TokenId;
    let mut best: Option<(Vec<TokenId>, f64)> = None;
    let mut consider = |tokens: Vec<TokenId>, score: f64| {
        let better = match &best {
            None => true,
            Some((t, s)) => score > *s || (score == *s && tokens < *t),
        };
        if better {
            best = Some((tokens, score));
        }
    };
    let mut stack: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    while let Some((body, score)) = stack.pop() {
        let prev = body.last().copied().unwrap_or(BOS);
        let dist = reference_dist(params, input, prev);
        if body.len() == max_len {
            consider(body, score);
            continue;
        }
        if body.len() >= min_len {
            let mut closed = body.clone();
            closed.push(EOS);
            consider(closed, score + dist[EOS as usize].ln());
        }
        for k in (0..v).filter(|&k| generable(k)) {
            let mut next = body.clone();
            next.push(k);
            if !repeats_ngram(&next, no_repeat) {
                stack.push((next, score + dist[k as usize].ln()));
            }
        }
    }
    best.map(|(mut t, s)| {
        if t.last() == Some(&EOS) {
            t.pop();
        }
        (t, s)
    })
}

/// Score of a decoded body under the same rules the exhaustive search uses.
pub fn output_score(params: &TinyLmParams, input: &[TokenId], body: &[TokenId], max_len: usize) -> f64 {
    let mut target = body.to_vec();
    if body.len() < max_len {
        target.push(EOS);
    }
    reference_log_prob(params, input, &target)
}

/// Step-by-step argmax decoding with the same admissibility rules.
pub fn greedy_decode(params: &TinyLmParams, input: &[TokenId], min_len: usize, max_len: usize, no_repeat: usize) -> Vec<TokenId> {
    let v = params.vocab_size() as TokenId;
    let mut out: Vec<TokenId> = Vec::new();
    while out.len() < max_len {
        let dist = reference_dist(params, input, out.last().copied().unwrap_or(BOS));
        let mut pick: Option<TokenId> = None;
        for k in 0..v {
            let ok = if k == EOS {
                out.len() >= min_len
            } else {
                generable(k) && {
                    let mut next = out.clone();
                    next.push(k);
                    !repeats_ngram(&next, no_repeat)
                }
            };
            if ok && pick.is_none_or(|p| dist[k as usize] > dist[p as usize]) {
                pick = Some(k);
            }
        }
        match pick {
            // Nothing admissible: keep what we have.
            None | Some(EOS) => break,
            Some(k) => out.push(k),
        }
    }
    out
}
