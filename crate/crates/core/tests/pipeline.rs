mod common;

use std::collections::BTreeSet;

use salt::align::{align_nw, derive_masks, NwScoring};
use salt::example::{MaskOptions, Origin, TrainingExample};
use salt::loss::SaltVariant;
use salt::model::{sequence_probs, Checkpoint, DecodeConfig};
use salt::pipeline::{
    build_dataset, gen_synthetic, mix_replay, parse_records, reward_accuracy, run_eval, run_training,
    DatasetRecord, Encoding, EvalOptions, ExperimentConfig, MaskPolicy, ReplayConfig, SynthConfig, SynthCorpus,
    TrainInputs, Variant,
};
use salt::textproc::{tokenize, SeqRole, TokenSeq, Vocab};

fn corpus(size: usize, seed: u64) -> SynthCorpus {
    gen_synthetic(&SynthConfig { size, seed, ..SynthConfig::default() }).unwrap()
}

fn train(cfg: &ExperimentConfig, records: &[DatasetRecord], pool: Option<&[DatasetRecord]>, init: Option<&Checkpoint>) -> salt::pipeline::TrainOutcome {
    run_training(cfg, TrainInputs { train: records, seen_pool: pool, init }).unwrap()
}

fn exp(variant: Variant, steps: usize) -> ExperimentConfig {
    ExperimentConfig {
        steps,
        decode: DecodeConfig { min_len: 4, max_len: 30, ..DecodeConfig::default() },
        ..ExperimentConfig::new(variant)
    }
}

/// A base model trained on AI summaries, as the suite uses.
fn base_model(c: &SynthCorpus) -> Checkpoint {
    let records: Vec<DatasetRecord> = c
        .train
        .iter()
        .map(|r| DatasetRecord { edit_summary: r.ai_summary.clone(), ..r.clone() })
        .collect();
    train(&exp(Variant::Salt(SaltVariant::L), 150), &records, None, None).checkpoint
}

#[test]
fn recovered_changes_lie_inside_the_injected_errors() {
    let c = corpus(1600, 5);
    let unseen: Vec<&DatasetRecord> = c.train.iter().chain(&c.eval).take(1000).collect();
    assert_eq!(unseen.len(), 1000);
    let mut with_changes = 0;
    for r in unseen {
        let truth = c.truth.iter().find(|t| t.id == r.id).unwrap();
        let mut v = Vocab::new();
        let ai = tokenize(&r.ai_summary, &mut v, true, SeqRole::AiSummary);
        let edit = tokenize(&r.edit_summary, &mut v, true, SeqRole::EditSummary);
        let masks = derive_masks(&align_nw(&ai, &edit, &NwScoring::default()));
        let recovered: BTreeSet<usize> = masks.ai_changed().iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i).collect();
        let injected: BTreeSet<usize> = truth.ai_positions.iter().copied().collect();
        assert!(recovered.is_subset(&injected), "{}: {recovered:?} not in {injected:?}", r.id);
        with_changes += !recovered.is_empty() as usize;
    }
    assert!(with_changes > 100, "only {with_changes} examples had changes");
}

#[test]
fn zero_error_rate_gives_identical_summaries() {
    let c = gen_synthetic(&SynthConfig { size: 100, error_rate: 0.0, ..SynthConfig::default() }).unwrap();
    let unseen: Vec<DatasetRecord> = c.train.iter().chain(&c.eval).cloned().collect();
    let d = build_dataset(&unseen, Encoding::Grow(&mut Vocab::new()), &MaskPolicy::default());
    for (r, e) in unseen.iter().zip(&d.examples) {
        assert_eq!(r.ai_summary, r.edit_summary);
        assert!(e.kept && e.masks.ai_changed().iter().chain(e.masks.e_changed()).all(|c| !c));
    }
}

#[test]
fn loading_conserves_records_and_drops_imitation_outliers() {
    let c = corpus(300, 1);
    let all: Vec<DatasetRecord> = c.train.iter().chain(&c.seen_pool).chain(&c.eval).take(100).cloned().collect();
    let d = build_dataset(&all, Encoding::Grow(&mut Vocab::new()), &MaskPolicy::default());
    assert_eq!(d.kept_count() + d.discarded_count(), 100);
    // Only imitation data is filtered by default.
    assert!(d.examples.iter().filter(|e| !e.kept).all(|e| e.origin == Origin::Seen));
    let pool = build_dataset(&c.seen_pool, Encoding::Grow(&mut Vocab::new()), &MaskPolicy::default());
    assert!(pool.discarded_count() > 0);
}

#[test]
fn malformed_lines_are_reported_with_their_number() {
    let good = r#"{"id":"a","input":"x","ai_summary":"y","edit_summary":"y","origin":"unseen"}"#;
    let text = format!("{good}\n{{\"id\": 3\n");
    let err = parse_records(&text, "t.jsonl").unwrap_err().to_string();
    assert!(err.contains('2'), "{err}");
    let missing = r#"{"id":"a","input":"x","ai_summary":"y","origin":"unseen"}"#;
    assert!(parse_records(missing, "t.jsonl").is_err());
}

fn replay_examples(n: usize, origin: Origin) -> Vec<TrainingExample> {
    let empty = TokenSeq::new(vec![], SeqRole::Input);
    (0..n)
        .map(|i| TrainingExample::build(format!("{origin:?}{i}"), empty.clone(), empty.clone(), empty.clone(), origin, &MaskOptions::default()).0)
        .collect()
}

#[test]
fn replay_samples_exactly_half() {
    let pool = replay_examples(60, Origin::Seen);
    for n in 1..=100 {
        let unseen = replay_examples(n, Origin::Unseen);
        let cfg = ReplayConfig { ratio_unseen_to_seen: (2, 1), seed: n as u64 };
        let mixed = mix_replay(&unseen, &pool, &cfg).unwrap();
        let seen = mixed.iter().filter(|e| e.origin == Origin::Seen).count();
        assert_eq!(seen, n / 2, "n = {n}");
        assert_eq!(mixed.len() - seen, n);
        let ids: BTreeSet<&str> = mixed.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids.len(), mixed.len(), "sampling repeated an example");
    }
    let eight = replay_examples(8, Origin::Unseen);
    let one_to_one = ReplayConfig { ratio_unseen_to_seen: (1, 1), seed: 0 };
    assert_eq!(mix_replay(&eight, &pool, &one_to_one).unwrap().len(), 16);
    let err = mix_replay(&replay_examples(200, Origin::Unseen), &pool, &ReplayConfig::default()).unwrap_err();
    assert!(err.to_string().contains("100"), "{err}");
}

#[test]
fn presets_apply_unless_overridden() {
    let li = ExperimentConfig::from_json(r#"{"variant":"salt_li"}"#).unwrap();
    assert_eq!(li.effective_weights().w_e_c, 1.2);
    let ld = ExperimentConfig::from_json(r#"{"variant":"salt_ld"}"#).unwrap();
    assert_eq!(ld.effective_weights().w_e_c, 0.5);
    let custom = ExperimentConfig::from_json(
        r#"{"variant":"salt_li","weights":{"w_ai_c":1,"w_ai_nc":1,"w_e_c":0.7,"w_e_nc":1}}"#,
    )
    .unwrap();
    assert_eq!(custom.effective_weights().w_e_c, 0.7);
    assert!(ExperimentConfig::from_json(r#"{"variant":"salt_l","bogus":1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"variant":"salt_l","steps":0}"#).is_err());
}

fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    xs.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}

#[test]
fn salt_l_edit_nll_trends_down() {
    let c = corpus(100, 2);
    let records = &c.train[..20];
    let out = train(&ExperimentConfig { batch_size: 8, ..exp(Variant::Salt(SaltVariant::L), 50) }, records, None, None);
    let nll: Vec<f64> = out.log.iter().map(|r| r.edit_side).collect();
    let ma = moving_average(&nll, 5);
    for w in ma.windows(2) {
        assert!(w[1] < w[0], "moving average rose: {ma:?}");
    }
}

fn mean_error_prob(ck: &Checkpoint, examples: &[TrainingExample]) -> f64 {
    let mut total = 0.0;
    let mut n = 0;
    for e in examples {
        let probs = sequence_probs(&ck.params, &e.input, &e.s_ai).unwrap();
        for (t, &changed) in e.masks.ai_changed().iter().enumerate() {
            if changed {
                total += probs.values()[t];
                n += 1;
            }
        }
    }
    assert!(n > 0);
    total / n as f64
}

#[test]
fn unlikelihood_lowers_error_token_probability() {
    let c = corpus(400, 3);
    let base = base_model(&c);
    let tuned = train(&ExperimentConfig { lr: 0.01, ..exp(Variant::Salt(SaltVariant::U), 100) }, &c.train, None, Some(&base)).checkpoint;
    let d = build_dataset(&c.train, Encoding::Frozen(&tuned.vocab), &MaskPolicy::default());
    let before = mean_error_prob(&base, &d.examples);
    let after = mean_error_prob(&tuned, &d.examples);
    assert!(after < before, "p(error) {before} -> {after}");
}

#[test]
#[allow(clippy::approx_constant)]
fn dpo_starts_at_ln2() {
    let c = corpus(200, 4);
    let base = base_model(&c);
    let out = train(&exp(Variant::Dpo, 3), &c.train, None, Some(&base));
    assert!((out.log[0].total - 0.693147).abs() < 1e-6, "{}", out.log[0].total);
    assert_eq!(out.log[0].dpo.unwrap().reward_acc, 0.0);
}

#[test]
fn untrained_model_has_zero_reward_accuracy() {
    let c = corpus(200, 4);
    let base = base_model(&c);
    let d = build_dataset(&c.eval, Encoding::Frozen(&base.vocab), &MaskPolicy::default());
    assert_eq!(reward_accuracy(&base.params, &base.params, &d.examples, &base.vocab).unwrap(), 0.0);
}

#[test]
fn baseline_against_itself_gives_unit_ratios() {
    let c = corpus(200, 6);
    let ck = train(&exp(Variant::Salt(SaltVariant::L), 100), &c.train, None, None).checkpoint;
    let opts = EvalOptions { decode: DecodeConfig { min_len: 4, max_len: 30, ..DecodeConfig::default() }, ..EvalOptions::default() };
    let report = run_eval(&ck, &c.eval, None, &opts).unwrap();
    let again = run_eval(&ck, &c.eval, Some(&report), &opts).unwrap();
    let r = again.ratios_vs_baseline.unwrap();
    for g in [r.word.g1, r.word.g2, r.word.g3].into_iter().flatten() {
        assert_eq!(g, 1.0);
    }
    assert!(r.word.g3.is_some());
}

#[test]
fn memorised_edits_score_full_rouge() {
    let c = corpus(100, 7);
    let mut records: Vec<DatasetRecord> = Vec::new();
    for r in &c.train {
        // Distinct inputs so each one can be memorised.
        if records.iter().all(|x| x.input != r.input) {
            records.push(r.clone());
        }
        if records.len() == 3 {
            break;
        }
    }
    let cfg = ExperimentConfig { lr: 0.1, ..exp(Variant::Salt(SaltVariant::L), 400) };
    let ck = train(&cfg, &records, None, None).checkpoint;
    let opts = EvalOptions { decode: DecodeConfig { min_len: 1, max_len: 30, ..DecodeConfig::default() }, ..EvalOptions::default() };
    let report = run_eval(&ck, &records, None, &opts).unwrap();
    for e in &report.examples {
        assert_eq!(e.rouge1, 1.0, "{} -> {:?}", e.id, e.output);
    }
}

#[test]
fn discarded_examples_do_not_touch_training() {
    let c = corpus(200, 8);
    let kept: Vec<DatasetRecord> = c.train[..30].to_vec();
    // Same words, rearranged so most AI tokens count as changed.
    let mut outliers: Vec<DatasetRecord> = Vec::new();
    for (i, r) in kept.iter().take(5).enumerate() {
        let mut words: Vec<&str> = r.ai_summary.split(' ').collect();
        words.reverse();
        outliers.push(DatasetRecord { id: format!("outlier-{i}"), edit_summary: words.join(" "), ..r.clone() });
    }
    let mut with = kept.clone();
    with.extend(outliers);
    let cfg = ExperimentConfig { mask_unseen: true, ..exp(Variant::Salt(SaltVariant::Lu), 40) };
    let a = train(&cfg, &kept, None, None);
    let b = train(&cfg, &with, None, None);
    assert!(b.stats.train_discarded > 0);
    assert_eq!(b.stats.train_kept, a.stats.train_kept);
    assert_eq!(a.checkpoint.vocab, b.checkpoint.vocab);
    assert_eq!(a.checkpoint.params, b.checkpoint.params);
    assert_eq!(a.log, b.log);
}

#[test]
fn training_and_eval_are_deterministic() {
    let run = || {
        let c = corpus(150, 9);
        let cfg = exp(Variant::Rsalt { salt: SaltVariant::Lu, replay: salt::loss::ReplayVariant::Lu }, 30);
        let out = train(&cfg, &c.train, Some(&c.seen_pool), None);
        let opts = EvalOptions { decode: cfg.decode, ..EvalOptions::default() };
        let report = run_eval(&out.checkpoint, &c.eval, None, &opts).unwrap();
        (out.checkpoint.to_json().unwrap(), serde_json::to_string(&out.log).unwrap(), serde_json::to_string(&report).unwrap())
    };
    assert_eq!(run(), run());
}
