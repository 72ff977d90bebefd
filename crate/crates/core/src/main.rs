use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use salt::align::{align_nw, NwScoring};
use salt::metrics::{MetricReport, RatioAggregation, SageCountMode};
use salt::model::Checkpoint;
use salt::pipeline::{
    build_dataset, gen_synthetic, mix_replay, read_records, run_eval, run_training, score_outputs,
    DatasetRecord, Encoding, EvalOptions, ExperimentConfig, MaskPolicy, ReplayConfig, SynthConfig,
    TrainInputs,
};
use salt::textproc::{tokenize, ConceptLexicon, SeqRole, Stopwords, Vocab};
use salt::{Error, Result};

#[derive(Parser)]
#[command(name = "salt", version, about = "Train and evaluate summarizers on edit feedback")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Align AI summaries against their edits.
    Align(AlignArgs),
    /// Export changed/unchanged masks as JSONL.
    Mask(MaskArgs),
    /// Mix a replay sample of seen records into unseen ones.
    Mix(MixArgs),
    /// Write a seeded synthetic corpus.
    GenSynth(SynthArgs),
    /// Train one variant and write checkpoint.json and loss.jsonl.
    Train(TrainArgs),
    /// Decode a dataset with a checkpoint and write a metric report.
    Eval(EvalArgs),
    /// Score externally produced outputs with ROUGE and SAGE.
    Sage(SageArgs),
}

#[derive(Args)]
struct AlignArgs {
    /// Dataset JSONL; alternatively give --ai and --edit.
    #[arg(long, required_unless_present_all = ["ai", "edit"])]
    data: Option<PathBuf>,
    #[arg(long, requires = "edit", conflicts_with = "data")]
    ai: Option<String>,
    #[arg(long, requires = "ai")]
    edit: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    data: PathBuf,
    /// Experiment config supplying alignment scores, smoothing and the discard threshold.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MixArgs {
    /// Unseen records.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seen_pool: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    size: usize,
    #[arg(long, default_value_t = 40)]
    vocab_size: usize,
    #[arg(long, default_value_t = 0.3)]
    error_rate: f64,
    #[arg(long, default_value_t = 0.7)]
    fix_rate: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seen_pool: Option<PathBuf>,
    /// Starting checkpoint, also used as the preference reference.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricArgs {
    /// Report of the baseline system; fills in ratios_vs_baseline.
    #[arg(long)]
    baseline_report: Option<PathBuf>,
    /// Concept lexicon, `phrase<TAB>concept_id` per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Stopword list, one per line; defaults to a built-in English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Count every word occurrence instead of distinct words.
    #[arg(long)]
    tokens: bool,
    /// Average per-example ratios instead of dividing corpus totals.
    #[arg(long)]
    per_example: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Decode settings; defaults to those stored in the checkpoint.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Args)]
struct SageArgs {
    /// Records holding the AI summaries and edits.
    #[arg(long)]
    data: PathBuf,
    /// JSONL of `{"id", "output"}`, or a metric report whose examples carry outputs.
    #[arg(long)]
    outputs: PathBuf,
    #[arg(long, default_value = "system")]
    variant: String,
    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Serialize)]
struct AlignLine<'a> {
    id: &'a str,
    ops: String,
    score: i64,
    ai_tokens: Vec<&'a str>,
    edit_tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct OutputLine {
    id: String,
    output: String,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it)?);
        s.push('\n');
    }
    Ok(s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(ExperimentConfig::load).transpose()
}

fn align(a: AlignArgs) -> Result<()> {
    let scoring = load_config(a.config.as_deref())?.map_or_else(NwScoring::default, |c| c.alignment);
    let records = match (&a.data, a.ai, a.edit) {
        (Some(path), _, _) => read_records(path)?,
        (None, Some(ai), Some(edit)) => vec![DatasetRecord {
            id: "cli".into(),
            input: String::new(),
            ai_summary: ai,
            edit_summary: edit,
            origin: salt::example::Origin::Unseen,
        }],
        _ => unreachable!("clap enforces --data or --ai/--edit"),
    };
    let mut vocab = Vocab::new();
    let mut text = String::new();
    for r in &records {
        let ai = tokenize(&r.ai_summary, &mut vocab, true, SeqRole::AiSummary);
        let edit = tokenize(&r.edit_summary, &mut vocab, true, SeqRole::EditSummary);
        let al = align_nw(&ai, &edit, &scoring);
        let line = AlignLine {
            id: &r.id,
            ops: al.ops_string(),
            score: al.score,
            ai_tokens: ai.surfaces(),
            edit_tokens: edit.surfaces(),
        };
        text.push_str(&serde_json::to_string(&line)?);
        text.push('\n');
    }
    write_out(a.out.as_deref(), &text)
}

fn mask(a: MaskArgs) -> Result<()> {
    let policy = load_config(a.config.as_deref())?.map_or_else(MaskPolicy::default, |c| c.mask_policy());
    let records = read_records(&a.data)?;
    let data = build_dataset(&records, Encoding::Grow(&mut Vocab::new()), &policy);
    eprintln!("kept {} discarded {}", data.kept_count(), data.discarded_count());
    write_out(a.out.as_deref(), &to_jsonl(&data.mask_records())?)
}

fn mix(a: MixArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let policy = cfg.as_ref().map_or_else(MaskPolicy::default, |c| c.mask_policy());
    let mut replay = cfg.as_ref().map_or_else(ReplayConfig::default, |c| c.replay());
    if let Some(seed) = a.seed {
        replay.seed = seed;
    }
    let unseen = read_records(&a.data)?;
    let seen = read_records(&a.seen_pool)?;
    let mut vocab = Vocab::new();
    let u = build_dataset(&unseen, Encoding::Grow(&mut vocab), &policy);
    let s = build_dataset(&seen, Encoding::Grow(&mut vocab), &policy);
    let mixed = mix_replay(&u.examples, &s.examples, &replay)?;
    let by_key: HashMap<(salt::example::Origin, &str), &DatasetRecord> =
        unseen.iter().chain(&seen).map(|r| ((r.origin, r.id.as_str()), r)).collect();
    let out: Vec<&DatasetRecord> = mixed.iter().map(|e| by_key[&(e.origin, e.id.as_str())]).collect();
    write_out(a.out.as_deref(), &to_jsonl(&out)?)
}

fn gen_synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        seed: a.seed,
        size: a.size,
        vocab_size: a.vocab_size,
        error_rate: a.error_rate,
        fix_rate: a.fix_rate,
    };
    gen_synthetic(&cfg)?.write_to(&a.out)
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let train = read_records(&a.data)?;
    let seen = a.seen_pool.as_deref().map(read_records).transpose()?;
    if cfg.variant.uses_replay() && seen.is_none() {
        return Err(Error::Config(format!("variant {} needs --seen-pool", cfg.variant)));
    }
    let init = a.init.as_deref().map(Checkpoint::load).transpose()?;
    let outcome = run_training(
        &cfg,
        TrainInputs {
            train: &train,
            seen_pool: seen.as_deref(),
            init: init.as_ref(),
        },
    )?;
    fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    outcome.checkpoint.save(a.out.join("checkpoint.json"))?;
    write_out(Some(&a.out.join("loss.jsonl")), &to_jsonl(&outcome.log)?)?;
    if let Some(last) = outcome.log.last() {
        eprintln!("{}: {} steps, final loss {:.6}", last.variant, last.step, last.total);
    }
    Ok(())
}

fn metric_options(m: &MetricArgs, mut opts: EvalOptions) -> Result<(EvalOptions, Option<MetricReport>)> {
    if let Some(p) = &m.lexicon {
        opts.lexicon = ConceptLexicon::load(p)?;
    }
    if let Some(p) = &m.stopwords {
        opts.stopwords = Stopwords::load(p)?;
    }
    if m.tokens {
        opts.count_mode = SageCountMode::Tokens;
    }
    if m.per_example {
        opts.ratio = RatioAggregation::PerExample;
    }
    let baseline = m
        .baseline_report
        .as_deref()
        .map(|p| serde_json::from_str::<MetricReport>(&read_text(p)?).map_err(Error::from))
        .transpose()?;
    Ok((opts, baseline))
}

fn write_report(report: &MetricReport, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_out(out, &text)
}

fn eval(a: EvalArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let mut opts = EvalOptions::for_checkpoint(&ck);
    if let Some(cfg) = load_config(a.config.as_deref())? {
        opts.decode = cfg.decode;
    }
    let (opts, baseline) = metric_options(&a.metrics, opts)?;
    let records = read_records(&a.data)?;
    let report = run_eval(&ck, &records, baseline.as_ref(), &opts)?;
    write_report(&report, a.metrics.out.as_deref())
}

fn sage(a: SageArgs) -> Result<()> {
    let (opts, baseline) = metric_options(&a.metrics, EvalOptions::default())?;
    let records = read_records(&a.data)?;
    let text = read_text(&a.outputs)?;
    let outputs: Vec<(String, String)> = match serde_json::from_str::<MetricReport>(&text) {
        Ok(r) => r.examples.into_iter().map(|e| (e.id, e.output)).collect(),
        Err(_) => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let o: OutputLine = serde_json::from_str(l).map_err(|e| Error::Data {
                    path: a.outputs.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
                Ok((o.id, o.output))
            })
            .collect::<Result<_>>()?,
    };
    let mut report = score_outputs(&a.variant, &records, &outputs, &opts)?;
    if let Some(base) = &baseline {
        report.attach_baseline(base, opts.ratio)?;
    }
    write_report(&report, a.metrics.out.as_deref())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } => 3,
        e if e.is_data_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Align(a) => align(a),
        Cmd::Mask(a) => mask(a),
        Cmd::Mix(a) => mix(a),
        Cmd::GenSynth(a) => gen_synth(a),
        Cmd::Train(a) => train(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Sage(a) => sage(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
