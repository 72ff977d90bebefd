//! Data ingestion, replay mixing, synthetic corpora, training and evaluation.

mod config;
mod dataset;
mod eval;
mod experiment;
mod replay;
mod synth;
mod train;

pub use config::{ExperimentConfig, Variant};
pub use dataset::{
    build_dataset, load_dataset, parse_records, read_records, write_jsonl, Dataset, DatasetRecord,
    Encoding, MaskPolicy,
};
pub use eval::{reward_accuracy, run_eval, score_outputs, EvalOptions};
pub use experiment::{pretrain_base, run_suite, SuiteConfig, SuiteRun};
pub use replay::{mix_replay, ReplayConfig};
pub use synth::{gen_synthetic, ErrorKind, SynthConfig, SynthCorpus, TruthRecord, CUE_DROP, CUE_INSERT, CUE_SWAP};
pub use train::{run_training, DataStats, LossRecord, TrainInputs, TrainOutcome};
