//! Trains a small model on synthetic summaries, then decodes a few held-out
//! inputs with greedy search and with beam search.
//!
//! cargo run --release --example beam_decode

use salt::model::DecodeConfig;
use salt::pipeline::{gen_synthetic, pretrain_base, SuiteConfig};
use salt::textproc::{encode, SeqRole};

fn main() -> salt::Result<()> {
    let cfg = SuiteConfig::default();
    let corpus = gen_synthetic(&cfg.synth)?;
    let ck = pretrain_base(&corpus, &cfg)?;
    let greedy = DecodeConfig { beam_size: 1, ..cfg.decode };
    let blocked = DecodeConfig { no_repeat_ngram: 1, ..cfg.decode };
    for r in corpus.eval.iter().take(4) {
        let input = encode(&r.input, &ck.vocab, SeqRole::Input);
        println!("{}", r.input);
        for (name, d) in [("greedy", greedy), ("beam 4", cfg.decode), ("no repeat 1", blocked)] {
            println!("  {name:<12} {}", salt::model::decode(&ck.params, &ck.vocab, &input, &d)?.text());
        }
    }
    Ok(())
}
