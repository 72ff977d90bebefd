//! Mixes a seeded replay sample of seen examples into new training data.
//!
//! cargo run --example replay_mix -- [seed]

use salt::pipeline::{build_dataset, gen_synthetic, mix_replay, Encoding, MaskPolicy, ReplayConfig, SynthConfig};
use salt::textproc::Vocab;

fn main() -> salt::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let corpus = gen_synthetic(&SynthConfig { seed, size: 200, ..Default::default() })?;
    let policy = MaskPolicy::default();
    let mut vocab = Vocab::new();
    let unseen = build_dataset(&corpus.train, Encoding::Grow(&mut vocab), &policy);
    let seen = build_dataset(&corpus.seen_pool, Encoding::Grow(&mut vocab), &policy);
    println!("unseen kept {} / seen kept {} (discarded {})", unseen.kept_count(), seen.kept_count(), seen.discarded_count());

    for ratio in [(2, 1), (1, 1), (4, 1)] {
        let cfg = ReplayConfig { ratio_unseen_to_seen: ratio, seed };
        match mix_replay(&unseen.examples, &seen.examples, &cfg) {
            Ok(mixed) => {
                let n_seen = mixed.iter().filter(|e| e.origin == salt::example::Origin::Seen).count();
                let head: Vec<&str> = mixed.iter().take(6).map(|e| e.id.as_str()).collect();
                println!("ratio {ratio:?}: {} total, {n_seen} replayed, starts {head:?}", mixed.len());
            }
            Err(e) => println!("ratio {ratio:?}: {e}"),
        }
    }
    Ok(())
}
