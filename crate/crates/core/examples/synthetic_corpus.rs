//! Generates the synthetic edit corpus, writes it to a directory and shows
//! what smoothing and the change-fraction filter do to the imitation data.
//!
//! cargo run --example synthetic_corpus -- [out_dir] [seed]

use salt::align::{change_fraction, Side};
use salt::pipeline::{build_dataset, gen_synthetic, Dataset, Encoding, MaskPolicy, SynthConfig};
use salt::textproc::Vocab;

fn mean_change(d: &Dataset) -> f64 {
    let fr: Vec<f64> = d.kept().filter_map(|e| change_fraction(&e.masks, Side::Ai).ok()).collect();
    fr.iter().sum::<f64>() / fr.len().max(1) as f64
}

fn main() -> salt::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let out = args.get(1).cloned().unwrap_or_else(|| "synth_corpus".into());
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let corpus = gen_synthetic(&SynthConfig { seed, ..Default::default() })?;
    corpus.write_to(&out)?;
    println!("wrote {} train, {} seen, {} eval records to {out}", corpus.train.len(), corpus.seen_pool.len(), corpus.eval.len());
    for r in corpus.train.iter().filter(|r| r.ai_summary != r.edit_summary).take(3) {
        println!("\n{}\n  ai:   {}\n  edit: {}", r.input, r.ai_summary, r.edit_summary);
    }

    let plain = MaskPolicy::new(Default::default(), false, None, false);
    let raw = build_dataset(&corpus.seen_pool, Encoding::Grow(&mut Vocab::new()), &plain);
    let cleaned = build_dataset(&corpus.seen_pool, Encoding::Grow(&mut Vocab::new()), &MaskPolicy::default());
    println!("\nimitation data, mean AI change fraction:");
    println!("  as aligned           {:.4} over {}", mean_change(&raw), raw.kept_count());
    println!("  smoothed + filtered  {:.4} over {} ({} discarded)", mean_change(&cleaned), cleaned.kept_count(), cleaned.discarded_count());
    Ok(())
}
