//! Fine-tunes one base model with each SALT variant and prints SAGE counts
//! normalized by the `salt_l` run.
//!
//! cargo run --release --example sage_table -- [seed] [lr] [fix_rate]

use std::time::Instant;

use salt::loss::SaltVariant;
use salt::pipeline::{gen_synthetic, pretrain_base, run_suite, SuiteConfig, Variant};

fn fmt(r: Option<f64>) -> String {
    r.map_or_else(|| "  n/a".into(), |x| format!("{x:5.3}"))
}

fn main() -> salt::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut cfg = SuiteConfig::default();
    if let Some(lr) = args.get(2).and_then(|s| s.parse().ok()) {
        cfg.lr = lr;
    }
    cfg.seed = seed;
    cfg.synth.seed = seed;
    if let Some(f) = args.get(3).and_then(|s| s.parse().ok()) {
        cfg.synth.fix_rate = f;
    }
    let t = Instant::now();
    let corpus = gen_synthetic(&cfg.synth)?;
    let base = pretrain_base(&corpus, &cfg)?;
    let mut variants: Vec<Variant> = [SaltVariant::L, SaltVariant::Li, SaltVariant::Ld, SaltVariant::U, SaltVariant::Lu]
        .map(Variant::Salt)
        .to_vec();
    variants.push(Variant::Dpo);
    let runs = run_suite(&corpus, &base, &variants, &cfg)?;

    println!("{:<8} {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6} | {:>5} {:>5} {:>5}", "variant", "Gw1", "Gw2", "Gw3", "Gc1", "Gc2", "Gc3", "R1", "RL", "acc");
    for r in &runs {
        let ratios = r.report.ratios_vs_baseline.unwrap_or_default();
        println!(
            "{:<8} {} {} {} | {} {} {} | {:.3} {:.3} {:.3}",
            r.variant.to_string(),
            fmt(ratios.word.g1),
            fmt(ratios.word.g2),
            fmt(ratios.word.g3),
            fmt(ratios.concept.g1),
            fmt(ratios.concept.g2),
            fmt(ratios.concept.g3),
            r.report.rouge1,
            r.report.rouge_l,
            r.report.reward_acc.unwrap_or(f64::NAN),
        );
    }
    println!("raw salt_l counts: {:?}", runs[0].report.sage);
    eprintln!("took {:.1?}", t.elapsed());
    Ok(())
}
