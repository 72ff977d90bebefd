//! Fine-tunes one base model with salt_l, salt_lu and DPO and compares
//! reward accuracy and ROUGE on held-out data.
//!
//! cargo run --release --example dpo_vs_salt -- [seed] [beta]

use salt::loss::{DpoConfig, SaltVariant};
use salt::pipeline::{gen_synthetic, pretrain_base, run_suite, SuiteConfig, Variant};

fn main() -> salt::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mut cfg = SuiteConfig {
        seed: args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0),
        ..SuiteConfig::default()
    };
    cfg.synth.seed = cfg.seed;
    if let Some(beta) = args.get(2).and_then(|s| s.parse().ok()) {
        cfg.dpo = DpoConfig { beta };
    }
    let corpus = gen_synthetic(&cfg.synth)?;
    let base = pretrain_base(&corpus, &cfg)?;
    let variants = [Variant::Salt(SaltVariant::L), Variant::Salt(SaltVariant::Lu), Variant::Dpo];
    let runs = run_suite(&corpus, &base, &variants, &cfg)?;
    println!("{:<8} {:>10} {:>6} {:>6} {:>6}", "variant", "reward acc", "R1", "R2", "RL");
    for r in &runs {
        let m = &r.report;
        println!("{:<8} {:>10.3} {:>6.3} {:>6.3} {:>6.3}", r.variant.to_string(), m.reward_acc.unwrap_or(f64::NAN), m.rouge1, m.rouge2, m.rouge_l);
    }
    Ok(())
}
