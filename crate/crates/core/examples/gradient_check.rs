//! Compares analytic gradients with central finite differences for each
//! objective on a random tiny model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use salt::example::{MaskOptions, Origin, TrainingExample};
use salt::loss::{DpoConfig, EditSideForm, SaltVariant};
use salt::model::{evaluate, Objective, Reduction, SaltItem, TinyLmParams};
use salt::textproc::{tokenize, SeqRole, Vocab};

fn max_rel_err(params: &TinyLmParams, obj: &Objective<'_>, rng: &mut ChaCha8Rng) -> salt::Result<f64> {
    let grad = evaluate(params, obj, Reduction::Mean)?.grad;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let i = rng.random_range(0..params.len());
        let mut p = params.clone();
        p.as_mut_slice()[i] += h;
        let up = evaluate(&p, obj, Reduction::Mean)?.loss;
        p.as_mut_slice()[i] -= 2.0 * h;
        let down = evaluate(&p, obj, Reduction::Mean)?.loss;
        let fd = (up - down) / (2.0 * h);
        // Below 1e-5 the difference quotient is mostly rounding noise.
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-5));
    }
    Ok(worst)
}

fn main() -> salt::Result<()> {
    let mut vocab = Vocab::new();
    let mut tok = |s: &str, r| tokenize(s, &mut vocab, true, r);
    let pairs = [
        ("she stopped aspirin", "patient takes one aspirin daily", "patient doesn't want to take aspirin", Origin::Unseen),
        ("cough for two weeks", "patient has fever", "patient has a cough", Origin::Unseen),
        ("knee pain after a fall", "knee pain noted", "knee pain after fall", Origin::Seen),
    ];
    let examples: Vec<TrainingExample> = pairs
        .iter()
        .enumerate()
        .map(|(i, (u, a, e, o))| {
            let (u, a, e) = (tok(u, SeqRole::Input), tok(a, SeqRole::AiSummary), tok(e, SeqRole::EditSummary));
            TrainingExample::build(format!("ex{i}"), u, a, e, *o, &MaskOptions::default()).0
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = TinyLmParams::random(vocab.len(), 0.5, &mut rng);
    let refs: Vec<&TrainingExample> = examples.iter().collect();
    let reference = TinyLmParams::random(vocab.len(), 0.5, &mut rng);

    for v in [SaltVariant::L, SaltVariant::Li, SaltVariant::Ld, SaltVariant::U, SaltVariant::Lu] {
        let items: Vec<SaltItem<'_>> = examples.iter().map(|e| SaltItem { example: e, variant: v }).collect();
        let obj = Objective::Salt { items: &items, weights: v.preset_weights(), form: EditSideForm::Likelihood };
        println!("{:<18} max rel err {:.2e}", v.name(), max_rel_err(&params, &obj, &mut rng)?);
    }
    // Replay: seen examples use the replay objective.
    let items: Vec<SaltItem<'_>> = examples
        .iter()
        .map(|e| SaltItem { example: e, variant: if e.origin == Origin::Seen { SaltVariant::Lu } else { SaltVariant::L } })
        .collect();
    let obj = Objective::Salt { items: &items, weights: Default::default(), form: EditSideForm::Likelihood };
    println!("{:<18} max rel err {:.2e}", "salt_l_rsalt_lu", max_rel_err(&params, &obj, &mut rng)?);
    let obj = Objective::Dpo { examples: &refs, reference: &reference, config: DpoConfig::default() };
    println!("{:<18} max rel err {:.2e}", "dpo", max_rel_err(&params, &obj, &mut rng)?);
    Ok(())
}
