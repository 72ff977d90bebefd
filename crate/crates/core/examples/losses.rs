//! Per-token SALT terms for every variant on one aligned pair, with
//! made-up token probabilities.

use salt::example::{MaskOptions, Origin, TrainingExample};
use salt::loss::{loss_salt, EditSideForm, SaltVariant, TokenProbs};
use salt::textproc::{tokenize, SeqRole, Vocab};

fn main() -> salt::Result<()> {
    let mut vocab = Vocab::new();
    let input = tokenize("patient says she stopped aspirin", &mut vocab, true, SeqRole::Input);
    let ai = tokenize("patient takes one aspirin daily", &mut vocab, true, SeqRole::AiSummary);
    let edit = tokenize("patient doesn't want to take aspirin", &mut vocab, true, SeqRole::EditSummary);
    let (ex, al) = TrainingExample::build("demo", input, ai, edit, Origin::Unseen, &MaskOptions::default());
    println!("ops {}", al.ops_string());

    let p_ai = TokenProbs::new([0.9, 0.7, 0.6, 0.8, 0.5]);
    let p_edit = TokenProbs::new([0.9, 0.1, 0.2, 0.3, 0.2, 0.8]);
    let variants = [SaltVariant::L, SaltVariant::Li, SaltVariant::Ld, SaltVariant::U, SaltVariant::Lu];
    println!("{:<8} {:>8} {:>8} {:>8}", "variant", "ai", "edit", "total");
    for v in variants {
        let b = loss_salt(&ex, &p_ai, &p_edit, &v.preset_weights(), v, EditSideForm::Likelihood)?;
        println!("{:<8} {:>8.4} {:>8.4} {:>8.4}", v.name(), b.ai_side, b.edit_side, b.total);
    }

    let b = loss_salt(&ex, &p_ai, &p_edit, &SaltVariant::Lu.preset_weights(), SaltVariant::Lu, EditSideForm::Likelihood)?;
    println!("\nsalt_lu terms:");
    for t in &b.per_token {
        let tok = match t.side {
            salt::align::Side::Ai => &ex.s_ai.tokens[t.position].surface,
            salt::align::Side::Edit => &ex.s_edit.tokens[t.position].surface,
        };
        println!("  {:?} {:>8} {:?} value {:.4} dlogp {:+.4}", t.side, tok, t.kind, t.value, t.dlogp);
    }
    Ok(())
}
