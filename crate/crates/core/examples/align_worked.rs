//! Aligns an AI summary against its edit and prints the op string and the
//! four indicator masks.
//!
//! cargo run --example align_worked -- "ai summary" "edited summary"

use salt::align::{align_nw, derive_masks, smooth_ai_mask, NwScoring};
use salt::textproc::{tokenize, SeqRole, Vocab};

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let ai = args.get(1).map_or("patient takes one aspirin daily", String::as_str);
    let edit = args.get(2).map_or("patient doesn't want to take aspirin", String::as_str);

    let mut vocab = Vocab::new();
    let s_ai = tokenize(ai, &mut vocab, true, SeqRole::AiSummary);
    let s_edit = tokenize(edit, &mut vocab, true, SeqRole::EditSummary);
    let al = align_nw(&s_ai, &s_edit, &NwScoring::default());
    let m = derive_masks(&al);

    println!("ai    {:?}", s_ai.surfaces());
    println!("edit  {:?}", s_edit.surfaces());
    println!("ops   {}  (score {})", al.ops_string(), al.score);
    for op in &al.ops {
        let show = |i: Option<usize>, s: &[&str]| i.map_or("-".to_string(), |i| s[i].to_string());
        println!("  {}  {:>10}  {:<10}", op.kind, show(op.ai_index, &s_ai.surfaces()), show(op.edit_index, &s_edit.surfaces()));
    }
    println!("AI-C  {}", bits(m.ai_changed()));
    println!("AI-NC {}", bits(&m.ai_unchanged()));
    println!("E-C   {}", bits(m.e_changed()));
    println!("E-NC  {}", bits(&m.e_unchanged()));
    println!("AI-C smoothed {}", bits(smooth_ai_mask(&m).ai_changed()));
}
