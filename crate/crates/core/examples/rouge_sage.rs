//! ROUGE and SAGE on a handful of hand-written summaries.

use salt::metrics::{rouge_l, rouge_n, sage_concept, sage_ratio_report, sage_word, SageReport};
use salt::textproc::{encode, ConceptLexicon, SeqRole, Stopwords, Vocab};

fn main() -> salt::Result<()> {
    let v = Vocab::new();
    let seq = |s: &str| encode(s, &v, SeqRole::Generated);

    let (c, r) = (seq("a b c"), seq("a b d"));
    println!("rouge1 {:?}", rouge_n(&c, &r, 1));
    println!("rouge2 {:?}", rouge_n(&c, &r, 2));
    println!("rougeL {:?}", rouge_l(&c, &r));

    let ai = seq("patient reports chest pain and fever");
    let edit = seq("patient reports chest pain and a rash");
    let mut lex = ConceptLexicon::new();
    lex.insert("chest pain", "C0008031")?;
    lex.insert("fever", "C0015967")?;
    lex.insert("rash", "C0015230")?;
    let sw = Stopwords::english();

    let mut total = [SageReport::default(); 2];
    for (i, out) in ["patient has fever and chest pain", "rash with chest pain"].iter().enumerate() {
        let new = seq(out);
        let r = SageReport {
            word: sage_word(&new, &ai, &edit, &sw),
            concept: sage_concept(&new, &ai, &edit, &lex),
        };
        println!("{out:?}: word {:?} concept {:?}", r.word, r.concept);
        total[i] = r;
    }
    println!("second vs first: {:?}", sage_ratio_report(&total[1], &total[0]));
    Ok(())
}
