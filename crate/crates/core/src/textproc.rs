//! Word-level tokenization, the shared vocabulary, stopword/punctuation
//! stripping and lexicon-based concept extraction.
//!
//! Text is lowercased and split on whitespace; every punctuation character
//! becomes its own token, except an apostrophe sitting between two
//! alphanumeric characters (`doesn't` stays one token). The model works on
//! ids, the metrics work on surfaces, so a [`Token`] carries both.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type TokenId = u32;

pub const PAD: TokenId = 0;
pub const BOS: TokenId = 1;
pub const EOS: TokenId = 2;
pub const UNK: TokenId = 3;

const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Bidirectional surface/id map. Ids 0..=3 are reserved for PAD, BOS, EOS and UNK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    surfaces: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    pub fn new() -> Self {
        Vocab {
            surfaces: RESERVED.iter().map(|s| s.to_string()).collect(),
            index: HashMap::new(),
        }
    }

    /// Rebuild a vocabulary from its surfaces in id order (as stored in checkpoints).
    pub fn from_surfaces(surfaces: Vec<String>) -> Result<Self> {
        if surfaces.len() < RESERVED.len()
            || surfaces.iter().zip(RESERVED).any(|(s, r)| s != r)
        {
            return Err(Error::Config(
                "vocabulary must start with the reserved entries".into(),
            ));
        }
        let mut index = HashMap::with_capacity(surfaces.len());
        for (id, s) in surfaces.iter().enumerate().skip(RESERVED.len()) {
            if index.insert(s.clone(), id as TokenId).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary entry {s:?}")));
            }
        }
        Ok(Vocab { surfaces, index })
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.len() == RESERVED.len()
    }

    pub fn id(&self, surface: &str) -> Option<TokenId> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: TokenId) -> Option<&str> {
        self.surfaces.get(id as usize).map(String::as_str)
    }

    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    /// Returns the id of `surface`, adding it when unseen.
    pub fn intern(&mut self, surface: &str) -> TokenId {
        if let Some(id) = self.index.get(surface) {
            return *id;
        }
        let id = self.surfaces.len() as TokenId;
        self.surfaces.push(surface.to_string());
        self.index.insert(surface.to_string(), id);
        id
    }

    /// Hex SHA-256 over the surfaces in id order.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for s in &self.surfaces {
            hasher.update(s.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn token(&self, id: TokenId) -> Token {
        Token {
            surface: self.surface(id).unwrap_or(RESERVED[UNK as usize]).to_string(),
            id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub id: TokenId,
}

impl Token {
    /// Identity used by alignment: equal ids, except that two UNKs only
    /// match when their surfaces do.
    pub fn same_as(&self, other: &Token) -> bool {
        self.id == other.id && (self.id != UNK || self.surface == other.surface)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqRole {
    Input,
    AiSummary,
    EditSummary,
    ImitationSummary,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub tokens: Vec<Token>,
    pub role: SeqRole,
}

impl TokenSeq {
    pub fn new(tokens: Vec<Token>, role: SeqRole) -> Self {
        TokenSeq { tokens, role }
    }

    pub fn from_ids(ids: &[TokenId], vocab: &Vocab, role: SeqRole) -> Self {
        TokenSeq::new(ids.iter().map(|&id| vocab.token(id)).collect(), role)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ids(&self) -> Vec<TokenId> {
        self.tokens.iter().map(|t| t.id).collect()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn text(&self) -> String {
        self.surfaces().join(" ")
    }

    pub fn with_role(mut self, role: SeqRole) -> Self {
        self.role = role;
        self
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits lowercased text into token surfaces without touching a vocabulary.
pub fn split_surfaces(text: &str) -> Vec<String> {
    let lowered: Vec<char> = text.to_lowercase().chars().collect();
    let mut out = Vec::new();
    let mut word = String::new();
    for (i, &c) in lowered.iter().enumerate() {
        if c.is_alphanumeric() {
            word.push(c);
            continue;
        }
        let inner_apostrophe = is_apostrophe(c)
            && !word.is_empty()
            && lowered.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if inner_apostrophe {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Tokenizes `text`. Unknown surfaces are added to `vocab` when `grow` is set,
/// otherwise they map to UNK but keep their surface.
pub fn tokenize(text: &str, vocab: &mut Vocab, grow: bool, role: SeqRole) -> TokenSeq {
    if !grow {
        return encode(text, vocab, role);
    }
    let tokens = split_surfaces(text)
        .into_iter()
        .map(|surface| {
            let id = vocab.intern(&surface);
            Token { surface, id }
        })
        .collect();
    TokenSeq::new(tokens, role)
}

/// Tokenizes against a frozen vocabulary.
pub fn encode(text: &str, vocab: &Vocab, role: SeqRole) -> TokenSeq {
    let tokens = split_surfaces(text)
        .into_iter()
        .map(|surface| {
            let id = vocab.id(&surface).unwrap_or(UNK);
            Token { surface, id }
        })
        .collect();
    TokenSeq::new(tokens, role)
}

/// A token made only of non-alphanumeric characters.
pub fn is_punctuation(surface: &str) -> bool {
    !surface.is_empty() && !surface.chars().any(char::is_alphanumeric)
}

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "if", "of", "to", "in", "on", "at", "by", "for",
    "with", "from", "as", "is", "are", "was", "were", "be", "been", "being", "it", "its",
    "this", "that", "these", "those", "he", "she", "they", "them", "his", "her", "their",
    "we", "you", "i", "me", "my", "our", "your", "do", "does", "did", "has", "have", "had",
    "will", "would", "can", "could", "should", "so", "than", "then", "there", "also",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Stopwords(HashSet::new())
    }

    /// Small built-in English list.
    pub fn english() -> Self {
        DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
    }

    /// One surface per line; blank lines ignored; entries are lowercased.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect())
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.0.contains(surface)
    }
}

impl FromIterator<String> for Stopwords {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Stopwords(iter.into_iter().collect())
    }
}

/// Removes stopwords and punctuation-only tokens, preserving order.
pub fn strip_stop_punct(seq: &TokenSeq, stopwords: &Stopwords) -> TokenSeq {
    let tokens = seq
        .tokens
        .iter()
        .filter(|t| !is_punctuation(&t.surface) && !stopwords.contains(&t.surface))
        .cloned()
        .collect();
    TokenSeq::new(tokens, seq.role)
}

/// Phrase to concept-id lexicon matched on token surfaces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptLexicon {
    phrases: HashMap<Vec<String>, String>,
    longest: usize,
}

impl ConceptLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a phrase. The phrase is tokenized with the regular tokenizer.
    pub fn insert(&mut self, phrase: &str, concept_id: &str) -> Result<()> {
        let key = split_surfaces(phrase);
        if key.is_empty() {
            return Err(Error::Config(format!("empty lexicon phrase for {concept_id}")));
        }
        match self.phrases.get(&key) {
            Some(existing) if existing != concept_id => Err(Error::Config(format!(
                "phrase {phrase:?} maps to both {existing} and {concept_id}"
            ))),
            _ => {
                self.longest = self.longest.max(key.len());
                self.phrases.insert(key, concept_id.to_string());
                Ok(())
            }
        }
    }

    /// Reads `phrase<TAB>concept_id` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lex = ConceptLexicon::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (phrase, id) = line.split_once('\t').ok_or_else(|| Error::Data {
                path: path.display().to_string(),
                line: n + 1,
                message: "expected phrase<TAB>concept_id".into(),
            })?;
            lex.insert(phrase, id.trim()).map_err(|e| Error::Data {
                path: path.display().to_string(),
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Lines in `phrase<TAB>concept_id` form, sorted.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .phrases
            .iter()
            .map(|(k, v)| format!("{}\t{}", k.join(" "), v))
            .collect();
        lines.sort();
        lines
    }
}

/// Greedy longest-match scan left to right; a matched span consumes its tokens.
pub fn extract_concepts(seq: &TokenSeq, lex: &ConceptLexicon) -> BTreeSet<String> {
    let surfaces: Vec<String> = seq.tokens.iter().map(|t| t.surface.clone()).collect();
    let mut found = BTreeSet::new();
    let mut i = 0;
    while i < surfaces.len() {
        let max_len = lex.longest.min(surfaces.len() - i);
        let hit = (1..=max_len)
            .rev()
            .find_map(|len| lex.phrases.get(&surfaces[i..i + len]).map(|id| (len, id)));
        match hit {
            Some((len, id)) => {
                found.insert(id.clone());
                i += len;
            }
            None => i += 1,
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(words: &[&str]) -> TokenSeq {
        let mut v = Vocab::new();
        tokenize(&words.join(" "), &mut v, true, SeqRole::Generated)
    }

    #[test]
    fn splits_punctuation() {
        assert_eq!(split_surfaces("Fish oil."), vec!["fish", "oil", "."]);
        assert!(split_surfaces("").is_empty());
        assert_eq!(
            split_surfaces("patient doesn't want to take aspirin"),
            vec!["patient", "doesn't", "want", "to", "take", "aspirin"]
        );
        assert_eq!(split_surfaces("'quoted'..."), vec!["'", "quoted", "'", ".", ".", "."]);
    }

    #[test]
    fn grow_assigns_first_seen_order() {
        let mut v = Vocab::new();
        let s = tokenize("patient takes one aspirin daily", &mut v, true, SeqRole::AiSummary);
        assert_eq!(s.ids(), vec![4, 5, 6, 7, 8]);
        let again = tokenize("aspirin patient", &mut v, true, SeqRole::AiSummary);
        assert_eq!(again.ids(), vec![7, 4]);
    }

    #[test]
    fn frozen_vocab_maps_unknown_to_unk_and_keeps_surface() {
        let mut v = Vocab::new();
        tokenize("chest pain", &mut v, true, SeqRole::Input);
        let s = tokenize("chest ache", &mut v, false, SeqRole::Input);
        assert_eq!(s.ids(), vec![4, UNK]);
        assert_eq!(s.tokens[1].surface, "ache");
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn strip_examples() {
        let s = seq(&["denies", "chest", "pain", "."]);
        assert_eq!(
            strip_stop_punct(&s, &Stopwords::empty()).surfaces(),
            vec!["denies", "chest", "pain"]
        );
        let stop: Stopwords = ["the".to_string()].into_iter().collect();
        assert_eq!(strip_stop_punct(&seq(&["the", "patient"]), &stop).surfaces(), vec!["patient"]);
        assert!(strip_stop_punct(&seq(&[]), &stop).is_empty());
    }

    #[test]
    fn concept_examples() {
        let mut lex = ConceptLexicon::new();
        lex.insert("chest pain", "C1").unwrap();
        lex.insert("fish oil", "C2").unwrap();
        lex.insert("oil", "C3").unwrap();
        let one = |x: &str| BTreeSet::from([x.to_string()]);
        assert_eq!(extract_concepts(&seq(&["chest", "pain"]), &lex), one("C1"));
        assert_eq!(
            extract_concepts(&seq(&["chest", "pain", "and", "chest", "pain"]), &lex),
            one("C1")
        );
        assert_eq!(extract_concepts(&seq(&["fish", "oil", "capsules"]), &lex), one("C2"));
        assert_eq!(extract_concepts(&seq(&["oil"]), &lex), one("C3"));
    }

    #[test]
    fn lexicon_rejects_conflicting_ids() {
        let mut lex = ConceptLexicon::new();
        lex.insert("chest pain", "C1").unwrap();
        lex.insert("chest pain", "C1").unwrap();
        assert!(lex.insert("Chest  pain", "C9").is_err());
        assert!(lex.insert(" ", "C9").is_err());
    }

    #[test]
    fn vocab_round_trips_through_surfaces() {
        let mut v = Vocab::new();
        tokenize("a b c", &mut v, true, SeqRole::Input);
        let back = Vocab::from_surfaces(v.surfaces().to_vec()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.hash(), v.hash());
        assert!(Vocab::from_surfaces(vec!["x".into()]).is_err());
    }
}
