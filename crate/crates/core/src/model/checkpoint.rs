use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::TinyLmParams;
use crate::error::{Error, Result};
use crate::textproc::Vocab;

const FORMAT_VERSION: u32 = 1;

/// Trained parameters together with the frozen vocabulary they index.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub vocab: Vocab,
    pub params: TinyLmParams,
    pub step: usize,
    pub variant: Option<String>,
    /// Frozen model that preference rewards are measured against.
    pub reference: Option<TinyLmParams>,
    /// Free-form run metadata.
    pub meta: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct Matrices {
    E_prev: Vec<Vec<f64>>,
    E_in: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct CheckpointFile {
    version: u32,
    vocab_hash: String,
    vocab: Vec<String>,
    V: usize,
    #[serde(flatten)]
    weights: Matrices,
    step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<Matrices>,
    #[serde(default)]
    meta: BTreeMap<String, Value>,
}

fn to_matrices(p: &TinyLmParams) -> Matrices {
    let v = p.vocab_size().max(1);
    Matrices {
        E_prev: p.e_prev().chunks(v).map(<[f64]>::to_vec).collect(),
        E_in: p.e_in().chunks(v).map(<[f64]>::to_vec).collect(),
        b: p.bias().to_vec(),
    }
}

fn from_matrices(v: usize, m: &Matrices) -> Result<TinyLmParams> {
    let square = |rows: &[Vec<f64>]| rows.len() == v && rows.iter().all(|r| r.len() == v);
    if !square(&m.E_prev) || !square(&m.E_in) {
        return Err(Error::Config(format!("checkpoint matrices are not {v}x{v}")));
    }
    let flat = |rows: &[Vec<f64>]| rows.concat();
    let p = TinyLmParams::from_parts(v, &flat(&m.E_prev), &flat(&m.E_in), &m.b)?;
    if p.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("checkpoint contains non-finite parameters".into()));
    }
    Ok(p)
}

impl Checkpoint {
    pub fn new(vocab: Vocab, params: TinyLmParams) -> Result<Self> {
        if vocab.len() != params.vocab_size() {
            return Err(Error::VocabMismatch {
                expected: params.vocab_size().to_string(),
                found: vocab.len().to_string(),
            });
        }
        Ok(Checkpoint {
            vocab,
            params,
            step: 0,
            variant: None,
            reference: None,
            meta: BTreeMap::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile {
            version: FORMAT_VERSION,
            vocab_hash: self.vocab.hash(),
            vocab: self.vocab.surfaces().to_vec(),
            V: self.params.vocab_size(),
            weights: to_matrices(&self.params),
            step: self.step,
            variant: self.variant.clone(),
            reference: self.reference.as_ref().map(to_matrices),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses and verifies a checkpoint: the stored hash must match the stored vocabulary.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported checkpoint version {}", file.version)));
        }
        let vocab = Vocab::from_surfaces(file.vocab)?;
        if vocab.hash() != file.vocab_hash {
            return Err(Error::VocabMismatch {
                expected: file.vocab_hash,
                found: vocab.hash(),
            });
        }
        if vocab.len() != file.V {
            return Err(Error::Config(format!(
                "checkpoint V={} but vocabulary has {} entries",
                file.V,
                vocab.len()
            )));
        }
        let params = from_matrices(file.V, &file.weights)?;
        let reference = file
            .reference
            .as_ref()
            .map(|m| from_matrices(file.V, m))
            .transpose()?;
        Ok(Checkpoint {
            vocab,
            params,
            step: file.step,
            variant: file.variant,
            reference,
            meta: file.meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Fails unless `vocab` is exactly the checkpoint's vocabulary.
    pub fn check_vocab(&self, vocab: &Vocab) -> Result<()> {
        let (mine, theirs) = (self.vocab.hash(), vocab.hash());
        if mine != theirs {
            return Err(Error::VocabMismatch {
                expected: mine,
                found: theirs,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Checkpoint {
        let mut vocab = Vocab::new();
        vocab.intern("fever");
        vocab.intern("cough");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = TinyLmParams::random(vocab.len(), 0.7, &mut rng);
        let mut ck = Checkpoint::new(vocab, params.clone()).unwrap();
        ck.step = 12;
        ck.variant = Some("salt_lu".into());
        ck.reference = Some(TinyLmParams::zeros(6));
        ck.meta.insert("seed".into(), Value::from(3));
        ck
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = sample();
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
    }

    #[test]
    fn tampered_vocabulary_is_rejected() {
        let text = sample().to_json().unwrap().replace("\"cough\"", "\"cold\"");
        assert!(matches!(Checkpoint::from_json(&text), Err(Error::VocabMismatch { .. })));
    }

    #[test]
    fn vocab_check() {
        let ck = sample();
        assert!(ck.check_vocab(&ck.vocab.clone()).is_ok());
        assert!(ck.check_vocab(&Vocab::new()).is_err());
    }
}
