//! Mixing previously seen (imitation) examples into new training data.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example::TrainingExample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplayConfig {
    /// `(unseen, seen)`: `(2, 1)` samples one seen example per two unseen ones.
    pub ratio_unseen_to_seen: (u32, u32),
    pub seed: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        ReplayConfig {
            ratio_unseen_to_seen: (2, 1),
            seed: 0,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        let (u, s) = self.ratio_unseen_to_seen;
        if u == 0 || s == 0 {
            return Err(Error::Config("replay ratio components must be at least 1".into()));
        }
        Ok(())
    }

    /// Seen examples to sample for `n` unseen ones: `floor(n * seen / unseen)`.
    pub fn replay_count(&self, n: usize) -> usize {
        let (u, s) = self.ratio_unseen_to_seen;
        (n as u128 * s as u128 / u as u128) as usize
    }
}

/// Kept unseen examples plus a seeded sample (without replacement) of kept
/// seen examples, shuffled together.
pub fn mix_replay(
    unseen: &[TrainingExample],
    seen_pool: &[TrainingExample],
    cfg: &ReplayConfig,
) -> Result<Vec<TrainingExample>> {
    cfg.validate()?;
    let unseen: Vec<&TrainingExample> = unseen.iter().filter(|e| e.kept).collect();
    let pool: Vec<&TrainingExample> = seen_pool.iter().filter(|e| e.kept).collect();
    let required = cfg.replay_count(unseen.len());
    if required > pool.len() {
        return Err(Error::InsufficientSeenPool {
            required,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picked = index::sample(&mut rng, pool.len(), required);
    let mut stream: Vec<TrainingExample> = unseen.into_iter().cloned().collect();
    stream.extend(picked.iter().map(|i| pool[i].clone()));
    stream.shuffle(&mut rng);
    Ok(stream)
}
