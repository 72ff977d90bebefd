//! Learning from summary edits.
//!
//! Aligns AI-generated summaries with their user edits, turns the alignment
//! into per-token masks, and trains a small conditional language model with
//! alignment-aware likelihood/unlikelihood objectives, replay of previously
//! seen data, or a preference loss. Outputs are scored with ROUGE and SAGE.

pub mod align;
pub mod error;
pub mod example;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod textproc;

pub use error::{Error, Result};
