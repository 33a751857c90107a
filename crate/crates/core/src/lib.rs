//! Communicative efficiency of lexical encodings.
//!
//! A lexicon maps existing word forms to concepts in an embedding space. A
//! probabilistic listener interprets forms, and an encoding (one label per
//! emerging concept) is scored by its expected length and its expected
//! information loss. Optimal encodings trace a frontier in that plane; an
//! encoding's efficiency loss is its distance from the frontier, and baseline
//! encodings show how far typical alternatives fall from it.

pub mod baselines;
pub mod config;
pub mod costs;
pub mod error;
pub mod fixture;
pub mod frontier;
pub mod lexicon;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod rng;
pub mod semantics;
pub mod stats;
pub mod taxonomy;

pub use error::{Error, Result};
