//! Taste peptide design toolkit.
//!
//! The crate covers the whole design workflow: taste-annotated corpus
//! handling, a loss-supervised variational autoencoder for sequence
//! generation, latent-space candidate screening, alignment-based
//! clustering, a descriptor-driven toxicity ensemble and physicochemical
//! profiling. [`pipeline`] wires the stages together.

pub mod align;
pub mod corpus;
pub mod descriptors;
mod error;
pub mod latent;
pub mod nn;
pub mod physchem;
pub mod pipeline;
pub mod rng;
pub mod seq;
mod tables;
pub mod tox;
pub mod vae;

pub use error::{Error, ErrorKind, Result};
pub use seq::{Peptide, TasteLabel, TastePattern};
