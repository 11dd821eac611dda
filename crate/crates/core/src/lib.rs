//! Flood-relevance classification for social-media posts.
//!
//! Text goes through cleaning ([`textprep`]) into bag-of-words counts or
//! dense embeddings ([`features`]); image content arrives as precomputed
//! feature files. Minority classes are oversampled with SMOTE ([`balance`]),
//! members are trained ([`models`]), their posteriors fused ([`fusion`]) and
//! scored ([`eval`]). [`pipeline`] wires the five run presets together.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod models;
pub mod pipeline;
pub mod synth;
pub mod textprep;

pub use error::{Error, Result};
