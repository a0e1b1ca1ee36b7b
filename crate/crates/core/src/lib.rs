//! Relevance feedback for content-based retrieval: the classic schemes
//! (Rocchio, MARS, MindReader, Rui & Huang), a low-dimensional query space
//! built from per-feature distances, a Riemannian re-scoring metric, a
//! latent-topic model and a paired benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classic;
pub mod cli;
pub mod error;
pub mod eval;
pub mod feature_store;
pub mod latent;
pub mod query_space;
pub mod riemann;

pub use error::{Error, ErrorClass, Result};
