//! Bayesian structure learning for Gaussian graphical models whose graph is
//! constrained to a block structure over a fixed, ordered partition of the
//! variables.
//!
//! The sampler is a block double reversible jump chain on (graph, precision
//! matrix) pairs under a block-Bernoulli graph prior and a G-Wishart prior on
//! the precision matrix. Everything numeric is generic over [`Real`]
//! (`f32`/`f64`); the `*64` aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdrj;
pub mod error;
pub mod functional;
pub mod graph;
pub mod gwishart;
pub mod io;
pub mod linalg;
pub mod posterior;
pub mod scalar;
pub mod simbench;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GWishartParams64 = gwishart::GWishartParams<f64>;
pub type PrecisionMatrix64 = gwishart::PrecisionMatrix<f64>;
pub type CholeskyFactor64 = gwishart::CholeskyFactor<f64>;
pub type SamplerConfig64 = bdrj::SamplerConfig<f64>;
pub type ChainState64 = bdrj::ChainState<f64>;
pub type ChainOutput64 = bdrj::ChainOutput<f64>;
pub type DataSummary64 = bdrj::DataSummary<f64>;
pub type FunctionalDataset64 = functional::FunctionalDataset<f64>;

pub type GWishartParams32 = gwishart::GWishartParams<f32>;
pub type CholeskyFactor32 = gwishart::CholeskyFactor<f32>;
pub type SamplerConfig32 = bdrj::SamplerConfig<f32>;
pub type ChainOutput32 = bdrj::ChainOutput<f32>;
