//! Block double reversible jump sampler over (block graph, precision matrix).
//!
//! Each iteration proposes adding or removing one multigraph edge, which
//! switches a whole block of node-level edges at once. New free Cholesky
//! entries are drawn around their current completed values, and an auxiliary
//! G-Wishart draw on the proposed graph makes the prior normalizing
//! constants cancel from the acceptance ratio. The precision matrix is then
//! redrawn exactly from its conjugate full conditional.

mod acceptance;
mod chain;
mod config;
mod proposal;

pub use acceptance::{log_acceptance, log_increasing_ratio, IncreasingMove};
pub use chain::{
    bdrj_step, bdrj_step_with, run_chain, run_chain_from_summary, ChainOutput, StepContext,
    StepOutcome,
};
pub use config::{ChainState, DataSummary, SamplerConfig};
pub use proposal::{
    add_probability, log_move_probability, propose_graph, propose_precision, reduce_precision,
    GraphProposal, MoveKind,
};
