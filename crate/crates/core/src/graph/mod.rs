//! Node partitions, graphs, multigraphs and the block-Bernoulli prior.

mod block;
pub mod decomposable;
mod multigraph;
mod partition;
mod prior;
mod undirected;

pub use block::{is_block_structured, rho, rho_inverse, BlockGraph};
pub use multigraph::Multigraph;
pub use partition::Partition;
pub use prior::{
    log_block_bernoulli_prior, log_block_prior_of_graph, sample_multigraph, sample_prior_graph,
    EdgePrior,
};
pub use undirected::Graph;

/// For each node `i`, the number of neighbours `j > i` in `g`.
pub fn nu_counts(g: &Graph) -> Vec<usize> {
    g.nu_counts()
}
