use std::sync::Arc;

use super::{Graph, Multigraph, Partition};
use crate::error::{Error, Result};

/// A node-level graph lying in the image of [`rho`], kept together with its
/// multigraph representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockGraph {
    graph: Graph,
    multigraph: Multigraph,
}

impl BlockGraph {
    pub fn empty(partition: Arc<Partition>) -> Self {
        rho(&Multigraph::empty(partition))
    }

    /// Validates the block structure of `graph` against `partition`.
    pub fn try_from_graph(graph: Graph, partition: &Arc<Partition>) -> Result<Self> {
        let multigraph = rho_inverse(&graph, partition)?;
        Ok(Self { graph, multigraph })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn multigraph(&self) -> &Multigraph {
        &self.multigraph
    }

    pub fn partition(&self) -> &Arc<Partition> {
        self.multigraph.partition()
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}

/// Expands each multigraph edge `(h, k)` into the full block `B_h x B_k`
/// (the complete subgraph on `B_h` for a self-loop).
pub fn rho(gb: &Multigraph) -> BlockGraph {
    let part = gb.partition();
    let mut graph = Graph::empty(part.p());
    for (l, m) in gb.edges() {
        for (i, j) in part.block_pairs(l, m) {
            graph.set_edge(i, j, true);
        }
    }
    BlockGraph {
        graph,
        multigraph: gb.clone(),
    }
}

/// Recovers the multigraph whose image under [`rho`] is `g`.
pub fn rho_inverse(g: &Graph, partition: &Arc<Partition>) -> Result<Multigraph> {
    if g.p() != partition.p() {
        return Err(Error::DimensionMismatch {
            expected: partition.p(),
            found: g.p(),
        });
    }
    let m = partition.m();
    let mut edges = Vec::new();
    for h in 0..m {
        for k in h..m {
            let pairs = partition.block_pairs(h, k);
            let Some(&(i0, j0)) = pairs.first() else {
                continue;
            };
            let state = g.has_edge(i0, j0);
            if pairs.iter().any(|&(i, j)| g.has_edge(i, j) != state) {
                return Err(Error::NotBlockStructured(h, k));
            }
            if state {
                edges.push((h, k));
            }
        }
    }
    Multigraph::from_edges(partition.clone(), &edges)
}

/// True when every group-pair sub-block of `g` is constant.
pub fn is_block_structured(g: &Graph, partition: &Arc<Partition>) -> bool {
    rho_inverse(g, partition).is_ok()
}
