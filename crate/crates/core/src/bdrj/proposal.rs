use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{rho, BlockGraph, Graph, Multigraph};
use crate::gwishart::CholeskyFactor;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Add,
    Remove,
}

/// A proposed neighbour of the current graph in multigraph space.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphProposal {
    pub graph: BlockGraph,
    pub kind: MoveKind,
    /// Multigraph edge added or removed.
    pub edge: (usize, usize),
    /// Node-level pairs `(i, j)`, `i < j`, whose status changes.
    pub changed: Vec<(usize, usize)>,
    /// `log q(G | G') - log q(G' | G)`.
    pub log_proposal_ratio: f64,
}

/// Probability of choosing an addition from `gb`. A move type whose
/// neighbourhood is empty is never chosen.
pub fn add_probability(gb: &Multigraph, alpha_g: f64) -> f64 {
    let missing = gb.partition().admissible_count() - gb.edge_count();
    if missing == 0 {
        0.0
    } else if gb.edge_count() == 0 {
        1.0
    } else {
        alpha_g
    }
}

/// `log q(to | from)` for a one-edge move of the given kind.
pub fn log_move_probability(from: &Multigraph, kind: MoveKind, alpha_g: f64) -> f64 {
    let pa = add_probability(from, alpha_g);
    let present = from.edge_count();
    let missing = from.partition().admissible_count() - present;
    match kind {
        MoveKind::Add => pa.ln() - (missing as f64).ln(),
        MoveKind::Remove => (1.0 - pa).ln() - (present as f64).ln(),
    }
}

/// Picks an addition with probability `alpha_g` (uniform over missing
/// admissible edges) or else a removal (uniform over present edges).
/// Returns `None` when the partition admits no edges at all.
pub fn propose_graph<R: Rng + ?Sized>(
    current: &BlockGraph,
    alpha_g: f64,
    rng: &mut R,
) -> Option<GraphProposal> {
    let gb = current.multigraph();
    if gb.partition().admissible_count() == 0 {
        return None;
    }
    let pa = add_probability(gb, alpha_g);
    let kind = if rng.random::<f64>() < pa {
        MoveKind::Add
    } else {
        MoveKind::Remove
    };
    let candidates = match kind {
        MoveKind::Add => gb.missing_edges(),
        MoveKind::Remove => gb.edges(),
    };
    let edge = candidates[rng.random_range(0..candidates.len())];
    let next = gb
        .with_edge(edge.0, edge.1, kind == MoveKind::Add)
        .expect("candidate edges are admissible");
    let reverse = match kind {
        MoveKind::Add => MoveKind::Remove,
        MoveKind::Remove => MoveKind::Add,
    };
    let log_proposal_ratio =
        log_move_probability(&next, reverse, alpha_g) - log_move_probability(gb, kind, alpha_g);
    let graph = rho(&next);
    let changed = current.graph().symmetric_difference(graph.graph());
    Some(GraphProposal {
        graph,
        kind,
        edge,
        changed,
        log_proposal_ratio,
    })
}

/// Dimension-increasing precision proposal: keeps every free element of
/// `phi`, draws `Φ'_h ~ N(Φ_h, σ²)` for each `h` in `changed`, and completes
/// for `g_new`. Also returns the joint log density of the draws.
pub fn propose_precision<T: Real, R: Rng + ?Sized>(
    phi: &CholeskyFactor<T>,
    changed: &[(usize, usize)],
    g_new: &Graph,
    sigma_g2: T,
    rng: &mut R,
) -> (CholeskyFactor<T>, T) {
    let sd = sigma_g2.sqrt();
    let half = T::of(0.5);
    let log_norm = -half * (T::two_pi() * sigma_g2).ln();
    let mut log_density = T::zero();
    let overrides: Vec<((usize, usize), T)> = changed
        .iter()
        .map(|&(i, j)| {
            let z: f64 = StandardNormal.sample(rng);
            let z = T::of(z);
            log_density += log_norm - half * z * z;
            ((i, j), phi.get(i, j) + sd * z)
        })
        .collect();
    (phi.with_graph(g_new.clone(), &overrides), log_density)
}

/// Dimension-decreasing counterpart: drops the free elements in the changed
/// positions and completes for the smaller graph.
pub fn reduce_precision<T: Real>(phi: &CholeskyFactor<T>, g_new: &Graph) -> CholeskyFactor<T> {
    phi.with_graph(g_new.clone(), &[])
}
