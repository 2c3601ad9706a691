//! Posterior summaries of a sampled chain: edge-inclusion frequencies,
//! thresholded graph estimates and the posterior-mean precision matrix.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bdrj::DataSummary;
use crate::error::{Error, Result};
use crate::graph::{
    log_block_bernoulli_prior, rho, BlockGraph, EdgePrior, Graph, Multigraph, Partition,
};
use crate::gwishart::{log_norm_const_decomposable, GWishartParams};
use crate::scalar::Real;

/// Largest number of admissible multigraph edges [`exact_graph_posterior`]
/// will enumerate.
pub const MAX_ENUMERATED_EDGES: usize = 20;

/// Symmetric matrix of posterior edge-inclusion frequencies with a zero
/// diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct InclusionMatrix {
    values: DMatrix<f64>,
    samples: usize,
}

impl InclusionMatrix {
    /// Wraps a matrix of probabilities; only the strict upper triangle is read.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let p = m.nrows();
        let mut values = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i + 1..p {
                let v = m[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidConfig(format!(
                        "inclusion probability {v} at ({i}, {j}) is outside [0, 1]"
                    )));
                }
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Ok(Self { values, samples: 0 })
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Number of graphs the frequencies were computed from (0 when built
    /// from a matrix).
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `((i, j), p̂_ij)` for `i < j`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let p = self.p();
        (0..p).flat_map(move |i| (i + 1..p).map(move |j| ((i, j), self.values[(i, j)])))
    }

    /// Graph of all pairs with `p̂_ij >= tau`.
    pub fn threshold(&self, tau: f64) -> Graph {
        let mut g = Graph::empty(self.p());
        for ((i, j), v) in self.pairs() {
            if v >= tau {
                g.set_edge(i, j, true);
            }
        }
        g
    }
}

/// Fraction of sampled graphs containing each edge.
pub fn edge_inclusion(samples: &[BlockGraph]) -> Result<InclusionMatrix> {
    edge_inclusion_from_graphs(samples.iter().map(BlockGraph::graph))
}

pub fn edge_inclusion_from_graphs<'a, I>(samples: I) -> Result<InclusionMatrix>
where
    I: IntoIterator<Item = &'a Graph>,
{
    let mut iter = samples.into_iter();
    let first = iter.next().ok_or(Error::EmptySampleList)?;
    let p = first.p();
    let mut counts = vec![0usize; p * p];
    let mut s = 0usize;
    for g in std::iter::once(first).chain(iter) {
        if g.p() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: g.p(),
            });
        }
        for (i, j) in g.edges() {
            counts[i * p + j] += 1;
        }
        s += 1;
    }
    let mut values = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i + 1..p {
            let v = counts[i * p + j] as f64 / s as f64;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(InclusionMatrix { values, samples: s })
}

/// Bayesian false discovery rate of selecting every pair with `p̂ >= s`;
/// `None` when nothing is selected.
pub fn bfdr(pm: &InclusionMatrix, s: f64) -> Option<f64> {
    let (num, den) = pm
        .pairs()
        .filter(|&(_, v)| v >= s)
        .fold((0.0, 0usize), |(num, den), (_, v)| {
            (num + (1.0 - v), den + 1)
        });
    (den > 0).then(|| num / den as f64)
}

/// Outcome of the BFDR threshold search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BfdrThreshold {
    /// Smallest qualifying threshold; `None` selects the empty graph.
    pub threshold: Option<f64>,
    /// BFDR achieved at `threshold`.
    pub bfdr: Option<f64>,
}

/// Smallest observed positive `p̂` whose BFDR is below `target`.
///
/// When no candidate qualifies the result selects the empty graph and a
/// warning is logged.
pub fn bfdr_threshold(pm: &InclusionMatrix, target: f64) -> BfdrThreshold {
    let mut candidates: Vec<f64> = pm.pairs().map(|(_, v)| v).filter(|&v| v > 0.0).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for s in candidates {
        if let Some(rate) = bfdr(pm, s) {
            if rate < target {
                return BfdrThreshold {
                    threshold: Some(s),
                    bfdr: Some(rate),
                };
            }
        }
    }
    log::warn!("no inclusion threshold reaches BFDR below {target}; selecting the empty graph");
    BfdrThreshold {
        threshold: None,
        bfdr: None,
    }
}

/// A thresholded graph estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphEstimate {
    pub graph: Graph,
    /// Inclusion threshold; `None` for the empty-graph fallback.
    pub tau: Option<f64>,
    pub bfdr: Option<f64>,
}

/// Edges whose BFDR-selected threshold is met.
pub fn bfdr_graph(pm: &InclusionMatrix, target: f64) -> GraphEstimate {
    let sel = bfdr_threshold(pm, target);
    let graph = match sel.threshold {
        Some(s) => pm.threshold(s),
        None => Graph::empty(pm.p()),
    };
    GraphEstimate {
        graph,
        tau: sel.threshold,
        bfdr: sel.bfdr,
    }
}

/// Median probability model: edges with `p̂ >= 0.5`.
pub fn median_model(pm: &InclusionMatrix) -> GraphEstimate {
    let graph = pm.threshold(0.5);
    GraphEstimate {
        bfdr: bfdr(pm, 0.5),
        tau: Some(0.5),
        graph,
    }
}

/// Elementwise average of sampled precision matrices.
pub fn posterior_mean_precision<T: Real>(samples: &[DMatrix<T>]) -> Result<DMatrix<T>> {
    let first = samples.first().ok_or(Error::EmptySampleList)?;
    let mut acc = DMatrix::<T>::zeros(first.nrows(), first.ncols());
    for k in samples {
        if k.shape() != first.shape() {
            return Err(Error::DimensionMismatch {
                expected: first.nrows(),
                found: k.nrows(),
            });
        }
        acc += k;
    }
    Ok(acc / T::of_usize(samples.len()))
}

/// Posterior probability of one block graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphProbability {
    pub multigraph: Multigraph,
    pub log_posterior: f64,
    pub probability: f64,
}

/// Exact posterior over every block graph of a small partition,
/// `π(G | y) ∝ π(G) I_G(b + n, D + U) / I_G(b, D)`, in multigraph mask
/// order (bit `k` of the index is admissible edge `k`).
///
/// Every block graph must be decomposable.
pub fn exact_graph_posterior(
    partition: &Arc<Partition>,
    prior: &EdgePrior,
    params: &GWishartParams<f64>,
    data: &DataSummary<f64>,
) -> Result<Vec<GraphProbability>> {
    let total = partition.admissible_count();
    if total > MAX_ENUMERATED_EDGES {
        return Err(Error::InvalidConfig(format!(
            "{total} admissible multigraph edges is too many to enumerate (limit {MAX_ENUMERATED_EDGES})"
        )));
    }
    if data.dim() != partition.p() {
        return Err(Error::DimensionMismatch {
            expected: partition.p(),
            found: data.dim(),
        });
    }
    let post = params.posterior(data.n, &data.u)?;
    let mut out = Vec::with_capacity(1 << total);
    for mask in 0..1usize << total {
        let present = (0..total).map(|k| mask >> k & 1 == 1).collect();
        let multigraph = Multigraph::from_mask(partition.clone(), present)?;
        let g = rho(&multigraph);
        let log_posterior = log_block_bernoulli_prior(&multigraph, prior)
            + log_norm_const_decomposable(g.graph(), &post)?
            - log_norm_const_decomposable(g.graph(), params)?;
        out.push(GraphProbability {
            multigraph,
            log_posterior,
            probability: 0.0,
        });
    }
    let max = out
        .iter()
        .map(|g| g.log_posterior)
        .fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = out.iter().map(|g| (g.log_posterior - max).exp()).sum();
    let log_norm = max + norm.ln();
    for g in &mut out {
        g.log_posterior -= log_norm;
        g.probability = g.log_posterior.exp();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_upper(p: usize, vals: &[((usize, usize), f64)]) -> InclusionMatrix {
        let mut m = DMatrix::zeros(p, p);
        for &((i, j), v) in vals {
            m[(i, j)] = v;
        }
        InclusionMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn identical_samples_give_indicator() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let pm = edge_inclusion_from_graphs([&g, &g, &g]).unwrap();
        assert_eq!(pm.samples(), 3);
        for ((i, j), v) in pm.pairs() {
            assert_eq!(v, if g.has_edge(i, j) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn half_inclusion() {
        let a = Graph::from_edges(3, &[(0, 2)]).unwrap();
        let b = Graph::empty(3);
        let pm = edge_inclusion_from_graphs([&a, &b]).unwrap();
        assert_eq!(pm.get(0, 2), 0.5);
        assert_eq!(pm.get(2, 0), 0.5);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(matches!(edge_inclusion(&[]), Err(Error::EmptySampleList)));
        let empty: Vec<DMatrix<f64>> = vec![];
        assert!(matches!(
            posterior_mean_precision(&empty),
            Err(Error::EmptySampleList)
        ));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = Graph::empty(3);
        let b = Graph::empty(4);
        assert!(matches!(
            edge_inclusion_from_graphs([&a, &b]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn all_certain_edges_select_everything() {
        let pm = from_upper(3, &[((0, 1), 1.0), ((0, 2), 1.0), ((1, 2), 1.0)]);
        let sel = bfdr_threshold(&pm, 0.05);
        assert_eq!(sel.threshold, Some(1.0));
        assert_eq!(sel.bfdr, Some(0.0));
        assert!(bfdr_graph(&pm, 0.05).graph.is_complete());
    }

    #[test]
    fn unreachable_target_gives_empty_graph() {
        let pm = from_upper(3, &[((0, 1), 0.9), ((0, 2), 0.9), ((1, 2), 0.2)]);
        assert!((bfdr(&pm, 0.9).unwrap() - 0.1).abs() < 1e-12);
        assert!((bfdr(&pm, 0.2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let est = bfdr_graph(&pm, 0.05);
        assert_eq!(est.tau, None);
        assert_eq!(est.graph.edge_count(), 0);
    }

    #[test]
    fn smallest_qualifying_threshold() {
        let pm = from_upper(3, &[((0, 1), 0.99), ((0, 2), 0.98), ((1, 2), 0.1)]);
        let sel = bfdr_threshold(&pm, 0.05);
        assert_eq!(sel.threshold, Some(0.98));
        assert!((sel.bfdr.unwrap() - 0.015).abs() < 1e-12);
    }

    #[test]
    fn median_model_uses_greater_or_equal() {
        let pm = from_upper(3, &[((0, 1), 0.5), ((0, 2), 0.49), ((1, 2), 0.7)]);
        let est = median_model(&pm);
        assert_eq!(est.graph.edges(), vec![(0, 1), (1, 2)]);
        let none = from_upper(3, &[((0, 1), 0.1)]);
        assert_eq!(median_model(&none).graph.edge_count(), 0);
    }

    #[test]
    fn mean_precision_midpoint() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::<f64>::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]);
        let m = posterior_mean_precision(&[a.clone(), b]).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]));
        assert_eq!(
            posterior_mean_precision(std::slice::from_ref(&a)).unwrap(),
            a
        );
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 1.5;
        assert!(InclusionMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn exact_posterior_normalizes() {
        let part = Arc::new(Partition::new(vec![1, 2]).unwrap());
        let y = DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0, 0.5, 0.2, -0.3, 0.1, 0.9, 0.4, -1.2, 0.3, 0.0, 0.7, -0.5,
            ],
        );
        let data = DataSummary::from_data(&y);
        let params = GWishartParams::identity(3, 3.0).unwrap();
        let post =
            exact_graph_posterior(&part, &EdgePrior::new(0.5).unwrap(), &params, &data).unwrap();
        assert_eq!(post.len(), 4);
        let total: f64 = post.iter().map(|g| g.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_posterior_without_data_is_the_prior() {
        let part = Arc::new(Partition::new(vec![1, 3]).unwrap());
        let prior = EdgePrior::new(0.3).unwrap();
        let params = GWishartParams::identity(4, 3.0).unwrap();
        let post = exact_graph_posterior(&part, &prior, &params, &DataSummary::empty(4)).unwrap();
        for g in post {
            let expected = log_block_bernoulli_prior(&g.multigraph, &prior).exp();
            assert!((g.probability - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn uncorrelated_data_favour_sparsity_only_at_the_prior_scale() {
        // Orthogonal scatter far below D pushes mass onto the complete graph;
        // at or above the scale of D the empty graph wins.
        let part = Arc::new(Partition::new(vec![1, 2]).unwrap());
        let prior = EdgePrior::new(0.5).unwrap();
        let params = GWishartParams::identity(3, 3.0).unwrap();
        let mass = |scale: f64, full: bool| {
            let data = DataSummary::new(50, DMatrix::identity(3, 3) * scale).unwrap();
            exact_graph_posterior(&part, &prior, &params, &data)
                .unwrap()
                .into_iter()
                .find(|g| {
                    if full {
                        g.multigraph.is_full()
                    } else {
                        g.multigraph.is_empty()
                    }
                })
                .unwrap()
                .probability
        };
        assert!(mass(0.01, true) > 0.5);
        assert!(mass(50.0, false) > 0.9);
    }

    #[test]
    fn exact_posterior_rejects_non_decomposable_spaces() {
        // two groups of two: the cross block alone is a 4-cycle
        let part = Arc::new(Partition::new(vec![2, 2]).unwrap());
        let params = GWishartParams::identity(4, 3.0).unwrap();
        let res = exact_graph_posterior(
            &part,
            &EdgePrior::new(0.5).unwrap(),
            &params,
            &DataSummary::empty(4),
        );
        assert!(matches!(res, Err(Error::NotDecomposable)));
    }
}
