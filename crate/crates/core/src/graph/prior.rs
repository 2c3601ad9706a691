use std::sync::Arc;

use rand::{Rng, RngExt};

use super::{rho_inverse, Graph, Multigraph, Partition};
use crate::error::{Error, Result};

/// Independent Bernoulli(theta) prior on the admissible multigraph edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePrior {
    theta: f64,
}

impl EdgePrior {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `2 / (M - 1)` when that lies in (0, 1), otherwise 0.5.
    pub fn sparse_default(m: usize) -> Self {
        let theta = if m > 1 { 2.0 / (m as f64 - 1.0) } else { 0.5 };
        if theta > 0.0 && theta < 1.0 {
            Self { theta }
        } else {
            Self { theta: 0.5 }
        }
    }
}

/// Log block-Bernoulli prior mass of a multigraph.
///
/// The complement exponent counts every admissible edge, self-loops included,
/// so the masses sum to one over all multigraphs on the partition.
pub fn log_block_bernoulli_prior(gb: &Multigraph, prior: &EdgePrior) -> f64 {
    let total = gb.partition().admissible_count() as f64;
    let present = gb.edge_count() as f64;
    present * prior.theta.ln() + (total - present) * (-prior.theta).ln_1p()
}

/// Prior mass of a node-level graph: that of its multigraph representative,
/// or `-inf` when the graph is not block structured.
pub fn log_block_prior_of_graph(g: &Graph, partition: &Arc<Partition>, prior: &EdgePrior) -> f64 {
    match rho_inverse(g, partition) {
        Ok(gb) => log_block_bernoulli_prior(&gb, prior),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Draws a multigraph with each admissible edge included independently with
/// probability `theta`, which may be any value in `[0, 1]`.
pub fn sample_multigraph<R: Rng + ?Sized>(
    theta: f64,
    partition: &Arc<Partition>,
    rng: &mut R,
) -> Multigraph {
    let mask = (0..partition.admissible_count())
        .map(|_| rng.random::<f64>() < theta)
        .collect();
    Multigraph::from_mask(partition.clone(), mask).expect("mask length matches")
}

pub fn sample_prior_graph<R: Rng + ?Sized>(
    prior: &EdgePrior,
    partition: &Arc<Partition>,
    rng: &mut R,
) -> Multigraph {
    sample_multigraph(prior.theta, partition, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn part(sizes: &[usize]) -> Arc<Partition> {
        Arc::new(Partition::from_sizes(sizes.to_vec()).unwrap())
    }

    #[test]
    fn rejects_theta_outside_unit_interval() {
        assert!(EdgePrior::new(0.0).is_err());
        assert!(EdgePrior::new(1.0).is_err());
        assert!(EdgePrior::new(f64::NAN).is_err());
    }

    #[test]
    fn symmetric_prior_is_uniform() {
        let pt = part(&[2, 1, 3]);
        let t = pt.admissible_count() as f64;
        let prior = EdgePrior::new(0.5).unwrap();
        let g = Multigraph::from_edges(pt.clone(), &[(0, 2)]).unwrap();
        let want = t * 0.5f64.ln();
        assert!((log_block_bernoulli_prior(&g, &prior) - want).abs() < 1e-12);
    }

    #[test]
    fn empty_singleton_triangle() {
        let g = Multigraph::empty(part(&[1, 1, 1]));
        let prior = EdgePrior::new(0.25).unwrap();
        let want = 3.0 * 0.75f64.ln();
        assert!((log_block_bernoulli_prior(&g, &prior) - want).abs() < 1e-12);
    }

    #[test]
    fn one_edge_ratio_is_prior_odds() {
        let pt = part(&[2, 2, 1]);
        let prior = EdgePrior::new(0.3).unwrap();
        let g = Multigraph::from_edges(pt, &[(0, 1)]).unwrap();
        let h = g.with_edge(1, 1, true).unwrap();
        let diff = log_block_bernoulli_prior(&h, &prior) - log_block_bernoulli_prior(&g, &prior);
        assert!((diff - (0.3f64 / 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn non_block_graph_has_zero_mass() {
        let pt = part(&[2, 3]);
        let g = Graph::from_edges(5, &[(0, 2)]).unwrap();
        let prior = EdgePrior::new(0.5).unwrap();
        assert_eq!(log_block_prior_of_graph(&g, &pt, &prior), f64::NEG_INFINITY);
    }

    #[test]
    fn sparse_default_matches_nine_groups() {
        assert!((EdgePrior::sparse_default(9).theta() - 0.25).abs() < 1e-15);
        assert_eq!(EdgePrior::sparse_default(2).theta(), 0.5);
    }

    #[test]
    fn zero_theta_gives_empty_graph() {
        let pt = part(&[2, 2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sample_multigraph(0.0, &pt, &mut rng).is_empty());
        }
    }
}
