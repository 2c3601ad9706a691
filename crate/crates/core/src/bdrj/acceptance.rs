use nalgebra::DMatrix;

use super::{ChainState, GraphProposal, MoveKind};
use crate::graph::log_block_bernoulli_prior;
use crate::graph::EdgePrior;
use crate::gwishart::CholeskyFactor;
use crate::linalg::trace_inner;
use crate::scalar::Real;

/// The four matrices of a dimension-increasing double jump.
///
/// The chain moves from `smaller` (graph `G`) to `larger` (graph `G ∪ L`)
/// while the auxiliary matrix moves the other way, from `aux_larger` to
/// `aux_smaller`.
#[derive(Clone, Copy, Debug)]
pub struct IncreasingMove<'a, T: Real> {
    pub smaller: &'a CholeskyFactor<T>,
    pub larger: &'a CholeskyFactor<T>,
    pub aux_larger: &'a CholeskyFactor<T>,
    pub aux_smaller: &'a CholeskyFactor<T>,
    pub changed: &'a [(usize, usize)],
}

/// Density, Jacobian and perturbation part of `log R⁺` for an increasing
/// move; graph prior and graph proposal terms are added by the caller.
///
/// ```text
///   -½⟨K' - K, D + U⟩ + ½⟨W̃ - W⁰, D⟩
///   + Σ_i (ν_i(G') - ν_i(G)) (log Φ_ii - log Φ⁰_ii)
///   + (1 / 2σ²) Σ_{h ∈ L} [(Φ'_h - Φ_h)² - (Φ⁰_h - Φ̃_h)²]
/// ```
///
/// The determinants cancel because the diagonal of each factor is copied
/// across the jump.
pub fn log_increasing_ratio<T: Real>(
    mv: &IncreasingMove<'_, T>,
    d: &DMatrix<T>,
    d_plus_u: &DMatrix<T>,
    sigma_g2: T,
) -> T {
    let half = T::of(0.5);
    let k_diff = mv.larger.precision() - mv.smaller.precision();
    let w_diff = mv.aux_larger.precision() - mv.aux_smaller.precision();
    let trace_terms = -half * trace_inner(&k_diff, d_plus_u) + half * trace_inner(&w_diff, d);

    let nu_large = mv.larger.graph().nu_counts();
    let nu_small = mv.smaller.graph().nu_counts();
    let mut jacobian = T::zero();
    for (i, (&a, &b)) in nu_large.iter().zip(&nu_small).enumerate() {
        if a != b {
            let exponent = T::of(a as f64 - b as f64);
            jacobian += exponent * (mv.smaller.get(i, i).ln() - mv.aux_smaller.get(i, i).ln());
        }
    }

    let mut perturbation = T::zero();
    for &(i, j) in mv.changed {
        let forward = mv.larger.get(i, j) - mv.smaller.get(i, j);
        let backward = mv.aux_smaller.get(i, j) - mv.aux_larger.get(i, j);
        perturbation += forward * forward - backward * backward;
    }
    perturbation *= half / sigma_g2;

    trace_terms + jacobian + perturbation
}

/// Log acceptance ratio of a proposed graph move.
///
/// For an addition, `phi_new` lives on the proposed graph, `w_tilde` is the
/// auxiliary draw on the proposed graph and `w_zero` its reduction to the
/// current graph. For a removal, `phi_new` is the reduction of the current
/// factor, `w_tilde` is drawn on the (smaller) proposed graph and `w_zero` is
/// its perturbed extension to the current graph; the ratio is the reciprocal
/// of the mirrored addition.
#[allow(clippy::too_many_arguments)]
pub fn log_acceptance<T: Real>(
    state: &ChainState<T>,
    phi_new: &CholeskyFactor<T>,
    proposal: &GraphProposal,
    w_tilde: &CholeskyFactor<T>,
    w_zero: &CholeskyFactor<T>,
    d: &DMatrix<T>,
    d_plus_u: &DMatrix<T>,
    sigma_g2: T,
    prior: &EdgePrior,
) -> T {
    let log_prior_ratio = log_block_bernoulli_prior(proposal.graph.multigraph(), prior)
        - log_block_bernoulli_prior(state.graph.multigraph(), prior);
    let graph_terms = T::of(log_prior_ratio + proposal.log_proposal_ratio);
    let matrix_terms = match proposal.kind {
        MoveKind::Add => log_increasing_ratio(
            &IncreasingMove {
                smaller: &state.phi,
                larger: phi_new,
                aux_larger: w_tilde,
                aux_smaller: w_zero,
                changed: &proposal.changed,
            },
            d,
            d_plus_u,
            sigma_g2,
        ),
        MoveKind::Remove => -log_increasing_ratio(
            &IncreasingMove {
                smaller: phi_new,
                larger: &state.phi,
                aux_larger: w_zero,
                aux_smaller: w_tilde,
                changed: &proposal.changed,
            },
            d,
            d_plus_u,
            sigma_g2,
        ),
    };
    matrix_terms + graph_terms
}
