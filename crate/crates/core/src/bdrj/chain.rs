use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    log_acceptance, propose_graph, propose_precision, reduce_precision, ChainState, DataSummary,
    MoveKind, SamplerConfig,
};
use crate::error::{Error, Result};
use crate::graph::{BlockGraph, Partition};
use crate::gwishart::{exact_gwishart_factor, GWishartParams};
use crate::scalar::Real;

/// Result of one sampler iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T: Real> {
    pub state: ChainState<T>,
    pub accepted: bool,
    pub proposed: Option<MoveKind>,
    /// `NaN` when no move could be proposed.
    pub log_acceptance: f64,
}

/// Recorded draws and per-iteration diagnostics of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput<T: Real> {
    pub partition: Arc<Partition>,
    /// Graphs after burn-in, thinned.
    pub graphs: Vec<BlockGraph>,
    /// Precision matrices matching `graphs` (empty unless recorded).
    pub precisions: Vec<DMatrix<T>>,
    /// Iteration index of each recorded draw.
    pub recorded_iterations: Vec<usize>,
    pub accepted: Vec<bool>,
    pub moves: Vec<Option<MoveKind>>,
    pub log_acceptance: Vec<f64>,
}

impl<T: Real> ChainOutput<T> {
    /// Accepted graph moves over proposed ones, all iterations included.
    pub fn acceptance_rate(&self) -> f64 {
        let proposed = self.moves.iter().filter(|m| m.is_some()).count();
        if proposed == 0 {
            return 0.0;
        }
        self.accepted.iter().filter(|&&a| a).count() as f64 / proposed as f64
    }
}

/// Prior and conjugate-posterior G-Wishart parameters for a data summary.
#[derive(Clone, Debug)]
pub struct StepContext<T: Real> {
    pub prior: GWishartParams<T>,
    pub posterior: GWishartParams<T>,
}

impl<T: Real> StepContext<T> {
    pub fn new(cfg: &SamplerConfig<T>, data: &DataSummary<T>) -> Result<Self> {
        if data.dim() != cfg.gwishart.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.gwishart.dim(),
                found: data.dim(),
            });
        }
        Ok(Self {
            prior: cfg.gwishart.clone(),
            posterior: cfg.gwishart.posterior(data.n, &data.u)?,
        })
    }
}

/// One iteration: a graph move accepted with probability `min(1, R)`,
/// followed by an exact redraw of `K` from its full conditional given the
/// (possibly unchanged) graph.
pub fn bdrj_step<T: Real, R: Rng + ?Sized>(
    state: &ChainState<T>,
    data: &DataSummary<T>,
    cfg: &SamplerConfig<T>,
    rng: &mut R,
) -> Result<StepOutcome<T>> {
    let ctx = StepContext::new(cfg, data)?;
    bdrj_step_with(state, &ctx, cfg, rng)
}

/// [`bdrj_step`] with precomputed G-Wishart parameters.
pub fn bdrj_step_with<T: Real, R: Rng + ?Sized>(
    state: &ChainState<T>,
    ctx: &StepContext<T>,
    cfg: &SamplerConfig<T>,
    rng: &mut R,
) -> Result<StepOutcome<T>> {
    let mut accepted = false;
    let mut log_r = f64::NAN;
    let mut next_graph = state.graph.clone();
    let proposal = propose_graph(&state.graph, cfg.alpha_g, rng);
    if let Some(proposal) = &proposal {
        let g_new = proposal.graph.graph();
        let g_cur = state.graph.graph();
        let w_tilde = exact_gwishart_factor(g_new, &ctx.prior, rng, &cfg.exact)?;
        let (phi_new, w_zero) = match proposal.kind {
            MoveKind::Add => {
                let (phi_new, _) =
                    propose_precision(&state.phi, &proposal.changed, g_new, cfg.sigma_g2, rng);
                (phi_new, reduce_precision(&w_tilde, g_cur))
            }
            MoveKind::Remove => {
                let (w_zero, _) =
                    propose_precision(&w_tilde, &proposal.changed, g_cur, cfg.sigma_g2, rng);
                (reduce_precision(&state.phi, g_new), w_zero)
            }
        };
        let value = log_acceptance(
            state,
            &phi_new,
            proposal,
            &w_tilde,
            &w_zero,
            ctx.prior.d(),
            ctx.posterior.d(),
            cfg.sigma_g2,
            &cfg.prior,
        )
        .as_f64();
        if value.is_nan() {
            return Err(Error::NumericalOverflow {
                iteration: state.iteration,
                detail: format!(
                    "{:?} of multigraph edge {:?} from {} edges",
                    proposal.kind,
                    proposal.edge,
                    state.graph.multigraph().edge_count()
                ),
            });
        }
        log_r = value;
        let u: f64 = rng.random();
        if u.ln() < value {
            accepted = true;
            next_graph = proposal.graph.clone();
        }
    }
    let phi = exact_gwishart_factor(next_graph.graph(), &ctx.posterior, rng, &cfg.exact)?;
    Ok(StepOutcome {
        state: ChainState {
            graph: next_graph,
            phi,
            iteration: state.iteration + 1,
        },
        accepted,
        proposed: proposal.map(|p| p.kind),
        log_acceptance: log_r,
    })
}

/// Runs the sampler on an `n x p` data matrix from the empty graph with
/// `K = I_p`.
pub fn run_chain<T: Real>(
    data: &DMatrix<T>,
    partition: Arc<Partition>,
    cfg: &SamplerConfig<T>,
) -> Result<ChainOutput<T>> {
    if data.ncols() != partition.p() {
        return Err(Error::DimensionMismatch {
            expected: partition.p(),
            found: data.ncols(),
        });
    }
    run_chain_from_summary(&DataSummary::from_data(data), partition, cfg)
}

pub fn run_chain_from_summary<T: Real>(
    data: &DataSummary<T>,
    partition: Arc<Partition>,
    cfg: &SamplerConfig<T>,
) -> Result<ChainOutput<T>> {
    cfg.validate()?;
    if data.dim() != partition.p() {
        return Err(Error::DimensionMismatch {
            expected: partition.p(),
            found: data.dim(),
        });
    }
    let ctx = StepContext::new(cfg, data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = ChainState::initial(partition.clone());
    let recorded = cfg.recorded_len();
    let mut out = ChainOutput {
        partition,
        graphs: Vec::with_capacity(recorded),
        precisions: Vec::with_capacity(if cfg.record_precision { recorded } else { 0 }),
        recorded_iterations: Vec::with_capacity(recorded),
        accepted: Vec::with_capacity(cfg.iterations),
        moves: Vec::with_capacity(cfg.iterations),
        log_acceptance: Vec::with_capacity(cfg.iterations),
    };
    for s in 0..cfg.iterations {
        let step = bdrj_step_with(&state, &ctx, cfg, &mut rng)?;
        out.accepted.push(step.accepted);
        out.moves.push(step.proposed);
        out.log_acceptance.push(step.log_acceptance);
        state = step.state;
        if s >= cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thinning) {
            out.graphs.push(state.graph.clone());
            if cfg.record_precision {
                out.precisions.push(state.precision());
            }
            out.recorded_iterations.push(s);
        }
    }
    log::debug!(
        "chain finished: {} iterations, acceptance rate {:.4}",
        cfg.iterations,
        out.acceptance_rate()
    );
    Ok(out)
}
