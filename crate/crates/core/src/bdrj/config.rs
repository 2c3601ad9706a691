use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{BlockGraph, EdgePrior, Partition};
use crate::gwishart::{CholeskyFactor, ExactSamplerOptions, GWishartParams};
use crate::linalg;
use crate::scalar::Real;

/// Settings of a block double reversible jump run.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig<T: Real> {
    /// Probability of proposing an addition when both move types are possible.
    pub alpha_g: f64,
    /// Variance of the Gaussian perturbation of new free Cholesky entries.
    pub sigma_g2: T,
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub prior: EdgePrior,
    pub gwishart: GWishartParams<T>,
    pub exact: ExactSamplerOptions,
    /// Keep the precision matrix of every recorded iteration.
    pub record_precision: bool,
}

impl<T: Real> SamplerConfig<T> {
    pub fn new(prior: EdgePrior, gwishart: GWishartParams<T>) -> Self {
        Self {
            alpha_g: 0.5,
            sigma_g2: T::of(0.5),
            iterations: 10_000,
            burn_in: 2_000,
            thinning: 1,
            seed: 0,
            prior,
            gwishart,
            exact: ExactSamplerOptions::default(),
            record_precision: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_g > 0.0 && self.alpha_g < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha_g must lie in (0, 1), got {}",
                self.alpha_g
            )));
        }
        if !(self.sigma_g2 > T::zero()) {
            return Err(Error::InvalidConfig("sigma_g2 must be positive".into()));
        }
        if self.iterations == 0 || self.thinning == 0 {
            return Err(Error::InvalidConfig(
                "iterations and thinning must be positive".into(),
            ));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if !(self.exact.tol > 0.0) || self.exact.max_sweeps == 0 {
            return Err(Error::InvalidConfig(
                "invalid exact sampler tolerance".into(),
            ));
        }
        Ok(())
    }

    /// Number of samples a run records.
    pub fn recorded_len(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thinning)
    }
}

/// Sample size and scatter matrix `U = yᵀy` of zero-mean data.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSummary<T: Real> {
    pub n: usize,
    pub u: DMatrix<T>,
}

impl<T: Real> DataSummary<T> {
    pub fn new(n: usize, u: DMatrix<T>) -> Result<Self> {
        let tol = u.amax().max(T::one()) * T::default_epsilon() * T::of(1e3);
        if !linalg::is_symmetric(&u, tol) {
            return Err(Error::InvalidConfig(
                "scatter matrix is not symmetric".into(),
            ));
        }
        Ok(Self { n, u })
    }

    /// Summary of an `n x p` data matrix.
    pub fn from_data(y: &DMatrix<T>) -> Self {
        let mut u = y.tr_mul(y);
        linalg::symmetrize(&mut u);
        Self { n: y.nrows(), u }
    }

    /// No observations: the chain then targets the prior.
    pub fn empty(p: usize) -> Self {
        Self {
            n: 0,
            u: DMatrix::zeros(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }
}

/// Current graph and Cholesky factor of the current precision matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<T: Real> {
    pub graph: BlockGraph,
    pub phi: CholeskyFactor<T>,
    pub iteration: usize,
}

impl<T: Real> ChainState<T> {
    /// Empty graph with `K = I_p`.
    pub fn initial(partition: Arc<Partition>) -> Self {
        let graph = BlockGraph::empty(partition);
        let phi = CholeskyFactor::identity(graph.graph().clone());
        Self {
            graph,
            phi,
            iteration: 0,
        }
    }

    pub fn precision(&self) -> DMatrix<T> {
        self.phi.precision()
    }
}
