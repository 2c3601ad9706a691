use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::bspline_design;
use crate::bdrj::{bdrj_step, ChainState, DataSummary, SamplerConfig};
use crate::error::{Error, Result};
use crate::graph::{BlockGraph, EdgePrior, Partition};
use crate::gwishart::{ExactSamplerOptions, GWishartParams};
use crate::linalg;
use crate::posterior::{
    bfdr_graph, edge_inclusion, median_model, posterior_mean_precision, GraphEstimate,
    InclusionMatrix,
};
use crate::scalar::Real;

/// Curves observed on a common grid; row `t` of `curves` is curve `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalDataset<T: Real> {
    grid: Vec<f64>,
    curves: DMatrix<T>,
}

impl<T: Real> FunctionalDataset<T> {
    pub fn new(grid: Vec<f64>, curves: DMatrix<T>) -> Result<Self> {
        if curves.ncols() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: curves.ncols(),
            });
        }
        if curves.nrows() == 0 {
            return Err(Error::InvalidConfig("no curves supplied".into()));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "grid must be finite and strictly increasing".into(),
            ));
        }
        if curves.iter().any(|v| !v.as_f64().is_finite()) {
            return Err(Error::InvalidConfig(
                "curves contain missing or non-finite values".into(),
            ));
        }
        Ok(Self { grid, curves })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn curves(&self) -> &DMatrix<T> {
        &self.curves
    }

    /// Number of curves.
    pub fn len(&self) -> usize {
        self.curves.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.nrows() == 0
    }
}

/// Hyperparameters and run length of the smoother.
#[derive(Clone, Debug, PartialEq)]
pub struct SmootherConfig {
    /// Group sizes over the basis indices; their sum is the basis size.
    pub group_sizes: Vec<usize>,
    /// Inverse-gamma shape of `τ²`.
    pub ig_shape: f64,
    /// Inverse-gamma rate of `τ²`.
    pub ig_rate: f64,
    /// Prior variance of each entry of `μ`.
    pub mu_prior_var: f64,
    pub gwishart_shape: f64,
    /// G-Wishart inverse scale; identity when `None`.
    pub gwishart_scale: Option<DMatrix<f64>>,
    /// Edge probability of the multigraph prior; `2 / (M - 1)` when `None`.
    pub theta: Option<f64>,
    pub alpha_g: f64,
    pub sigma_g2: f64,
    pub burn_in: usize,
    pub iterations: usize,
    pub thinning: usize,
    pub bfdr_target: f64,
    pub seed: u64,
    pub exact: ExactSamplerOptions,
}

impl SmootherConfig {
    pub fn new(group_sizes: Vec<usize>) -> Self {
        Self {
            group_sizes,
            ig_shape: 2.0,
            ig_rate: 0.01,
            mu_prior_var: 100.0,
            gwishart_shape: 3.0,
            gwishart_scale: None,
            theta: None,
            alpha_g: 0.5,
            sigma_g2: 1.0,
            burn_in: 1000,
            iterations: 5000,
            thinning: 1,
            bfdr_target: 0.05,
            seed: 0,
            exact: ExactSamplerOptions::default(),
        }
    }

    pub fn basis_size(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn edge_prior(&self) -> Result<EdgePrior> {
        match self.theta {
            Some(theta) => EdgePrior::new(theta),
            None => Ok(EdgePrior::sparse_default(self.group_sizes.len())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.basis_size() < super::ORDER {
            return Err(Error::InvalidConfig(format!(
                "basis size must be at least {}",
                super::ORDER
            )));
        }
        for (name, v) in [
            ("ig_shape", self.ig_shape),
            ("ig_rate", self.ig_rate),
            ("mu_prior_var", self.mu_prior_var),
            ("sigma_g2", self.sigma_g2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.burn_in >= self.iterations || self.thinning == 0 {
            return Err(Error::InvalidConfig(
                "need burn_in < iterations and a positive thinning".into(),
            ));
        }
        Partition::from_sizes(self.group_sizes.clone())?;
        self.edge_prior()?;
        Ok(())
    }
}

/// Quantities fixed across sweeps.
#[derive(Clone, Debug)]
pub struct FunctionalModel<T: Real> {
    pub omega: DMatrix<T>,
    /// `ΩᵀΩ`.
    pub gram: DMatrix<T>,
    /// Column `t` is `Ωᵀ y_t`.
    pub projected: DMatrix<T>,
    pub partition: Arc<Partition>,
    pub sampler: SamplerConfig<T>,
    pub ig_shape: T,
    pub ig_rate: T,
    pub mu_prior_var: T,
}

impl<T: Real> FunctionalModel<T> {
    pub fn new(data: &FunctionalDataset<T>, cfg: &SmootherConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.basis_size();
        let omega = bspline_design::<T>(data.grid(), p)?;
        let gram = omega.transpose() * &omega;
        let projected = omega.transpose() * data.curves().transpose();
        let partition = Arc::new(Partition::from_sizes(cfg.group_sizes.clone())?);
        let d = match &cfg.gwishart_scale {
            Some(d) => d.map(T::of),
            None => DMatrix::identity(p, p),
        };
        let mut sampler = SamplerConfig::new(
            cfg.edge_prior()?,
            GWishartParams::new(T::of(cfg.gwishart_shape), d)?,
        );
        sampler.alpha_g = cfg.alpha_g;
        sampler.sigma_g2 = T::of(cfg.sigma_g2);
        sampler.exact = cfg.exact;
        Ok(Self {
            omega,
            gram,
            projected,
            partition,
            sampler,
            ig_shape: T::of(cfg.ig_shape),
            ig_rate: T::of(cfg.ig_rate),
            mu_prior_var: T::of(cfg.mu_prior_var),
        })
    }

    pub fn basis_size(&self) -> usize {
        self.omega.ncols()
    }
}

/// Current values of all unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalState<T: Real> {
    /// Row `t` holds the coefficients of curve `t`.
    pub beta: DMatrix<T>,
    pub mu: DVector<T>,
    pub tau2: T,
    pub chain: ChainState<T>,
    pub accepted: bool,
}

impl<T: Real> FunctionalState<T> {
    /// Least-squares coefficients, their mean, the residual variance, the
    /// empty graph and `K = I`.
    pub fn initial(data: &FunctionalDataset<T>, model: &FunctionalModel<T>) -> Result<Self> {
        let p = model.basis_size();
        let ridge = DMatrix::<T>::identity(p, p) * T::of(1e-8);
        let chol = linalg::cholesky(&(&model.gram + ridge))?;
        let beta = chol.solve(&model.projected).transpose();
        let mu = column_mean(&beta);
        let resid = data.curves() - &beta * model.omega.transpose();
        let tau2 = (resid.norm_squared() / T::of_usize(resid.len())).max(T::of(1e-8));
        Ok(Self {
            beta,
            mu,
            tau2,
            chain: ChainState::initial(model.partition.clone()),
            accepted: false,
        })
    }
}

fn column_mean<T: Real>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_fn(m.ncols(), |j, _| m.column(j).sum() / T::of_usize(m.nrows()))
}

fn std_normal_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(n, |_, _| T::of(StandardNormal.sample(rng)))
}

/// Draws `N(Q⁻¹ rhs, Q⁻¹)` for each column of `rhs` using `Q = LLᵀ`.
fn gaussian_from_precision<T: Real, R: Rng + ?Sized>(
    q: &DMatrix<T>,
    rhs: &DMatrix<T>,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    let chol = linalg::cholesky(q)?;
    let mut draws = chol.solve(rhs);
    let lt = chol.l().transpose();
    for mut col in draws.column_iter_mut() {
        let z = std_normal_vector::<T, _>(q.nrows(), rng);
        let noise = lt
            .solve_upper_triangular(&z)
            .ok_or(Error::NotPositiveDefinite)?;
        col += noise;
    }
    Ok(draws)
}

/// Precision `ΩᵀΩ/τ² + K` shared by all curves and, column by column, the
/// right-hand sides `Ωᵀy_t/τ² + Kμ` of the coefficient full conditionals.
pub fn beta_conditional<T: Real>(
    model: &FunctionalModel<T>,
    k: &DMatrix<T>,
    mu: &DVector<T>,
    tau2: T,
) -> (DMatrix<T>, DMatrix<T>) {
    let inv_tau2 = T::one() / tau2;
    let q = &model.gram * inv_tau2 + k;
    let k_mu = k * mu;
    let mut rhs = &model.projected * inv_tau2;
    for mut col in rhs.column_iter_mut() {
        col += &k_mu;
    }
    (q, rhs)
}

/// Posterior means of the coefficients given `K`, `μ` and `τ²`; row `t`
/// belongs to curve `t`.
pub fn beta_conditional_mean<T: Real>(
    model: &FunctionalModel<T>,
    k: &DMatrix<T>,
    mu: &DVector<T>,
    tau2: T,
) -> Result<DMatrix<T>> {
    let (q, rhs) = beta_conditional(model, k, mu, tau2);
    Ok(linalg::cholesky(&q)?.solve(&rhs).transpose())
}

/// One Gibbs sweep in the order β, μ, τ², (K, G).
pub fn functional_gibbs_step<T: Real, R: Rng + ?Sized>(
    state: &FunctionalState<T>,
    data: &FunctionalDataset<T>,
    model: &FunctionalModel<T>,
    rng: &mut R,
) -> Result<FunctionalState<T>> {
    let p = model.basis_size();
    let n_curves = data.len();
    let k = state.chain.precision();

    let (q_beta, rhs) = beta_conditional(model, &k, &state.mu, state.tau2);
    let beta = gaussian_from_precision(&q_beta, &rhs, rng)?.transpose();

    let count = T::of_usize(n_curves);
    let beta_bar = column_mean(&beta);
    let q_mu = &k * count + DMatrix::<T>::identity(p, p) / model.mu_prior_var;
    let rhs_mu = DMatrix::from_column_slice(p, 1, (&k * &beta_bar * count).as_slice());
    let mu = gaussian_from_precision(&q_mu, &rhs_mu, rng)?
        .column(0)
        .into_owned();

    let resid = data.curves() - &beta * model.omega.transpose();
    let shape = model.ig_shape + T::of_usize(resid.len()) * T::of(0.5);
    let rate = model.ig_rate + resid.norm_squared() * T::of(0.5);
    let gamma = Gamma::new(shape.as_f64(), 1.0 / rate.as_f64())
        .map_err(|e| Error::InvalidConfig(format!("inverse-gamma update: {e}")))?;
    let tau2 = T::of(1.0 / gamma.sample(rng));
    if !(tau2 > T::zero()) || !tau2.as_f64().is_finite() {
        return Err(Error::NumericalOverflow {
            iteration: state.chain.iteration,
            detail: format!("noise variance draw {}", tau2.as_f64()),
        });
    }

    let mut centered = beta.clone();
    for mut row in centered.row_iter_mut() {
        row -= mu.transpose();
    }
    let mut u = centered.transpose() * &centered;
    linalg::symmetrize(&mut u);
    let summary = DataSummary::new(n_curves, u)?;
    let step = bdrj_step(&state.chain, &summary, &model.sampler, rng)?;

    Ok(FunctionalState {
        beta,
        mu,
        tau2,
        chain: step.state,
        accepted: step.accepted,
    })
}

/// Posterior summaries of a smoothing run.
#[derive(Clone, Debug)]
pub struct SmoothingResult<T: Real> {
    /// `Ω E[β_t]`, one row per curve.
    pub fitted: DMatrix<T>,
    pub beta_mean: DMatrix<T>,
    pub inclusion: InclusionMatrix,
    pub bfdr_graph: GraphEstimate,
    pub median_graph: GraphEstimate,
    pub precision_mean: DMatrix<T>,
    pub mu_mean: DVector<T>,
    pub tau2_mean: T,
    pub acceptance_rate: f64,
    pub graphs: Vec<BlockGraph>,
}

/// Runs the Gibbs sampler and summarizes the recorded sweeps.
pub fn smooth<T: Real>(
    data: &FunctionalDataset<T>,
    cfg: &SmootherConfig,
) -> Result<SmoothingResult<T>> {
    let model = FunctionalModel::new(data, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = FunctionalState::initial(data, &model)?;
    let p = model.basis_size();
    let mut beta_sum = DMatrix::<T>::zeros(data.len(), p);
    let mut mu_sum = DVector::<T>::zeros(p);
    let mut tau2_sum = T::zero();
    let mut precisions = Vec::new();
    let mut graphs = Vec::new();
    let mut accepted = 0usize;
    for s in 0..cfg.iterations {
        state = functional_gibbs_step(&state, data, &model, &mut rng)?;
        accepted += usize::from(state.accepted);
        if s >= cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thinning) {
            beta_sum += &state.beta;
            mu_sum += &state.mu;
            tau2_sum += state.tau2;
            precisions.push(state.chain.precision());
            graphs.push(state.chain.graph.clone());
        }
    }
    let kept = T::of_usize(graphs.len());
    let beta_mean = beta_sum / kept;
    let inclusion = edge_inclusion(&graphs)?;
    Ok(SmoothingResult {
        fitted: &beta_mean * model.omega.transpose(),
        beta_mean,
        bfdr_graph: bfdr_graph(&inclusion, cfg.bfdr_target),
        median_graph: median_model(&inclusion),
        inclusion,
        precision_mean: posterior_mean_precision(&precisions)?,
        mu_mean: mu_sum / kept,
        tau2_mean: tau2_sum / kept,
        acceptance_rate: accepted as f64 / cfg.iterations as f64,
        graphs,
    })
}
