//! Synthetic block-structured benchmarks and graph-recovery metrics.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdrj::{run_chain, SamplerConfig};
use crate::error::{Error, Result};
use crate::graph::{rho, sample_multigraph, BlockGraph, EdgePrior, Graph, Partition};
use crate::gwishart::{
    exact_gwishart_sample, ExactSamplerOptions, GWishartParams, PrecisionMatrix,
};
use crate::posterior::{bfdr_graph, edge_inclusion, median_model};
use crate::scalar::Real;

/// Parameters of a simulated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub n: usize,
    pub group_sizes: Vec<usize>,
    /// Edge probability of the generating graph, drawn uniformly from this range.
    pub theta_range: (f64, f64),
    /// Probability of deleting each edge of the block graph before drawing `K`.
    #[serde(default)]
    pub within_block_removal: f64,
    #[serde(default = "default_shape")]
    pub gwishart_shape: f64,
}

fn default_shape() -> f64 {
    3.0
}

impl SyntheticScenario {
    /// `n = 500` observations, equal groups of `group_size`, `θ ~ U[0.2, 0.6]`.
    pub fn complete_blocks(p: usize, group_size: usize) -> Self {
        Self {
            n: 500,
            group_sizes: vec![group_size; p / group_size],
            theta_range: (0.2, 0.6),
            within_block_removal: 0.0,
            gwishart_shape: 3.0,
        }
    }

    /// `n = 500`, `θ = 0.2`, a quarter of the block edges removed.
    pub fn incomplete_blocks(p: usize, group_size: usize) -> Self {
        Self {
            n: 500,
            group_sizes: vec![group_size; p / group_size],
            theta_range: (0.2, 0.2),
            within_block_removal: 0.25,
            gwishart_shape: 3.0,
        }
    }

    pub fn partition(&self) -> Result<Arc<Partition>> {
        Ok(Arc::new(Partition::from_sizes(self.group_sizes.clone())?))
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.theta_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "theta range ({lo}, {hi}) must be an interval inside [0, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&self.within_block_removal) {
            return Err(Error::InvalidConfig(format!(
                "within-block removal probability {} is outside [0, 1]",
                self.within_block_removal
            )));
        }
        if !(self.gwishart_shape > 2.0) {
            return Err(Error::InvalidConfig("G-Wishart shape must exceed 2".into()));
        }
        self.partition().map(|_| ())
    }
}

/// One simulated dataset.
#[derive(Clone, Debug)]
pub struct Scenario<T: Real> {
    /// Block graph drawn from the prior.
    pub block_truth: BlockGraph,
    /// Graph `K` was drawn on: the block graph, possibly with edges removed.
    pub truth: Graph,
    pub theta: f64,
    pub precision: PrecisionMatrix<T>,
    /// `n x p`, rows i.i.d. `N(0, K⁻¹)`.
    pub data: DMatrix<T>,
}

/// Draws a block graph from the prior, optionally degrades it, draws
/// `K ~ G-Wishart(b, I)` on the result and simulates `n` observations.
pub fn generate_block_scenario<T: Real, R: Rng + ?Sized>(
    sc: &SyntheticScenario,
    rng: &mut R,
) -> Result<Scenario<T>> {
    sc.validate()?;
    let partition = sc.partition()?;
    let (lo, hi) = sc.theta_range;
    let theta = if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    };
    let block_truth = rho(&sample_multigraph(theta, &partition, rng));
    let truth = if sc.within_block_removal > 0.0 {
        degrade_blocks(block_truth.graph(), sc.within_block_removal, rng)
    } else {
        block_truth.graph().clone()
    };
    let params = GWishartParams::identity(partition.p(), T::of(sc.gwishart_shape))?;
    let precision = exact_gwishart_sample(&truth, &params, rng, &ExactSamplerOptions::default())?;
    let data = sample_gaussian(&precision, sc.n, rng)?;
    Ok(Scenario {
        block_truth,
        truth,
        theta,
        precision,
        data,
    })
}

/// `n` rows from `N(0, K⁻¹)`, computed as `Φ⁻¹ z` with `K = ΦᵀΦ`.
pub fn sample_gaussian<T: Real, R: Rng + ?Sized>(
    k: &PrecisionMatrix<T>,
    n: usize,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    let p = k.dim();
    let phi = crate::linalg::upper_cholesky(k.matrix())?;
    let z = DMatrix::<T>::from_fn(p, n, |_, _| T::of(StandardNormal.sample(rng)));
    let x = phi
        .solve_upper_triangular(&z)
        .ok_or(Error::NotPositiveDefinite)?;
    Ok(x.transpose())
}

/// Removes each edge of `truth` independently with probability `removal_prob`.
pub fn degrade_blocks<R: Rng + ?Sized>(truth: &Graph, removal_prob: f64, rng: &mut R) -> Graph {
    let mut g = truth.clone();
    for (i, j) in truth.edges() {
        if rng.random::<f64>() < removal_prob {
            g.set_edge(i, j, false);
        }
    }
    g
}

/// Confusion counts over the `C(p, 2)` node pairs and the derived rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub std_shd: f64,
    pub f1: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Compares an estimated graph with the true one.
///
/// F1, sensitivity and specificity are 1 when their denominator is 0.
pub fn confusion(est: &Graph, truth: &Graph) -> Result<MetricsReport> {
    if est.p() != truth.p() {
        return Err(Error::DimensionMismatch {
            expected: truth.p(),
            found: est.p(),
        });
    }
    let p = truth.p();
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for i in 0..p {
        for j in i + 1..p {
            match (est.has_edge(i, j), truth.has_edge(i, j)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
    }
    let pairs = p * p.saturating_sub(1) / 2;
    Ok(MetricsReport {
        tp,
        fp,
        tn,
        fn_,
        std_shd: if pairs == 0 {
            0.0
        } else {
            (fp + fn_) as f64 / pairs as f64
        },
        f1: ratio_or_one(2 * tp, 2 * tp + fp + fn_),
        sensitivity: ratio_or_one(tp, tp + fn_),
        specificity: ratio_or_one(tn, tn + fp),
    })
}

/// Replicated simulate-then-sample study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: SyntheticScenario,
    pub replicates: usize,
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default = "default_alpha")]
    pub alpha_g: f64,
    #[serde(default = "default_sigma_g2")]
    pub sigma_g2: f64,
    /// Edge probability of the sampler's block-Bernoulli prior.
    #[serde(default = "default_prior_theta")]
    pub prior_theta: f64,
    #[serde(default = "default_target")]
    pub bfdr_target: f64,
    pub seed: u64,
}

fn default_thinning() -> usize {
    1
}
fn default_alpha() -> f64 {
    0.5
}
fn default_sigma_g2() -> f64 {
    0.5
}
fn default_prior_theta() -> f64 {
    0.5
}
fn default_target() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn new(
        scenario: SyntheticScenario,
        replicates: usize,
        iterations: usize,
        seed: u64,
    ) -> Self {
        Self {
            scenario,
            replicates,
            iterations,
            burn_in: iterations / 5,
            thinning: default_thinning(),
            alpha_g: default_alpha(),
            sigma_g2: default_sigma_g2(),
            prior_theta: default_prior_theta(),
            bfdr_target: default_target(),
            seed,
        }
    }
}

/// Metrics of one replicate, flat for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub theta: f64,
    pub true_edges: usize,
    pub acceptance_rate: f64,
    pub bfdr_tau: Option<f64>,
    pub std_shd: f64,
    pub f1: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub median_std_shd: f64,
    pub median_f1: f64,
}

/// Runs one replicate; data and chain randomness come from stream
/// `replicate` of the master seed.
pub fn run_replicate(cfg: &ExperimentConfig, replicate: usize) -> Result<ReplicateResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replicate as u64);
    let chain_seed: u64 = rng.random();
    let sc: Scenario<f64> = generate_block_scenario(&cfg.scenario, &mut rng)?;
    let partition = cfg.scenario.partition()?;
    let mut sampler = SamplerConfig::new(
        EdgePrior::new(cfg.prior_theta)?,
        GWishartParams::identity(partition.p(), 3.0)?,
    );
    sampler.iterations = cfg.iterations;
    sampler.burn_in = cfg.burn_in;
    sampler.thinning = cfg.thinning;
    sampler.alpha_g = cfg.alpha_g;
    sampler.sigma_g2 = cfg.sigma_g2;
    sampler.seed = chain_seed;
    sampler.record_precision = false;
    let out = run_chain(&sc.data, partition, &sampler)?;
    let pm = edge_inclusion(&out.graphs)?;
    let est = bfdr_graph(&pm, cfg.bfdr_target);
    let m = confusion(&est.graph, &sc.truth)?;
    let med = confusion(&median_model(&pm).graph, &sc.truth)?;
    Ok(ReplicateResult {
        replicate,
        theta: sc.theta,
        true_edges: sc.truth.edge_count(),
        acceptance_rate: out.acceptance_rate(),
        bfdr_tau: est.tau,
        std_shd: m.std_shd,
        f1: m.f1,
        sensitivity: m.sensitivity,
        specificity: m.specificity,
        median_std_shd: med.std_shd,
        median_f1: med.f1,
    })
}

/// All replicates in parallel, in replicate order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicateResult>> {
    cfg.scenario.validate()?;
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let res = run_replicate(cfg, r);
            if let Ok(row) = &res {
                log::info!(
                    "replicate {r}: F1 {:.3}, Std-SHD {:.4}",
                    row.f1,
                    row.std_shd
                );
            }
            res
        })
        .collect()
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
