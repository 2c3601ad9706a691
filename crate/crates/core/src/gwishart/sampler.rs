use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::{CholeskyFactor, GWishartParams, PrecisionMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::scalar::Real;

/// Stopping rule of the iterative exact sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactSamplerOptions {
    /// Iterations stop once the largest change of the covariance iterate,
    /// in correlation units `|Δw_ij| / sqrt(σ_ii σ_jj)`, falls below this.
    pub tol: f64,
    /// Cap on cyclic sweeps plus Newton steps.
    pub max_sweeps: usize,
    /// Cyclic sweeps tried before switching to Newton steps.
    pub newton_after: usize,
}

impl Default for ExactSamplerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 1000,
            newton_after: 50,
        }
    }
}

/// Unconstrained draw for the complete graph: a Wishart matrix with
/// `b + p - 1` degrees of freedom and scale `D⁻¹` (Bartlett construction).
pub fn wishart_sample<T: Real, R: Rng + ?Sized>(
    params: &GWishartParams<T>,
    rng: &mut R,
) -> DMatrix<T> {
    let p = params.dim();
    let df = params.b().as_f64() + p as f64 - 1.0;
    let mut a = DMatrix::<T>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(df - i as f64).expect("positive degrees of freedom");
        a[(i, i)] = T::of(chi.sample(rng).sqrt());
        for j in 0..i {
            let z: f64 = StandardNormal.sample(rng);
            a[(i, j)] = T::of(z);
        }
    }
    let ca = params.scale_root() * a;
    let mut k = &ca * ca.transpose();
    linalg::symmetrize(&mut k);
    k
}

/// Exact draw from `G-Wishart(b, D)` on `g`, returned as its completed
/// Cholesky factor.
///
/// Starts from an unconstrained Wishart draw and runs cyclic neighbourhood
/// regressions on its inverse until the covariance iterate stops changing;
/// the inverse of the limit has exact zeros at the non-edges of `g`.
pub fn exact_gwishart_factor<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    params: &GWishartParams<T>,
    rng: &mut R,
    opts: &ExactSamplerOptions,
) -> Result<CholeskyFactor<T>> {
    let p = g.p();
    if p != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: p,
        });
    }
    let k0 = wishart_sample(params, rng);
    if g.is_complete() {
        return CholeskyFactor::from_precision(&k0, g.clone());
    }
    let sigma = linalg::spd_inverse(&k0)?;
    let w = max_det_completion(g, &sigma, opts)?;
    let k = linalg::spd_inverse(&w)?;
    CholeskyFactor::from_precision(&k, g.clone())
}

/// Covariance `W` agreeing with `sigma` on the diagonal and the edges of `g`
/// whose inverse vanishes off `g`.
///
/// Cyclic neighbourhood regressions are tried first; when they contract
/// slowly (ill-conditioned `sigma`) the remaining distance is covered by
/// damped Newton steps on `log det W` over the non-edge entries. Both
/// iterations share the same unique fixed point.
fn max_det_completion<T: Real>(
    g: &Graph,
    sigma: &DMatrix<T>,
    opts: &ExactSamplerOptions,
) -> Result<DMatrix<T>> {
    let p = g.p();
    let tol = T::of(opts.tol).max(T::tolerance_floor());
    let scale: Vec<T> = (0..p).map(|i| sigma[(i, i)].sqrt()).collect();
    let neighbors: Vec<Vec<usize>> = (0..p).map(|j| g.neighbors(j)).collect();
    let mut w = sigma.clone();
    let mut change = T::zero();
    let cyclic = opts.newton_after.min(opts.max_sweeps);
    for _ in 0..cyclic {
        change = cyclic_sweep(&mut w, sigma, &neighbors, &scale)?;
        if change < tol {
            return Ok(w);
        }
    }
    let non_edges: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect();
    for _ in cyclic..opts.max_sweeps {
        change = newton_step(&mut w, &non_edges, &scale)?;
        if change < tol {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence {
        sweeps: opts.max_sweeps,
        last_change: change.as_f64(),
    })
}

fn cyclic_sweep<T: Real>(
    w: &mut DMatrix<T>,
    sigma: &DMatrix<T>,
    neighbors: &[Vec<usize>],
    scale: &[T],
) -> Result<T> {
    let p = w.nrows();
    let mut change = T::zero();
    for j in 0..p {
        let nbrs = &neighbors[j];
        if nbrs.is_empty() {
            for i in (0..p).filter(|&i| i != j) {
                change = change.max(w[(i, j)].abs() / (scale[i] * scale[j]));
                w[(i, j)] = T::zero();
                w[(j, i)] = T::zero();
            }
            continue;
        }
        let w_nn = DMatrix::from_fn(nbrs.len(), nbrs.len(), |a, c| w[(nbrs[a], nbrs[c])]);
        let rhs = DVector::from_fn(nbrs.len(), |a, _| sigma[(nbrs[a], j)]);
        let beta = linalg::cholesky(&w_nn)?.solve(&rhs);
        for i in (0..p).filter(|&i| i != j) {
            let mut v = T::zero();
            for (a, &k) in nbrs.iter().enumerate() {
                v += w[(i, k)] * beta[a];
            }
            change = change.max((v - w[(i, j)]).abs() / (scale[i] * scale[j]));
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(change)
}

/// One damped Newton step maximizing `log det W` over the non-edge entries.
fn newton_step<T: Real>(
    w: &mut DMatrix<T>,
    non_edges: &[(usize, usize)],
    scale: &[T],
) -> Result<T> {
    let chol = linalg::cholesky(w)?;
    let k = chol.inverse();
    let log_det = linalg::log_det_spd(w)?;
    let m = non_edges.len();
    let two = T::of(2.0);
    let grad = DVector::from_fn(m, |a, _| {
        let (i, j) = non_edges[a];
        two * k[(i, j)]
    });
    let hess = DMatrix::from_fn(m, m, |a, b| {
        let (i, j) = non_edges[a];
        let (r, s) = non_edges[b];
        two * (k[(j, r)] * k[(i, s)] + k[(j, s)] * k[(i, r)])
    });
    let step = linalg::cholesky(&hess)?.solve(&grad);
    let slope = grad.dot(&step);
    let mut t = T::one();
    for _ in 0..60 {
        let mut trial = w.clone();
        for (a, &(i, j)) in non_edges.iter().enumerate() {
            trial[(i, j)] += t * step[a];
            trial[(j, i)] = trial[(i, j)];
        }
        if let Ok(ld) = linalg::log_det_spd(&trial) {
            if ld >= log_det + T::of(0.25) * t * slope {
                let change = non_edges
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (a, &(i, j))| {
                        acc.max((t * step[a]).abs() / (scale[i] * scale[j]))
                    });
                *w = trial;
                return Ok(change);
            }
        }
        t *= T::of(0.5);
    }
    Err(Error::NotPositiveDefinite)
}

/// Exact draw from `G-Wishart(b, D)` on `g`.
pub fn exact_gwishart_sample<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    params: &GWishartParams<T>,
    rng: &mut R,
    opts: &ExactSamplerOptions,
) -> Result<PrecisionMatrix<T>> {
    Ok(exact_gwishart_factor(g, params, rng, opts)?.to_precision())
}
