//! G-Wishart distribution in the shape/inverse-scale parametrization:
//! density proportional to `|K|^((b-2)/2) exp(-tr(K D)/2)` on the cone of
//! positive-definite matrices with zeros at the non-edges of a graph.

mod factor;
mod normconst;
mod sampler;

use nalgebra::DMatrix;

pub use factor::{complete_cholesky, complete_in_place, CholeskyFactor, PrecisionMatrix};
pub use normconst::{
    log_multivariate_gamma, log_norm_const_complete, log_norm_const_decomposable,
    log_norm_const_decomposable_from,
};
pub use sampler::{
    exact_gwishart_factor, exact_gwishart_sample, wishart_sample, ExactSamplerOptions,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Shape `b > 2` and symmetric positive-definite inverse scale `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct GWishartParams<T: Real> {
    b: T,
    d: DMatrix<T>,
    // upper-triangular C with C Cᵀ = D⁻¹, used by the Bartlett draw
    scale_root: DMatrix<T>,
}

impl<T: Real> GWishartParams<T> {
    pub fn new(b: T, d: DMatrix<T>) -> Result<Self> {
        if !(b > T::of(2.0)) {
            return Err(Error::InvalidConfig(format!(
                "G-Wishart shape must exceed 2, got {b}"
            )));
        }
        let scale = d.amax().max(T::one());
        if !linalg::is_symmetric(&d, scale * T::default_epsilon() * T::of(1e3)) {
            return Err(Error::InvalidConfig(
                "inverse scale matrix is not symmetric".into(),
            ));
        }
        let chol = linalg::cholesky(&d)?;
        let p = d.nrows();
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(p, p))
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            b,
            d,
            scale_root: l_inv.transpose(),
        })
    }

    /// `G-Wishart(b, I_p)`.
    pub fn identity(p: usize, b: T) -> Result<Self> {
        Self::new(b, DMatrix::identity(p, p))
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn d(&self) -> &DMatrix<T> {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub(crate) fn scale_root(&self) -> &DMatrix<T> {
        &self.scale_root
    }

    /// Conjugate update after `n` observations with scatter matrix `u`:
    /// `G-Wishart(b + n, D + U)`.
    pub fn posterior(&self, n: usize, u: &DMatrix<T>) -> Result<Self> {
        if u.nrows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let mut d = &self.d + u;
        linalg::symmetrize(&mut d);
        Self::new(self.b + T::of_usize(n), d)
    }
}

/// `((b-2)/2) log det K - tr(K D) / 2`, without the normalizing constant.
pub fn log_unnorm_gwishart<T: Real>(
    k: &PrecisionMatrix<T>,
    params: &GWishartParams<T>,
) -> Result<T> {
    if k.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: k.dim(),
        });
    }
    let log_det = linalg::log_det_spd(k.matrix())?;
    let half = T::of(0.5);
    Ok(
        (params.b - T::of(2.0)) * half * log_det
            - half * linalg::trace_inner(k.matrix(), &params.d),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_density() {
        let params = GWishartParams::<f64>::identity(4, 3.0).unwrap();
        let v = log_unnorm_gwishart(&PrecisionMatrix::identity(4), &params).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GWishartParams::<f64>::identity(3, 2.0).is_err());
        let mut d = DMatrix::<f64>::identity(2, 2);
        d[(0, 1)] = 0.5;
        assert!(GWishartParams::new(3.0, d.clone()).is_err());
        d[(1, 0)] = 2.0;
        d[(0, 1)] = 2.0;
        assert!(matches!(
            GWishartParams::new(3.0, d),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn scale_root_squares_to_inverse_scale() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let params = GWishartParams::new(3.0, d.clone()).unwrap();
        let c = params.scale_root();
        let back = c * c.transpose() * &d;
        assert!((back - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }
}
