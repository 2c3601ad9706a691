use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use super::GWishartParams;
use crate::error::{Error, Result};
use crate::graph::{decomposable, Graph};
use crate::linalg;
use crate::scalar::Real;

/// `log Γ_q(a) = q(q-1)/4 log π + Σ_{j=1..q} log Γ(a + (1-j)/2)`.
pub fn log_multivariate_gamma(q: usize, a: f64) -> f64 {
    let qf = q as f64;
    qf * (qf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (1..=q)
            .map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0))
            .sum::<f64>()
}

/// Log normalizing constant of `G-Wishart(b, D_C)` on a complete graph of
/// size `q`: `(q δ/2) log 2 + log Γ_q(δ/2) - (δ/2) log det D_C`, `δ = b + q - 1`.
pub fn log_norm_const_complete<T: Real>(d_sub: &DMatrix<T>, b: T) -> Result<T> {
    let q = d_sub.nrows();
    if q == 0 {
        return Ok(T::zero());
    }
    let half_df = (b.as_f64() + q as f64 - 1.0) / 2.0;
    let log_det = linalg::log_det_spd(d_sub)?.as_f64();
    Ok(T::of(
        q as f64 * half_df * std::f64::consts::LN_2 + log_multivariate_gamma(q, half_df)
            - half_df * log_det,
    ))
}

fn principal<T: Real>(d: &DMatrix<T>, nodes: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(nodes.len(), nodes.len(), |a, c| d[(nodes[a], nodes[c])])
}

/// `log I_G(b, D)` for decomposable `g`, as the product of clique constants
/// over the product of separator constants.
pub fn log_norm_const_decomposable<T: Real>(g: &Graph, params: &GWishartParams<T>) -> Result<T> {
    log_norm_const_decomposable_from(g, params, 0)
}

/// Same as [`log_norm_const_decomposable`], with the clique sequence taken
/// from the maximum cardinality search rooted at `start`.
pub fn log_norm_const_decomposable_from<T: Real>(
    g: &Graph,
    params: &GWishartParams<T>,
    start: usize,
) -> Result<T> {
    if g.p() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: g.p(),
        });
    }
    if g.p() == 0 {
        return Ok(T::zero());
    }
    let seq = decomposable::clique_sequence(g, start)?;
    let mut total = T::zero();
    for c in &seq.cliques {
        total += log_norm_const_complete(&principal(params.d(), c), params.b())?;
    }
    for s in &seq.separators {
        total -= log_norm_const_complete(&principal(params.d(), s), params.b())?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on `[0, hi]`.
    fn simpson(f: impl Fn(f64) -> f64, hi: f64, n: usize) -> f64 {
        let h = hi / n as f64;
        let inner: f64 = (1..n)
            .map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (f(0.0) + inner + f(hi)) * h / 3.0
    }

    /// `∫ t^a exp(-c t²) dt` over `t > 0`.
    fn radial(a: f64, c: f64) -> f64 {
        simpson(|t| t.powf(a) * (-c * t * t).exp(), 40.0 / c.sqrt(), 200_000)
    }

    #[test]
    fn multivariate_gamma_reduces_to_gamma() {
        assert!((log_multivariate_gamma(1, 2.7) - ln_gamma(2.7)).abs() < 1e-14);
        let two = 0.5 * std::f64::consts::PI.ln() + ln_gamma(3.0) + ln_gamma(2.5);
        assert!((log_multivariate_gamma(2, 3.0) - two).abs() < 1e-13);
    }

    #[test]
    fn one_dimensional_constant_matches_quadrature() {
        // ∫ k^{(b-2)/2} e^{-dk/2} dk with k = t².
        for (b, d) in [(3.0, 2.0), (3.0, 1.0), (4.5, 0.7), (10.0, 3.0)] {
            let integral = 2.0 * radial(b - 1.0, d / 2.0);
            let closed = log_norm_const_complete(&DMatrix::from_element(1, 1, d), b).unwrap();
            assert!((closed - integral.ln()).abs() < 1e-9, "b={b} d={d}");
        }
    }

    #[test]
    fn single_node_example_value() {
        let v = log_norm_const_complete(&DMatrix::from_element(1, 1, 2.0), 3.0).unwrap();
        assert!((v - ln_gamma(1.5)).abs() < 1e-14);
    }

    #[test]
    fn two_node_constant_matches_quadrature() {
        // With D = I and K = ΦᵀΦ the integral factorizes over φ11, φ12, φ22:
        // the Jacobian is 4 φ11² φ22 and det K = (φ11 φ22)².
        for b in [3.0, 5.5] {
            let off = (2.0 * std::f64::consts::PI).sqrt();
            let integral = 4.0 * radial(b, 0.5) * radial(b - 1.0, 0.5) * off;
            let closed = log_norm_const_complete(&DMatrix::<f64>::identity(2, 2), b).unwrap();
            assert!((closed - integral.ln()).abs() < 1e-9, "b={b}");
        }
    }

    #[test]
    fn scale_enters_through_determinant() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let b = 4.0;
        let shift = log_norm_const_complete(&d, b).unwrap()
            - log_norm_const_complete(&DMatrix::<f64>::identity(2, 2), b).unwrap();
        let expected = -(b + 1.0) / 2.0 * (2.0f64 - 0.25).ln();
        assert!((shift - expected).abs() < 1e-12);
    }

    #[test]
    fn decomposable_constant_is_product_over_cliques() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let params = GWishartParams::identity(3, 3.0).unwrap();
        let one = log_norm_const_complete(&DMatrix::<f64>::identity(1, 1), 3.0).unwrap();
        let two = log_norm_const_complete(&DMatrix::<f64>::identity(2, 2), 3.0).unwrap();
        let v = log_norm_const_decomposable(&g, &params).unwrap();
        assert!((v - (2.0 * two - one)).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_is_product_of_nodes() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.5]));
        let params = GWishartParams::new(3.0, d.clone()).unwrap();
        let v = log_norm_const_decomposable(&Graph::empty(3), &params).unwrap();
        let expected: f64 = (0..3)
            .map(|i| log_norm_const_complete(&DMatrix::from_element(1, 1, d[(i, i)]), 3.0).unwrap())
            .sum();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn cycle_is_rejected() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let params = GWishartParams::identity(4, 3.0).unwrap();
        assert!(matches!(
            log_norm_const_decomposable(&g, &params),
            Err(Error::NotDecomposable)
        ));
    }
}
