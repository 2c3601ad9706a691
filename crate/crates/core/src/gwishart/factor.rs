use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::scalar::Real;

/// Symmetric positive-definite matrix whose off-diagonal zeros follow a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionMatrix<T: Real> {
    k: DMatrix<T>,
}

impl<T: Real> PrecisionMatrix<T> {
    /// Wraps `k` after checking symmetry, positive definiteness and the zero
    /// pattern of `graph` at tolerance `tol`.
    pub fn new(k: DMatrix<T>, graph: &Graph, tol: T) -> Result<Self> {
        if k.nrows() != graph.p() || !k.is_square() {
            return Err(Error::DimensionMismatch {
                expected: graph.p(),
                found: k.nrows(),
            });
        }
        if !linalg::is_symmetric(&k, tol) {
            return Err(Error::InvalidConfig(
                "precision matrix is not symmetric".into(),
            ));
        }
        linalg::cholesky(&k)?;
        let out = Self { k };
        if out.max_off_pattern(graph) > tol {
            return Err(Error::InvalidConfig(
                "precision matrix does not match the graph's zero pattern".into(),
            ));
        }
        Ok(out)
    }

    pub(crate) fn from_raw(k: DMatrix<T>) -> Self {
        Self { k }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            k: DMatrix::identity(p, p),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.k
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// Largest `|K_ij|` over non-edges `i != j` of `graph`.
    pub fn max_off_pattern(&self, graph: &Graph) -> T {
        let p = self.dim();
        let mut worst = T::zero();
        for i in 0..p {
            for j in i + 1..p {
                if !graph.has_edge(i, j) {
                    worst = worst.max(self.k[(i, j)].abs());
                }
            }
        }
        worst
    }
}

/// Upper-triangular factor `Φ` with `K = ΦᵀΦ`, tied to a graph.
///
/// The free elements are the diagonal and the edge positions `(i, j)`,
/// `i < j`; every other upper entry is fixed by completion so that `K` has a
/// zero at each non-edge.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyFactor<T: Real> {
    phi: DMatrix<T>,
    graph: Graph,
}

impl<T: Real> CholeskyFactor<T> {
    /// Factor of the identity precision matrix.
    pub fn identity(graph: Graph) -> Self {
        let p = graph.p();
        Self {
            phi: DMatrix::identity(p, p),
            graph,
        }
    }

    /// Factorizes `k` and re-completes, so the result satisfies the zero
    /// pattern of `graph` to rounding even if `k` only does approximately.
    pub fn from_precision(k: &DMatrix<T>, graph: Graph) -> Result<Self> {
        let phi = linalg::upper_cholesky(k)?;
        Self::from_upper(phi, graph)
    }

    /// Takes the free elements of `phi` (any upper-triangular matrix with a
    /// positive diagonal) and completes the rest for `graph`.
    pub fn from_upper(mut phi: DMatrix<T>, graph: Graph) -> Result<Self> {
        if phi.nrows() != graph.p() || !phi.is_square() {
            return Err(Error::DimensionMismatch {
                expected: graph.p(),
                found: phi.nrows(),
            });
        }
        if let Some(i) = (0..graph.p()).find(|&i| !(phi[(i, i)] > T::zero())) {
            return Err(Error::NonPositiveDiagonal(i));
        }
        complete_in_place(&mut phi, &graph);
        Ok(Self { phi, graph })
    }

    pub fn phi(&self) -> &DMatrix<T> {
        &self.phi
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.phi[(i, j)]
    }

    /// Whether `(i, j)` (upper triangle) is a free element.
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        i == j || self.graph.has_edge(i, j)
    }

    /// `K = ΦᵀΦ`.
    pub fn precision(&self) -> DMatrix<T> {
        let mut k = self.phi.tr_mul(&self.phi);
        linalg::symmetrize(&mut k);
        k
    }

    pub fn to_precision(&self) -> PrecisionMatrix<T> {
        PrecisionMatrix::from_raw(self.precision())
    }

    /// `log det K = 2 Σ log Φ_ii`.
    pub fn log_det(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.phi[(i, i)].ln()) * T::of(2.0)
    }

    /// Keeps the free elements shared with `graph`, overwrites the listed
    /// positions, and completes for `graph`.
    pub fn with_graph(&self, graph: Graph, overrides: &[((usize, usize), T)]) -> Self {
        let mut phi = self.phi.clone();
        for &((i, j), v) in overrides {
            phi[(i, j)] = v;
        }
        complete_in_place(&mut phi, &graph);
        Self { phi, graph }
    }
}

/// Fills the non-free upper entries row by row with
/// `Φ_ij = -(Σ_{k<i} Φ_ki Φ_kj) / Φ_ii`, which zeroes `K_ij` at every non-edge.
/// Each such entry depends only on rows above `i`, which are already final.
pub fn complete_in_place<T: Real>(phi: &mut DMatrix<T>, graph: &Graph) {
    let p = graph.p();
    for i in 0..p {
        for j in 0..i {
            phi[(i, j)] = T::zero();
        }
        let diag = phi[(i, i)];
        for j in i + 1..p {
            if graph.has_edge(i, j) {
                continue;
            }
            let mut s = T::zero();
            for k in 0..i {
                s += phi[(k, i)] * phi[(k, j)];
            }
            phi[(i, j)] = -s / diag;
        }
    }
}

/// Builds the factor from exactly the free elements of `g`.
pub fn complete_cholesky<T: Real>(
    free_values: &HashMap<(usize, usize), T>,
    g: &Graph,
) -> Result<CholeskyFactor<T>> {
    let p = g.p();
    for &(i, j) in free_values.keys() {
        if i > j || j >= p || (i != j && !g.has_edge(i, j)) {
            return Err(Error::NotFreeElement(i, j));
        }
    }
    let mut phi = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            if i == j || g.has_edge(i, j) {
                let v = *free_values
                    .get(&(i, j))
                    .ok_or(Error::MissingFreeElement(i, j))?;
                if i == j && !(v > T::zero()) {
                    return Err(Error::NonPositiveDiagonal(i));
                }
                phi[(i, j)] = v;
            }
        }
    }
    complete_in_place(&mut phi, g);
    Ok(CholeskyFactor {
        phi,
        graph: g.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_map(pairs: &[((usize, usize), f64)]) -> HashMap<(usize, usize), f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn complete_graph_is_unchanged() {
        let g = Graph::complete(3);
        let vals = free_map(&[
            ((0, 0), 1.5),
            ((0, 1), 0.3),
            ((0, 2), -0.7),
            ((1, 1), 2.0),
            ((1, 2), 0.1),
            ((2, 2), 0.9),
        ]);
        let f = complete_cholesky(&vals, &g).unwrap();
        for (&(i, j), &v) in &vals {
            assert_eq!(f.get(i, j), v);
        }
    }

    #[test]
    fn chain_completion_zeroes_corner() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let vals = free_map(&[
            ((0, 0), 1.2),
            ((0, 1), 0.4),
            ((1, 1), 0.8),
            ((1, 2), -0.5),
            ((2, 2), 1.1),
        ]);
        let f = complete_cholesky(&vals, &g).unwrap();
        // K_02 = Φ00 Φ02 = 0 forces Φ02 = 0; K_13 is free.
        assert_eq!(f.get(0, 2), 0.0);
        let k = f.precision();
        assert!(k[(0, 2)].abs() < 1e-12);
        assert!(k[(1, 2)].abs() > 0.1);
    }

    #[test]
    fn missing_and_stray_entries() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let vals = free_map(&[((0, 0), 1.0), ((1, 1), 1.0)]);
        assert!(matches!(
            complete_cholesky(&vals, &g),
            Err(Error::MissingFreeElement(0, 1))
        ));
        let vals = free_map(&[((0, 0), 1.0), ((1, 1), 1.0), ((0, 1), 0.0)]);
        assert!(complete_cholesky(&vals, &Graph::empty(2)).is_err());
        let vals = free_map(&[((0, 0), -1.0), ((1, 1), 1.0), ((0, 1), 0.0)]);
        assert!(matches!(
            complete_cholesky(&vals, &g),
            Err(Error::NonPositiveDiagonal(0))
        ));
    }

    #[test]
    fn round_trip_through_patterned_precision() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut k = DMatrix::<f64>::identity(4, 4) * 2.0;
        for &(i, j) in &g.edges() {
            k[(i, j)] = 0.6;
            k[(j, i)] = 0.6;
        }
        let f = CholeskyFactor::from_precision(&k, g.clone()).unwrap();
        let free: HashMap<_, _> = (0..4)
            .flat_map(|i| (i..4).map(move |j| (i, j)))
            .filter(|&(i, j)| i == j || g.has_edge(i, j))
            .map(|(i, j)| ((i, j), f.get(i, j)))
            .collect();
        let again = complete_cholesky(&free, &g).unwrap();
        assert!((again.precision() - k).abs().max() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut phi = DMatrix::<f32>::identity(3, 3);
        phi[(0, 1)] = 0.5;
        phi[(1, 2)] = -0.25;
        let f = CholeskyFactor::from_upper(phi, g.clone()).unwrap();
        assert!(f.to_precision().max_off_pattern(&g) < 1e-6);
    }
}
