use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Order of the basis (cubic splines).
pub const ORDER: usize = 4;

/// Clamped knot vector for `p` cubic B-splines on `[lo, hi]` with equally
/// spaced interior knots.
pub fn clamped_knots(lo: f64, hi: f64, p: usize) -> Vec<f64> {
    let spans = p - ORDER + 1;
    let h = (hi - lo) / spans as f64;
    let mut knots = vec![lo; ORDER];
    knots.extend((1..spans).map(|k| lo + k as f64 * h));
    knots.extend(std::iter::repeat_n(hi, ORDER));
    knots
}

/// Values of the `ORDER` basis functions that are non-zero at `x`, along with
/// the index of the first one.
fn nonzero_basis(knots: &[f64], p: usize, x: f64) -> (usize, [f64; ORDER]) {
    let degree = ORDER - 1;
    // knot span `mu` with knots[mu] <= x < knots[mu + 1]; the right end
    // belongs to the last span
    let mu = if x >= knots[p] {
        p - 1
    } else {
        let upper = knots.partition_point(|&k| k <= x);
        (upper - 1).clamp(degree, p - 1)
    };
    let mut values = [0.0; ORDER];
    values[0] = 1.0;
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    for j in 1..=degree {
        left[j] = x - knots[mu + 1 - j];
        right[j] = knots[mu + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom > 0.0 { values[r] / denom } else { 0.0 };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    (mu - degree, values)
}

/// `r x p` design matrix of `p` clamped cubic B-splines evaluated on `grid`.
///
/// Rows sum to one and each row has at most four non-zero entries.
pub fn bspline_design<T: Real>(grid: &[f64], p: usize) -> Result<DMatrix<T>> {
    let r = grid.len();
    if p < ORDER {
        return Err(Error::GridTooCoarse(format!(
            "need at least {ORDER} basis functions, got {p}"
        )));
    }
    if r <= p {
        return Err(Error::GridTooCoarse(format!(
            "{r} grid points cannot support {p} basis functions"
        )));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    let knots = clamped_knots(grid[0], grid[r - 1], p);
    let mut omega = DMatrix::<T>::zeros(r, p);
    for (l, &x) in grid.iter().enumerate() {
        let (first, values) = nonzero_basis(&knots, p, x);
        for (k, v) in values.iter().enumerate() {
            omega[(l, first + k)] = T::of(*v);
        }
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cox_de_boor(knots: &[f64], i: usize, k: usize, x: f64, last: bool) -> f64 {
        if k == 1 {
            let inside = knots[i] <= x && x < knots[i + 1];
            let right_end = last && x == knots[i + 1] && knots[i] < knots[i + 1];
            return if inside || right_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + k - 1] - knots[i];
        if d1 > 0.0 {
            v += (x - knots[i]) / d1 * cox_de_boor(knots, i, k - 1, x, last);
        }
        let d2 = knots[i + k] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + k] - x) / d2 * cox_de_boor(knots, i + 1, k - 1, x, last);
        }
        v
    }

    fn grid(r: usize) -> Vec<f64> {
        (0..r).map(|i| 400.0 + 2.5 * i as f64).collect()
    }

    #[test]
    fn partition_of_unity() {
        let g = grid(235);
        let omega: DMatrix<f64> = bspline_design(&g, 40).unwrap();
        for row in omega.row_iter() {
            assert!((row.sum() - 1.0).abs() <= 1e-10);
            assert!(row.iter().filter(|&&v| v != 0.0).count() <= ORDER);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn matches_recursive_definition() {
        let g = grid(60);
        let p = 9;
        let omega: DMatrix<f64> = bspline_design(&g, p).unwrap();
        let knots = clamped_knots(g[0], g[59], p);
        let mut points: Vec<f64> = g.clone();
        points.extend(knots.iter().copied());
        for &x in &points {
            let last = x == g[59];
            let direct: Vec<f64> = (0..p)
                .map(|j| cox_de_boor(&knots, j, ORDER, x, last && j == p - 1))
                .collect();
            let (first, values) = nonzero_basis(&knots, p, x);
            for j in 0..p {
                let fast = if (first..first + ORDER).contains(&j) {
                    values[j - first]
                } else {
                    0.0
                };
                assert!(
                    (fast - direct[j]).abs() < 1e-12,
                    "x={x} j={j}: {fast} vs {}",
                    direct[j]
                );
            }
        }
        assert!((omega[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((omega[(59, p - 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_is_banded() {
        let omega: DMatrix<f64> = bspline_design(&grid(100), 12).unwrap();
        for j in 0..12 {
            let rows: Vec<usize> = (0..100).filter(|&l| omega[(l, j)] != 0.0).collect();
            let span = rows.last().unwrap() - rows.first().unwrap();
            assert_eq!(rows.len(), span + 1);
            // support covers at most ORDER knot spans of 100 / 9 points each
            assert!(span <= ORDER * 100 / 9 + 1);
        }
    }

    #[test]
    fn constant_curve_is_reproduced() {
        let omega: DMatrix<f64> = bspline_design(&grid(50), 8).unwrap();
        let y = nalgebra::DVector::from_element(50, 3.7);
        let beta = (omega.transpose() * &omega)
            .cholesky()
            .unwrap()
            .solve(&(omega.transpose() * &y));
        for b in beta.iter() {
            assert!((b - 3.7).abs() < 1e-10);
        }
        assert!(((&omega * beta) - y).amax() < 1e-10);
    }

    #[test]
    fn coarse_grids_rejected() {
        assert!(matches!(
            bspline_design::<f64>(&grid(10), 3),
            Err(Error::GridTooCoarse(_))
        ));
        assert!(matches!(
            bspline_design::<f64>(&grid(10), 10),
            Err(Error::GridTooCoarse(_))
        ));
        assert!(bspline_design::<f64>(&[0.0, 1.0, 1.0, 2.0, 3.0, 4.0], 4).is_err());
    }
}
