//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn cholesky<T: Real>(a: &DMatrix<T>) -> Result<Cholesky<T, Dyn>> {
    Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)
}

/// Upper-triangular `U` with `a = UᵀU`.
pub fn upper_cholesky<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(cholesky(a)?.l().transpose())
}

pub fn spd_inverse<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(cholesky(a)?.inverse())
}

pub fn log_det_spd<T: Real>(a: &DMatrix<T>) -> Result<T> {
    let chol = cholesky(a)?;
    let l = chol.l_dirty();
    Ok((0..a.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].ln()) * T::of(2.0))
}

/// `trace(a b)` for symmetric `a`, `b`, as an elementwise sum.
pub fn trace_inner<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn is_symmetric<T: Real>(a: &DMatrix<T>, tol: T) -> bool {
    a.is_square() && (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol))
}

pub(crate) fn symmetrize<T: Real>(a: &mut DMatrix<T>) {
    let n = a.nrows();
    let half = T::of(0.5);
    for i in 0..n {
        for j in 0..i {
            let v = (a[(i, j)] + a[(j, i)]) * half;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}
