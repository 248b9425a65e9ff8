//! Thin helpers over `faer` for the small dense complex systems used by the
//! graph solvers.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

static SEQUENTIAL: Once = Once::new();

/// Solvers parallelize over sweep points, so every factorization runs
/// single-threaded.
pub(crate) fn init() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    init();
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))
}

/// Operator (spectral) norm.
pub fn norm2(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Smallest singular value with its right singular vector.
pub fn min_singular_pair(m: &CMat) -> Result<(f64, Vec<c64>)> {
    init();
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let n = s.nrows();
    let mut best = 0;
    for i in 0..n {
        if s[i].re < s[best].re {
            best = i;
        }
    }
    let v = svd.V();
    let vec = (0..v.nrows()).map(|r| v[(r, best)]).collect();
    Ok((s[best].re, vec))
}

/// Right singular vectors belonging to singular values at or below `cutoff`.
pub fn null_vectors(m: &CMat, cutoff: f64) -> Result<Vec<Vec<c64>>> {
    init();
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    Ok((0..s.nrows())
        .filter(|&i| s[i].re <= cutoff)
        .map(|i| (0..v.nrows()).map(|r| v[(r, i)]).collect())
        .collect())
}

pub fn determinant(m: &CMat) -> c64 {
    init();
    if m.nrows() == 0 {
        return c(1.0, 0.0);
    }
    m.determinant()
}

/// Solves `m x = rhs` by partial-pivoting LU.
pub fn solve(m: &CMat, rhs: &[c64]) -> Vec<c64> {
    init();
    let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = m.partial_piv_lu().solve(&b);
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}

/// Solves `m X = rhs` for several right-hand sides with one factorization.
pub fn solve_many(m: &CMat, rhs: &CMat) -> CMat {
    init();
    m.partial_piv_lu().solve(rhs)
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    init();
    a * b
}

pub fn adjoint(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn transpose(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)])
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Eigen-decomposition of a real symmetric matrix; eigenvalues ascending,
/// eigenvectors as columns.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    init();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Sparse LU of an `n × n` matrix given as `(row, col, value)` triplets;
/// duplicate entries are summed.
pub(crate) fn sparse_lu<T>(n: usize, mut entries: Vec<(usize, usize, T)>) -> Result<Lu<usize, T>>
where
    T: faer::traits::ComplexField + Copy + std::ops::AddAssign,
{
    init();
    entries.sort_unstable_by_key(|e| (e.1, e.0));
    let mut merged: Vec<Triplet<usize, usize, T>> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match merged.last_mut() {
            Some(t) if t.row == r && t.col == c => t.val += v,
            _ => merged.push(Triplet::new(r, c, v)),
        }
    }
    let m = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &merged)
        .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
    m.sp_lu()
        .map_err(|e| Error::Numerical(format!("sparse LU failed: {e:?}")))
}
