//! Thin helpers over `faer` for the dense complex algebra used throughout.

use faer::{Mat, MatRef, Side};

use crate::{Error, Result, C64};

pub type CMat = Mat<C64>;

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn scaled_identity(n: usize, s: f64) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn scale(m: MatRef<'_, C64>, s: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

/// Elementwise complex conjugate (no transpose).
pub fn conj(m: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

pub fn frobenius(m: MatRef<'_, C64>) -> f64 {
    m.norm_l2()
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn mat_vec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![C64::new(0.0, 0.0); m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * vj;
        }
    }
    out
}

/// `m† v`
pub fn adjoint_vec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.nrows(), v.len());
    (0..m.ncols())
        .map(|j| {
            let col = m.col(j);
            let mut acc = C64::new(0.0, 0.0);
            for (i, &vi) in v.iter().enumerate() {
                acc += col[i].conj() * vi;
            }
            acc
        })
        .collect()
}

/// `mᵀ v`
pub fn transpose_vec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.nrows(), v.len());
    (0..m.ncols())
        .map(|j| {
            let col = m.col(j);
            let mut acc = C64::new(0.0, 0.0);
            for (i, &vi) in v.iter().enumerate() {
                acc += col[i] * vi;
            }
            acc
        })
        .collect()
}

/// Returns `(m + m†)/2` together with the relative anti-Hermitian residual.
pub fn hermitian_part(m: MatRef<'_, C64>) -> (CMat, f64) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut diff = 0.0;
    let mut total = 0.0;
    let h = Mat::from_fn(n, n, |i, j| {
        let a = m[(i, j)];
        let b = m[(j, i)].conj();
        diff += (a - b).norm_sqr();
        total += a.norm_sqr();
        (a + b) * 0.5
    });
    let residual = if total > 0.0 { (diff / total).sqrt() } else { 0.0 };
    (h, residual)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Columns of the returned matrix are the corresponding unit eigenvectors.
pub fn hermitian_eigen(m: MatRef<'_, C64>) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order.
    let values: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((values, vectors))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues sorted descending.
pub fn symmetric_eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((values, vectors))
}

pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
