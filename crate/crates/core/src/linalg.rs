//! Thin helpers over `faer` dense matrices.

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64 as C;

use crate::error::{Result, SenseError};

pub type CMat = Mat<C>;
pub type RMat = Mat<f64>;

pub(crate) const CZERO: C = C::new(0.0, 0.0);
pub(crate) const CONE: C = C::new(1.0, 0.0);

/// Eigenpairs of a Hermitian matrix, ascending, each eigenvector rescaled so
/// its largest-magnitude component is real and positive (first index wins
/// ties within 1e-12).
pub fn eigh(m: MatRef<'_, C>) -> Result<(Vec<f64>, CMat)> {
    let e = m.self_adjoint_eigen(Side::Lower).map_err(|_| SenseError::Eigen)?;
    let n = m.nrows();
    let vals: Vec<f64> = (0..n).map(|i| e.S()[i].re).collect();
    let mut u = e.U().to_owned();
    for c in 0..n {
        let mut best = 0;
        let mut mag = -1.0;
        for r in 0..n {
            let a = u[(r, c)].norm();
            if a > mag + 1e-12 {
                mag = a;
                best = r;
            }
        }
        if mag > 0.0 {
            let ph = u[(best, c)].conj() / mag;
            for r in 0..n {
                u[(r, c)] *= ph;
            }
        }
    }
    Ok((vals, u))
}

/// Eigenpairs of a real symmetric matrix, ascending.
pub fn eigh_real(m: MatRef<'_, f64>) -> Result<(Vec<f64>, RMat)> {
    let e = m.self_adjoint_eigen(Side::Lower).map_err(|_| SenseError::Eigen)?;
    let n = m.nrows();
    let vals: Vec<f64> = (0..n).map(|i| e.S()[i]).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigvalsh(m: MatRef<'_, C>) -> Result<Vec<f64>> {
    let v = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| SenseError::Eigen)?;
    Ok(v)
}

pub fn mul<A, B>(a: MatRef<'_, A>, b: MatRef<'_, B>) -> CMat
where
    A: Conjugate<Canonical = C>,
    B: Conjugate<Canonical = C>,
{
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, CONE, Par::Seq);
    out
}

pub fn to_complex(m: MatRef<'_, f64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| C::new(m[(i, j)], 0.0))
}

pub fn max_abs(m: MatRef<'_, C>) -> f64 {
    let mut d: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            d = d.max(m[(i, j)].norm());
        }
    }
    d
}

pub fn max_abs_diff(a: MatRef<'_, C>, b: MatRef<'_, C>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut d: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}

pub fn trace(m: MatRef<'_, C>) -> C {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Largest deviation from Hermiticity.
pub fn hermitian_defect(m: MatRef<'_, C>) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

/// `u diag(f(lambda)) u^dagger` for Hermitian input.
pub fn hermitian_function(m: MatRef<'_, C>, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, u) = eigh(m)?;
    let n = m.nrows();
    let scaled = CMat::from_fn(n, n, |i, j| u[(i, j)] * f(vals[j]));
    Ok(mul(scaled.as_ref(), u.adjoint()))
}
