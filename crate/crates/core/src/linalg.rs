//! Thin helpers over dense `faer` complex matrices.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};

pub use faer::c64;

pub type CMat = Mat<c64>;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

/// `u† m u`: expresses `m` in the basis given by the columns of `u`.
pub fn to_basis(u: &CMat, m: &CMat) -> CMat {
    u.adjoint() * m * u
}

/// `u m u†`: maps `m` back from the basis given by the columns of `u`.
pub fn from_basis(u: &CMat, m: &CMat) -> CMat {
    u * m * u.adjoint()
}

pub fn trace(m: &CMat) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> c64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = nan_max(out, m[(i, j)].norm());
        }
    }
    out
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = nan_max(out, (a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

/// `max` that propagates NaN.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) }
}

/// `max |m - m†|`
pub fn hermiticity_error(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            out = nan_max(out, (m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// Max absolute row sum; bounds the spectral radius.
pub fn inf_norm(m: &CMat) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> Option<(Vec<f64>, CMat)> {
    let evd = m.self_adjoint_eigen(Side::Lower).ok()?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &CMat) -> Option<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).ok()
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn general_eigen(m: &CMat) -> Option<(Vec<c64>, CMat)> {
    let evd = m.eigen().ok()?;
    let values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    Some((values, evd.U().to_owned()))
}

pub fn inverse(m: &CMat) -> CMat {
    m.partial_piv_lu().inverse()
}

/// Row-major vectorization, `rho[(a, b)] -> v[a * n + b]`.
pub fn vectorize(rho: &CMat) -> CMat {
    let n = rho.nrows();
    Mat::from_fn(n * n, 1, |k, _| rho[(k / n, k % n)])
}

pub fn unvectorize(v: &CMat, n: usize) -> CMat {
    assert_eq!(v.nrows(), n * n);
    Mat::from_fn(n, n, |a, b| v[(a * n + b, 0)])
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub(crate) fn real(x: f64) -> c64 {
    c64::new(x, 0.0)
}

/// `s m` for real `s`.
pub fn scale(m: &CMat, s: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}
