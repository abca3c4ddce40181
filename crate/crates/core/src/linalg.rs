//! Dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are `faer::Mat<c64>`. Superoperators act on column-major
//! vectorised density matrices: entry `(i, j)` of a `d x d` operator lives at
//! index `i + j * d`, so that `vec(A X B) = (B^T ⊗ A) vec(X)`.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::error::{EngineError, Result};

pub use faer::c64;

/// Dense complex matrix.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

#[inline]
pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { ZERO })
}

pub fn dagger(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: MatRef<'_, c64>) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: MatRef<'_, c64>) -> CMat {
    a.conjugate().to_owned()
}

pub fn scale(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a.kron(b)
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Expectation value `tr(O rho)`.
pub fn expect(op: &CMat, rho: &CMat) -> c64 {
    trace_product(op.as_ref(), rho.as_ref())
}

/// Largest entrywise modulus.
pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    max_abs((a - b).as_ref())
}

pub fn hermitian_part(a: &CMat) -> CMat {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn is_diagonal(a: &CMat, tol: f64) -> bool {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j && a[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, ascending.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| EngineError::Numerical(format!("hermitian eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    Ok(eigh(a)?.0)
}

/// Eigenvalues of a general square matrix.
pub fn eigvals(a: &CMat) -> Result<Vec<c64>> {
    a.eigenvalues()
        .map_err(|e| EngineError::Numerical(format!("eigensolver: {e:?}")))
}

/// Eigenvalues and right eigenvectors of a general square matrix.
pub fn eig(a: &CMat) -> Result<(Vec<c64>, CMat)> {
    let evd = a
        .eigen()
        .map_err(|e| EngineError::Numerical(format!("eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Full SVD `A = U S V^H`, singular values non-increasing.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let s = a.svd().map_err(|e| EngineError::Numerical(format!("svd: {e:?}")))?;
    let vals = s.S().column_vector().iter().map(|x| x.re).collect();
    Ok((s.U().to_owned(), vals, s.V().to_owned()))
}

/// Orthonormal basis of the right null space, using a singular-value cut
/// relative to the largest singular value.
pub fn null_space(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let (_, s, v) = svd(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let n = a.ncols();
    let rank = s.iter().filter(|&&x| x > rel_tol * smax.max(f64::MIN_POSITIVE)).count();
    Ok(v.subcols(rank, n - rank).to_owned())
}

/// Solve `A X = B` by partial-pivot LU.
pub fn solve(a: &CMat, b: &CMat) -> CMat {
    a.partial_piv_lu().solve(b)
}

/// Inverse by partial-pivot LU.
pub fn inverse(a: &CMat) -> CMat {
    solve(a, &identity(a.nrows()))
}

/// Column-major vectorisation of a square matrix.
pub fn vectorize(a: &CMat) -> CMat {
    let d = a.nrows();
    Mat::from_fn(d * a.ncols(), 1, |k, _| a[(k % d, k / d)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: MatRef<'_, c64>, d: usize) -> CMat {
    assert_eq!(v.nrows(), d * d, "vector length is not a square");
    Mat::from_fn(d, d, |i, j| v[(i + j * d, 0)])
}

/// Apply a superoperator matrix to an operator.
pub fn apply_superop(superop: &CMat, x: &CMat) -> CMat {
    let v = superop * vectorize(x);
    unvectorize(v.as_ref(), x.nrows())
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale(a.as_ref(), re(0.5f64.powi(s)));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let combo = |c6: f64, c4: f64, c2: f64, c0: f64| {
        scale(a6.as_ref(), re(c6))
            + scale(a4.as_ref(), re(c4))
            + scale(a2.as_ref(), re(c2))
            + scale(id.as_ref(), re(c0))
    };
    let u = &a * (&a6 * combo(B[13], B[11], B[9], 0.0) + combo(B[7], B[5], B[3], B[1]));
    let v = &a6 * combo(B[12], B[10], B[8], 0.0) + combo(B[6], B[4], B[2], B[0]);
    let mut r = solve(&(&v - &u), &(&v + &u));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Trace distance `½ ‖A − B‖₁` between Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    let diff = a - b;
    Ok(0.5 * eigvalsh(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    Ok(eigvalsh(a)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Conjugation `U^H A U`.
pub fn sandwich(u: &CMat, a: &CMat) -> CMat {
    u.adjoint() * a * u
}
