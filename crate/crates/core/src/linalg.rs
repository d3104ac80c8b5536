//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative tolerance of the power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-10;
/// Shrink applied to `1/λ_max` so a declared β is never optimistic.
pub const BETA_SAFETY: f64 = 1.0 - 1e-8;

/// Builds a matrix from row-major rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::InvalidInput("matrix must have at least one row".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("matrix rows must be non-empty and equal length".into()));
    }
    let m = Matrix::from_row_iterator(nrows, ncols, rows.iter().flat_map(|r| r.iter().copied()));
    ensure_finite_matrix(&m)?;
    Ok(m)
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn ensure_finite_matrix(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub fn ensure_square(m: &Matrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "expected a {dim}x{dim} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = 1.0 + m.amax();
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}

/// Smallest eigenvalue of the symmetric part `(M + Mᵀ)/2`.
pub fn min_sym_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopped
/// when the Rayleigh quotient changes by less than `tol` relatively.
pub fn lambda_max_power(q: &Matrix, tol: f64, max_iter: usize) -> f64 {
    let n = q.nrows();
    if q.amax() == 0.0 {
        return 0.0;
    }
    // Deterministic, generic start: not orthogonal to any eigenvector for
    // the matrices we generate.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.7071).sin());
    v /= v.norm();
    let mut rho = v.dot(&(q * &v));
    for _ in 0..max_iter {
        let w = q * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / nw;
        let next = v.dot(&(q * &v));
        let done = (next - rho).abs() <= tol * next.abs();
        rho = next;
        if done {
            break;
        }
    }
    rho
}

/// Solves `m x = rhs` by LU with partial pivoting.
pub fn lu_solve(m: &Matrix, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::NumericalFailure("singular linear system".into()))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-like random orthogonal matrix from the QR factorization of a
/// Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
