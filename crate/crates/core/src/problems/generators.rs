use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{oracle_solve, InclusionProblem, SolutionHint};
use crate::linalg::{gaussian_matrix, gaussian_vector, random_orthogonal, Matrix};
use crate::operators::{CocoerciveOp, MaxMonotoneOp};
use crate::{Error, Point, Result};

/// Tolerance of the oracle runs made by the generators.
const GENERATOR_ORACLE_TOL: f64 = 1e-12;
/// Singular values of generated data matrices lie in `[1, 10]`, so the
/// quadratic `DᵀD` has condition number at most 100.
const SINGULAR_MIN: f64 = 1.0;
const SINGULAR_MAX: f64 = 10.0;

/// `U diag(s) Vᵀ` with random orthogonal factors and `s` spread over
/// `[SINGULAR_MIN, SINGULAR_MAX]` (both ends attained when `d ≥ 2`).
fn conditioned_matrix(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let u = random_orthogonal(rng, d);
    let v = random_orthogonal(rng, d);
    let mut s: Vec<f64> = (0..d).map(|_| rng.random_range(SINGULAR_MIN..=SINGULAR_MAX)).collect();
    if d >= 2 {
        s[0] = SINGULAR_MIN;
        s[1] = SINGULAR_MAX;
    }
    u * Matrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Box-constrained lasso `min ½‖Dx − b‖² + λ‖x‖₁ s.t. lo ≤ x ≤ hi` as
/// `A = ∂(λ‖·‖₁)`, `B = ∇½‖D· − b‖²`, `C = N_[lo,hi]`.
pub fn box_lasso_from_data(d_mat: &Matrix, b: &DVector<f64>, weight: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<InclusionProblem> {
    if d_mat.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: d_mat.nrows(),
            got: b.len(),
        });
    }
    let dim = d_mat.ncols();
    let q = symmetrize(d_mat.transpose() * d_mat);
    let offset = -(d_mat.transpose() * b);
    InclusionProblem::new(
        MaxMonotoneOp::l1(dim, weight)?,
        CocoerciveOp::quadratic_gradient(q, offset)?,
        MaxMonotoneOp::normal_cone_box(lo, hi)?,
    )
}

/// Seeded box-lasso instance with a certified reference solution.
///
/// `D` has condition number at most 10, the box is `[0, hi]` with
/// `hi ∈ [0.3, 1.2]`, and the planted signal has roughly `density·d`
/// nonzeros of either sign, so the solution has coordinates on both faces
/// of the box. If the oracle returns `x* = 0` the weight λ is halved and
/// the instance regenerated.
pub fn gen_box_lasso(d: usize, density: f64, seed: u64) -> Result<InclusionProblem> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!("density must be in (0, 1], got {density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d_mat = conditioned_matrix(&mut rng, d);
    let mut signal = DVector::zeros(d);
    for i in 0..d {
        if rng.random_bool(density) {
            let mag: f64 = rng.random_range(0.5..2.0);
            signal[i] = if rng.random_bool(0.5) { mag } else { -mag };
        }
    }
    // The box starts at 0, so an all-nonpositive signal would solve to x* = 0.
    if signal.iter().all(|&v| v <= 0.0) {
        signal[rng.random_range(0..d)] = 1.5;
    }
    let noise = gaussian_vector(&mut rng, d) * 0.1;
    let b = &d_mat * &signal + noise;
    let hi: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..1.2)).collect();
    let lo = vec![0.0; d];
    let mut weight = 0.05 * (d_mat.transpose() * &b).amax();

    for _ in 0..32 {
        let problem = box_lasso_from_data(&d_mat, &b, weight, lo.clone(), hi.clone())?;
        let solution = oracle_solve(&problem, GENERATOR_ORACLE_TOL)?;
        if solution.x_star.amax() > 1e-8 {
            return problem.with_hint(solution.hint());
        }
        weight *= 0.5;
    }
    Err(Error::OracleFailed("could not generate a box-lasso instance with nonzero solution".into()))
}

/// Two affine subspaces through a planted point `p`: `A = N_{E₁x=E₁p}`,
/// `C = N_{E₂x=E₂p}`, `B = 0`. The certificate is `(p, 0)`.
pub fn gen_affine_feasibility(d: usize, seed: u64) -> Result<InclusionProblem> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m1 = (d / 2).max(1);
    let m2 = (d - m1).max(1);
    let planted = gaussian_vector(&mut rng, d);
    let e1 = gaussian_matrix(&mut rng, m1, d);
    let e2 = gaussian_matrix(&mut rng, m2, d);
    let r1 = &e1 * &planted;
    let r2 = &e2 * &planted;
    let problem = InclusionProblem::new(
        MaxMonotoneOp::normal_cone_affine(e1, r1)?,
        CocoerciveOp::zero(d)?,
        MaxMonotoneOp::normal_cone_affine(e2, r2)?,
    )?;
    problem.with_hint(SolutionHint {
        x_star: Point::from_dvector(planted),
        c_element: Point::zeros(d),
    })
}

/// `A = M x + q` (monotone, not necessarily symmetric), `B = ∇½xᵀQx`,
/// `C = N_[lo,hi]`.
pub fn monotone_affine_from_data(
    m: Matrix,
    q: DVector<f64>,
    b_mat: Matrix,
    lo: Vec<f64>,
    hi: Vec<f64>,
) -> Result<InclusionProblem> {
    let d = m.nrows();
    InclusionProblem::new(
        MaxMonotoneOp::affine_monotone(m, q)?,
        CocoerciveOp::quadratic_gradient(b_mat, DVector::zeros(d))?,
        MaxMonotoneOp::normal_cone_box(lo, hi)?,
    )
}

/// Seeded monotone-affine instance with a certified reference solution.
///
/// `M = (1 − f)·P + f·S` with `P` PSD and `S` skew, both of unit Frobenius
/// norm, and `f = skew_fraction`. `B` is a quadratic gradient with
/// eigenvalues in `[1, 10]`, which makes the inclusion strongly monotone.
pub fn gen_monotone_affine(d: usize, skew_fraction: f64, seed: u64) -> Result<InclusionProblem> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&skew_fraction) {
        return Err(Error::InvalidInput(format!("skew_fraction must be in [0, 1], got {skew_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, d, d);
    let psd = symmetrize(&g * g.transpose());
    let psd = &psd / psd.norm().max(f64::MIN_POSITIVE);
    let h = gaussian_matrix(&mut rng, d, d);
    let skew = (&h - h.transpose()) * 0.5;
    let skew_norm = skew.norm();
    let skew = if skew_norm > 0.0 { skew / skew_norm } else { skew };
    let m = psd * (1.0 - skew_fraction) + skew * skew_fraction;

    let u = random_orthogonal(&mut rng, d);
    let eig: Vec<f64> = (0..d).map(|_| rng.random_range(1.0..=10.0)).collect();
    let b_mat = symmetrize(&u * Matrix::from_diagonal(&DVector::from_vec(eig)) * u.transpose());

    let q = gaussian_vector(&mut rng, d) * 5.0;
    let hi: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.0)).collect();
    let lo: Vec<f64> = hi.iter().map(|h| -h).collect();
    let problem = monotone_affine_from_data(m, q, b_mat, lo, hi)?;
    let solution = oracle_solve(&problem, GENERATOR_ORACLE_TOL)?;
    problem.with_hint(solution.hint())
}
