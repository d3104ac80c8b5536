use nalgebra::{DVector, Dyn, LU};

use crate::linalg::{ensure_finite_matrix, ensure_square, is_symmetric, min_sym_eigenvalue, Matrix};
use crate::{Error, Point, Result};

/// Tolerance used when validating PSD / monotone matrix parameters.
const MATRIX_CHECK_TOL: f64 = 1e-10;

/// The closed-form families of maximal monotone operators.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneKind {
    /// `A = 0`; the resolvent is the identity.
    Zero,
    /// Subdifferential of `λ‖x‖₁`.
    L1 { weight: f64 },
    /// Normal cone of the box `[lo, hi]`.
    NormalConeBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Normal cone of the affine set `{x : E x = e}`.
    NormalConeAffine { matrix: Matrix, rhs: DVector<f64> },
    /// Normal cone of the singleton `{p}`.
    NormalConeSingleton { point: Point },
    /// Gradient `Q x + q` of a convex quadratic, treated as a monotone operator.
    QuadraticGradient { matrix: Matrix, offset: DVector<f64> },
    /// Affine monotone map `M x + q` with `M + Mᵀ ⪰ 0`.
    AffineMonotone { matrix: Matrix, offset: DVector<f64> },
}

impl MonotoneKind {
    pub fn name(&self) -> &'static str {
        match self {
            MonotoneKind::Zero => "zero",
            MonotoneKind::L1 { .. } => "l1-subdifferential",
            MonotoneKind::NormalConeBox { .. } => "normal-cone-box",
            MonotoneKind::NormalConeAffine { .. } => "normal-cone-affine",
            MonotoneKind::NormalConeSingleton { .. } => "normal-cone-singleton",
            MonotoneKind::QuadraticGradient { .. } => "quadratic-gradient-as-monotone",
            MonotoneKind::AffineMonotone { .. } => "affine-monotone",
        }
    }
}

/// A maximal monotone operator on `R^d`, represented by its resolvent.
///
/// Instances are immutable; the pseudo-inverse needed by affine normal cones
/// is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMonotoneOp {
    kind: MonotoneKind,
    dim: usize,
    // E⁺ for NormalConeAffine.
    pinv: Option<Matrix>,
}

impl MaxMonotoneOp {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::raw(MonotoneKind::Zero, dim))
    }

    pub fn l1(dim: usize, weight: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidInput(format!("l1 weight must be >= 0, got {weight}")));
        }
        Ok(Self::raw(MonotoneKind::L1 { weight }, dim))
    }

    pub fn normal_cone_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len())?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite()) || l > h {
                return Err(Error::InvalidInput(format!("invalid box bounds [{l}, {h}]")));
            }
        }
        let dim = lo.len();
        Ok(Self::raw(MonotoneKind::NormalConeBox { lo, hi }, dim))
    }

    /// Normal cone of `{x : E x = e}`. The set must be nonempty.
    pub fn normal_cone_affine(matrix: Matrix, rhs: DVector<f64>) -> Result<Self> {
        ensure_finite_matrix(&matrix)?;
        let dim = matrix.ncols();
        check_dim(dim)?;
        if rhs.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: rhs.len(),
            });
        }
        let pinv = matrix
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let anchor = &pinv * &rhs;
        let infeasibility = (&matrix * &anchor - &rhs).norm();
        if infeasibility > 1e-9 * (1.0 + rhs.norm()) {
            return Err(Error::InvalidInput(format!(
                "affine set is empty (residual {infeasibility:.3e})"
            )));
        }
        Ok(MaxMonotoneOp {
            kind: MonotoneKind::NormalConeAffine { matrix, rhs },
            dim,
            pinv: Some(pinv),
        })
    }

    pub fn normal_cone_singleton(point: Point) -> Result<Self> {
        point.ensure_finite()?;
        let dim = point.dim();
        Ok(Self::raw(MonotoneKind::NormalConeSingleton { point }, dim))
    }

    /// `x ↦ Q x + q` for symmetric PSD `Q`.
    pub fn quadratic_gradient(matrix: Matrix, offset: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        check_linear(&matrix, &offset, dim)?;
        if !is_symmetric(&matrix, 1e-12) {
            return Err(Error::InvalidInput("quadratic matrix must be symmetric".into()));
        }
        check_monotone(&matrix)?;
        Ok(Self::raw(MonotoneKind::QuadraticGradient { matrix, offset }, dim))
    }

    /// `x ↦ M x + q` with `M + Mᵀ ⪰ 0`.
    pub fn affine_monotone(matrix: Matrix, offset: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        check_linear(&matrix, &offset, dim)?;
        check_monotone(&matrix)?;
        Ok(Self::raw(MonotoneKind::AffineMonotone { matrix, offset }, dim))
    }

    fn raw(kind: MonotoneKind, dim: usize) -> Self {
        MaxMonotoneOp {
            kind,
            dim,
            pinv: None,
        }
    }

    pub fn kind(&self) -> &MonotoneKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, MonotoneKind::Zero)
    }

    /// `(M, q)` when the operator is an affine single-valued map.
    pub fn linear_part(&self) -> Option<(Matrix, DVector<f64>)> {
        match &self.kind {
            MonotoneKind::Zero => Some((Matrix::zeros(self.dim, self.dim), DVector::zeros(self.dim))),
            MonotoneKind::QuadraticGradient { matrix, offset }
            | MonotoneKind::AffineMonotone { matrix, offset } => Some((matrix.clone(), offset.clone())),
            _ => None,
        }
    }

    /// Prepares `J_{γA}` for repeated evaluation. Linear kinds factor
    /// `I + γM` once here.
    pub fn resolvent(&self, gamma: f64) -> Result<Resolvent<'_>> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidInput(format!("stepsize must be > 0, got {gamma}")));
        }
        let factor = match &self.kind {
            MonotoneKind::QuadraticGradient { matrix, .. } | MonotoneKind::AffineMonotone { matrix, .. } => {
                let system = Matrix::identity(self.dim, self.dim) + matrix * gamma;
                let lu = system.lu();
                if !lu.is_invertible() {
                    return Err(Error::NumericalFailure("I + γM is singular".into()));
                }
                Some(lu)
            }
            _ => None,
        };
        Ok(Resolvent {
            op: self,
            gamma,
            factor,
        })
    }

    /// True iff `u ∈ A x` up to `tol` (in both `x` and `u`).
    pub fn graph_member(&self, x: &Point, u: &Point, tol: f64) -> Result<bool> {
        x.ensure_dim(self.dim)?;
        u.ensure_dim(self.dim)?;
        x.ensure_finite()?;
        u.ensure_finite()?;
        let member = match &self.kind {
            MonotoneKind::Zero => u.iter().all(|v| v.abs() <= tol),
            MonotoneKind::L1 { weight } => x.iter().zip(u.iter()).all(|(&xi, &ui)| {
                if xi.abs() <= tol {
                    ui.abs() <= weight + tol || (ui - weight * xi.signum()).abs() <= tol
                } else {
                    (ui - weight * xi.signum()).abs() <= tol
                }
            }),
            MonotoneKind::NormalConeBox { lo, hi } => (0..self.dim).all(|i| {
                let (xi, ui) = (x[i], u[i]);
                if xi < lo[i] - tol || xi > hi[i] + tol {
                    return false;
                }
                let at_lo = xi <= lo[i] + tol;
                let at_hi = xi >= hi[i] - tol;
                match (at_lo, at_hi) {
                    (true, true) => true,
                    (true, false) => ui <= tol,
                    (false, true) => ui >= -tol,
                    (false, false) => ui.abs() <= tol,
                }
            }),
            MonotoneKind::NormalConeAffine { matrix, rhs } => {
                let pinv = self.pinv.as_ref().expect("affine cone carries its pseudo-inverse");
                let feas = (matrix * x.as_dvector() - rhs).norm();
                let uv = u.as_dvector();
                // u must lie in range(Eᵀ): E⁺E u = u.
                let off_range = (uv - pinv * (matrix * uv)).norm();
                feas <= tol * (1.0 + rhs.norm()) && off_range <= tol * (1.0 + u.norm())
            }
            MonotoneKind::NormalConeSingleton { point } => x.max_abs_diff(point) <= tol,
            MonotoneKind::QuadraticGradient { matrix, offset }
            | MonotoneKind::AffineMonotone { matrix, offset } => {
                let image = matrix * x.as_dvector() + offset;
                let scale = 1.0 + u.amax();
                (image - u.as_dvector()).amax() <= tol * scale
            }
        };
        Ok(member)
    }
}

/// `J_{γA}` prepared for a fixed stepsize.
#[derive(Debug)]
pub struct Resolvent<'a> {
    op: &'a MaxMonotoneOp,
    gamma: f64,
    factor: Option<LU<f64, Dyn, Dyn>>,
}

impl Resolvent<'_> {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Returns the unique `y` with `v − y ∈ γA(y)`.
    pub fn apply(&self, v: &Point) -> Result<Point> {
        v.ensure_dim(self.op.dim)?;
        v.ensure_finite()?;
        let gamma = self.gamma;
        let y = match &self.op.kind {
            MonotoneKind::Zero => v.clone(),
            MonotoneKind::L1 { weight } => {
                let t = gamma * weight;
                Point::from_dvector(v.map(|vi| soft_threshold(vi, t)))
            }
            MonotoneKind::NormalConeBox { lo, hi } => {
                Point::from_dvector(DVector::from_fn(v.dim(), |i, _| v[i].clamp(lo[i], hi[i])))
            }
            MonotoneKind::NormalConeAffine { matrix, rhs } => {
                let pinv = self.op.pinv.as_ref().expect("affine cone carries its pseudo-inverse");
                let vv = v.as_dvector();
                Point::from_dvector(vv - pinv * (matrix * vv - rhs))
            }
            MonotoneKind::NormalConeSingleton { point } => point.clone(),
            MonotoneKind::QuadraticGradient { offset, .. } | MonotoneKind::AffineMonotone { offset, .. } => {
                let lu = self.factor.as_ref().expect("linear kinds are factored");
                let rhs = v.as_dvector() - offset * gamma;
                let y = lu
                    .solve(&rhs)
                    .ok_or_else(|| Error::NumericalFailure("resolvent solve failed".into()))?;
                Point::from_dvector(y)
            }
        };
        if !y.is_finite() {
            return Err(Error::NumericalFailure("resolvent produced non-finite output".into()));
        }
        Ok(y)
    }
}

/// `sign(v) · max(|v| − t, 0)`.
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// One-shot `J_{γA}(v)`.
pub fn resolvent_eval(op: &MaxMonotoneOp, gamma: f64, v: &Point) -> Result<Point> {
    op.resolvent(gamma)?.apply(v)
}

pub fn graph_member(op: &MaxMonotoneOp, x: &Point, u: &Point, tol: f64) -> Result<bool> {
    op.graph_member(x, u, tol)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidInput("dimension must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn check_linear(matrix: &Matrix, offset: &DVector<f64>, dim: usize) -> Result<()> {
    check_dim(dim)?;
    ensure_square(matrix, dim)?;
    ensure_finite_matrix(matrix)?;
    if offset.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: offset.len(),
        });
    }
    if !offset.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite offset".into()));
    }
    Ok(())
}

fn check_monotone(matrix: &Matrix) -> Result<()> {
    let min_eig = min_sym_eigenvalue(matrix);
    let scale = 1.0 + matrix.amax();
    if min_eig < -MATRIX_CHECK_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not monotone (min eigenvalue of symmetric part {min_eig:.3e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_resolvent_is_identity() {
        let op = MaxMonotoneOp::zero(2).unwrap();
        assert_eq!(resolvent_eval(&op, 0.3, &p(&[1.5, -2.0])).unwrap(), p(&[1.5, -2.0]));
    }

    #[test]
    fn l1_resolvent_soft_thresholds() {
        let op = MaxMonotoneOp::l1(3, 1.0).unwrap();
        let y = resolvent_eval(&op, 1.0, &p(&[3.0, -0.5, 0.0])).unwrap();
        assert_eq!(y.to_vec(), vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn quadratic_resolvent_solves_linear_system() {
        let op = MaxMonotoneOp::quadratic_gradient(Matrix::from_element(1, 1, 2.0), DVector::zeros(1)).unwrap();
        let y = resolvent_eval(&op, 0.5, &p(&[3.0])).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn box_resolvent_clamps() {
        let op = MaxMonotoneOp::normal_cone_box(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let y = resolvent_eval(&op, 7.0, &p(&[2.0, -3.0])).unwrap();
        assert_eq!(y.to_vec(), vec![1.0, -1.0]);
    }

    #[test]
    fn affine_cone_projects() {
        // x1 + x2 = 1
        let op = MaxMonotoneOp::normal_cone_affine(Matrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::from_vec(vec![1.0]))
            .unwrap();
        let y = resolvent_eval(&op, 1.0, &p(&[0.0, 0.0])).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-14 && (y[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn empty_affine_set_rejected() {
        // x1 = 0 and x1 = 1
        let e = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(MaxMonotoneOp::normal_cone_affine(e, DVector::from_vec(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn singleton_resolvent_is_constant() {
        let op = MaxMonotoneOp::normal_cone_singleton(p(&[0.25])).unwrap();
        assert_eq!(resolvent_eval(&op, 3.0, &p(&[-9.0])).unwrap(), p(&[0.25]));
    }

    #[test]
    fn l1_graph_membership() {
        let op = MaxMonotoneOp::l1(1, 1.0).unwrap();
        assert!(op.graph_member(&p(&[0.0]), &p(&[0.7]), 1e-12).unwrap());
        assert!(op.graph_member(&p(&[2.0]), &p(&[1.0]), 1e-12).unwrap());
        assert!(!op.graph_member(&p(&[2.0]), &p(&[0.5]), 1e-12).unwrap());
        assert!(!op.graph_member(&p(&[0.0]), &p(&[1.5]), 1e-12).unwrap());
    }

    #[test]
    fn box_graph_membership() {
        let op = MaxMonotoneOp::normal_cone_box(vec![0.0], vec![1.0]).unwrap();
        assert!(!op.graph_member(&p(&[1.0]), &p(&[-0.1]), 1e-12).unwrap());
        assert!(op.graph_member(&p(&[1.0]), &p(&[3.0]), 1e-12).unwrap());
        assert!(op.graph_member(&p(&[0.0]), &p(&[-3.0]), 1e-12).unwrap());
        assert!(op.graph_member(&p(&[0.5]), &p(&[0.0]), 1e-12).unwrap());
        assert!(!op.graph_member(&p(&[0.5]), &p(&[0.1]), 1e-12).unwrap());
        assert!(!op.graph_member(&p(&[1.5]), &p(&[0.0]), 1e-12).unwrap());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(MaxMonotoneOp::l1(2, -1.0).is_err());
        assert!(MaxMonotoneOp::normal_cone_box(vec![1.0], vec![0.0]).is_err());
        let not_psd = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(MaxMonotoneOp::quadratic_gradient(not_psd, DVector::zeros(2)).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(MaxMonotoneOp::quadratic_gradient(asym, DVector::zeros(2)).is_err());
        let op = MaxMonotoneOp::zero(1).unwrap();
        assert!(op.resolvent(0.0).is_err());
        assert!(op.resolvent(-1.0).is_err());
        assert!(resolvent_eval(&op, 1.0, &Point::from_vec(vec![f64::NAN])).is_err());
        assert!(resolvent_eval(&op, 1.0, &p(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn pure_skew_resolvent_is_well_posed() {
        let s = Matrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let op = MaxMonotoneOp::affine_monotone(s, DVector::zeros(2)).unwrap();
        let y = resolvent_eval(&op, 0.5, &p(&[1.0, 1.0])).unwrap();
        // (I + γS) y = v, det = 1 + γ²s² = 3.25
        let back = Matrix::from_row_slice(2, 2, &[1.0, 1.5, -1.5, 1.0]) * y.as_dvector();
        assert!((back[0] - 1.0).abs() < 1e-14 && (back[1] - 1.0).abs() < 1e-14);
    }
}
