use std::fmt;

use nalgebra::DVector;

use crate::linalg::{
    ensure_finite_matrix, ensure_square, is_symmetric, lambda_max_power, min_sym_eigenvalue, Matrix, BETA_SAFETY,
    POWER_ITERATION_TOL,
};
use crate::{Error, Point, Result};

const POWER_ITERATION_MAX: usize = 200_000;

/// Cocoercivity constant. The zero operator is β-cocoercive for every β and
/// carries [`Beta::Infinite`], which lifts any stepsize restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CocoerciveKind {
    Zero,
    /// `B x = c x`, `β = 1/c`.
    ScaledIdentity { scale: f64 },
    /// `B x = Q x + q` for symmetric PSD `Q`, `β = 1/λ_max(Q)`.
    QuadraticGradient { matrix: Matrix, offset: DVector<f64> },
    /// Coordinatewise Huber derivative `clamp(t/δ, −1, 1)`, `β = δ`.
    HuberGradient { delta: f64 },
}

impl CocoerciveKind {
    pub fn name(&self) -> &'static str {
        match self {
            CocoerciveKind::Zero => "zero",
            CocoerciveKind::ScaledIdentity { .. } => "scaled-identity",
            CocoerciveKind::QuadraticGradient { .. } => "quadratic-gradient",
            CocoerciveKind::HuberGradient { .. } => "huber-gradient",
        }
    }
}

/// A single-valued β-cocoercive operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CocoerciveOp {
    kind: CocoerciveKind,
    dim: usize,
    beta: Beta,
}

impl CocoerciveOp {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(CocoerciveOp {
            kind: CocoerciveKind::Zero,
            dim,
            beta: Beta::Infinite,
        })
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidInput(format!("identity scale must be > 0, got {scale}")));
        }
        Ok(CocoerciveOp {
            kind: CocoerciveKind::ScaledIdentity { scale },
            dim,
            beta: Beta::Finite(1.0 / scale),
        })
    }

    /// Gradient of `½xᵀQx + qᵀx`. β is `1/λ_max(Q)` from power iteration,
    /// shrunk by [`BETA_SAFETY`]. `Q = 0` yields an infinite β.
    pub fn quadratic_gradient(matrix: Matrix, offset: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        check_dim(dim)?;
        ensure_square(&matrix, dim)?;
        ensure_finite_matrix(&matrix)?;
        if offset.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: offset.len(),
            });
        }
        if !offset.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite offset".into()));
        }
        if !is_symmetric(&matrix, 1e-12) {
            return Err(Error::InvalidInput("quadratic matrix must be symmetric".into()));
        }
        if min_sym_eigenvalue(&matrix) < -1e-10 * (1.0 + matrix.amax()) {
            return Err(Error::InvalidInput("quadratic matrix must be PSD".into()));
        }
        let lmax = lambda_max_power(&matrix, POWER_ITERATION_TOL, POWER_ITERATION_MAX);
        let beta = if lmax > 0.0 {
            Beta::Finite(BETA_SAFETY / lmax)
        } else {
            Beta::Infinite
        };
        Ok(CocoerciveOp {
            kind: CocoerciveKind::QuadraticGradient { matrix, offset },
            dim,
            beta,
        })
    }

    pub fn huber_gradient(dim: usize, delta: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidInput(format!("huber threshold must be > 0, got {delta}")));
        }
        Ok(CocoerciveOp {
            kind: CocoerciveKind::HuberGradient { delta },
            dim,
            beta: Beta::Finite(delta),
        })
    }

    /// Replaces the computed β with a declared one (e.g. from a problem
    /// file). The caller is responsible for re-validating it.
    pub fn with_declared_beta(mut self, beta: Beta) -> Result<Self> {
        if let Beta::Finite(b) = beta {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidInput(format!("beta must be > 0, got {b}")));
            }
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn kind(&self) -> &CocoerciveKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, CocoerciveKind::Zero)
    }

    /// `(Q, q)` when `B` is affine.
    pub fn linear_part(&self) -> Option<(Matrix, DVector<f64>)> {
        let d = self.dim;
        match &self.kind {
            CocoerciveKind::Zero => Some((Matrix::zeros(d, d), DVector::zeros(d))),
            CocoerciveKind::ScaledIdentity { scale } => Some((Matrix::identity(d, d) * *scale, DVector::zeros(d))),
            CocoerciveKind::QuadraticGradient { matrix, offset } => Some((matrix.clone(), offset.clone())),
            CocoerciveKind::HuberGradient { .. } => None,
        }
    }

    pub fn forward(&self, x: &Point) -> Result<Point> {
        x.ensure_dim(self.dim)?;
        x.ensure_finite()?;
        let out = match &self.kind {
            CocoerciveKind::Zero => Point::zeros(self.dim),
            CocoerciveKind::ScaledIdentity { scale } => x * *scale,
            CocoerciveKind::QuadraticGradient { matrix, offset } => {
                Point::from_dvector(matrix * x.as_dvector() + offset)
            }
            CocoerciveKind::HuberGradient { delta } => Point::from_dvector(x.map(|t| (t / delta).clamp(-1.0, 1.0))),
        };
        Ok(out)
    }
}

pub fn forward_eval(op: &CocoerciveOp, x: &Point) -> Result<Point> {
    op.forward(x)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidInput("dimension must be >= 1".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn forward_examples() {
        let zero = CocoerciveOp::zero(2).unwrap();
        assert_eq!(zero.forward(&p(&[7.0, 7.0])).unwrap(), p(&[0.0, 0.0]));
        assert_eq!(zero.beta(), Beta::Infinite);

        let id = CocoerciveOp::scaled_identity(1, 1.0).unwrap();
        assert_eq!(id.forward(&p(&[0.4])).unwrap(), p(&[0.4]));
        assert_eq!(id.beta(), Beta::Finite(1.0));

        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let quad = CocoerciveOp::quadratic_gradient(q, DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(quad.forward(&p(&[1.0, 1.0])).unwrap(), p(&[3.0, 1.0]));
        let beta = quad.beta().finite().unwrap();
        assert!(beta <= 0.5 && beta > 0.5 * (1.0 - 1e-7));
    }

    #[test]
    fn huber_gradient_clips() {
        let h = CocoerciveOp::huber_gradient(3, 0.5).unwrap();
        assert_eq!(h.forward(&p(&[0.25, 2.0, -9.0])).unwrap(), p(&[0.5, 1.0, -1.0]));
        assert_eq!(h.beta(), Beta::Finite(0.5));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CocoerciveOp::scaled_identity(1, 0.0).is_err());
        assert!(CocoerciveOp::huber_gradient(1, -1.0).is_err());
        let id = CocoerciveOp::scaled_identity(1, 1.0).unwrap();
        assert!(id.forward(&Point::from_vec(vec![f64::INFINITY])).is_err());
        assert!(id.forward(&p(&[1.0, 1.0])).is_err());
        assert!(id.with_declared_beta(Beta::Finite(-1.0)).is_err());
    }

    #[test]
    fn zero_quadratic_has_infinite_beta() {
        let op = CocoerciveOp::quadratic_gradient(Matrix::zeros(2, 2), DVector::zeros(2)).unwrap();
        assert_eq!(op.beta(), Beta::Infinite);
    }
}
