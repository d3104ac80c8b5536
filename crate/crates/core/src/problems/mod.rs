//! Three-operator test instances and reference solutions.

mod generators;
mod oracle;

pub use generators::{
    box_lasso_from_data, gen_affine_feasibility, gen_box_lasso, gen_monotone_affine, monotone_affine_from_data,
};
pub use oracle::{active_set_enumeration, dy_long_run, oracle_solve, OracleRoute, OracleSolution, ENUMERATION_MAX_DIM};

use crate::certify::{check_zero_certificate, CERTIFICATE_TOL};
use crate::operators::{Beta, CocoerciveOp, MaxMonotoneOp};
use crate::{Error, Point, Result};

/// Certificate that `x_star` is a zero of `A + B + C`: `c_element ∈ C x*`
/// and `−c_element − B x* ∈ A x*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHint {
    pub x_star: Point,
    pub c_element: Point,
}

/// Find `x` with `0 ∈ Ax + Bx + Cx`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionProblem {
    a: MaxMonotoneOp,
    b: CocoerciveOp,
    c: MaxMonotoneOp,
    dim: usize,
    solution_hint: Option<SolutionHint>,
}

impl InclusionProblem {
    pub fn new(a: MaxMonotoneOp, b: CocoerciveOp, c: MaxMonotoneOp) -> Result<Self> {
        let dim = a.dim();
        for got in [b.dim(), c.dim()] {
            if got != dim {
                return Err(Error::DimensionMismatch { expected: dim, got });
            }
        }
        Ok(InclusionProblem {
            a,
            b,
            c,
            dim,
            solution_hint: None,
        })
    }

    /// The all-zero problem of dimension `dim`; every point solves it.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(MaxMonotoneOp::zero(dim)?, CocoerciveOp::zero(dim)?, MaxMonotoneOp::zero(dim)?)
    }

    /// Attaches a certificate after checking it at [`CERTIFICATE_TOL`].
    pub fn with_hint(mut self, hint: SolutionHint) -> Result<Self> {
        hint.x_star.ensure_dim(self.dim)?;
        hint.c_element.ensure_dim(self.dim)?;
        if !check_zero_certificate(&self, &hint.x_star, &hint.c_element, CERTIFICATE_TOL)? {
            return Err(Error::PreconditionFailed(
                "solution hint does not certify 0 ∈ Ax* + Bx* + Cx*".into(),
            ));
        }
        self.solution_hint = Some(hint);
        Ok(self)
    }

    pub fn without_hint(mut self) -> Self {
        self.solution_hint = None;
        self
    }

    pub fn a(&self) -> &MaxMonotoneOp {
        &self.a
    }

    pub fn b(&self) -> &CocoerciveOp {
        &self.b
    }

    pub fn c(&self) -> &MaxMonotoneOp {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> Beta {
        self.b.beta()
    }

    pub fn solution_hint(&self) -> Option<&SolutionHint> {
        self.solution_hint.as_ref()
    }
}
