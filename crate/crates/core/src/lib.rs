//! Three-operator splitting for monotone inclusions `0 ∈ Ax + Bx + Cx`.
//!
//! `A` and `C` are maximal monotone operators accessed only through their
//! resolvents `J_{γA} = (Id + γA)^{-1}`; `B` is single-valued and
//! β-cocoercive. The crate provides:
//!
//! * [`operators`]: closed-form resolvents and forward maps, plus sampling
//!   checks of firm nonexpansiveness and cocoercivity.
//! * [`splitting`]: the forward-backward-backward (FBB) iteration, the
//!   Davis–Yin baseline and the Douglas–Rachford, reflected forward-backward
//!   and forward-reflected-backward special cases, all behind the
//!   [`splitting::SplittingMethod`] trait and selectable by name through
//!   [`splitting::MethodRegistry`].
//! * [`certify`]: fixed-point residuals, the FBB Lyapunov function and
//!   per-iteration descent / summability checks on recorded runs.
//! * [`problems`]: seeded instance generators and a reference-solution
//!   oracle.
//!
//! ```
//! use fbb_core::problems::gen_box_lasso;
//! use fbb_core::splitting::{solve, SolverConfig, StopRule};
//!
//! let problem = gen_box_lasso(6, 0.5, 3).unwrap();
//! let gamma = fbb_core::splitting::default_stepsize(problem.beta(), "fbb").unwrap();
//! let config = SolverConfig::new("fbb", gamma)
//!     .with_tol(1e-10)
//!     .with_stop_rule(StopRule::AbsoluteResidual);
//! let trace = solve(&problem, &config, None).unwrap();
//! assert!(trace.converged);
//! ```

pub mod certify;
mod error;
pub mod linalg;
pub mod operators;
mod point;
pub mod problems;
pub mod splitting;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use point::Point;
