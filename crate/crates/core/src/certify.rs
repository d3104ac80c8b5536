//! Run-level checks of the FBB convergence theory.
//!
//! A reference pair `(z*, x*)` solves both fixed-point equations
//!
//! ```text
//! x* = J_{γC}(z* − γ B x*) = J_{γA}(2x* − z*)
//! ```
//!
//! and exists exactly when `x*` is a zero of `A + B + C`: given `c ∈ C x*`
//! with `−c − Bx* ∈ A x*`, take `z* = x* + γc + γBx*`. Against such a
//! reference the function
//!
//! ```text
//! φ_k = ‖z^k − z*‖² + ‖y^k − x^k‖² + 2γ(4β/5 − γ)‖B y^{k−1} − B x*‖²
//! ```
//!
//! decreases along FBB iterates for γ ∈ (0, 2β/5), with
//!
//! ```text
//! φ_{k+1} ≤ φ_k − (1 − 5γ/(2β))‖y^k − x^k‖²
//!               − 4γ(2β/5 − γ)‖B y^{k−1} − B x*‖²
//!               − (5γ/(2β))(1 − 5γ/(2β))‖x^{k+1} − x^k‖².
//! ```
//!
//! [`descent_check`] evaluates this inequality on every recorded step and
//! [`summability_report`] the partial sums it telescopes into.

use crate::operators::Beta;
use crate::problems::{InclusionProblem, SolutionHint};
use crate::splitting::SolverTrace;
use crate::{Error, Point, Result};

/// Tolerance on graph memberships of an oracle certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Relative slack (to `1 + φ₁`) of the descent and summability checks.
pub const DESCENT_TOL: f64 = 1e-9;

/// A point `(z*, x*)` of the fixed-point set, with `B x*` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub z_star: Point,
    pub x_star: Point,
    pub bx_star: Point,
    pub gamma: f64,
}

/// `(‖x − J_{γC}(z − γBx)‖, ‖x − J_{γA}(2x − z)‖)`; both vanish exactly on
/// the fixed-point set.
pub fn u_residual(z: &Point, x: &Point, gamma: f64, problem: &InclusionProblem) -> Result<(f64, f64)> {
    let d = problem.dim();
    z.ensure_dim(d)?;
    x.ensure_dim(d)?;
    let bx = problem.b().forward(x)?;
    let jc = problem.c().resolvent(gamma)?;
    let ja = problem.a().resolvent(gamma)?;
    let r1 = x.dist(&jc.apply(&z.axpy(-gamma, &bx))?);
    let r2 = x.dist(&ja.apply(&(&(x * 2.0) - z))?);
    Ok((r1, r2))
}

/// Checks `c ∈ C x*` and `−c − B x* ∈ A x*` at `tol`, i.e. that `x*` is a
/// certified zero of `A + B + C`.
pub fn check_zero_certificate(problem: &InclusionProblem, x_star: &Point, c_element: &Point, tol: f64) -> Result<bool> {
    let bx = problem.b().forward(x_star)?;
    let a_element = &(-c_element) - &bx;
    Ok(problem.c().graph_member(x_star, c_element, tol)? && problem.a().graph_member(x_star, &a_element, tol)?)
}

/// Lifts a certified zero `x*` (with `c ∈ C x*`) to `z* = x* + γc + γBx*`.
pub fn build_u_point(
    x_star: &Point,
    c_element: &Point,
    gamma: f64,
    problem: &InclusionProblem,
) -> Result<ReferencePoint> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be > 0, got {gamma}")));
    }
    x_star.ensure_dim(problem.dim())?;
    c_element.ensure_dim(problem.dim())?;
    if !problem.c().graph_member(x_star, c_element, CERTIFICATE_TOL)? {
        return Err(Error::PreconditionFailed("c_element is not in C(x*)".into()));
    }
    let bx_star = problem.b().forward(x_star)?;
    let a_element = &(-c_element) - &bx_star;
    if !problem.a().graph_member(x_star, &a_element, CERTIFICATE_TOL)? {
        return Err(Error::PreconditionFailed("-c - Bx* is not in A(x*)".into()));
    }
    let z_star = x_star.axpy(gamma, c_element).axpy(gamma, &bx_star);
    Ok(ReferencePoint {
        z_star,
        x_star: x_star.clone(),
        bx_star,
        gamma,
    })
}

/// [`build_u_point`] from a problem's stored certificate.
pub fn reference_from_hint(problem: &InclusionProblem, hint: &SolutionHint, gamma: f64) -> Result<ReferencePoint> {
    build_u_point(&hint.x_star, &hint.c_element, gamma, problem)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    pub phi: f64,
    /// `‖z − z*‖²`
    pub dist_z_sq: f64,
    /// `‖y − x‖²`
    pub residual_sq: f64,
    /// `‖B y_prev − B x*‖²`
    pub forward_gap_sq: f64,
    /// `2γ(4β/5 − γ)`, zero for infinite β.
    pub coefficient: f64,
    /// Set when γ ≥ 4β/5; φ may then be negative.
    pub coefficient_negative: bool,
}

fn forward_coefficient(gamma: f64, beta: Beta) -> f64 {
    match beta {
        Beta::Finite(b) => 2.0 * gamma * (4.0 * b / 5.0 - gamma),
        Beta::Infinite => 0.0,
    }
}

/// The FBB Lyapunov function at `(z, x, y)` with `by_prev = B y^{k−1}`.
///
/// With infinite β the forward term is dropped (`B y − B x*` is identically
/// zero for constant `B`).
pub fn lyapunov(z: &Point, x: &Point, y: &Point, by_prev: &Point, reference: &ReferencePoint, gamma: f64, beta: Beta) -> LyapunovValue {
    let dist_z_sq = z.dist_sq(&reference.z_star);
    let residual_sq = y.dist_sq(x);
    let forward_gap_sq = by_prev.dist_sq(&reference.bx_star);
    let coefficient = forward_coefficient(gamma, beta);
    let forward_term = if beta.is_infinite() { 0.0 } else { coefficient * forward_gap_sq };
    LyapunovValue {
        phi: dist_z_sq + residual_sq + forward_term,
        dist_z_sq,
        residual_sq,
        forward_gap_sq,
        coefficient,
        coefficient_negative: coefficient < 0.0,
    }
}

/// The three decrease coefficients of the descent inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentCoefficients {
    /// `1 − 5γ/(2β)` on `‖y^k − x^k‖²`.
    pub residual: f64,
    /// `4γ(2β/5 − γ)` on `‖B y^{k−1} − B x*‖²`.
    pub forward_gap: f64,
    /// `(5γ/(2β))(1 − 5γ/(2β))` on `‖x^{k+1} − x^k‖²`.
    pub step: f64,
}

impl DescentCoefficients {
    pub fn new(gamma: f64, beta: Beta) -> Self {
        match beta {
            Beta::Finite(b) => {
                let ratio = 5.0 * gamma / (2.0 * b);
                DescentCoefficients {
                    residual: 1.0 - ratio,
                    forward_gap: 4.0 * gamma * (2.0 * b / 5.0 - gamma),
                    step: ratio * (1.0 - ratio),
                }
            }
            Beta::Infinite => DescentCoefficients {
                residual: 1.0,
                forward_gap: 0.0,
                step: 0.0,
            },
        }
    }

    /// All coefficients nonnegative and the residual one positive, i.e.
    /// γ ∈ (0, 2β/5].
    pub fn in_theory(&self) -> bool {
        self.residual > 0.0 && self.forward_gap >= 0.0 && self.step >= 0.0
    }
}

/// γ ∈ (0, 2β/5), the range where the descent inequality is proven.
pub fn gamma_in_theory(gamma: f64, beta: Beta) -> bool {
    match beta {
        Beta::Finite(b) => gamma > 0.0 && gamma < 2.0 * b / 5.0,
        Beta::Infinite => gamma > 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentRow {
    /// Index of the bounded Lyapunov value `φ_k` (k ≥ 2).
    pub k: usize,
    pub phi: f64,
    /// Right-hand side of the descent inequality from step `k − 1`.
    pub rhs_bound: f64,
    /// `phi − rhs_bound`; positive values violate the inequality.
    pub violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// γ outside (0, 2β/5): the inequality is not claimed.
    OutOfTheory,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::OutOfTheory => "out-of-theory",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    pub phi1: f64,
    pub worst_violation: f64,
    /// `tol · (1 + φ₁)`.
    pub threshold: f64,
    pub verdict: Verdict,
    pub rows: Vec<DescentRow>,
}

fn certified_trace<'t>(trace: &'t SolverTrace, reference: &ReferencePoint) -> Result<&'t [crate::splitting::IterateRecord]> {
    if trace.method != "fbb" {
        return Err(Error::PreconditionFailed(format!(
            "descent certification applies to fbb traces, got `{}`",
            trace.method
        )));
    }
    if (trace.gamma - reference.gamma).abs() > 0.0 {
        return Err(Error::PreconditionFailed(
            "reference point was lifted with a different stepsize".into(),
        ));
    }
    trace.iterates.as_deref().ok_or(Error::MissingIterates)
}

/// Evaluates the descent inequality at every recorded step of an FBB trace.
pub fn descent_check(trace: &SolverTrace, reference: &ReferencePoint, gamma: f64, beta: Beta, tol: f64) -> Result<DescentReport> {
    let iterates = certified_trace(trace, reference)?;
    let coeffs = DescentCoefficients::new(gamma, beta);
    let phis: Vec<f64> = iterates
        .iter()
        .map(|it| lyapunov(&it.z, &it.x, &it.y, &it.by_prev, reference, gamma, beta).phi)
        .collect();
    let phi1 = phis.first().copied().unwrap_or(0.0);
    let mut rows = Vec::with_capacity(iterates.len().saturating_sub(1));
    let mut worst = f64::NEG_INFINITY;
    for (i, pair) in iterates.windows(2).enumerate() {
        let (cur, next) = (&pair[0], &pair[1]);
        let forward_term = if beta.is_infinite() {
            0.0
        } else {
            coeffs.forward_gap * cur.by_prev.dist_sq(&reference.bx_star)
        };
        let rhs = phis[i] - coeffs.residual * cur.y.dist_sq(&cur.x) - forward_term - coeffs.step * next.x.dist_sq(&cur.x);
        let violation = phis[i + 1] - rhs;
        worst = worst.max(violation);
        rows.push(DescentRow {
            k: next.k,
            phi: phis[i + 1],
            rhs_bound: rhs,
            violation,
        });
    }
    if rows.is_empty() {
        worst = 0.0;
    }
    let threshold = tol * (1.0 + phi1);
    let verdict = if !gamma_in_theory(gamma, beta) {
        Verdict::OutOfTheory
    } else if worst <= threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DescentReport {
        phi1,
        worst_violation: worst,
        threshold,
        verdict,
        rows,
    })
}

/// One summable residual series and its telescoped bound `φ₁ / coefficient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    pub sum: f64,
    /// `None` when the coefficient is not positive (bound inapplicable).
    pub bound: Option<f64>,
}

impl SeriesBound {
    fn new(sum: f64, phi1: f64, coefficient: f64) -> Self {
        SeriesBound {
            sum,
            bound: (coefficient > 0.0).then(|| phi1 / coefficient),
        }
    }

    /// `bound − sum`, when a bound applies.
    pub fn slack(&self) -> Option<f64> {
        self.bound.map(|b| b - self.sum)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummabilityReport {
    pub phi1: f64,
    /// `Σ‖x^k − y^k‖²`
    pub xy: SeriesBound,
    /// `Σ‖x^{k+1} − x^k‖²`
    pub dx: SeriesBound,
    /// `Σ‖B y^{k−1} − B x*‖²`
    pub forward_gap: SeriesBound,
    /// False when γ is outside (0, 2β/5); no bound is claimed then.
    pub bound_applicable: bool,
    /// Every applicable bound holds up to `DESCENT_TOL · (1 + φ₁)`.
    pub within_bounds: bool,
}

/// Partial sums, over the recorded steps `k = 1 … N−1`, of the three series
/// the descent inequality telescopes.
pub fn summability_report(trace: &SolverTrace, reference: &ReferencePoint, gamma: f64, beta: Beta) -> Result<SummabilityReport> {
    let iterates = certified_trace(trace, reference)?;
    let coeffs = DescentCoefficients::new(gamma, beta);
    let phi1 = iterates
        .first()
        .map(|it| lyapunov(&it.z, &it.x, &it.y, &it.by_prev, reference, gamma, beta).phi)
        .unwrap_or(0.0);
    let (mut sxy, mut sdx, mut sgap) = (0.0, 0.0, 0.0);
    for pair in iterates.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        sxy += cur.x.dist_sq(&cur.y);
        sdx += next.x.dist_sq(&cur.x);
        sgap += cur.by_prev.dist_sq(&reference.bx_star);
    }
    let bound_applicable = gamma_in_theory(gamma, beta);
    let xy = SeriesBound::new(sxy, phi1, coeffs.residual);
    let dx = SeriesBound::new(sdx, phi1, coeffs.step);
    let forward_gap = SeriesBound::new(sgap, phi1, coeffs.forward_gap);
    let slack_tol = DESCENT_TOL * (1.0 + phi1);
    let within_bounds = bound_applicable
        && [xy, dx, forward_gap]
            .iter()
            .all(|s| s.slack().is_none_or(|sl| sl >= -slack_tol));
    Ok(SummabilityReport {
        phi1,
        xy,
        dx,
        forward_gap,
        bound_applicable,
        within_bounds,
    })
}
