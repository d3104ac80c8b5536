//! The FBB iteration, the Davis–Yin baseline and the DR/RFB/FRB special
//! cases behind one iteration driver.

mod methods;
mod registry;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use methods::{
    dr_init, dr_step, dy_init, dy_step, fbb_init, fbb_step, frb_init, frb_step, rfb_init, rfb_step, EvalCounters,
    InitPoint, IterState, StepContext,
};
pub use registry::{
    builtin_registry, default_stepsize, DavisYin, DouglasRachford, Fbb, ForwardReflectedBackward, MethodRegistry,
    ReflectedForwardBackward, SplittingMethod, STEPSIZE_SAFETY,
};

use crate::certify::{lyapunov, ReferencePoint};
use crate::problems::InclusionProblem;
use crate::{Error, Point, Result};

/// Iterates whose norm exceeds this are reported as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// `‖y − x‖² / max(1, ‖x‖²) ≤ tol`.
    #[default]
    Safeguarded,
    /// `‖y − x‖² / ‖x‖² ≤ tol`; at `x = 0` the error is 0 if `y = x` and
    /// `+∞` otherwise.
    PaperRelative,
    /// `max(‖x − y‖, ‖x⁺ − x‖) ≤ tol`.
    AbsoluteResidual,
}

impl StopRule {
    /// The relative error reported in the `paper_error` trace column.
    pub fn relative_error(self, x: &Point, y: &Point) -> f64 {
        let num = y.dist_sq(x);
        match self {
            StopRule::PaperRelative => {
                let den = x.norm_sq();
                if den > 0.0 {
                    num / den
                } else if num == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            StopRule::Safeguarded | StopRule::AbsoluteResidual => num / x.norm_sq().max(1.0),
        }
    }

    fn fires(self, tol: f64, row: &TraceRow) -> bool {
        match self {
            StopRule::Safeguarded | StopRule::PaperRelative => row.paper_error <= tol,
            StopRule::AbsoluteResidual => row.res_xy.max(row.res_dx) <= tol,
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopRule::Safeguarded => "safeguarded",
            StopRule::PaperRelative => "paper-relative",
            StopRule::AbsoluteResidual => "absolute-residual",
        })
    }
}

impl FromStr for StopRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "safeguarded" => Ok(StopRule::Safeguarded),
            "paper-relative" => Ok(StopRule::PaperRelative),
            "absolute-residual" => Ok(StopRule::AbsoluteResidual),
            other => Err(Error::InvalidInput(format!("unknown stop rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: String,
    pub gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub stop_rule: StopRule,
    /// Permits γ outside the proven range (frontier experiments).
    pub allow_unsafe_gamma: bool,
    /// Keep every iterate in the trace (needed by descent checks).
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn new(method: &str, gamma: f64) -> Self {
        SolverConfig {
            method: method.to_string(),
            gamma,
            max_iter: 100_000,
            tol: 1e-10,
            stop_rule: StopRule::default(),
            allow_unsafe_gamma: false,
            record_iterates: false,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_stop_rule(mut self, rule: StopRule) -> Self {
        self.stop_rule = rule;
        self
    }

    pub fn allow_unsafe_gamma(mut self, allow: bool) -> Self {
        self.allow_unsafe_gamma = allow;
        self
    }

    pub fn record_iterates(mut self, record: bool) -> Self {
        self.record_iterates = record;
        self
    }

    pub fn validate(&self, method: &dyn SplittingMethod, problem: &InclusionProblem) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        if !self.allow_unsafe_gamma {
            if let Some(bound) = method.stepsize_bound(problem.beta()) {
                if self.gamma >= bound {
                    return Err(Error::InvalidInput(format!(
                        "gamma {} is not below the bound {bound} for `{}`; pass the unsafe-gamma override to run anyway",
                        self.gamma,
                        method.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One row per iteration `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `‖x^k − y^k‖`.
    pub res_xy: f64,
    /// `‖x^k − x^{k−1}‖`.
    pub res_dx: f64,
    /// Relative error `‖y^k − x^k‖² / ‖x^k‖²` (safeguarded unless the
    /// paper-relative rule is selected).
    pub paper_error: f64,
    /// Lyapunov value when a reference point was supplied.
    pub phi: Option<f64>,
    pub wall_ns: u64,
}

/// Iterates after step `k`; `by_prev` is `B y^{k−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub z: Point,
    pub x: Point,
    pub y: Point,
    pub by: Point,
    pub by_prev: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Diverged { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub method: String,
    pub gamma: f64,
    pub stop_rule: StopRule,
    pub rows: Vec<TraceRow>,
    pub iterates: Option<Vec<IterateRecord>>,
    /// Candidate solution `x^k` at termination.
    pub x_final: Point,
    pub y_final: Point,
    pub z_final: Point,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub counters: EvalCounters,
}

impl SolverTrace {
    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn diverged(&self) -> bool {
        matches!(self.termination, Termination::Diverged { .. })
    }
}

fn state_diverged(state: &IterState) -> bool {
    [&state.z, &state.x, &state.y]
        .iter()
        .any(|p| !p.is_finite() || p.norm() > DIVERGENCE_NORM)
}

/// Iterates `method` from `init` (default `z⁰ = y⁰ = 0`) until the stopping
/// rule fires or `max_iter` is reached. Divergence is reported in the trace,
/// not as an error. When `reference` is given, each row carries the
/// Lyapunov value at that iterate.
pub fn run(
    problem: &InclusionProblem,
    method: &dyn SplittingMethod,
    config: &SolverConfig,
    init: Option<&InitPoint>,
    reference: Option<&ReferencePoint>,
) -> Result<SolverTrace> {
    method.check_applicable(problem)?;
    config.validate(method, problem)?;
    let default_init;
    let init = match init {
        Some(i) => i,
        None => {
            default_init = InitPoint::zeros(problem.dim());
            &default_init
        }
    };
    let ctx = StepContext::new(problem, config.gamma)?;
    let mut counters = EvalCounters::default();
    let mut state = method.init(&ctx, init, &mut counters)?;
    let mut rows = Vec::new();
    let mut iterates = config.record_iterates.then(Vec::new);
    let mut termination = Termination::MaxIterations;
    let beta = problem.beta();

    for _ in 0..config.max_iter {
        let started = Instant::now();
        let next = method.step(&state, &ctx, &mut counters);
        let next = match next {
            Ok(s) => s,
            Err(Error::NumericalFailure(_)) | Err(Error::InvalidInput(_)) if state_diverged(&state) => {
                termination = Termination::Diverged { iteration: state.k + 1 };
                break;
            }
            Err(e) => return Err(e),
        };
        let wall_ns = started.elapsed().as_nanos() as u64;
        if state_diverged(&next) {
            termination = Termination::Diverged { iteration: next.k };
            state = next;
            break;
        }
        let phi = reference.map(|r| lyapunov(&next.z, &next.x, &next.y, &next.by_prev, r, config.gamma, beta).phi);
        let row = TraceRow {
            k: next.k,
            res_xy: next.x.dist(&next.y),
            res_dx: next.x.dist(&state.x),
            paper_error: config.stop_rule.relative_error(&next.x, &next.y),
            phi,
            wall_ns,
        };
        if let Some(its) = iterates.as_mut() {
            its.push(IterateRecord {
                k: next.k,
                z: next.z.clone(),
                x: next.x.clone(),
                y: next.y.clone(),
                by: next.by.clone(),
                by_prev: next.by_prev.clone(),
            });
        }
        let stop = config.stop_rule.fires(config.tol, &row);
        rows.push(row);
        state = next;
        if stop {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(SolverTrace {
        method: method.name().to_string(),
        gamma: config.gamma,
        stop_rule: config.stop_rule,
        rows,
        iterates,
        iterations: state.k,
        x_final: state.x,
        y_final: state.y,
        z_final: state.z,
        converged: termination == Termination::Converged,
        termination,
        counters,
    })
}

/// [`run`] with the method looked up by name in the built-in registry.
pub fn solve(problem: &InclusionProblem, config: &SolverConfig, init: Option<&InitPoint>) -> Result<SolverTrace> {
    let method = builtin_registry().get(&config.method)?;
    run(problem, method, config, init, None)
}
