use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::methods::{
    dr_init, dr_step, dy_init, dy_step, fbb_init, fbb_step, frb_init, frb_step, rfb_init, rfb_step, EvalCounters,
    InitPoint, IterState, StepContext,
};
use crate::operators::Beta;
use crate::problems::InclusionProblem;
use crate::{Error, Result};

/// Safety factor applied to open stepsize intervals.
pub const STEPSIZE_SAFETY: f64 = 0.9;

/// A splitting scheme for `0 ∈ Ax + Bx + Cx`.
///
/// Implementations are stateless; all iteration state lives in
/// [`IterState`], so one instance serves any number of concurrent runs.
pub trait SplittingMethod: Send + Sync {
    fn name(&self) -> &'static str;

    /// Rejects problems the scheme cannot handle (e.g. DR with `B ≠ 0`).
    fn check_applicable(&self, problem: &InclusionProblem) -> Result<()>;

    /// Open upper bound on γ under which convergence is guaranteed, or
    /// `None` when every γ > 0 is admissible.
    fn stepsize_bound(&self, beta: Beta) -> Option<f64>;

    fn default_stepsize(&self, beta: Beta) -> f64 {
        match self.stepsize_bound(beta) {
            Some(bound) => STEPSIZE_SAFETY * bound,
            None => 1.0,
        }
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState>;

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState>;
}

fn inapplicable(method: &str, reason: &str) -> Error {
    Error::Inapplicable {
        method: method.into(),
        reason: reason.into(),
    }
}

/// Forward-backward-backward splitting; γ ∈ (0, 2β/5).
#[derive(Debug, Default, Clone, Copy)]
pub struct Fbb;

impl SplittingMethod for Fbb {
    fn name(&self) -> &'static str {
        "fbb"
    }

    fn check_applicable(&self, _problem: &InclusionProblem) -> Result<()> {
        Ok(())
    }

    fn stepsize_bound(&self, beta: Beta) -> Option<f64> {
        beta.finite().map(|b| 2.0 * b / 5.0)
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
        fbb_init(ctx, init, counters)
    }

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
        fbb_step(state, ctx, counters)
    }
}

/// Davis–Yin three-operator splitting; γ ∈ (0, 2β).
#[derive(Debug, Default, Clone, Copy)]
pub struct DavisYin;

impl SplittingMethod for DavisYin {
    fn name(&self) -> &'static str {
        "dy"
    }

    fn check_applicable(&self, _problem: &InclusionProblem) -> Result<()> {
        Ok(())
    }

    fn stepsize_bound(&self, beta: Beta) -> Option<f64> {
        beta.finite().map(|b| 2.0 * b)
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
        dy_init(ctx, init, counters)
    }

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
        dy_step(state, ctx, counters)
    }
}

/// Douglas–Rachford splitting (`B = 0`); any γ > 0.
#[derive(Debug, Default, Clone, Copy)]
pub struct DouglasRachford;

impl SplittingMethod for DouglasRachford {
    fn name(&self) -> &'static str {
        "dr"
    }

    fn check_applicable(&self, problem: &InclusionProblem) -> Result<()> {
        if problem.b().is_zero() {
            Ok(())
        } else {
            Err(inapplicable("dr", "B must be the zero operator"))
        }
    }

    fn stepsize_bound(&self, _beta: Beta) -> Option<f64> {
        None
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
        dr_init(ctx, init, counters)
    }

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
        dr_step(state, ctx, counters)
    }
}

/// Reflected forward-backward splitting (`A = 0`); γ ∈ (0, β/2).
#[derive(Debug, Default, Clone, Copy)]
pub struct ReflectedForwardBackward;

impl SplittingMethod for ReflectedForwardBackward {
    fn name(&self) -> &'static str {
        "rfb"
    }

    fn check_applicable(&self, problem: &InclusionProblem) -> Result<()> {
        if problem.a().is_zero() {
            Ok(())
        } else {
            Err(inapplicable("rfb", "A must be the zero operator"))
        }
    }

    fn stepsize_bound(&self, beta: Beta) -> Option<f64> {
        beta.finite().map(|b| b / 2.0)
    }

    // Same default as FBB so the A = 0 reduction runs with identical γ.
    fn default_stepsize(&self, beta: Beta) -> f64 {
        Fbb.default_stepsize(beta)
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
        rfb_init(ctx, init, counters)
    }

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
        rfb_step(state, ctx, counters)
    }
}

/// Forward-reflected-backward splitting (`C = 0`); γ ∈ (0, β/2).
#[derive(Debug, Default, Clone, Copy)]
pub struct ForwardReflectedBackward;

impl SplittingMethod for ForwardReflectedBackward {
    fn name(&self) -> &'static str {
        "frb"
    }

    fn check_applicable(&self, problem: &InclusionProblem) -> Result<()> {
        if problem.c().is_zero() {
            Ok(())
        } else {
            Err(inapplicable("frb", "C must be the zero operator"))
        }
    }

    fn stepsize_bound(&self, beta: Beta) -> Option<f64> {
        beta.finite().map(|b| b / 2.0)
    }

    fn default_stepsize(&self, beta: Beta) -> f64 {
        Fbb.default_stepsize(beta)
    }

    fn init(&self, ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
        frb_init(ctx, init, counters)
    }

    fn step(&self, state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
        frb_step(state, ctx, counters)
    }
}

/// Name-keyed table of splitting methods.
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Box<dyn SplittingMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry {
            methods: BTreeMap::new(),
        }
    }

    /// `fbb`, `dy`, `dr`, `rfb` and `frb`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Fbb));
        r.register(Box::new(DavisYin));
        r.register(Box::new(DouglasRachford));
        r.register(Box::new(ReflectedForwardBackward));
        r.register(Box::new(ForwardReflectedBackward));
        r
    }

    /// Adds a method, replacing any previous one with the same name.
    pub fn register(&mut self, method: Box<dyn SplittingMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn SplittingMethod> {
        self.methods
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.methods.keys().copied()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Process-wide registry of the built-in methods.
pub fn builtin_registry() -> &'static MethodRegistry {
    static REGISTRY: OnceLock<MethodRegistry> = OnceLock::new();
    REGISTRY.get_or_init(MethodRegistry::with_builtins)
}

/// Default γ for a built-in method: `0.9·(2β/5)` for fbb/rfb/frb,
/// `0.9·2β` for dy, and `1` for dr or an infinite β.
pub fn default_stepsize(beta: Beta, method: &str) -> Result<f64> {
    Ok(builtin_registry().get(method)?.default_stepsize(beta))
}
