//! Single-step maps of the five splitting schemes.
//!
//! All schemes share [`IterState`]; each documents which fields it drives.
//! `x` is always the candidate solution (the `C`-side output) and `y` the
//! `A`-side output, so `‖x − y‖` is a common fixed-point residual.

use crate::operators::Resolvent;
use crate::problems::InclusionProblem;
use crate::{Error, Point, Result};

/// Evaluation counts, used to check the per-iteration cost of each scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub forward: usize,
    pub resolvent: usize,
}

/// Resolvents of `A` and `C` prepared for one stepsize.
pub struct StepContext<'p> {
    pub problem: &'p InclusionProblem,
    pub gamma: f64,
    ja: Resolvent<'p>,
    jc: Resolvent<'p>,
}

impl<'p> StepContext<'p> {
    pub fn new(problem: &'p InclusionProblem, gamma: f64) -> Result<Self> {
        Ok(StepContext {
            problem,
            gamma,
            ja: problem.a().resolvent(gamma)?,
            jc: problem.c().resolvent(gamma)?,
        })
    }

    fn resolve_a(&self, v: &Point, counters: &mut EvalCounters) -> Result<Point> {
        counters.resolvent += 1;
        self.ja.apply(v)
    }

    fn resolve_c(&self, v: &Point, counters: &mut EvalCounters) -> Result<Point> {
        counters.resolvent += 1;
        self.jc.apply(v)
    }

    fn forward(&self, v: &Point, counters: &mut EvalCounters) -> Result<Point> {
        counters.forward += 1;
        self.problem.b().forward(v)
    }
}

/// Iterate bundle shared by all schemes.
///
/// For FBB, RFB and FRB `by` caches `B y^k` and `by_prev` caches `B y^{k−1}`.
/// For Davis–Yin `by` holds `B x^k`. DR never touches them.
#[derive(Debug, Clone, PartialEq)]
pub struct IterState {
    pub k: usize,
    pub z: Point,
    pub x: Point,
    pub y: Point,
    pub by: Point,
    pub by_prev: Point,
}

/// Starting points `(z⁰, y⁰)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitPoint {
    pub z0: Point,
    pub y0: Point,
}

impl InitPoint {
    pub fn zeros(dim: usize) -> Self {
        InitPoint {
            z0: Point::zeros(dim),
            y0: Point::zeros(dim),
        }
    }

    pub fn new(z0: Point, y0: Point) -> Self {
        InitPoint { z0, y0 }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for p in [&self.z0, &self.y0] {
            p.ensure_dim(dim)?;
            p.ensure_finite()?;
        }
        Ok(())
    }
}

/// `2x − z`.
fn reflect(x: &Point, z: &Point) -> Point {
    &(x * 2.0) - z
}

/// `z + (y − x)`.
fn governing_update(z: &Point, y: &Point, x: &Point) -> Point {
    z + &(y - x)
}

/// FBB initial state: `x⁰ = z⁰`, `By⁰` evaluated once and cached.
pub fn fbb_init(ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
    init.validate(ctx.problem.dim())?;
    let by = ctx.forward(&init.y0, counters)?;
    Ok(IterState {
        k: 0,
        z: init.z0.clone(),
        x: init.z0.clone(),
        y: init.y0.clone(),
        by_prev: by.clone(),
        by,
    })
}

/// One forward-backward-backward step:
///
/// ```text
/// x⁺ = J_{γC}(z − γ B y)
/// y⁺ = J_{γA}(2x⁺ − z)
/// z⁺ = z + y⁺ − x⁺
/// ```
///
/// `B` is evaluated once, at the new `y⁺`.
pub fn fbb_step(state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
    let x = ctx.resolve_c(&state.z.axpy(-ctx.gamma, &state.by), counters)?;
    let y = ctx.resolve_a(&reflect(&x, &state.z), counters)?;
    let z = governing_update(&state.z, &y, &x);
    let by = ctx.forward(&y, counters)?;
    Ok(IterState {
        k: state.k + 1,
        z,
        x,
        y,
        by_prev: state.by.clone(),
        by,
    })
}

pub fn dy_init(ctx: &StepContext<'_>, init: &InitPoint, _counters: &mut EvalCounters) -> Result<IterState> {
    init.validate(ctx.problem.dim())?;
    let d = ctx.problem.dim();
    Ok(IterState {
        k: 0,
        z: init.z0.clone(),
        x: init.z0.clone(),
        y: init.y0.clone(),
        by: Point::zeros(d),
        by_prev: Point::zeros(d),
    })
}

/// One Davis–Yin step:
///
/// ```text
/// x⁺ = J_{γC}(z)
/// y⁺ = J_{γA}(2x⁺ − z − γ B x⁺)
/// z⁺ = z + y⁺ − x⁺
/// ```
pub fn dy_step(state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
    let x = ctx.resolve_c(&state.z, counters)?;
    let bx = ctx.forward(&x, counters)?;
    let y = ctx.resolve_a(&reflect(&x, &state.z).axpy(-ctx.gamma, &bx), counters)?;
    let z = governing_update(&state.z, &y, &x);
    Ok(IterState {
        k: state.k + 1,
        z,
        x,
        y,
        by_prev: state.by.clone(),
        by: bx,
    })
}

/// Douglas–Rachford initial state; identical to FBB's when `B = 0`.
pub fn dr_init(ctx: &StepContext<'_>, init: &InitPoint, _counters: &mut EvalCounters) -> Result<IterState> {
    init.validate(ctx.problem.dim())?;
    let d = ctx.problem.dim();
    Ok(IterState {
        k: 0,
        z: init.z0.clone(),
        x: init.z0.clone(),
        y: init.y0.clone(),
        by: Point::zeros(d),
        by_prev: Point::zeros(d),
    })
}

/// One Douglas–Rachford step: `x⁺ = J_{γC}(z)`, `y⁺ = J_{γA}(2x⁺ − z)`,
/// `z⁺ = z + y⁺ − x⁺`.
pub fn dr_step(state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
    if !ctx.problem.b().is_zero() {
        return Err(Error::Inapplicable {
            method: "dr".into(),
            reason: "B must be the zero operator".into(),
        });
    }
    let x = ctx.resolve_c(&state.z, counters)?;
    let y = ctx.resolve_a(&reflect(&x, &state.z), counters)?;
    let z = governing_update(&state.z, &y, &x);
    Ok(IterState {
        k: state.k + 1,
        z,
        x,
        y,
        by: state.by.clone(),
        by_prev: state.by_prev.clone(),
    })
}

/// RFB initial state: `x⁰ = z⁰`, `y⁰` as given.
pub fn rfb_init(ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
    fbb_init(ctx, init, counters)
}

/// One reflected forward-backward step:
///
/// ```text
/// x⁺ = J_{γC}(x − γ B y)
/// y⁺ = 2x⁺ − x
/// ```
///
/// `z` mirrors `x`.
pub fn rfb_step(state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
    if !ctx.problem.a().is_zero() {
        return Err(Error::Inapplicable {
            method: "rfb".into(),
            reason: "A must be the zero operator".into(),
        });
    }
    let x = ctx.resolve_c(&state.x.axpy(-ctx.gamma, &state.by), counters)?;
    let y = reflect(&x, &state.x);
    let by = ctx.forward(&y, counters)?;
    Ok(IterState {
        k: state.k + 1,
        z: x.clone(),
        x,
        y,
        by_prev: state.by.clone(),
        by,
    })
}

/// FRB initial state: `y^{−1} = y⁰`, so `B y^{−1} = B y⁰`; `z⁰ = y⁰ + γBy⁰`.
pub fn frb_init(ctx: &StepContext<'_>, init: &InitPoint, counters: &mut EvalCounters) -> Result<IterState> {
    init.validate(ctx.problem.dim())?;
    let by = ctx.forward(&init.y0, counters)?;
    let z = init.y0.axpy(ctx.gamma, &by);
    Ok(IterState {
        k: 0,
        x: init.y0.clone(),
        y: init.y0.clone(),
        z,
        by_prev: by.clone(),
        by,
    })
}

/// One forward-reflected-backward step:
///
/// ```text
/// y⁺ = J_{γA}(y − γ B y − γ (B y − B y_prev))
/// ```
///
/// `x⁺ = y + γ(B y_prev − B y)` and `z⁺ = y⁺ + γ B y` are tracked so the
/// residuals line up with FBB run on the same problem.
pub fn frb_step(state: &IterState, ctx: &StepContext<'_>, counters: &mut EvalCounters) -> Result<IterState> {
    if !ctx.problem.c().is_zero() {
        return Err(Error::Inapplicable {
            method: "frb".into(),
            reason: "C must be the zero operator".into(),
        });
    }
    let g = ctx.gamma;
    let reflected_gap = &state.by - &state.by_prev;
    let arg = state.y.axpy(-g, &state.by).axpy(-g, &reflected_gap);
    let y = ctx.resolve_a(&arg, counters)?;
    let x = state.y.axpy(-g, &reflected_gap);
    let by = ctx.forward(&y, counters)?;
    let z = y.axpy(g, &state.by);
    Ok(IterState {
        k: state.k + 1,
        z,
        x,
        y,
        by_prev: state.by.clone(),
        by,
    })
}
