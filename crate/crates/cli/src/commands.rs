//! Subcommand implementations. Each returns the process exit code; CSV goes
//! to a file or to `out`, summary lines to `out` (or `log` when `out`
//! already carries CSV).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use fbb_core::certify::{build_u_point, descent_check, gamma_in_theory, summability_report, ReferencePoint, Verdict};
use fbb_core::problems::{gen_affine_feasibility, gen_box_lasso, gen_monotone_affine, oracle_solve, InclusionProblem};
use fbb_core::splitting::{builtin_registry, run, SolverConfig, SolverTrace, SplittingMethod, Termination};
use fbb_core::Error;

use crate::args::{CertifyArgs, CompareArgs, FrontierArgs, GenArgs, PlotArgs, ProblemKind, RunArgs, SolveArgs};
use crate::csv::{certify_csv, num, parse_trace, trace_csv, COMPARE_HEADER, FRONTIER_HEADER};
use crate::error::{CliError, CliResult, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::problem_file;
use crate::svg::render_residuals;

/// Tolerance of oracle runs made when a problem file has no certificate.
const ORACLE_TOL: f64 = 1e-12;
/// Relative distance to 2β/5 under which a frontier row is "at-bound".
const AT_BOUND_RTOL: f64 = 1e-12;

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max-iterations",
        Termination::Diverged { .. } => "diverged",
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn lookup(name: &str) -> CliResult<&'static dyn SplittingMethod> {
    builtin_registry().get(name).map_err(|_| {
        let known: Vec<&str> = builtin_registry().names().collect();
        CliError::Usage(format!("unknown method `{name}` (expected one of: {})", known.join(", ")))
    })
}

fn config(method: &dyn SplittingMethod, gamma: f64, run: &RunArgs, record: bool) -> CliResult<SolverConfig> {
    check_positive("tol", run.tol)?;
    check_positive("gamma", gamma)?;
    if run.max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be >= 1".into()));
    }
    Ok(SolverConfig::new(method.name(), gamma)
        .with_tol(run.tol)
        .with_max_iter(run.max_iter)
        .with_stop_rule(run.stop_rule.into())
        .allow_unsafe_gamma(run.allow_unsafe_gamma)
        .record_iterates(record))
}

/// Lifted reference from the stored certificate, or from an oracle run.
fn reference_point(problem: &InclusionProblem, gamma: f64) -> CliResult<ReferencePoint> {
    let hint = match problem.solution_hint() {
        Some(h) => h.clone(),
        None => oracle_solve(problem, ORACLE_TOL)?.hint(),
    };
    Ok(build_u_point(&hint.x_star, &hint.c_element, gamma, problem)?)
}

pub fn gen(args: &GenArgs, seed: u64, out: &mut dyn Write) -> CliResult<i32> {
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be >= 1".into()));
    }
    let (name, problem) = match args.kind {
        ProblemKind::BoxLasso => ("box-lasso", gen_box_lasso(args.dim, args.density, seed)),
        ProblemKind::AffineFeasibility => ("affine-feasibility", gen_affine_feasibility(args.dim, seed)),
        ProblemKind::MonotoneAffine => ("monotone-affine", gen_monotone_affine(args.dim, args.skew, seed)),
    };
    let problem = problem?;
    problem_file::save(&args.out, &problem)?;
    emit(
        out,
        &format!(
            "kind={name} dim={} seed={seed} beta={} certificate={} out={}\n",
            problem.dim(),
            problem.beta(),
            problem.solution_hint().is_some(),
            args.out.display()
        ),
    )?;
    Ok(EXIT_OK)
}

pub fn solve(args: &SolveArgs, seed: u64, out: &mut dyn Write) -> CliResult<i32> {
    let problem = problem_file::load(&args.run.problem, seed)?;
    let method = lookup(&args.method)?;
    let gamma = args.run.gamma.unwrap_or_else(|| method.default_stepsize(problem.beta()));
    let cfg = config(method, gamma, &args.run, false)?;
    let reference = match (method.name(), problem.solution_hint()) {
        ("fbb", Some(h)) => Some(build_u_point(&h.x_star, &h.c_element, gamma, &problem)?),
        _ => None,
    };
    let started = Instant::now();
    let trace = run(&problem, method, &cfg, None, reference.as_ref())?;
    let wall_ms = if args.run.timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    if let Some(path) = &args.trace {
        write_file(path, &trace_csv(&trace.rows, args.run.timing))?;
    }
    let mut line = summary(&trace, seed, wall_ms);
    if let Some(h) = problem.solution_hint() {
        line.push_str(&format!(" dist_to_certificate={}", num(trace.x_final.dist(&h.x_star))));
    }
    if args.print_x {
        let xs: Vec<String> = trace.x_final.iter().map(|v| num(*v)).collect();
        line.push_str(&format!(" x={}", xs.join(";")));
    }
    line.push('\n');
    emit(out, &line)?;
    Ok(if trace.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn summary(trace: &SolverTrace, seed: u64, wall_ms: f64) -> String {
    let last = trace.final_row();
    format!(
        "method={} gamma={} seed={seed} iterations={} converged={} termination={} stop_rule={} \
         final_paper_error={} final_res_xy={} final_res_dx={} forward_evals={} resolvent_evals={} wall_ms={}",
        trace.method,
        num(trace.gamma),
        trace.iterations,
        trace.converged,
        termination_name(trace.termination),
        trace.stop_rule,
        num(last.map_or(f64::NAN, |r| r.paper_error)),
        num(last.map_or(f64::NAN, |r| r.res_xy)),
        num(last.map_or(f64::NAN, |r| r.res_dx)),
        trace.counters.forward,
        trace.counters.resolvent,
        num(wall_ms),
    )
}

pub fn compare(args: &CompareArgs, seed: u64, out: &mut dyn Write, log: &mut dyn Write) -> CliResult<i32> {
    let problem = problem_file::load(&args.run.problem, seed)?;
    if args.methods.is_empty() {
        return Err(CliError::Usage("--method needs at least one method".into()));
    }
    let methods = args.methods.iter().map(|m| lookup(m)).collect::<CliResult<Vec<_>>>()?;
    let mut csv = format!("{COMPARE_HEADER}\n");
    let mut all_converged = true;
    for method in methods {
        if let Err(Error::Inapplicable { .. }) = method.check_applicable(&problem) {
            csv.push_str(&format!("{},n/a,n/a,n/a,n/a,n/a,n/a,n/a\n", method.name()));
            continue;
        }
        let gamma = args.run.gamma.unwrap_or_else(|| method.default_stepsize(problem.beta()));
        let cfg = config(method, gamma, &args.run, false)?;
        let started = Instant::now();
        let trace = run(&problem, method, &cfg, None, None)?;
        let wall_ns = if args.run.timing { started.elapsed().as_nanos() } else { 0 };
        all_converged &= trace.converged;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            method.name(),
            num(gamma),
            trace.converged,
            trace.iterations,
            trace.counters.forward,
            trace.counters.resolvent,
            num(trace.final_row().map_or(f64::NAN, |r| r.res_xy)),
            wall_ns
        ));
    }
    let status = if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    let line = format!("compare seed={seed} methods={} all_converged={all_converged}\n", args.methods.join(","));
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            emit(out, &line)?;
        }
        None => {
            emit(out, &csv)?;
            emit(log, &line)?;
        }
    }
    Ok(status)
}

pub fn certify(args: &CertifyArgs, seed: u64, out: &mut dyn Write, log: &mut dyn Write) -> CliResult<i32> {
    let problem = problem_file::load(&args.run.problem, seed)?;
    check_positive("descent-tol", args.descent_tol)?;
    let method = lookup("fbb")?;
    let beta = problem.beta();
    let gamma = args.run.gamma.unwrap_or_else(|| method.default_stepsize(beta));
    let cfg = config(method, gamma, &args.run, true)?;
    let reference = reference_point(&problem, gamma)?;
    let trace = run(&problem, method, &cfg, None, Some(&reference))?;
    let report = descent_check(&trace, &reference, gamma, beta, args.descent_tol)?;
    let sums = summability_report(&trace, &reference, gamma, beta)?;
    let bound = |b: Option<f64>| b.map_or_else(|| "bound-inapplicable".to_string(), num);
    let line = format!(
        "certify seed={seed} gamma={} beta={beta} in_theory={} verdict={} phi1={} worst_violation={} threshold={} \
         steps={} termination={} sum_xy={} bound_xy={} sum_dx={} bound_dx={} sum_forward_gap={} bound_forward_gap={}\n",
        num(gamma),
        gamma_in_theory(gamma, beta),
        report.verdict.as_str(),
        num(report.phi1),
        num(report.worst_violation),
        num(report.threshold),
        report.rows.len(),
        termination_name(trace.termination),
        num(sums.xy.sum),
        bound(sums.xy.bound),
        num(sums.dx.sum),
        bound(sums.dx.bound),
        num(sums.forward_gap.sum),
        bound(sums.forward_gap.bound),
    );
    let csv = certify_csv(&report.rows);
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            emit(out, &line)?;
        }
        None => {
            emit(out, &csv)?;
            emit(log, &line)?;
        }
    }
    Ok(match report.verdict {
        Verdict::Pass | Verdict::OutOfTheory => EXIT_OK,
        Verdict::Fail => EXIT_NOT_CONVERGED,
    })
}

pub fn frontier(args: &FrontierArgs, seed: u64, out: &mut dyn Write, log: &mut dyn Write) -> CliResult<i32> {
    let problem = problem_file::load(&args.problem, seed)?;
    check_positive("tol", args.tol)?;
    if args.max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be >= 1".into()));
    }
    let method = lookup("fbb")?;
    let bound = method.stepsize_bound(problem.beta());
    let gammas: Vec<f64> = match (&args.gammas, bound) {
        (Some(g), _) => g.clone(),
        (None, Some(b)) => args.fractions.iter().map(|f| f * b).collect(),
        (None, None) => {
            return Err(CliError::Usage(
                "B has infinite beta, so there is no stepsize bound; pass --gammas".into(),
            ))
        }
    };
    if gammas.is_empty() {
        return Err(CliError::Usage("empty stepsize grid".into()));
    }
    for g in &gammas {
        check_positive("gammas", *g)?;
    }
    let mut csv = format!("{FRONTIER_HEADER}\n");
    let mut converged = 0;
    for &gamma in &gammas {
        let cfg = SolverConfig::new("fbb", gamma)
            .with_tol(args.tol)
            .with_max_iter(args.max_iter)
            .with_stop_rule(args.stop_rule.into())
            .allow_unsafe_gamma(true);
        let trace = run(&problem, method, &cfg, None, None)?;
        converged += usize::from(trace.converged);
        let (fraction, boundary) = match bound {
            Some(b) => {
                let flag = if (gamma - b).abs() <= AT_BOUND_RTOL * b {
                    "at-bound"
                } else if gamma < b {
                    "below-bound"
                } else {
                    "above-bound"
                };
                (num(gamma / b), flag)
            }
            None => (String::new(), "unbounded"),
        };
        csv.push_str(&format!(
            "{},{fraction},{},{},{},{boundary}\n",
            num(gamma),
            trace.converged,
            trace.iterations,
            termination_name(trace.termination)
        ));
    }
    let bound_text = bound.map_or_else(|| "inf".to_string(), num);
    let line = format!(
        "frontier seed={seed} bound={bound_text} points={} converged={converged}\n",
        gammas.len()
    );
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            emit(out, &line)?;
        }
        None => {
            emit(out, &csv)?;
            emit(log, &line)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn plot(args: &PlotArgs, out: &mut dyn Write) -> CliResult<i32> {
    let text = fs::read_to_string(&args.trace).map_err(|e| CliError::io(&args.trace, e))?;
    let cols = parse_trace(&text).map_err(|message| CliError::Parse {
        path: args.trace.clone(),
        message,
    })?;
    write_file(&args.out, &render_residuals(&cols))?;
    emit(out, &format!("plot rows={} out={}\n", cols.k.len(), args.out.display()))?;
    Ok(EXIT_OK)
}

