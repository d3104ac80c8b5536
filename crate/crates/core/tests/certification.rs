mod common;

use approx::assert_abs_diff_eq;
use common::p;
use fbb_core::certify::{
    build_u_point, check_zero_certificate, descent_check, lyapunov, reference_from_hint, summability_report,
    u_residual, DescentCoefficients, ReferencePoint, Verdict, DESCENT_TOL,
};
use fbb_core::operators::{Beta, CocoerciveOp, MaxMonotoneOp};
use fbb_core::problems::{gen_box_lasso, gen_monotone_affine, InclusionProblem};
use fbb_core::splitting::{builtin_registry, default_stepsize, run, SolverConfig};
use fbb_core::{Error, Point};

fn certified_run(problem: &InclusionProblem, gamma: f64, max_iter: usize, unsafe_gamma: bool) -> (fbb_core::splitting::SolverTrace, ReferencePoint) {
    let reference = reference_from_hint(problem, problem.solution_hint().unwrap(), gamma).unwrap();
    let cfg = SolverConfig::new("fbb", gamma)
        .record_iterates(true)
        .with_max_iter(max_iter)
        .with_tol(1e-24)
        .allow_unsafe_gamma(unsafe_gamma);
    let trace = run(problem, builtin_registry().get("fbb").unwrap(), &cfg, None, Some(&reference)).unwrap();
    (trace, reference)
}

#[test]
fn zero_problem_residuals_vanish() {
    let problem = InclusionProblem::zero(1).unwrap();
    assert_eq!(u_residual(&p(&[3.0]), &p(&[3.0]), 0.5, &problem).unwrap(), (0.0, 0.0));
    let r = build_u_point(&p(&[0.0]), &p(&[0.0]), 0.5, &problem).unwrap();
    assert_eq!(r.z_star, p(&[0.0]));
}

#[test]
fn singleton_lift() {
    let problem = InclusionProblem::new(
        MaxMonotoneOp::normal_cone_singleton(p(&[0.0])).unwrap(),
        CocoerciveOp::scaled_identity(1, 1.0).unwrap(),
        MaxMonotoneOp::zero(1).unwrap(),
    )
    .unwrap();
    let r = build_u_point(&p(&[0.0]), &p(&[0.0]), 0.3, &problem).unwrap();
    assert_eq!(r.z_star, p(&[0.0]));
    assert_eq!(u_residual(&r.z_star, &r.x_star, 0.3, &problem).unwrap(), (0.0, 0.0));
}

#[test]
fn non_solution_has_positive_residual() {
    let problem = InclusionProblem::new(
        MaxMonotoneOp::zero(1).unwrap(),
        CocoerciveOp::scaled_identity(1, 1.0).unwrap(),
        MaxMonotoneOp::zero(1).unwrap(),
    )
    .unwrap();
    let (r1, r2) = u_residual(&p(&[1.0]), &p(&[1.0]), 0.5, &problem).unwrap();
    assert!(r1 > 0.0 || r2 > 0.0);
    assert!(r1 > 0.0);
}

#[test]
fn wrong_certificate_is_rejected() {
    let problem = gen_box_lasso(6, 0.5, 4).unwrap();
    let hint = problem.solution_hint().unwrap();
    let bad_c = hint.c_element.axpy(1.0, &Point::from_vec(vec![0.5; 6]));
    assert!(matches!(
        build_u_point(&hint.x_star, &bad_c, 0.1, &problem),
        Err(Error::PreconditionFailed(_))
    ));
    assert!(!check_zero_certificate(&problem, &hint.x_star, &bad_c, 1e-8).unwrap());
}

#[test]
fn oracle_lift_lies_in_fixed_point_set() {
    for seed in 0..4 {
        let problem = gen_box_lasso(10, 0.4, seed).unwrap();
        let beta = problem.beta().finite().unwrap();
        let r = reference_from_hint(&problem, problem.solution_hint().unwrap(), 0.3 * beta).unwrap();
        let (r1, r2) = u_residual(&r.z_star, &r.x_star, 0.3 * beta, &problem).unwrap();
        assert!(r1 <= 1e-10 && r2 <= 1e-10, "{r1} {r2}");
    }
}

#[test]
fn lyapunov_hand_value() {
    let reference = ReferencePoint {
        z_star: p(&[0.0]),
        x_star: p(&[0.0]),
        bx_star: p(&[0.0]),
        gamma: 0.2,
    };
    let v = lyapunov(&p(&[1.0]), &p(&[0.3]), &p(&[0.5]), &p(&[0.2]), &reference, 0.2, Beta::Finite(1.0));
    assert_abs_diff_eq!(v.phi, 1.0496, epsilon = 1e-14);
    assert_abs_diff_eq!(v.coefficient, 0.24, epsilon = 1e-15);
    assert!(!v.coefficient_negative);
    let at_ref = lyapunov(&p(&[0.0]), &p(&[0.0]), &p(&[0.0]), &p(&[0.0]), &reference, 0.2, Beta::Finite(1.0));
    assert_eq!(at_ref.phi, 0.0);
    let large = lyapunov(&p(&[1.0]), &p(&[0.3]), &p(&[0.5]), &p(&[0.2]), &reference, 0.9, Beta::Finite(1.0));
    assert!(large.coefficient_negative);
}

#[test]
fn descent_coefficients_at_reference_values() {
    let c = DescentCoefficients::new(0.2, Beta::Finite(1.0));
    assert_abs_diff_eq!(c.residual, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(c.forward_gap, 0.16, epsilon = 1e-15);
    assert_abs_diff_eq!(c.step, 0.25, epsilon = 1e-15);
    assert!(!DescentCoefficients::new(0.5, Beta::Finite(1.0)).in_theory());
}

#[test]
fn descent_holds_on_box_lasso() {
    let problem = gen_box_lasso(15, 0.4, 3).unwrap();
    let beta = problem.beta();
    for frac in [0.1, 0.5, 0.9, 0.99] {
        let gamma = frac * 0.4 * beta.finite().unwrap();
        let (trace, reference) = certified_run(&problem, gamma, 3000, false);
        let report = descent_check(&trace, &reference, gamma, beta, DESCENT_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "frac {frac}: {}", report.worst_violation);
        let phis: Vec<f64> = trace.rows.iter().map(|r| r.phi.unwrap()).collect();
        assert!(phis.windows(2).all(|w| w[1] <= w[0] + report.threshold));
        for (row, it) in trace.rows.iter().zip(trace.iterates.as_ref().unwrap()) {
            assert!(it.z.dist(&reference.z_star) <= phis[0].sqrt() + 1e-9);
            let _ = row;
        }
    }
}

#[test]
fn descent_and_summability_on_monotone_affine() {
    let problem = gen_monotone_affine(8, 0.7, 2).unwrap();
    let beta = problem.beta();
    let gamma = 0.5 * 0.4 * beta.finite().unwrap();
    let (trace, reference) = certified_run(&problem, gamma, 3000, false);
    assert_eq!(descent_check(&trace, &reference, gamma, beta, DESCENT_TOL).unwrap().verdict, Verdict::Pass);
    let s = summability_report(&trace, &reference, gamma, beta).unwrap();
    assert!(s.bound_applicable && s.within_bounds);
    assert!(s.xy.slack().unwrap() > 0.0);
}

#[test]
fn zero_problem_has_zero_violations() {
    let problem = InclusionProblem::zero(2)
        .unwrap()
        .with_hint(fbb_core::problems::SolutionHint {
            x_star: Point::zeros(2),
            c_element: Point::zeros(2),
        })
        .unwrap();
    let (trace, reference) = certified_run(&problem, 1.0, 10, false);
    let report = descent_check(&trace, &reference, 1.0, problem.beta(), DESCENT_TOL).unwrap();
    assert!(report.rows.iter().all(|r| r.violation == 0.0));
    let s = summability_report(&trace, &reference, 1.0, problem.beta()).unwrap();
    assert_eq!((s.xy.sum, s.dx.sum, s.forward_gap.sum), (0.0, 0.0, 0.0));
}

#[test]
fn out_of_theory_stepsize_is_marked() {
    let problem = gen_box_lasso(5, 0.5, 6).unwrap();
    let beta = problem.beta();
    let gamma = 0.6 * beta.finite().unwrap();
    let (trace, reference) = certified_run(&problem, gamma, 200, true);
    let report = descent_check(&trace, &reference, gamma, beta, DESCENT_TOL).unwrap();
    assert_eq!(report.verdict, Verdict::OutOfTheory);
    assert_eq!(report.verdict.as_str(), "out-of-theory");
    let s = summability_report(&trace, &reference, gamma, beta).unwrap();
    assert!(!s.bound_applicable);
    assert!(s.xy.bound.is_none());
}

#[test]
fn descent_requires_iterates_and_fbb() {
    let problem = gen_box_lasso(4, 0.5, 1).unwrap();
    let gamma = default_stepsize(problem.beta(), "fbb").unwrap();
    let reference = reference_from_hint(&problem, problem.solution_hint().unwrap(), gamma).unwrap();
    let plain = run(&problem, builtin_registry().get("fbb").unwrap(), &SolverConfig::new("fbb", gamma), None, None).unwrap();
    assert!(matches!(
        descent_check(&plain, &reference, gamma, problem.beta(), DESCENT_TOL),
        Err(Error::MissingIterates)
    ));
    let dy_cfg = SolverConfig::new("dy", gamma).record_iterates(true);
    let dy = run(&problem, builtin_registry().get("dy").unwrap(), &dy_cfg, None, None).unwrap();
    assert!(matches!(
        descent_check(&dy, &reference, gamma, problem.beta(), DESCENT_TOL),
        Err(Error::PreconditionFailed(_))
    ));
}
