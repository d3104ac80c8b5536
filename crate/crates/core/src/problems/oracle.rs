//! Reference solutions by two independent routes: a long Davis–Yin run and,
//! for small polyhedral instances, brute-force enumeration of KKT faces.

use nalgebra::DVector;

use super::{InclusionProblem, SolutionHint};
use crate::certify::{check_zero_certificate, CERTIFICATE_TOL};
use crate::linalg::Matrix;
use crate::operators::{Beta, MonotoneKind};
use crate::splitting::{dy_init, dy_step, EvalCounters, InitPoint, StepContext};
use crate::{Error, Point, Result};

/// Largest dimension handled by [`active_set_enumeration`].
pub const ENUMERATION_MAX_DIM: usize = 12;
const ORACLE_MAX_DIM: usize = 500;
const DY_MAX_ITER: usize = 1_000_000;
/// Required agreement between the two routes when both apply.
const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRoute {
    DavisYin,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x_star: Point,
    pub c_element: Point,
    pub route: OracleRoute,
    /// Davis–Yin iterations (0 for enumeration).
    pub iterations: usize,
    /// `‖x_dy − x_enum‖` when both routes ran.
    pub cross_check: Option<f64>,
}

impl OracleSolution {
    pub fn hint(&self) -> SolutionHint {
        SolutionHint {
            x_star: self.x_star.clone(),
            c_element: self.c_element.clone(),
        }
    }
}

/// Davis–Yin with γ = β (γ = 1 for infinite β) from the origin until
/// `‖x − y‖ ≤ tol`, then `c = (z − x)/γ ∈ C x` from the `C`-resolvent step.
pub fn dy_long_run(problem: &InclusionProblem, tol: f64, max_iter: usize) -> Result<OracleSolution> {
    let gamma = match problem.beta() {
        Beta::Finite(b) => b,
        Beta::Infinite => 1.0,
    };
    let ctx = StepContext::new(problem, gamma)?;
    let mut counters = EvalCounters::default();
    let mut state = dy_init(&ctx, &InitPoint::zeros(problem.dim()), &mut counters)?;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = dy_step(&state, &ctx, &mut counters)?;
        let done = next.x.dist(&next.y) <= tol && next.x.dist(&state.x) <= tol;
        state = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OracleFailed(format!(
            "Davis-Yin did not reach tol {tol} in {max_iter} iterations"
        )));
    }
    let c_element = &(&state.z - &state.x) * (1.0 / gamma);
    Ok(OracleSolution {
        x_star: state.x,
        c_element,
        route: OracleRoute::DavisYin,
        iterations: state.k,
        cross_check: None,
    })
}

/// Separable nonsmooth part `h(t) = λ|t| + ι_[lo,hi](t)` of one coordinate.
#[derive(Debug, Clone, Copy)]
struct Separable {
    weight: f64,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy)]
enum Face {
    Fixed(f64),
    Free { lo: f64, hi: f64, slope: f64 },
}

impl Separable {
    fn faces(&self) -> Vec<Face> {
        let mut points = vec![self.lo];
        if self.weight > 0.0 && self.lo < 0.0 && 0.0 < self.hi {
            points.push(0.0);
        }
        if self.hi > self.lo {
            points.push(self.hi);
        }
        let mut faces = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            if p.is_finite() {
                faces.push(Face::Fixed(p));
            }
            if let Some(&next) = points.get(i + 1) {
                let mid = if p.is_finite() && next.is_finite() {
                    0.5 * (p + next)
                } else if p.is_finite() {
                    p + 1.0
                } else {
                    next - 1.0
                };
                faces.push(Face::Free {
                    lo: p,
                    hi: next,
                    slope: self.weight * sign(mid),
                });
            }
        }
        faces
    }

    /// `[h'₋(p), h'₊(p)]`.
    fn subdifferential(&self, p: f64) -> (f64, f64) {
        let left = if p <= self.lo {
            f64::NEG_INFINITY
        } else if p == 0.0 {
            -self.weight
        } else {
            self.weight * sign(p)
        };
        let right = if p >= self.hi {
            f64::INFINITY
        } else if p == 0.0 {
            self.weight
        } else {
            self.weight * sign(p)
        };
        (left, right)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Reduces the problem to `0 ∈ L x + r + ∂h(x)` with separable `h`, when the
/// operator kinds allow it.
fn polyhedral_form(problem: &InclusionProblem) -> Option<(Matrix, DVector<f64>, Vec<Separable>, bool)> {
    let d = problem.dim();
    let (lb, rb) = problem.b().linear_part()?;
    let (mut l, mut r) = (lb, rb);
    let mut weight = 0.0;
    let a_is_l1 = match problem.a().kind() {
        MonotoneKind::L1 { weight: w } => {
            weight = *w;
            true
        }
        _ => {
            let (la, ra) = problem.a().linear_part()?;
            l += la;
            r += ra;
            false
        }
    };
    let bounds: Vec<(f64, f64)> = match problem.c().kind() {
        MonotoneKind::Zero => vec![(f64::NEG_INFINITY, f64::INFINITY); d],
        MonotoneKind::NormalConeBox { lo, hi } => lo.iter().copied().zip(hi.iter().copied()).collect(),
        _ => return None,
    };
    let parts = bounds
        .into_iter()
        .map(|(lo, hi)| Separable { weight, lo, hi })
        .collect();
    Some((l, r, parts, a_is_l1))
}

/// Brute-force KKT enumeration for `d ≤ 12` when `A` is zero, affine or an
/// ℓ₁ subdifferential, `B` is affine and `C` is zero or a box normal cone.
/// Every combination of faces (fixed at a breakpoint, or free between two)
/// is solved as a linear system; the candidate satisfying all sign
/// conditions is returned. `Ok(None)` when the instance is out of reach,
/// including when no face is feasible and some face system was singular.
pub fn active_set_enumeration(problem: &InclusionProblem) -> Result<Option<OracleSolution>> {
    let d = problem.dim();
    if d > ENUMERATION_MAX_DIM {
        return Ok(None);
    }
    let Some((l, r, parts, a_is_l1)) = polyhedral_form(problem) else {
        return Ok(None);
    };
    let faces: Vec<Vec<Face>> = parts.iter().map(Separable::faces).collect();
    let total: usize = faces.iter().map(Vec::len).product();
    let scale = 1.0 + l.amax() + r.amax();
    let feas_tol = 1e-11 * scale;

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut singular = false;
    let mut counter = vec![0usize; d];
    for _ in 0..total {
        if let Some((violation, x)) = solve_face(&l, &r, &parts, &faces, &counter, feas_tol, &mut singular) {
            if best.as_ref().is_none_or(|(v, _)| violation < *v) {
                best = Some((violation, x));
            }
        }
        // mixed-radix increment
        for (i, slot) in counter.iter_mut().enumerate() {
            *slot += 1;
            if *slot < faces[i].len() {
                break;
            }
            *slot = 0;
        }
    }
    let Some((_, x)) = best else {
        if singular {
            return Ok(None);
        }
        return Err(Error::OracleFailed("no face combination satisfies the KKT conditions".into()));
    };

    // Split the separable subgradient w = −(Lx + r) into its ℓ₁ and box parts.
    let w = -(&l * &x + &r);
    let c_element = DVector::from_fn(d, |i, _| {
        let part = parts[i];
        let xi = x[i];
        let interior = xi > part.lo && xi < part.hi;
        if interior {
            0.0
        } else if !a_is_l1 {
            w[i]
        } else if xi != 0.0 {
            w[i] - part.weight * sign(xi)
        } else {
            w[i] - w[i].clamp(-part.weight, part.weight)
        }
    });
    Ok(Some(OracleSolution {
        x_star: Point::from_dvector(x),
        c_element: Point::from_dvector(c_element),
        route: OracleRoute::Enumeration,
        iterations: 0,
        cross_check: None,
    }))
}

/// Solves one face combination; returns the worst sign-condition violation
/// (≤ 0 when feasible) and the candidate, or `None` if infeasible. Sets
/// `singular` when the face system could not be solved.
fn solve_face(
    l: &Matrix,
    r: &DVector<f64>,
    parts: &[Separable],
    faces: &[Vec<Face>],
    counter: &[usize],
    tol: f64,
    singular: &mut bool,
) -> Option<(f64, DVector<f64>)> {
    let d = parts.len();
    let mut x = DVector::zeros(d);
    let mut free = Vec::with_capacity(d);
    let mut slopes = Vec::with_capacity(d);
    for i in 0..d {
        match faces[i][counter[i]] {
            Face::Fixed(p) => x[i] = p,
            Face::Free { slope, .. } => {
                free.push(i);
                slopes.push(slope);
            }
        }
    }
    if !free.is_empty() {
        let n = free.len();
        let fixed_part = l * &x;
        let sub = Matrix::from_fn(n, n, |a, b| l[(free[a], free[b])]);
        let rhs = DVector::from_fn(n, |a, _| -r[free[a]] - fixed_part[free[a]] - slopes[a]);
        let Some(xf) = sub.lu().solve(&rhs) else {
            *singular = true;
            return None;
        };
        for (a, &i) in free.iter().enumerate() {
            x[i] = xf[a];
        }
    }
    let w = -(l * &x + r);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..d {
        let v = match faces[i][counter[i]] {
            Face::Free { lo, hi, .. } => (lo - x[i]).max(x[i] - hi),
            Face::Fixed(p) => {
                let (left, right) = parts[i].subdifferential(p);
                (left - w[i]).max(w[i] - right)
            }
        };
        worst = worst.max(v);
    }
    (worst <= tol).then_some((worst, x))
}

/// Certified reference solution of `0 ∈ Ax + Bx + Cx`.
///
/// Runs Davis–Yin to `tol` and validates the certificate by graph
/// membership. For small polyhedral instances the KKT enumeration is run as
/// well; the two must agree to 1e-8, and the enumeration can stand in when
/// the Davis–Yin certificate fails.
pub fn oracle_solve(problem: &InclusionProblem, tol: f64) -> Result<OracleSolution> {
    if problem.dim() > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "oracle supports d <= {ORACLE_MAX_DIM}, got {}",
            problem.dim()
        )));
    }
    if !(tol >= 1e-12 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("oracle tol must be >= 1e-12, got {tol}")));
    }
    let dy = dy_long_run(problem, tol, DY_MAX_ITER)
        .and_then(|s| {
            if check_zero_certificate(problem, &s.x_star, &s.c_element, CERTIFICATE_TOL)? {
                Ok(s)
            } else {
                Err(Error::OracleFailed("Davis-Yin certificate rejected".into()))
            }
        });
    let enumerated = active_set_enumeration(problem)?
        .map(|s| {
            if check_zero_certificate(problem, &s.x_star, &s.c_element, CERTIFICATE_TOL)? {
                Ok(s)
            } else {
                Err(Error::OracleFailed("enumeration certificate rejected".into()))
            }
        })
        .transpose();

    match (dy, enumerated) {
        (Ok(mut dy), Ok(Some(en))) => {
            let gap = dy.x_star.dist(&en.x_star);
            if gap > CROSS_CHECK_TOL {
                return Err(Error::OracleFailed(format!(
                    "Davis-Yin and enumeration disagree by {gap:.3e}"
                )));
            }
            dy.cross_check = Some(gap);
            Ok(dy)
        }
        (Ok(dy), Ok(None)) => Ok(dy),
        (Err(_), Ok(Some(en))) => Ok(en),
        (Err(e), _) => Err(e),
        (Ok(_), Err(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faces_of_nonnegative_lasso_coordinate() {
        let s = Separable {
            weight: 0.5,
            lo: 0.0,
            hi: 1.0,
        };
        let f = s.faces();
        assert_eq!(f.len(), 3);
        assert_eq!(s.subdifferential(0.0), (f64::NEG_INFINITY, 0.5));
        assert_eq!(s.subdifferential(1.0), (0.5, f64::INFINITY));
    }

    #[test]
    fn faces_of_symmetric_box_with_kink() {
        let s = Separable {
            weight: 1.0,
            lo: -1.0,
            hi: 2.0,
        };
        // -1, (-1,0), 0, (0,2), 2
        assert_eq!(s.faces().len(), 5);
        assert_eq!(s.subdifferential(0.0), (-1.0, 1.0));
        assert_eq!(s.subdifferential(-1.0), (f64::NEG_INFINITY, -1.0));
    }

    #[test]
    fn unconstrained_faces() {
        let s = Separable {
            weight: 0.0,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        };
        assert_eq!(s.faces().len(), 1);
    }
}
