//! Sampling checks of the inequalities that define resolvents and
//! cocoercive operators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Beta, CocoerciveOp, MaxMonotoneOp};
use crate::linalg::gaussian_vector;
use crate::{Error, Point, Result};

/// Scaled pass threshold: a sample passes if its violation is at most
/// `PROPERTY_TOL · (1 + ‖u − v‖²)`.
pub const PROPERTY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    /// Largest raw violation over all samples (negative when every sample
    /// satisfies the inequality strictly).
    pub max_violation: f64,
    /// Largest violation divided by `1 + ‖u − v‖²`.
    pub max_scaled_violation: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub passed: bool,
}

fn sample_pairs(dim: usize, n_samples: usize, seed: u64) -> Result<impl Iterator<Item = (Point, Point)>> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_samples).map(move |_| {
        let u = Point::from_dvector(gaussian_vector(&mut rng, dim));
        let v = Point::from_dvector(gaussian_vector(&mut rng, dim));
        (u, v)
    }))
}

fn finish(violations: impl Iterator<Item = (f64, f64)>, n_samples: usize, seed: u64) -> PropertyReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_scaled = f64::NEG_INFINITY;
    for (v, scale) in violations {
        max_violation = max_violation.max(v);
        max_scaled = max_scaled.max(v / scale);
    }
    PropertyReport {
        max_violation,
        max_scaled_violation: max_scaled,
        n_samples,
        seed,
        passed: max_scaled <= PROPERTY_TOL,
    }
}

/// Samples `‖Ju − Jv‖² − ⟨u − v, Ju − Jv⟩` over Gaussian pairs.
pub fn certify_fne(op: &MaxMonotoneOp, gamma: f64, n_samples: usize, seed: u64) -> Result<PropertyReport> {
    let resolvent = op.resolvent(gamma)?;
    let mut out = Vec::with_capacity(n_samples);
    for (u, v) in sample_pairs(op.dim(), n_samples, seed)? {
        let ju = resolvent.apply(&u)?;
        let jv = resolvent.apply(&v)?;
        let du = &u - &v;
        let dj = &ju - &jv;
        out.push((dj.norm_sq() - du.inner(&dj), 1.0 + du.norm_sq()));
    }
    Ok(finish(out.into_iter(), n_samples, seed))
}

/// Samples `β‖Bx − By‖² − ⟨x − y, Bx − By⟩` with the operator's declared β.
pub fn certify_cocoercive(op: &CocoerciveOp, n_samples: usize, seed: u64) -> Result<PropertyReport> {
    let mut out = Vec::with_capacity(n_samples);
    for (x, y) in sample_pairs(op.dim(), n_samples, seed)? {
        let bx = op.forward(&x)?;
        let by = op.forward(&y)?;
        let dx = &x - &y;
        let db = &bx - &by;
        let gap = db.norm_sq();
        let beta_term = match op.beta() {
            Beta::Finite(b) => b * gap,
            // β·0 under the infinite-β convention; any nonzero gap is a
            // violation.
            Beta::Infinite if gap == 0.0 => 0.0,
            Beta::Infinite => f64::INFINITY,
        };
        out.push((beta_term - dx.inner(&db), 1.0 + dx.norm_sq()));
    }
    Ok(finish(out.into_iter(), n_samples, seed))
}

/// `2⟨x−y, z−w⟩ − (‖x−w‖² + ‖y−z‖² − ‖x−z‖² − ‖y−w‖²)`, zero in exact
/// arithmetic.
pub fn polarization_gap(x: &Point, y: &Point, z: &Point, w: &Point) -> f64 {
    let lhs = 2.0 * (x - y).inner(&(z - w));
    let rhs = x.dist_sq(w) + y.dist_sq(z) - x.dist_sq(z) - y.dist_sq(w);
    lhs - rhs
}
