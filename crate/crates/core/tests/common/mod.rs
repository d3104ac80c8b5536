#![allow(dead_code)]

use fbb_core::linalg::{gaussian_matrix, gaussian_vector};
use fbb_core::operators::{CocoerciveOp, MaxMonotoneOp};
use fbb_core::{Matrix, Point};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

/// One instance of every maximal monotone kind in dimension `d`.
pub fn monotone_catalog(d: usize, seed: u64) -> Vec<MaxMonotoneOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, d, d);
    let psd = (&g.transpose() * &g) * 0.5;
    let psd = (&psd + psd.transpose()) * 0.5;
    let h = gaussian_matrix(&mut rng, d, d);
    let mono = &psd * 0.3 + (&h - h.transpose()) * 0.5;
    let e = gaussian_matrix(&mut rng, (d / 2).max(1), d);
    let rhs = &e * gaussian_vector(&mut rng, d);
    let lo: Vec<f64> = (0..d).map(|i| -0.5 - 0.1 * i as f64).collect();
    let hi: Vec<f64> = (0..d).map(|i| 0.25 + 0.2 * i as f64).collect();
    vec![
        MaxMonotoneOp::zero(d).unwrap(),
        MaxMonotoneOp::l1(d, 0.7).unwrap(),
        MaxMonotoneOp::normal_cone_box(lo, hi).unwrap(),
        MaxMonotoneOp::normal_cone_affine(e, rhs).unwrap(),
        MaxMonotoneOp::normal_cone_singleton(Point::from_dvector(gaussian_vector(&mut rng, d))).unwrap(),
        MaxMonotoneOp::quadratic_gradient(psd, gaussian_vector(&mut rng, d)).unwrap(),
        MaxMonotoneOp::affine_monotone(mono, gaussian_vector(&mut rng, d)).unwrap(),
    ]
}

/// One instance of every cocoercive kind in dimension `d`.
pub fn cocoercive_catalog(d: usize, seed: u64) -> Vec<CocoerciveOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, d, d);
    let q: Matrix = &g.transpose() * &g;
    let q = (&q + q.transpose()) * 0.5;
    vec![
        CocoerciveOp::zero(d).unwrap(),
        CocoerciveOp::scaled_identity(d, 2.5).unwrap(),
        CocoerciveOp::quadratic_gradient(q, gaussian_vector(&mut rng, d)).unwrap(),
        CocoerciveOp::huber_gradient(d, 0.3).unwrap(),
    ]
}

pub fn zeros(d: usize) -> DVector<f64> {
    DVector::zeros(d)
}
