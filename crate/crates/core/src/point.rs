use std::ops::{Add, Deref, Index, Mul, Neg, Sub};

use nalgebra::DVector;

use crate::{Error, Result};

/// A point of the finite-dimensional Hilbert space `R^d` with the Euclidean
/// inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(DVector<f64>);

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate lists.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dimension >= 1".into()));
        }
        let p = Point(DVector::from_vec(coords));
        p.ensure_finite()?;
        Ok(p)
    }

    /// Builds a point without the finiteness check. Used for iterates, which
    /// are screened separately by the divergence guard.
    pub fn from_vec(coords: Vec<f64>) -> Self {
        Point(DVector::from_vec(coords))
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        Point(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn inner(&self, other: &Point) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.dot(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖self − other‖`.
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Point) -> Point {
        Point(&self.0 + &other.0 * alpha)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput("non-finite coordinate".into()))
        }
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for Point {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<DVector<f64>> for Point {
    fn from(v: DVector<f64>) -> Self {
        Point(v)
    }
}

impl Add<&Point> for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        Point(&self.0 + &rhs.0)
    }
}

impl Sub<&Point> for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        Point(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Point {
    type Output = Point;

    fn mul(self, rhs: f64) -> Point {
        Point(&self.0 * rhs)
    }
}

impl Neg for &Point {
    type Output = Point;

    fn neg(self) -> Point {
        Point(-&self.0)
    }
}
