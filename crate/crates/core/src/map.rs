//! The evaluable-map abstraction shared by parsed functions, blended
//! approximants and the adversarial construction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An `m x d` Jacobian. Rows are output components, columns input variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian(pub DMatrix<f64>);

impl Jacobian {
    pub fn zeros(m: usize, d: usize) -> Self {
        Jacobian(DMatrix::zeros(m, d))
    }

    pub fn from_row_slice(m: usize, d: usize, data: &[f64]) -> Self {
        Jacobian(DMatrix::from_row_slice(m, d, data))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn frobenius_distance(&self, other: &Jacobian) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// The m-th (smallest) singular value of the `m x d` matrix, `m <= d`.
    pub fn sigma_min(&self) -> f64 {
        let m = self.rows();
        if m == 1 {
            return self.0.norm();
        }
        let sv = self.0.clone().singular_values();
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `det(J * I_{d x m})`: the determinant of the leading `m x m` block.
    pub fn leading_minor_det(&self) -> f64 {
        let m = self.rows();
        match m {
            1 => self.0[(0, 0)],
            2 => self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)],
            _ => self.0.view((0, 0), (m, m)).into_owned().determinant(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// A map `[0,1]^d -> R^m` with an exact Jacobian.
///
/// Implementations must be pure: evaluation never mutates shared state, so
/// a single instance can be evaluated from many threads.
pub trait DifferentiableMap: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)>;

    fn jacobian(&self, x: &[f64]) -> Result<Jacobian> {
        self.value_and_jacobian(x).map(|(_, j)| j)
    }
}

impl<T: DifferentiableMap + ?Sized> DifferentiableMap for std::sync::Arc<T> {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).value(x)
    }
    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        (**self).value_and_jacobian(x)
    }
}

impl<T: DifferentiableMap + ?Sized> DifferentiableMap for &T {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).value(x)
    }
    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        (**self).value_and_jacobian(x)
    }
}

/// Rejects points outside `[0,1]^d` (no clamping) and wrong arity.
pub fn check_point(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Dimension(format!(
            "point has {} coordinates, expected {d}",
            x.len()
        )));
    }
    if x.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(Error::OutsideCube { point: x.to_vec() });
    }
    Ok(())
}

/// Euclidean norm of the difference of two vectors.
pub fn vec_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
