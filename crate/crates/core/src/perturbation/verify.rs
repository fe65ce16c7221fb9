//! Dense-sampling check of the C^1 certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::BlendedApproximant;
use crate::error::{Error, Result};
use crate::modulus::{BetaCalibration, Modulus};

/// Absolute slack for roundoff when the bound itself is zero or tiny.
pub const C1_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Check {
    pub samples: usize,
    /// `beta_f(delta)` for the declared modulus.
    pub bound: f64,
    pub max_value_error: f64,
    /// Frobenius norm of `Dg - Df`.
    pub max_jacobian_error: f64,
    pub violations: usize,
}

impl C1Check {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `|g - f|` and `|Dg - Df|` at uniform random points and compares
/// both with `beta_f(delta)` computed from `omega`.
pub fn verify_c1(g: &BlendedApproximant, omega: &Modulus, samples: usize, seed: u64) -> Result<C1Check> {
    let d = g.grid().d;
    let bound = BetaCalibration::new(d, omega.clone())?.beta_f(g.grid().delta_target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
    let errors = points
        .par_iter()
        .map(|x| {
            let (gv, gj) = g.eval_g(x)?;
            let (fv, fj) = g.source().value_and_jacobian(x)?;
            let ve = gv.iter().zip(&fv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok((ve, gj.frobenius_distance(&fj)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    if errors.iter().any(|e| !e.0.is_finite() || !e.1.is_finite()) {
        return Err(Error::Numerical("non-finite error sample".into()));
    }
    Ok(C1Check {
        samples,
        bound,
        max_value_error: errors.iter().map(|e| e.0).fold(0.0, f64::max),
        max_jacobian_error: errors.iter().map(|e| e.1).fold(0.0, f64::max),
        violations: errors.iter().filter(|e| e.0.max(e.1) > bound + C1_SLACK).count(),
    })
}
