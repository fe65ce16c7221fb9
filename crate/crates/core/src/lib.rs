//! Critical sets of C^1 maps `f: [0,1]^d -> R^m`.
//!
//! [`perturbation`] builds a blended approximant `g` that is C^1-close to
//! `f` and whose critical set sits inside the zero sets of one polynomial per
//! simplex; [`perturbation::UpperBound`] turns the mesh size into a bound on
//! `H^{d-1}` of that set. [`adversary`] builds a map for which no C^1-close
//! perturbation does much better, and [`measure`] estimates the Hausdorff
//! measures involved.

pub mod adversary;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod expr;
pub mod map;
pub mod measure;
pub mod modulus;
pub mod perturbation;
pub mod poly;

pub use error::{Error, Result};
pub use expr::{parse_function, FunctionDef};
pub use map::{DifferentiableMap, Jacobian};
pub use modulus::Modulus;
