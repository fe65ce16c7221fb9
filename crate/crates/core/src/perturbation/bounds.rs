//! Upper bounds on `N_f(eps)`.

use serde::Serialize;

use crate::decomposition::factorial;
use crate::error::{Error, Result};
use crate::map::DifferentiableMap;
use crate::modulus::{blend_constant, BetaCalibration, Modulus, ModulusKind, DEFAULT_TOL_REL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub d: usize,
    pub m: usize,
    pub epsilon: f64,
    /// `beta_f^{-1}(eps)`.
    pub delta: f64,
    /// `d 2^(2m+d-1) d! / delta`.
    pub theorem: f64,
    /// `gamma = 2 + 4 d^(d+1/2) (d+1)^4`.
    pub gamma: f64,
    /// `d^(3/2) 2^(3d-1) d! / Psi(eps / gamma)`, when `delta <= 1/sqrt(d)`.
    pub remark: Option<f64>,
    /// `d^(3/2) 2^(3d-1) d! (gamma C / eps)^(1/alpha)` for Hoelder moduli.
    pub holder_closed_form: Option<f64>,
    pub critical_set_free: bool,
}

pub fn theorem_bound(d: usize, m: usize, delta: f64) -> f64 {
    d as f64 * 2f64.powi((2 * m + d - 1) as i32) * factorial(d) / delta
}

pub fn gamma_remark(d: usize) -> f64 {
    2.0 + blend_constant(d)
}

pub fn remark_bound(d: usize, psi: f64) -> f64 {
    remark_prefactor(d) / psi
}

fn remark_prefactor(d: usize) -> f64 {
    (d as f64).powf(1.5) * 2f64.powi(3 * d as i32 - 1) * factorial(d)
}

pub fn upper_bound_n(f: &dyn DifferentiableMap, eps: f64, omega: &Modulus) -> Result<UpperBound> {
    UpperBound::compute(f.input_dim(), f.output_dim(), eps, omega)
}

impl UpperBound {
    pub fn compute(d: usize, m: usize, eps: f64, omega: &Modulus) -> Result<Self> {
        if m == 0 || m > d {
            return Err(Error::Argument(format!("need 1 <= m <= d, got d = {d}, m = {m}")));
        }
        let cal = BetaCalibration::new(d, omega.clone())?;
        let sol = cal.solve_delta(eps, DEFAULT_TOL_REL)?;
        let gamma = gamma_remark(d);
        let remark = (sol.delta <= 1.0 / (d as f64).sqrt()).then(|| {
            let psi = omega.inverse(eps / gamma);
            remark_bound(d, psi)
        });
        let holder_closed_form = match omega.kind {
            ModulusKind::Holder { c, alpha } if c > 0.0 => {
                Some(remark_prefactor(d) * (gamma * c / eps).powf(1.0 / alpha))
            }
            _ => None,
        };
        Ok(UpperBound {
            d,
            m,
            epsilon: eps,
            delta: sol.delta,
            theorem: theorem_bound(d, m, sol.delta),
            gamma,
            remark,
            holder_closed_form,
            critical_set_free: sol.critical_set_free,
        })
    }
}
