//! Estimates a modulus of continuity for `Df` and solves for the mesh size.

use critset::modulus::{estimate_modulus_of_jacobian, BetaCalibration, DEFAULT_TOL_REL};
use critset::{parse_function, Modulus};

fn main() -> critset::Result<()> {
    let f = parse_function("sin(3*x1)*cos(3*x2)", 2, 1)?;
    let diam = 2f64.sqrt();
    let probes: Vec<f64> = (0..8).map(|k| diam * 2f64.powi(-k)).collect();
    let sampled = estimate_modulus_of_jacobian(&f, 64, &probes, 0)?;
    let declared = Modulus::holder(18.0, 1.0, diam)?;
    for &t in &probes {
        println!("t = {t:.4}: sampled {:.4}, declared {:.4}", sampled.eval(t), declared.eval(t));
    }

    let cal = BetaCalibration::new(2, declared)?;
    for eps in [1e4, 3e3, 5e2] {
        let sol = cal.solve_delta(eps, DEFAULT_TOL_REL)?;
        println!("eps {eps:e}: delta {:.6}, beta_f(delta) {:.3}", sol.delta, cal.beta_f(sol.delta)?);
    }
    Ok(())
}
