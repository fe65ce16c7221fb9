//! Builds the blended approximant of a map and checks its C1 distance.

use std::sync::Arc;

use critset::perturbation::{verify_c1, BlendedApproximant, StorePolicy};
use critset::{parse_function, Modulus};

fn main() -> critset::Result<()> {
    let f = Arc::new(parse_function("sin(3*x1)*cos(3*x2)", 2, 1)?);
    let omega = Modulus::holder(18.0, 1.0, 2f64.sqrt())?;
    for eps in [3000.0, 1000.0] {
        let g = BlendedApproximant::calibrated(f.clone(), eps, &omega, StorePolicy::Cached)?;
        let cert = g.certificate();
        let check = verify_c1(&g, &omega, 5000, 1)?;
        println!(
            "eps {eps}: {} cubes per axis, sup|g-f| {:.2e}, sup|Dg-Df| {:.2e}, bound {:.2e}, ok {}",
            cert.cubes_per_axis,
            check.max_value_error,
            check.max_jacobian_error,
            check.bound,
            check.passed()
        );
    }
    Ok(())
}
