//! Parses a map and evaluates its value and Jacobian.

use critset::{parse_function, DifferentiableMap};

fn main() -> critset::Result<()> {
    let f = parse_function("sin(3*x1)*cos(3*x2); x1^2 - exp(x2)*x1", 2, 2)?;
    for x in [[0.0, 0.0], [0.25, 0.5], [1.0, 1.0]] {
        let (v, j) = f.value_and_jacobian(&x)?;
        println!("f({x:?}) = {v:.5?}");
        println!("  Df = {:.5}", j.matrix());
        println!("  det = {:.5}, smallest singular value = {:.5}", j.leading_minor_det(), j.sigma_min());
    }
    Ok(())
}
