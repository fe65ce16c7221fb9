//! Expands the critical polynomial on one simplex and compares it with the
//! determinant of `Dg`.

use std::sync::Arc;

use critset::perturbation::{critical_polynomial, BlendedApproximant, StorePolicy};
use critset::parse_function;

fn main() -> critset::Result<()> {
    let f = Arc::new(parse_function("x1*x2 + x2^3; exp(x1) - x2", 2, 2)?);
    let g = BlendedApproximant::with_mesh(f, 0.5, StorePolicy::Cached)?;
    let x = [0.3, 0.1];
    let (multi, k) = g.locate(&x);
    let cp = critical_polynomial(&g, g.grid().cube_linear_index(&multi), k)?;
    println!("cube {multi:?}, simplex {k}: degree {:?} (bound {})", cp.degree(), cp.degree_bound);

    let (_, j) = g.eval_on_simplex(&multi, k, &x)?;
    let d_sum = g.barycentric(&multi, k, &x).d_sum;
    println!("p(x) = {:.6e}", cp.eval(&x));
    println!("D^4 det Dg(x) = {:.6e}", d_sum.powi(4) * j.leading_minor_det());
    print!("{}", cp.poly.to_csv());
    Ok(())
}
