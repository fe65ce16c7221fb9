//! Measures zero sets of planar functions and the critical set of an
//! approximant.

use std::sync::Arc;

use critset::measure::{box_counting_measure, measure_critical_set, zero_set_measure, MaskTolerance, Region};
use critset::perturbation::{BlendedApproximant, StorePolicy};
use critset::parse_function;

fn main() -> critset::Result<()> {
    let square = Region::unit_cube(2);
    let circle = |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) - 0.16;
    for res in [32, 128, 512] {
        let m = zero_set_measure(&circle, &square, res)?;
        println!("circle at {res}: {:.6} (exact {:.6})", m.value, 0.8 * std::f64::consts::PI);
    }
    let b = box_counting_measure(&circle, &square, 256)?;
    println!("box-counting cross-check (coarse overestimate): {:.4}", b.value);

    let f = Arc::new(parse_function("sin(3*x1)*cos(3*x2)", 2, 1)?);
    let g = BlendedApproximant::with_mesh(f, 1.0 / 16.0, StorePolicy::Cached)?;
    let c = measure_critical_set(&g, 256, MaskTolerance::CellScaled)?;
    println!(
        "critical set of g on {} simplices: {:.4}, rank-deficient part {:.4}",
        c.simplices, c.unmasked.value, c.masked.value
    );
    Ok(())
}
