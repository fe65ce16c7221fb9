//! Splits the unit cube into simplices and locates a few points.

use critset::decomposition::{decompose_unit_cube, CubeDecomposition, CubeGrid};

fn main() -> critset::Result<()> {
    for d in 1..=4 {
        let simplices = decompose_unit_cube(d)?;
        let total: f64 = simplices.iter().map(|s| s.volume()).sum();
        println!("d = {d}: {} simplices, total volume {total}", simplices.len());
    }

    let dec = CubeDecomposition::new(3)?;
    let simplices = decompose_unit_cube(3)?;
    for x in [[0.1, 0.2, 0.9], [0.7, 0.7, 0.1], [0.5, 0.25, 0.75]] {
        let k = dec.locate(&x);
        let bc = simplices[k].barycentric(&x);
        println!("{x:?} lies in simplex {k}, barycentric {:.3?}", bc.alpha);
    }

    let grid = CubeGrid::new(2, 0.3)?;
    println!(
        "delta 0.3 on [0,1]^2: {} cubes per axis, {} simplices",
        grid.per_axis,
        grid.simplex_count(&CubeDecomposition::new(2)?)
    );
    Ok(())
}
