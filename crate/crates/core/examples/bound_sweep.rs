//! Sweeps the upper bound over a range of tolerances for two Hoelder moduli.

use critset::perturbation::UpperBound;
use critset::Modulus;

fn main() -> critset::Result<()> {
    for alpha in [1.0, 0.5] {
        let omega = Modulus::holder(1.0, alpha, 2f64.sqrt())?;
        println!("alpha = {alpha}");
        for k in 0..5 {
            let eps = 10f64.powi(-k);
            let b = UpperBound::compute(2, 1, eps, &omega)?;
            println!("  eps {eps:8.0e}  delta {:10.4e}  bound {:10.4e}", b.delta, b.theorem);
        }
    }
    Ok(())
}
