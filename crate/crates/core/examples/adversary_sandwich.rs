//! Builds the oscillatory map, certifies its lower bound and places the
//! measured critical set of its approximant between the two bounds.

use critset::adversary::{adversarial_f, count_critical_sheets, lower_bound_n, sandwich, OscillatoryFunction};
use critset::Modulus;

fn main() -> critset::Result<()> {
    let eps = 2f64.powi(-11);
    let line = OscillatoryFunction::new(Modulus::holder(1.0, 1.0, 1.0)?, 1, 1)?;
    let cert = lower_bound_n(&line, eps)?;
    println!("n0 {}, count bound {}, formula {:.4}", cert.n0, cert.count_bound, cert.formula_bound);

    let f = adversarial_f(&line);
    let sheets = count_critical_sheets(&f, &line, eps, 1, 0)?;
    println!("sign changes of det Df: {}", sheets.count);

    let plane = OscillatoryFunction::new(Modulus::holder(1.0, 1.0, 1.0)?, 2, 1)?;
    let s = sandwich(&plane, eps)?;
    println!(
        "{} <= {:.3} <= {:.3e}: {}",
        s.lower.count_bound,
        s.measured.value,
        s.upper.theorem,
        s.holds()
    );
    Ok(())
}
