use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{adversarial_f, lower_bound_n, OscillatoryFunction};
use crate::decomposition::{decompose_unit_cube, CubeDecomposition};
use crate::expr::parse_function;
use crate::map::DifferentiableMap;
use crate::measure::{zero_set_measure, Region};
use crate::modulus::{BetaCalibration, Modulus};
use crate::perturbation::{blend_weights, critical_polynomial, theorem_bound, verify_c1, BlendedApproximant, StorePolicy, UpperBound};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: crate::error::Error) -> String {
    e.to_string()
}

pub fn run_selftest() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 12] = [
        ("decomposition counts and volumes", decomposition_counts),
        ("single owner per point", single_owner),
        ("blend weights partition unity", partition_of_unity),
        ("vertex interpolation", vertex_interpolation),
        ("face values agree, jacobian jump bounded", face_consistency),
        ("critical polynomial identity", critical_identity),
        ("C1 certificate", c1_certificate),
        ("upper bound formula", upper_formula),
        ("hoelder power law", holder_slope),
        ("zero-set measure oracles", measure_oracles),
        ("oscillation range and determinant", adversary_range),
        ("lower-bound certificate", adversary_certificate),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name, passed, detail }
        })
        .collect()
}

fn decomposition_counts() -> Outcome {
    let mut worst = 0.0f64;
    for (d, n) in [(1, 1), (2, 4), (3, 24)] {
        let s = decompose_unit_cube(d).map_err(err)?;
        if s.len() != n {
            return Err(format!("d = {d}: {} simplices", s.len()));
        }
        let want = 1.0 / n as f64;
        worst = s.iter().map(|s| (s.volume() - want).abs()).fold(worst, f64::max);
    }
    ensure(worst < 1e-12, format!("max volume error {worst:.1e}"))
}

fn single_owner() -> Outcome {
    let simplices = decompose_unit_cube(3).map_err(err)?;
    let dec = CubeDecomposition::new(3).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let owners = simplices.iter().filter(|s| s.barycentric(&x).alpha.iter().all(|&a| a > 1e-12)).count();
        let k = dec.locate(&x);
        if owners > 1 || !simplices[k].contains(&x) {
            return Err(format!("point {x:?}: {owners} interior owners"));
        }
    }
    Ok("10^4 points".into())
}

fn sample_approximant(src: &str, d: usize, m: usize, delta: f64) -> Result<BlendedApproximant, String> {
    let f = parse_function(src, d, m).map_err(err)?;
    BlendedApproximant::with_mesh(Arc::new(f), delta, StorePolicy::Cached).map_err(err)
}

fn partition_of_unity() -> Outcome {
    let g = sample_approximant("x1*x2 + x3", 3, 1, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut e0, mut e1) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let (multi, k) = g.locate(&x);
        let w = blend_weights(&g.barycentric(&multi, k, &x));
        e0 = e0.max((w.beta.iter().sum::<f64>() - 1.0).abs());
        e1 = e1.max(w.dbeta.row_sum().abs().max());
    }
    ensure(e0 < 1e-12 && e1 < 1e-10, format!("sum error {e0:.1e}, gradient sum {e1:.1e}"))
}

fn vertex_interpolation() -> Outcome {
    let g = sample_approximant("sin(3*x1)*x2; x1 - exp(x2)", 2, 2, 0.25)?;
    let mut worst = 0.0f64;
    for key in g.vertex_keys() {
        let x = g.grid().key_point(&key);
        let (gv, gj) = g.eval_g(&x).map_err(err)?;
        let (fv, fj) = g.source().value_and_jacobian(&x).map_err(err)?;
        if gv.iter().zip(&fv).any(|(a, b)| (a - b).abs() > 4.0 * f64::EPSILON * b.abs().max(1.0)) {
            return Err(format!("value mismatch at {x:?}"));
        }
        worst = worst.max(gj.frobenius_distance(&fj));
    }
    ensure(worst <= 1e-9, format!("max |Dg - Df| {worst:.1e}"))
}

fn face_consistency() -> Outcome {
    let g = sample_approximant("sin(3*x1)*cos(3*x2)", 2, 1, 0.25)?;
    let omega = Modulus::holder(18.0, 1.0, 2f64.sqrt()).map_err(err)?;
    let bound = BetaCalibration::new(2, omega).and_then(|c| c.beta_f(0.25)).map_err(err)?;
    let grid = *g.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut value_gap, mut jump) = (0, 0.0f64, 0.0f64);
    while checked < 1000 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
        let (multi, k) = g.locate(&x);
        let s = grid.simplex(g.decomposition(), grid.cube_linear_index(&multi), k);
        let drop = rng.gen_range(0..3);
        let t: f64 = rng.gen();
        let keep: Vec<usize> = (0..3).filter(|&j| j != drop).collect();
        let p: Vec<f64> = (0..2).map(|c| t * s.vertices[keep[0]][c] + (1.0 - t) * s.vertices[keep[1]][c]).collect();
        let n = g.barycentric(&multi, k, &p).grad.row(drop).into_owned();
        let q: Vec<f64> = (0..2).map(|c| p[c] - 1e-7 * n[c] / n.norm()).collect();
        if q.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            continue;
        }
        let (other, j) = g.locate(&q);
        if other == multi && j == k {
            continue;
        }
        let (va, ja) = g.eval_on_simplex(&multi, k, &p).map_err(err)?;
        let (vb, jb) = g.eval_on_simplex(&other, j, &p).map_err(err)?;
        value_gap = value_gap.max((va[0] - vb[0]).abs());
        jump = jump.max(ja.frobenius_distance(&jb));
        checked += 1;
    }
    ensure(
        value_gap < 1e-8 && jump <= 2.0 * bound,
        format!("value gap {value_gap:.1e}, jacobian jump {jump:.3e} (allowed {:.3e})", 2.0 * bound),
    )
}

fn critical_identity() -> Outcome {
    let g = sample_approximant("x1*x2 + x2^3; exp(x1) - x2", 2, 2, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
        let (multi, k) = g.locate(&x);
        let iota = g.grid().cube_linear_index(&multi);
        let cp = critical_polynomial(&g, iota, k).map_err(err)?;
        let (_, j) = g.eval_on_simplex(&multi, k, &x).map_err(err)?;
        let want = g.barycentric(&multi, k, &x).d_sum.powi(4) * j.leading_minor_det();
        worst = worst.max((cp.eval(&x) - want).abs() / cp.poly.max_abs_coeff().max(1e-300));
    }
    ensure(worst < 1e-9, format!("max relative residual {worst:.1e}"))
}

fn c1_certificate() -> Outcome {
    let g = sample_approximant("sin(3*x1)*cos(3*x2)", 2, 1, 0.125)?;
    let omega = Modulus::holder(18.0, 1.0, 2f64.sqrt()).map_err(err)?;
    let c = verify_c1(&g, &omega, 10_000, 5).map_err(err)?;
    ensure(
        c.passed(),
        format!("max |g-f| {:.2e}, |Dg-Df| {:.2e}, bound {:.2e}", c.max_value_error, c.max_jacobian_error, c.bound),
    )
}

fn upper_formula() -> Outcome {
    let v = theorem_bound(2, 1, 0.1);
    ensure((v - 320.0).abs() < 1e-9, format!("d=2, m=1, delta=0.1 gives {v}"))
}

fn holder_slope() -> Outcome {
    let mut slopes = Vec::new();
    for alpha in [1.0, 0.5] {
        let omega = Modulus::holder(1.0, alpha, 2f64.sqrt()).map_err(err)?;
        let a = UpperBound::compute(2, 1, 1e-3, &omega).map_err(err)?;
        let b = UpperBound::compute(2, 1, 1e-4, &omega).map_err(err)?;
        let slope = -(b.theorem / a.theorem).log10();
        if (slope + 1.0 / alpha).abs() > 0.01 / alpha {
            return Err(format!("alpha {alpha}: slope {slope}"));
        }
        slopes.push(slope);
    }
    Ok(format!("slopes {slopes:.4?}"))
}

fn measure_oracles() -> Outcome {
    let sq = Region::unit_cube(2);
    let circle = zero_set_measure(&|x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) - 0.16, &sq, 256).map_err(err)?;
    let lines = zero_set_measure(&|x: &[f64]| (x[0] - 0.25) * (x[0] - 0.75), &sq, 256).map_err(err)?;
    let want = 2.0 * std::f64::consts::PI * 0.4;
    ensure(
        (circle.value - want).abs() < 0.01 * want && (lines.value - 2.0).abs() < 0.02,
        format!("circle {:.5}, lines {:.5}", circle.value, lines.value),
    )
}

fn adversary_range() -> Outcome {
    let omega = Modulus::holder(1.0, 1.0, 1.0).map_err(err)?;
    let p = OscillatoryFunction::new(omega.clone(), 2, 1).map_err(err)?;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let h = omega.eval(OscillatoryFunction::ell(n)) / 2.0;
        for k in 0..OscillatoryFunction::bumps(n).min(64) {
            let (a, b) = OscillatoryFunction::interval(n, k);
            worst = worst.max((p.eval_beta(a).map_err(err)? - h).abs());
            worst = worst.max((p.eval_beta(b).map_err(err)? + h).abs());
        }
    }
    let map = adversarial_f(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut det = 0.0f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
        let j = map.jacobian(&x).map_err(err)?;
        det = det.max((j.leading_minor_det() - p.eval_beta(x[0]).map_err(err)?).abs());
    }
    ensure(worst <= 1e-12 && det <= 1e-12, format!("range error {worst:.1e}, determinant error {det:.1e}"))
}

fn adversary_certificate() -> Outcome {
    let omega = Modulus::holder(1.0, 1.0, 1.0).map_err(err)?;
    let p = OscillatoryFunction::new(omega, 1, 1).map_err(err)?;
    let c = lower_bound_n(&p, 2f64.powi(-11)).map_err(err)?;
    ensure(
        c.n0 == 2 && c.count_bound == 18 && c.formula_bound > 0.0,
        format!("n0 {}, count {}, formula {:.4}", c.n0, c.count_bound, c.formula_bound),
    )
}
