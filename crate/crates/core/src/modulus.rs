//! Moduli of continuity, their inverses, and the mesh calibration map
//! `beta_f(delta) = omega(sqrt(d) delta) * [1 + sqrt(d) delta + 4 d^(d+1/2) (d+1)^4]`.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{DifferentiableMap, Jacobian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModulusKind {
    /// `omega(s) = c * s^alpha`.
    Holder {
        #[serde(rename = "C")]
        c: f64,
        alpha: f64,
    },
    /// Sorted `(delta, omega)` samples; `(0, 0)` is implicit. Linear
    /// interpolation between samples, constant after the last one.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub kind: ModulusKind,
    pub domain_diameter: f64,
    /// Set when the table came from sampling: the values are then only a
    /// lower estimate of the true minimal modulus.
    #[serde(default)]
    pub lower_estimate: bool,
}

impl Modulus {
    pub fn holder(c: f64, alpha: f64, domain_diameter: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("Hoelder coefficient must be >= 0, got {c}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Argument(format!("Hoelder exponent must lie in (0,1], got {alpha}")));
        }
        check_diameter(domain_diameter)?;
        Ok(Modulus {
            kind: ModulusKind::Holder { c, alpha },
            domain_diameter,
            lower_estimate: false,
        })
    }

    pub fn tabulated(mut points: Vec<(f64, f64)>, domain_diameter: f64) -> Result<Self> {
        check_diameter(domain_diameter)?;
        points.retain(|&(d, _)| d != 0.0);
        if points
            .iter()
            .any(|&(d, w)| !(d > 0.0) || !(w >= 0.0) || !d.is_finite() || !w.is_finite())
        {
            return Err(Error::Argument(
                "tabulated modulus needs positive deltas and nonnegative values".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Argument(format!("duplicate delta {}", w[0].0)));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Argument(format!(
                    "tabulated modulus decreases between delta {} and {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Modulus {
            kind: ModulusKind::Tabulated { points },
            domain_diameter,
            lower_estimate: false,
        })
    }

    /// Reads a two-column `delta,omega` CSV. A header row is allowed.
    pub fn from_csv<R: Read>(reader: R, domain_diameter: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Argument(format!("row {row}: expected two columns")));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(d), Ok(w)) => points.push((d, w)),
                _ if row == 0 => continue,
                _ => return Err(Error::Argument(format!("row {row}: non-numeric entry"))),
            }
        }
        Self::tabulated(points, domain_diameter)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            ModulusKind::Holder { c, alpha } => c * s.min(self.domain_diameter).powf(*alpha),
            ModulusKind::Tabulated { points } => {
                let i = points.partition_point(|p| p.0 < s);
                if i == points.len() {
                    return points.last().map_or(0.0, |p| p.1);
                }
                let (d1, w1) = points[i];
                let (d0, w0) = if i == 0 { (0.0, 0.0) } else { points[i - 1] };
                if d1 == s {
                    return w1;
                }
                w0 + (w1 - w0) * (s - d0) / (d1 - d0)
            }
        }
    }

    /// `Psi(s)`: the largest `delta` in `[0, domain_diameter]` with
    /// `omega(delta) <= s`.
    pub fn inverse(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match &self.kind {
            ModulusKind::Holder { c, alpha } => {
                if *c == 0.0 {
                    return self.domain_diameter;
                }
                (s / c).powf(1.0 / alpha).min(self.domain_diameter)
            }
            ModulusKind::Tabulated { points } => {
                let i = points.partition_point(|p| p.1 <= s);
                if i == points.len() {
                    return self.domain_diameter;
                }
                let (d1, w1) = points[i];
                let (d0, w0) = if i == 0 { (0.0, 0.0) } else { points[i - 1] };
                let t = (s - w0) / (w1 - w0);
                (d0 + t * (d1 - d0)).clamp(0.0, self.domain_diameter)
            }
        }
    }

    /// `int_0^t omega(s) ds`, in closed form for both kinds.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            ModulusKind::Holder { c, alpha } => {
                let r = self.domain_diameter;
                if t <= r {
                    c * t.powf(alpha + 1.0) / (alpha + 1.0)
                } else {
                    c * r.powf(alpha + 1.0) / (alpha + 1.0) + c * r.powf(*alpha) * (t - r)
                }
            }
            ModulusKind::Tabulated { points } => {
                let mut acc = 0.0;
                let (mut d0, mut w0) = (0.0, 0.0);
                for &(d1, w1) in points {
                    if d1 >= t {
                        let wt = w0 + (w1 - w0) * (t - d0) / (d1 - d0);
                        return acc + 0.5 * (w0 + wt) * (t - d0);
                    }
                    acc += 0.5 * (w0 + w1) * (d1 - d0);
                    d0 = d1;
                    w0 = w1;
                }
                acc + w0 * (t - d0)
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match &self.kind {
            ModulusKind::Holder { c, .. } => *c == 0.0,
            ModulusKind::Tabulated { points } => points.iter().all(|p| p.1 == 0.0),
        }
    }

    /// Pairs `(a, b)` of tabulated deltas where `omega(a + b) > omega(a) +
    /// omega(b)`. Reported, never repaired.
    pub fn subadditivity_violations(&self) -> Vec<(f64, f64)> {
        let ModulusKind::Tabulated { points } = &self.kind else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, &(a, wa)) in points.iter().enumerate() {
            for &(b, wb) in &points[i..] {
                if self.eval(a + b) > (wa + wb) * (1.0 + 1e-12) + 1e-300 {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

fn check_diameter(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("domain diameter must be > 0, got {r}")))
    }
}

/// Sampled lower estimate of the minimal modulus of `Df` (Frobenius norm),
/// tabulated at `probe_deltas`.
///
/// Pairs come from lattice offsets along every axis and diagonal direction
/// of a `grid_resolution^d` lattice, plus `10 * grid_resolution` random
/// pairs at distance exactly `delta` for each probe.
pub fn estimate_modulus_of_jacobian(
    f: &dyn DifferentiableMap,
    grid_resolution: usize,
    probe_deltas: &[f64],
    seed: u64,
) -> Result<Modulus> {
    let d = f.input_dim();
    let diam = (d as f64).sqrt();
    if grid_resolution < 2 {
        return Err(Error::Argument("grid_resolution must be >= 2".into()));
    }
    if probe_deltas.is_empty() || probe_deltas.iter().any(|&p| !(p > 0.0 && p <= diam * (1.0 + 1e-12))) {
        return Err(Error::Argument(format!(
            "probe deltas must lie in (0, sqrt(d)] = (0, {diam}]"
        )));
    }
    let n = grid_resolution;
    let h = 1.0 / (n - 1) as f64;
    let total = n.checked_pow(d as u32).ok_or_else(|| Error::Argument("lattice too large".into()))?;
    let lattice: Vec<Jacobian> = (0..total)
        .into_par_iter()
        .map(|idx| f.jacobian(&lattice_point(idx, n, d, h)))
        .collect::<Result<_>>()?;

    let dirs = half_moore_directions(d);
    let mut deltas: Vec<f64> = probe_deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();

    let raw: Vec<f64> = deltas
        .par_iter()
        .enumerate()
        .map(|(pi, &delta)| -> Result<f64> {
            let mut best = 0.0f64;
            for dir in &dirs {
                let len = dir.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt() * h;
                let tmax = (delta / len * (1.0 + 1e-12)).floor() as i64;
                for t in 1..=tmax.min(n as i64 - 1) {
                    for idx in 0..total {
                        let mut coord = idx;
                        let mut other = 0usize;
                        let mut stride = 1usize;
                        let mut inside = true;
                        for &c in dir.iter() {
                            let i = (coord % n) as i64;
                            coord /= n;
                            let j = i + t * c;
                            if j < 0 || j >= n as i64 {
                                inside = false;
                                break;
                            }
                            other += j as usize * stride;
                            stride *= n;
                        }
                        if inside {
                            best = best.max(lattice[idx].frobenius_distance(&lattice[other]));
                        }
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (pi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for _ in 0..10 * n {
                if let Some((x, y)) = random_pair(&mut rng, d, delta) {
                    let jx = f.jacobian(&x)?;
                    let jy = f.jacobian(&y)?;
                    best = best.max(jx.frobenius_distance(&jy));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut running = 0.0f64;
    let points = deltas
        .iter()
        .zip(raw)
        .map(|(&dl, w)| {
            running = running.max(w);
            (dl, running)
        })
        .collect();
    let mut m = Modulus::tabulated(points, diam)?;
    m.lower_estimate = true;
    Ok(m)
}

fn lattice_point(mut idx: usize, n: usize, d: usize, h: f64) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let i = idx % n;
            idx /= n;
            (i as f64 * h).min(1.0)
        })
        .collect()
}

/// One representative of each `{v, -v}` pair in `{-1,0,1}^d \ {0}`.
fn half_moore_directions(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let v: Vec<i64> = (0..d)
            .map(|_| {
                let r = (c % 3) as i64 - 1;
                c /= 3;
                r
            })
            .collect();
        // keep vectors whose first nonzero entry is positive
        if let Some(&first) = v.iter().find(|&&e| e != 0) {
            if first > 0 {
                out.push(v);
            }
        }
    }
    out
}

fn random_pair(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    for _ in 0..64 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let mut dir: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        dir.iter_mut().for_each(|v| *v *= r / norm);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
        if y.iter().all(|c| (0.0..=1.0).contains(c)) {
            return Some((x, y));
        }
    }
    None
}

/// `4 d^(d+1/2) (d+1)^4`, the gradient-blow-up constant of the blending.
pub fn blend_constant(d: usize) -> f64 {
    let df = d as f64;
    4.0 * df.powf(df + 0.5) * (df + 1.0).powi(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCalibration {
    pub d: usize,
    pub modulus_of_df: Modulus,
}

/// Outcome of inverting `beta_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSolution {
    pub delta: f64,
    /// `omega == 0`: `f` is affine, one linear patch reproduces it and the
    /// critical set needs no perturbation.
    pub critical_set_free: bool,
}

pub const DEFAULT_TOL_REL: f64 = 1e-10;

impl BetaCalibration {
    pub fn new(d: usize, modulus_of_df: Modulus) -> Result<Self> {
        if d == 0 {
            return Err(Error::Argument("dimension must be >= 1".into()));
        }
        Ok(BetaCalibration { d, modulus_of_df })
    }

    pub fn beta_f(&self, delta: f64) -> Result<f64> {
        let sd = (self.d as f64).sqrt();
        if !(delta >= 0.0) || sd * delta > self.modulus_of_df.domain_diameter * (1.0 + 1e-12) {
            return Err(Error::Argument(format!(
                "delta {delta} outside [0, {}]",
                self.modulus_of_df.domain_diameter / sd
            )));
        }
        Ok(self.modulus_of_df.eval(sd * delta) * (1.0 + sd * delta + blend_constant(self.d)))
    }

    /// Largest `delta` in `(0, 1]` with `beta_f(delta) <= epsilon`, found by
    /// bisection; `|beta_f(delta) - epsilon| <= tol_rel * epsilon`.
    pub fn solve_delta(&self, epsilon: f64, tol_rel: f64) -> Result<DeltaSolution> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Argument(format!("epsilon must be > 0, got {epsilon}")));
        }
        let top = self.modulus_of_df.domain_diameter / (self.d as f64).sqrt();
        let hi_bound = top.min(1.0);
        let at_top = self.beta_f(hi_bound)?;
        if at_top == 0.0 {
            return Ok(DeltaSolution {
                delta: hi_bound,
                critical_set_free: true,
            });
        }
        if at_top < epsilon {
            return Err(Error::MeshCoarserThanDomain {
                epsilon,
                max_level: at_top,
            });
        }
        if at_top == epsilon {
            return Ok(DeltaSolution {
                delta: hi_bound,
                critical_set_free: false,
            });
        }
        let (mut lo, mut hi) = (0.0f64, hi_bound);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.beta_f(mid)? <= epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let got = self.beta_f(lo)?;
        if (got - epsilon).abs() > tol_rel * epsilon {
            return Err(Error::Numerical(format!(
                "bisection stalled: beta_f({lo}) = {got}, target {epsilon}"
            )));
        }
        Ok(DeltaSolution {
            delta: lo,
            critical_set_free: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use proptest::prelude::*;

    #[test]
    fn holder_inverse_examples() {
        let m = Modulus::holder(1.0, 1.0, 2f64.sqrt()).unwrap();
        assert_eq!(m.inverse(0.25), 0.25);
        let m = Modulus::holder(2.0, 0.5, 2f64.sqrt()).unwrap();
        assert!((m.inverse(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(m.inverse(0.0), 0.0);
        // capped at the diameter
        assert_eq!(m.inverse(100.0), 2f64.sqrt());
    }

    #[test]
    fn tabulated_inverse_is_consistent() {
        let m = Modulus::tabulated(vec![(0.1, 0.2), (0.2, 0.2), (0.5, 1.0)], 1.0).unwrap();
        assert_eq!(m.inverse(0.0), 0.0);
        // plateau: largest delta with omega <= 0.2 is the end of the flat piece
        assert!((m.inverse(0.2) - 0.2).abs() < 1e-15);
        assert!((m.inverse(0.6) - 0.35).abs() < 1e-15);
        assert_eq!(m.inverse(5.0), 1.0);
        for k in 0..=200 {
            let s = k as f64 * 0.006;
            assert!(m.eval(m.inverse(s)) <= s + 1e-15);
        }
    }

    #[test]
    fn tabulated_rejects_decreasing_values() {
        assert!(Modulus::tabulated(vec![(0.1, 0.3), (0.2, 0.1)], 1.0).is_err());
        assert!(Modulus::tabulated(vec![(0.1, -0.3)], 1.0).is_err());
    }

    #[test]
    fn csv_loading() {
        let text = "delta,omega\n0.1, 0.05\n0.2,0.1\n# comment\n0.4,0.3\n";
        let m = Modulus::from_csv(text.as_bytes(), 1.0).unwrap();
        assert_eq!(m.eval(0.2), 0.1);
        assert!((m.eval(0.3) - 0.2).abs() < 1e-15);
        assert!(Modulus::from_csv("a,b\nx,1\n".as_bytes(), 1.0).is_err());
        assert!(Modulus::from_csv("a,b\n".as_bytes(), 1.0).is_ok_and(|m| m.is_identically_zero()));
        assert!(Modulus::from_csv("0.1,0.1\nx,1\n".as_bytes(), 1.0).is_err());
    }

    #[test]
    fn subadditivity_is_reported() {
        let convex = Modulus::tabulated(vec![(0.1, 0.01), (0.2, 0.04), (0.4, 0.16)], 1.0).unwrap();
        assert!(!convex.subadditivity_violations().is_empty());
        let lin = Modulus::tabulated(vec![(0.1, 0.1), (0.2, 0.2), (0.4, 0.4)], 1.0).unwrap();
        assert!(lin.subadditivity_violations().is_empty());
    }

    #[test]
    fn integral_matches_trapezoid_oracle() {
        let mods = [
            Modulus::holder(1.5, 0.5, 1.0).unwrap(),
            Modulus::tabulated(vec![(0.1, 0.3), (0.3, 0.5), (0.6, 0.55)], 1.0).unwrap(),
        ];
        for m in &mods {
            for &t in &[0.05, 0.2, 0.45, 0.9, 1.3] {
                let n = 200_000;
                let h = t / n as f64;
                let num: f64 = (0..n).map(|i| 0.5 * h * (m.eval(i as f64 * h) + m.eval((i + 1) as f64 * h))).sum();
                assert!((num - m.integral(t)).abs() < 1e-6, "{t}: {num} vs {}", m.integral(t));
            }
        }
    }

    #[test]
    fn beta_f_examples() {
        let cal = |d: usize| BetaCalibration::new(d, Modulus::holder(1.0, 1.0, (d as f64).sqrt()).unwrap()).unwrap();
        assert_eq!(cal(1).beta_f(0.0).unwrap(), 0.0);
        // d = 1: 4 d^(d+1/2) (d+1)^4 = 64
        let t = 0.3;
        assert!((cal(1).beta_f(t).unwrap() - t * (65.0 + t)).abs() < 1e-13);
        // d = 2, delta = 0.1, frozen from an independent evaluation
        assert!((cal(2).beta_f(0.1).unwrap() - 259.3614213562374).abs() < 1e-9);
        assert!(cal(2).beta_f(1.5).is_err());
        assert!(cal(2).beta_f(-0.1).is_err());
    }

    #[test]
    fn solve_delta_examples() {
        let cal = BetaCalibration::new(1, Modulus::holder(1.0, 1.0, 1.0).unwrap()).unwrap();
        // positive root of t^2 + 65 t - 6.6 = 0
        let sol = cal.solve_delta(6.6, DEFAULT_TOL_REL).unwrap();
        assert!((sol.delta - 0.10138033887522369).abs() < 1e-10);
        assert!(!sol.critical_set_free);
        assert!(matches!(
            cal.solve_delta(1000.0, DEFAULT_TOL_REL),
            Err(Error::MeshCoarserThanDomain { .. })
        ));
        assert!(matches!(cal.solve_delta(0.0, DEFAULT_TOL_REL), Err(Error::Argument(_))));

        let zero = BetaCalibration::new(2, Modulus::tabulated(vec![(0.5, 0.0), (1.4, 0.0)], 2f64.sqrt()).unwrap()).unwrap();
        let sol = zero.solve_delta(0.3, DEFAULT_TOL_REL).unwrap();
        assert!(sol.critical_set_free);
        assert_eq!(sol.delta, 1.0);
    }

    #[test]
    fn solve_delta_plateau_takes_largest() {
        // omega flat at 0.2 on [0.2, 0.6]: beta_f is flat only up to the
        // linear factor, so use d = 1 and a level hit on the flat piece.
        let m = Modulus::tabulated(vec![(0.2, 0.2), (0.6, 0.2), (1.0, 1.0)], 1.0).unwrap();
        let cal = BetaCalibration::new(1, m).unwrap();
        let eps = cal.beta_f(0.4).unwrap();
        let sol = cal.solve_delta(eps, 1e-12).unwrap();
        assert!((sol.delta - 0.4).abs() < 1e-9);
    }

    #[test]
    fn holder_solve_delta_monotone_in_epsilon() {
        let cal = BetaCalibration::new(2, Modulus::holder(3.0, 0.5, 2f64.sqrt()).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let eps = 100.0 * 0.5f64.powi(k);
            let dl = cal.solve_delta(eps, DEFAULT_TOL_REL).unwrap().delta;
            assert!(dl < prev);
            prev = dl;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn estimate_linear_map_is_zero() {
        let f = parse_function("3*x1 - 2*x2 + 1", 2, 1).unwrap();
        let m = estimate_modulus_of_jacobian(&f, 9, &[0.1, 0.5, 1.2], 1).unwrap();
        assert!(m.lower_estimate);
        assert!(m.is_identically_zero());
    }

    #[test]
    fn estimate_for_half_square() {
        // Df = x1, exact minimal modulus min(delta, 1)
        let f = parse_function("x1^2/2", 1, 1).unwrap();
        let n = 33;
        let probes: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
        let m = estimate_modulus_of_jacobian(&f, n, &probes, 7).unwrap();
        for &p in &probes {
            let w = m.eval(p);
            assert!(w <= p.min(1.0) + 1e-12);
            assert!((w - p.min(1.0)).abs() <= 2.0 / n as f64, "{p}: {w}");
        }
    }

    #[test]
    fn estimate_for_sine_below_lipschitz_line() {
        let f = parse_function("sin(x1)", 1, 1).unwrap();
        let probes: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
        let m = estimate_modulus_of_jacobian(&f, 41, &probes, 2).unwrap();
        // dense pair sampling oracle for omega of cos on [0,1]
        for &p in &probes {
            let mut oracle = 0.0f64;
            for i in 0..=2000 {
                let x = i as f64 / 2000.0;
                let y = (x + p).min(1.0);
                oracle = oracle.max((x.cos() - y.cos()).abs());
            }
            assert!(m.eval(p) <= p + 1e-12);
            assert!(m.eval(p) <= oracle + 1e-12);
        }
    }

    #[test]
    fn estimate_argument_errors() {
        let f = parse_function("x1*x2", 2, 1).unwrap();
        assert!(estimate_modulus_of_jacobian(&f, 1, &[0.1], 0).is_err());
        assert!(estimate_modulus_of_jacobian(&f, 4, &[0.0], 0).is_err());
        assert!(estimate_modulus_of_jacobian(&f, 4, &[2.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn holder_inverse_round_trip(c in 0.01f64..50.0, alpha in 0.05f64..=1.0, s in 0.0f64..10.0) {
            let m = Modulus::holder(c, alpha, 3f64.sqrt()).unwrap();
            let psi = m.inverse(s);
            prop_assert!(m.eval(psi) <= s * (1.0 + 1e-12) + 1e-300);
            if psi < m.domain_diameter {
                prop_assert!((m.eval(psi) - s).abs() <= 1e-9 * s.max(1e-300));
            }
        }

        #[test]
        fn solve_then_beta_round_trips(c in 0.1f64..20.0, alpha in 0.1f64..=1.0, d in 1usize..=4, frac in 1e-6f64..1.0) {
            let cal = BetaCalibration::new(d, Modulus::holder(c, alpha, (d as f64).sqrt()).unwrap()).unwrap();
            let eps = frac * cal.beta_f(1.0).unwrap();
            let dl = cal.solve_delta(eps, DEFAULT_TOL_REL).unwrap().delta;
            let back = cal.beta_f(dl).unwrap();
            prop_assert!((back - eps).abs() <= DEFAULT_TOL_REL * eps);
        }

        #[test]
        fn beta_f_nondecreasing(c in 0.1f64..20.0, alpha in 0.1f64..=1.0, d in 1usize..=3) {
            let cal = BetaCalibration::new(d, Modulus::holder(c, alpha, (d as f64).sqrt()).unwrap()).unwrap();
            let vals: Vec<f64> = (0..100).map(|k| cal.beta_f(k as f64 / 99.0).unwrap()).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
