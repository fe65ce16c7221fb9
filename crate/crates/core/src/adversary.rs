//! A map whose critical set cannot be made small by any C^1-close
//! perturbation: `f(x) = (int_0^{x_1} beta, x_2, .., x_m)` where `beta`
//! is a train of ever finer bumps.
//!
//! Block `n` occupies `[s_n, s_{n+1})` with `s_n = 1 - 2^(1-n)` and holds
//! `2^(n^2)` bumps of width `4 l_n`, `l_n = 2^(-n^2-n-2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{check_point, DifferentiableMap, Jacobian};
use crate::measure::{measure_determinant_zero_set, MeasureEstimate};
use crate::modulus::Modulus;
use crate::perturbation::{BlendedApproximant, StorePolicy, UpperBound};

/// Deepest block that can be resolved in `f64` near `s = 1`.
pub const MAX_DEPTH: usize = 6;

/// Chebyshev samples per oscillation interval when looking for a zero.
pub const SIGN_SAMPLES: usize = 64;

/// Above this many bumps in a block, sheet counting samples bump indices.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000;

#[derive(Debug, Clone)]
pub struct OscillatoryFunction {
    omega: Modulus,
    d: usize,
    m: usize,
    n_max: usize,
}

impl OscillatoryFunction {
    pub fn new(omega: Modulus, d: usize, m: usize) -> Result<Self> {
        if m == 0 || m > d {
            return Err(Error::Argument(format!("need 1 <= m <= d, got d = {d}, m = {m}")));
        }
        Ok(OscillatoryFunction { omega, d, m, n_max: MAX_DEPTH })
    }

    /// Truncates the profile after block `n_max`; `beta` is zero beyond.
    pub fn with_depth(mut self, n_max: usize) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&n_max) {
            return Err(Error::Argument(format!("depth must lie in 1..={MAX_DEPTH}, got {n_max}")));
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.omega
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.n_max
    }

    pub fn ell(n: usize) -> f64 {
        2f64.powi(-((n * n + n + 2) as i32))
    }

    pub fn block_start(n: usize) -> f64 {
        1.0 - 2f64.powi(1 - n as i32)
    }

    pub fn bumps(n: usize) -> u128 {
        1u128 << (n * n)
    }

    /// `[a_{n,k}, b_{n,k}] = [s_n + (4k+1) l_n, s_n + (4k+3) l_n]`.
    pub fn interval(n: usize, k: u128) -> (f64, f64) {
        let (s, l) = (Self::block_start(n), Self::ell(n));
        let base = 4.0 * k as f64;
        (s + (base + 1.0) * l, s + (base + 3.0) * l)
    }

    /// One bump `c_n(t)`, `t` measured from the bump's left end.
    pub fn bump(&self, n: usize, t: f64) -> f64 {
        let l = Self::ell(n);
        if !(0.0..=4.0 * l).contains(&t) {
            return 0.0;
        }
        if t > 2.0 * l {
            return -self.bump(n, 4.0 * l - t);
        }
        if t < l {
            0.5 * self.omega.eval(t)
        } else {
            0.5 * self.omega.eval(2.0 * l - t)
        }
    }

    /// `int_0^t c_n`. Every full bump integrates to zero.
    pub fn bump_integral(&self, n: usize, t: f64) -> f64 {
        let l = Self::ell(n);
        let w = |u: f64| self.omega.integral(u);
        if t <= 0.0 || t >= 4.0 * l {
            0.0
        } else if t > 2.0 * l {
            self.bump_integral(n, 4.0 * l - t)
        } else if t < l {
            0.5 * w(t)
        } else {
            0.5 * (2.0 * w(l) - w(2.0 * l - t))
        }
    }

    /// Block, bump index and offset inside the bump for `s`, or `None` past
    /// the last block.
    pub fn locate(&self, s: f64) -> Option<(usize, u128, f64)> {
        (1..=self.n_max).find_map(|n| {
            let start = Self::block_start(n);
            if s < start || s >= Self::block_start(n + 1) {
                return None;
            }
            let width = 4.0 * Self::ell(n);
            let k = (((s - start) / width).floor() as u128).min(Self::bumps(n) - 1);
            Some((n, k, s - start - k as f64 * width))
        })
    }

    pub fn eval_beta(&self, s: f64) -> Result<f64> {
        check_unit(s)?;
        Ok(self.locate(s).map_or(0.0, |(n, _, t)| self.bump(n, t)))
    }

    pub fn integral(&self, s: f64) -> Result<f64> {
        check_unit(s)?;
        Ok(self.locate(s).map_or(0.0, |(n, _, t)| self.bump_integral(n, t)))
    }

    /// `beta(2^-5)`, the profile value entering `gamma`.
    pub fn profile_constant(&self) -> f64 {
        self.locate(2f64.powi(-5)).map_or(0.0, |(n, _, t)| self.bump(n, t))
    }

    /// `2 m^3 beta(2^-5)^(m-1)`.
    pub fn gamma(&self) -> f64 {
        2.0 * (self.m as f64).powi(3) * self.profile_constant().powi(self.m as i32 - 1)
    }
}

fn check_unit(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Argument(format!("profile argument {s} outside [0, 1]")));
    }
    Ok(())
}

/// `f(x) = (int_0^{x_1} beta, x_2, .., x_m)` on `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct AdversarialMap {
    profile: OscillatoryFunction,
}

pub fn adversarial_f(profile: &OscillatoryFunction) -> AdversarialMap {
    AdversarialMap { profile: profile.clone() }
}

impl AdversarialMap {
    pub fn profile(&self) -> &OscillatoryFunction {
        &self.profile
    }
}

impl DifferentiableMap for AdversarialMap {
    fn input_dim(&self) -> usize {
        self.profile.d
    }

    fn output_dim(&self) -> usize {
        self.profile.m
    }

    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.profile.d)?;
        let mut v = x[..self.profile.m].to_vec();
        v[0] = self.profile.integral(x[0])?;
        Ok(v)
    }

    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        let v = self.value(x)?;
        let (m, d) = (self.profile.m, self.profile.d);
        let mut j = Jacobian::zeros(m, d);
        j.0[(0, 0)] = self.profile.eval_beta(x[0])?;
        for i in 1..m {
            j.0[(i, i)] = 1.0;
        }
        Ok((v, j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundCertificate {
    pub epsilon: f64,
    pub gamma: f64,
    /// `beta(2^-5)`.
    pub profile_constant: f64,
    /// `[beta(2^-5)]^(m-1) m^3 eps`, the allowed drift of `det L(Dg)`.
    pub determinant_drift: f64,
    /// `Psi_omega(gamma eps)`.
    pub psi: f64,
    pub n0: usize,
    /// `sum_{n <= n0} 2^(n^2)`.
    pub count_bound: u128,
    /// `2^-2 sqrt(log2(1/Psi)) / (16 Psi)`.
    pub formula_bound: f64,
    /// Set when the scan reached the truncation depth.
    pub truncated: bool,
}

impl LowerBoundCertificate {
    /// Sheets live in the blocks `n <= n0`, i.e. in `x_1 < s_{n0+1}`.
    pub fn support_end(&self) -> f64 {
        OscillatoryFunction::block_start(self.n0 + 1)
    }
}

pub fn lower_bound_n(profile: &OscillatoryFunction, eps: f64) -> Result<LowerBoundCertificate> {
    let gamma = profile.gamma();
    let b5 = profile.profile_constant();
    let profile_cutoff = b5 / gamma;
    let dimension_cutoff = 1.0 / profile.d as f64;
    let upper = profile_cutoff.min(dimension_cutoff);
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::EpsilonRange {
            epsilon: eps,
            upper,
            profile_cutoff,
            dimension_cutoff,
        });
    }
    let drift = b5.powi(profile.m as i32 - 1) * (profile.m as f64).powi(3) * eps;
    let omega = &profile.omega;
    let mut n0 = 0;
    while n0 < profile.n_max && omega.eval(OscillatoryFunction::ell(n0 + 1)) / 2.0 >= drift {
        n0 += 1;
    }
    let truncated = n0 == profile.n_max && omega.eval(OscillatoryFunction::ell(n0 + 1)) / 2.0 >= drift;
    let psi = omega.inverse(gamma * eps);
    Ok(LowerBoundCertificate {
        epsilon: eps,
        gamma,
        profile_constant: b5,
        determinant_drift: drift,
        psi,
        n0,
        count_bound: (1..=n0).map(OscillatoryFunction::bumps).sum(),
        formula_bound: formula_bound(psi),
        truncated,
    })
}

/// `2^(-2 sqrt(log2(1/Psi))) / (16 Psi)`; the root is taken as zero once
/// `Psi >= 1`.
pub fn formula_bound(psi: f64) -> f64 {
    let lg = (1.0 / psi).log2().max(0.0);
    2f64.powf(-2.0 * lg.sqrt()) / (16.0 * psi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCount {
    pub n: usize,
    pub intervals: u128,
    pub checked: usize,
    /// Fewest intervals with a detected zero over all lines.
    pub detected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheetCount {
    /// Exact when every level was enumerated, otherwise scaled up from the
    /// sampled fraction.
    pub count: u128,
    pub exhaustive: bool,
    pub lines: usize,
    pub levels: Vec<LevelCount>,
}

/// Counts oscillation intervals `[a_{n,k}, b_{n,k}]`, `n <= n0`, on which
/// `det L(Dg)` changes sign along lines parallel to the `x_1` axis, taking
/// the minimum over `lines` random lines.
pub fn count_critical_sheets(
    g: &dyn DifferentiableMap,
    profile: &OscillatoryFunction,
    eps: f64,
    lines: usize,
    seed: u64,
) -> Result<SheetCount> {
    let d = profile.d;
    if g.input_dim() != d || g.output_dim() != profile.m {
        return Err(Error::Dimension("competitor and profile dimensions differ".into()));
    }
    let cert = lower_bound_n(profile, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = if d == 1 { 1 } else { lines.max(1) };
    let tails: Vec<Vec<f64>> = (0..lines).map(|_| (1..d).map(|_| rng.gen()).collect()).collect();
    let nodes: Vec<f64> = (0..SIGN_SAMPLES)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::PI * i as f64 / (SIGN_SAMPLES - 1) as f64).cos())
        .collect();
    let mut levels = Vec::with_capacity(cert.n0);
    let mut exhaustive = true;
    let mut count = 0u128;
    for n in 1..=cert.n0 {
        let total = OscillatoryFunction::bumps(n);
        let ks: Vec<u128> = if total <= EXHAUSTIVE_LIMIT {
            (0..total).collect()
        } else {
            exhaustive = false;
            (0..EXHAUSTIVE_LIMIT).map(|_| rng.gen_range(0..total)).collect()
        };
        let mut detected = usize::MAX;
        for tail in &tails {
            let hits = ks
                .par_iter()
                .map(|&k| has_zero(g, OscillatoryFunction::interval(n, k), tail, &nodes))
                .collect::<Result<Vec<bool>>>()?;
            detected = detected.min(hits.iter().filter(|&&h| h).count());
        }
        count += if total <= EXHAUSTIVE_LIMIT {
            detected as u128
        } else {
            (detected as f64 / ks.len() as f64 * total as f64).round() as u128
        };
        levels.push(LevelCount { n, intervals: total, checked: ks.len(), detected });
    }
    Ok(SheetCount { count, exhaustive, lines, levels })
}

fn has_zero(g: &dyn DifferentiableMap, (a, b): (f64, f64), tail: &[f64], nodes: &[f64]) -> Result<bool> {
    let mut x = Vec::with_capacity(tail.len() + 1);
    let mut prev: Option<f64> = None;
    for &t in nodes {
        x.clear();
        x.push((a + t * (b - a)).min(1.0));
        x.extend_from_slice(tail);
        let v = g.jacobian(&x)?.leading_minor_det();
        if v == 0.0 || prev.is_some_and(|p| p.signum() != v.signum()) {
            return Ok(true);
        }
        prev = Some(v);
    }
    Ok(false)
}

/// Sampling cells per `l_{n0}` along `x_1` in [`sandwich`].
pub const SANDWICH_CELLS_PER_ELL: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: LowerBoundCertificate,
    /// `H^{d-1}` of `{det L(Dg) = 0}` over `[0, s_{n0+1}] x [0,1]^{d-1}`.
    pub measured: MeasureEstimate,
    pub upper: UpperBound,
    pub cubes_per_axis: u64,
    pub cells: Vec<usize>,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        let lower = (self.lower.count_bound as f64).max(self.lower.formula_bound);
        lower <= self.measured.value && self.measured.value <= self.upper.theorem
    }
}

/// Runs the perturbation pipeline on the adversarial map and measures the
/// critical sheets of the result where the certificate places them.
pub fn sandwich(profile: &OscillatoryFunction, eps: f64) -> Result<Sandwich> {
    let lower = lower_bound_n(profile, eps)?;
    let (d, m) = (profile.d, profile.m);
    let omega = match &profile.omega.kind {
        crate::modulus::ModulusKind::Holder { c, alpha } => Modulus::holder(*c, *alpha, (d as f64).sqrt())?,
        _ => profile.omega.clone(),
    };
    let upper = UpperBound::compute(d, m, eps, &omega)?;
    let f = std::sync::Arc::new(adversarial_f(profile));
    let g = BlendedApproximant::calibrated(f, eps, &omega, StorePolicy::OnDemand)?;
    let end = lower.support_end();
    let along = ((end / OscillatoryFunction::ell(lower.n0.max(1))).ceil() as usize) * SANDWICH_CELLS_PER_ELL;
    let mut cells = vec![4; d];
    cells[0] = along;
    let mut hi = vec![1.0; d];
    hi[0] = end;
    let measured = measure_determinant_zero_set(&g, &vec![0.0; d], &hi, &cells)?;
    Ok(Sandwich {
        lower,
        measured,
        upper,
        cubes_per_axis: g.grid().per_axis,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn linear(d: usize, m: usize) -> OscillatoryFunction {
        OscillatoryFunction::new(Modulus::holder(1.0, 1.0, 1.0).unwrap(), d, m).unwrap()
    }

    #[test]
    fn profile_examples() {
        let f = linear(1, 1);
        assert_eq!(f.eval_beta(2f64.powi(-5)).unwrap(), 2f64.powi(-6));
        for n in 1..=4 {
            assert_eq!(f.eval_beta(OscillatoryFunction::block_start(n)).unwrap(), 0.0);
        }
        assert_eq!(OscillatoryFunction::ell(1), 1.0 / 16.0);
        assert_eq!(OscillatoryFunction::ell(2), 1.0 / 256.0);
        assert!(f.eval_beta(1.5).is_err());
        assert_eq!(f.eval_beta(1.0).unwrap(), 0.0);
    }

    #[test]
    fn blocks_tile_the_interval() {
        for n in 1..=MAX_DEPTH {
            let len = OscillatoryFunction::bumps(n) as f64 * 4.0 * OscillatoryFunction::ell(n);
            let gap = OscillatoryFunction::block_start(n + 1) - OscillatoryFunction::block_start(n);
            assert_eq!(len, gap);
        }
    }

    #[test]
    fn odd_symmetry_and_support() {
        let f = OscillatoryFunction::new(Modulus::holder(2.0, 0.5, 1.0).unwrap(), 1, 1).unwrap();
        for n in 1..=4 {
            let l = OscillatoryFunction::ell(n);
            for i in 0..=1000 {
                let t = 2.0 * l * i as f64 / 1000.0;
                assert!((f.bump(n, t) + f.bump(n, 4.0 * l - t)).abs() < 1e-15);
            }
            assert_eq!(f.bump(n, -l), 0.0);
            assert_eq!(f.bump(n, 5.0 * l), 0.0);
            assert!(f.bump_integral(n, 4.0 * l).abs() < 1e-15);
        }
    }

    /// On each oscillation interval the profile falls monotonically from
    /// `omega(l_n)/2` to `-omega(l_n)/2`.
    #[test]
    fn range_on_oscillation_intervals() {
        for omega in [Modulus::holder(1.0, 1.0, 1.0).unwrap(), Modulus::holder(3.0, 0.5, 1.0).unwrap()] {
            let f = OscillatoryFunction::new(omega.clone(), 1, 1).unwrap();
            for n in 1..=4 {
                let h = omega.eval(OscillatoryFunction::ell(n)) / 2.0;
                let total = OscillatoryFunction::bumps(n);
                let ks: Vec<u128> = if total <= 64 { (0..total).collect() } else { (0..64).map(|i| i * (total / 64)).chain([total - 1]).collect() };
                for k in ks {
                    let (a, b) = OscillatoryFunction::interval(n, k);
                    let samples: Vec<f64> = (0..=200).map(|i| f.eval_beta(a + (b - a) * i as f64 / 200.0).unwrap()).collect();
                    assert!((samples[0] - h).abs() <= 1e-12, "n {n} k {k}");
                    assert!((samples[200] + h).abs() <= 1e-12);
                    assert!(samples.windows(2).all(|w| w[1] <= w[0] + 1e-15));
                }
            }
        }
    }

    #[test]
    fn integral_matches_quadrature() {
        let f = OscillatoryFunction::new(Modulus::holder(1.0, 0.5, 1.0).unwrap(), 1, 1).unwrap();
        let n = 2;
        let l = OscillatoryFunction::ell(n);
        let steps = 20_000;
        let h = 4.0 * l / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let t0 = i as f64 * h;
            // Simpson on each step
            acc += h / 6.0 * (f.bump(n, t0) + 4.0 * f.bump(n, t0 + h / 2.0) + f.bump(n, t0 + h));
            if i % 1000 == 999 {
                assert!((acc - f.bump_integral(n, t0 + h)).abs() < 1e-10);
            }
        }
        let s = OscillatoryFunction::block_start(2) + 4.0 * l * 3.0 + 0.7 * l;
        assert!((f.integral(s).unwrap() - f.bump_integral(n, 0.7 * l)).abs() < 1e-15);
    }

    #[test]
    fn jacobian_has_the_block_form() {
        let f = linear(3, 2);
        let map = adversarial_f(&f);
        let x = [0.3, 0.2, 0.9];
        let (v, j) = map.value_and_jacobian(&x).unwrap();
        assert_eq!(v, vec![f.integral(0.3).unwrap(), 0.2]);
        let want = DMatrix::from_row_slice(2, 3, &[f.eval_beta(0.3).unwrap(), 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(j.0, want);
        assert_eq!(j.leading_minor_det(), f.eval_beta(0.3).unwrap());
    }

    #[test]
    fn certificate_examples() {
        let f = linear(1, 1);
        assert_eq!(f.gamma(), 2.0);
        let cert = lower_bound_n(&f, 2f64.powi(-11)).unwrap();
        assert_eq!(cert.n0, 2);
        assert_eq!(cert.count_bound, 18);
        assert_eq!(cert.psi, 2f64.powi(-10));
        // 64 * 2^(-2 sqrt 10)
        assert!((cert.formula_bound - 64.0 * 2f64.powf(-2.0 * 10f64.sqrt())).abs() < 1e-12);
        assert!(cert.formula_bound > 0.0);
        assert_eq!(cert.support_end(), 0.75);
        match lower_bound_n(&f, 0.01) {
            Err(Error::EpsilonRange { profile_cutoff, dimension_cutoff, .. }) => {
                assert_eq!(profile_cutoff, 2f64.powi(-7));
                assert_eq!(dimension_cutoff, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    /// The scan oracle: `n0` is the last index with `omega(l_n)/2` at or
    /// above the drift, and the next one falls below it.
    #[test]
    fn n0_brackets_the_drift() {
        let f = linear(2, 1);
        for e in 8..40 {
            let eps = 2f64.powf(-(e as f64) / 2.0);
            let Ok(cert) = lower_bound_n(&f, eps) else { continue };
            let half = |n: usize| OscillatoryFunction::ell(n) / 2.0;
            assert!(cert.n0 == 0 || half(cert.n0) >= cert.determinant_drift);
            if !cert.truncated {
                assert!(half(cert.n0 + 1) < cert.determinant_drift);
            }
            assert!((cert.determinant_drift - cert.gamma * eps / 2.0).abs() < 1e-18);
        }
    }

    #[test]
    fn sheets_of_the_source_itself() {
        let f = linear(2, 1);
        let map = adversarial_f(&f);
        let c = count_critical_sheets(&map, &f, 2f64.powi(-11), 3, 1).unwrap();
        assert!(c.exhaustive);
        assert_eq!(c.count, 18);
        let c = count_critical_sheets(&map, &f, 1e-9, 1, 1).unwrap();
        assert!(!c.exhaustive);
        assert_eq!(c.levels.last().unwrap().detected, EXHAUSTIVE_LIMIT as usize);
    }

    struct Shifted<'a>(&'a AdversarialMap, f64);

    impl DifferentiableMap for Shifted<'_> {
        fn input_dim(&self) -> usize {
            self.0.input_dim()
        }
        fn output_dim(&self) -> usize {
            self.0.output_dim()
        }
        fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
            let mut v = self.0.value(x)?;
            v[0] += self.1 * x[0];
            Ok(v)
        }
        fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
            let (mut v, mut j) = self.0.value_and_jacobian(x)?;
            v[0] += self.1 * x[0];
            j.0[(0, 0)] += self.1;
            Ok((v, j))
        }
    }

    #[test]
    fn shifted_competitor_keeps_every_sheet() {
        let f = linear(1, 1);
        let eps = 2f64.powi(-11);
        let map = adversarial_f(&f);
        for shift in [eps, -eps, 0.5 * eps] {
            let c = count_critical_sheets(&Shifted(&map, shift), &f, eps, 1, 0).unwrap();
            assert!(c.count >= 18);
        }
    }

    /// Inside the admissible range the drift stays below `omega(2^-5)/4`,
    /// so the first block always counts.
    #[test]
    fn n0_is_positive_throughout_the_range() {
        for alpha in [0.1, 0.5, 1.0] {
            for m in 1..=3 {
                let f = OscillatoryFunction::new(Modulus::holder(1.0, alpha, 1.0).unwrap(), 3, m).unwrap();
                let upper = (f.profile_constant() / f.gamma()).min(1.0 / 3.0);
                for frac in [0.999, 0.5, 1e-3] {
                    assert!(lower_bound_n(&f, frac * upper).unwrap().n0 >= 1);
                }
            }
        }
    }

    fn det_drift_holds(m: usize, omega: Modulus, seed: u64) {
        let f = OscillatoryFunction::new(omega, 3, m).unwrap();
        let map = adversarial_f(&f);
        let eps = 0.9 * f.profile_constant() / f.gamma();
        let drift = lower_bound_n(&f, eps).unwrap().determinant_drift;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let j = map.jacobian(&x).unwrap();
            let mut e = DMatrix::<f64>::from_fn(m, 3, |_, _| rng.gen_range(-1.0..1.0));
            e *= eps / e.norm();
            let perturbed = Jacobian(&j.0 + e);
            assert!((perturbed.leading_minor_det() - j.leading_minor_det()).abs() <= drift * (1.0 + 1e-12));
        }
    }

    #[test]
    fn determinant_drift_bound() {
        det_drift_holds(1, Modulus::holder(1.0, 1.0, 1.0).unwrap(), 5);
        det_drift_holds(2, Modulus::holder(64.0, 1.0, 1.0).unwrap(), 6);
        det_drift_holds(3, Modulus::holder(64.0, 1.0, 1.0).unwrap(), 7);
    }

    /// With a small profile constant the drift bound shrinks like
    /// `beta(2^-5)^(m-1)`, but a perturbation of the identity block moves the
    /// determinant by `eps * beta` regardless.
    #[test]
    fn determinant_drift_bound_fails_for_small_profile() {
        let f = linear(2, 2);
        let eps = 0.5 * f.profile_constant() / f.gamma();
        let drift = lower_bound_n(&f, eps).unwrap().determinant_drift;
        let j = Jacobian::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let e = Jacobian::from_row_slice(2, 2, &[1.0 + eps, 0.0, 0.0, 1.0]);
        assert!((e.leading_minor_det() - j.leading_minor_det()).abs() > drift);
    }

    #[test]
    fn sandwich_holds_in_one_and_two_dimensions() {
        for d in [1, 2] {
            let f = linear(d, 1);
            let sw = sandwich(&f, 2f64.powi(-11)).unwrap();
            assert_eq!(sw.lower.count_bound, 18);
            assert!(sw.holds(), "{sw:?}");
            assert!(sw.measured.value >= 30.0 && sw.measured.value <= 40.0, "{}", sw.measured.value);
        }
    }

    proptest! {
        #[test]
        fn at_most_one_bump_is_active(s in 0.0f64..1.0) {
            let f = linear(1, 1);
            let active = (1..=MAX_DEPTH)
                .flat_map(|n| {
                    let start = OscillatoryFunction::block_start(n);
                    let width = 4.0 * OscillatoryFunction::ell(n);
                    let k = ((s - start) / width).floor();
                    [k - 1.0, k, k + 1.0].into_iter().filter_map(move |k| {
                        (k >= 0.0 && k < OscillatoryFunction::bumps(n) as f64).then(|| (n, s - start - k * width))
                    })
                })
                .filter(|&(n, t)| f.bump(n, t) != 0.0)
                .count();
            prop_assert!(active <= 1);
        }

        #[test]
        fn profile_admits_its_modulus(s in 0.0f64..1.0, h in -0.01f64..0.01, alpha in 0.3f64..1.0) {
            let omega = Modulus::holder(1.0, alpha, 1.0).unwrap();
            let f = OscillatoryFunction::new(omega.clone(), 1, 1).unwrap();
            let t = (s + h).clamp(0.0, 1.0);
            let diff = (f.eval_beta(s).unwrap() - f.eval_beta(t).unwrap()).abs();
            prop_assert!(diff <= omega.eval((s - t).abs()) + 1e-12);
        }
    }
}
