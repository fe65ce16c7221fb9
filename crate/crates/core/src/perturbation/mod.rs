//! The blended approximant `g`: vertex linearizations of `f` on the
//! simplicial lattice, mixed with squared-barycentric weights.

mod bounds;
mod critical;
mod verify;

pub use bounds::{gamma_remark, remark_bound, theorem_bound, upper_bound_n, UpperBound};
pub use critical::{critical_polynomial, CriticalPolynomial};
pub use verify::{verify_c1, C1Check, C1_SLACK};
pub(crate) use critical::critical_polynomial_in;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{Barycentric, CubeDecomposition, CubeGrid};
use crate::error::{Error, Result};
use crate::map::{check_point, DifferentiableMap, Jacobian};
use crate::modulus::{BetaCalibration, Modulus, DEFAULT_TOL_REL};

/// Default relative threshold on `sigma_min(Dg) / |Dg|` for rank deficiency.
pub const DEFAULT_SIGMA_TOL_REL: f64 = 1e-10;

/// Above this many lattice keys the vertex data is recomputed per query.
pub const CACHE_KEY_LIMIT: u128 = 1 << 22;

/// `w(x) = f(v) + Df(v) (x - v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPatch {
    pub vertex: Vec<f64>,
    pub value: Vec<f64>,
    pub jacobian: Jacobian,
}

impl LinearPatch {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let j = self.jacobian.matrix();
        (0..self.value.len())
            .map(|r| {
                self.value[r]
                    + (0..x.len())
                        .map(|c| j[(r, c)] * (x[c] - self.vertex[c]))
                        .sum::<f64>()
            })
            .collect()
    }
}

/// `beta_j = alpha_j^2 / D` and their gradients, `(d+1) x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendWeights {
    pub beta: Vec<f64>,
    pub dbeta: DMatrix<f64>,
}

pub fn blend_weights(bc: &Barycentric) -> BlendWeights {
    let n = bc.alpha.len();
    let d = n - 1;
    let mut beta = vec![0.0; n];
    let mut dbeta = DMatrix::zeros(n, d);
    blend_into(&bc.alpha, bc.d_sum, &bc.grad, &mut beta, &mut dbeta);
    BlendWeights { beta, dbeta }
}

/// `D beta_j = 2 alpha_j (D * D alpha_j - alpha_j S) / D^2` with
/// `S = sum_l alpha_l D alpha_l`, an expansion of the pairwise sum.
fn blend_into(alpha: &[f64], d_sum: f64, grad: &DMatrix<f64>, beta: &mut [f64], dbeta: &mut DMatrix<f64>) {
    let n = alpha.len();
    let d = grad.ncols();
    let mut s = vec![0.0; d];
    for l in 0..n {
        for c in 0..d {
            s[c] += alpha[l] * grad[(l, c)];
        }
    }
    let inv2 = 1.0 / (d_sum * d_sum);
    for j in 0..n {
        beta[j] = alpha[j] * alpha[j] / d_sum;
        let f = 2.0 * alpha[j] * inv2;
        for c in 0..d {
            dbeta[(j, c)] = f * (d_sum * grad[(j, c)] - alpha[j] * s[c]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorePolicy {
    /// Cache when the lattice is small enough, otherwise recompute.
    Auto,
    Cached,
    OnDemand,
}

#[derive(Debug)]
enum VertexStore {
    Cached {
        stride: u64,
        values: Vec<f64>,
        jacobians: Vec<f64>,
    },
    OnDemand,
}

/// Calibration record attached to a built approximant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub cubes_per_axis: u64,
    pub side: f64,
    /// `omega(sqrt(d) delta) [1 + sqrt(d) delta + 4 d^(d+1/2) (d+1)^4]`, the
    /// claimed bound on `|g - f|_C1`.
    pub c1_bound: Option<f64>,
    pub critical_set_free: bool,
    pub modulus_is_estimate: bool,
}

pub struct BlendedApproximant {
    f: Arc<dyn DifferentiableMap>,
    grid: CubeGrid,
    dec: CubeDecomposition,
    store: VertexStore,
    certificate: Certificate,
    sigma_tol_rel: f64,
}

impl std::fmt::Debug for BlendedApproximant {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("BlendedApproximant")
            .field("grid", &self.grid)
            .field("certificate", &self.certificate)
            .finish_non_exhaustive()
    }
}

/// Solves `beta_f(delta) = eps` and builds `g` on the resulting lattice.
pub fn build_approximant<F>(f: F, eps: f64, omega: &Modulus) -> Result<BlendedApproximant>
where
    F: DifferentiableMap + 'static,
{
    BlendedApproximant::calibrated(Arc::new(f), eps, omega, StorePolicy::Auto)
}

impl BlendedApproximant {
    pub fn calibrated(
        f: Arc<dyn DifferentiableMap>,
        eps: f64,
        omega: &Modulus,
        policy: StorePolicy,
    ) -> Result<Self> {
        let d = f.input_dim();
        let cal = BetaCalibration::new(d, omega.clone())?;
        let sol = cal.solve_delta(eps, DEFAULT_TOL_REL)?;
        let mut g = Self::with_mesh(f, sol.delta, policy)?;
        g.certificate.epsilon = Some(eps);
        g.certificate.c1_bound = Some(cal.beta_f(sol.delta)?);
        g.certificate.critical_set_free = sol.critical_set_free;
        g.certificate.modulus_is_estimate = omega.lower_estimate;
        Ok(g)
    }

    /// Builds `g` on the lattice with `K = ceil(1/delta)` and no calibration.
    pub fn with_mesh(f: Arc<dyn DifferentiableMap>, delta: f64, policy: StorePolicy) -> Result<Self> {
        let d = f.input_dim();
        let m = f.output_dim();
        if m == 0 || m > d {
            return Err(Error::Argument(format!("need 1 <= m <= d, got d = {d}, m = {m}")));
        }
        let grid = CubeGrid::new(d, delta)?;
        let dec = CubeDecomposition::new(d)?;
        let stride = 2 * grid.per_axis + 1;
        let keys = (stride as u128).saturating_pow(d as u32);
        let cache = match policy {
            StorePolicy::Cached => true,
            StorePolicy::OnDemand => false,
            StorePolicy::Auto => keys <= CACHE_KEY_LIMIT,
        };
        let store = if cache {
            if keys > CACHE_KEY_LIMIT * 16 {
                return Err(Error::Argument(format!("{keys} lattice keys are too many to cache")));
            }
            build_cache(&*f, &grid, &dec, stride)?
        } else {
            VertexStore::OnDemand
        };
        Ok(BlendedApproximant {
            certificate: Certificate {
                epsilon: None,
                delta,
                cubes_per_axis: grid.per_axis,
                side: grid.side,
                c1_bound: None,
                critical_set_free: false,
                modulus_is_estimate: false,
            },
            f,
            grid,
            dec,
            store,
            sigma_tol_rel: DEFAULT_SIGMA_TOL_REL,
        })
    }

    pub fn with_sigma_tol_rel(mut self, tol: f64) -> Self {
        self.sigma_tol_rel = tol;
        self
    }

    pub fn sigma_tol_rel(&self) -> f64 {
        self.sigma_tol_rel
    }

    pub fn grid(&self) -> &CubeGrid {
        &self.grid
    }

    pub fn decomposition(&self) -> &CubeDecomposition {
        &self.dec
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn source(&self) -> &dyn DifferentiableMap {
        &*self.f
    }

    pub fn is_cached(&self) -> bool {
        matches!(self.store, VertexStore::Cached { .. })
    }

    /// Owning `(cube, simplex)` of a point; lowest index on ties.
    pub fn locate(&self, x: &[f64]) -> (Vec<u64>, usize) {
        let multi = self.grid.cube_of(x);
        let u: Vec<f64> = self
            .grid
            .local_coords(&multi, x)
            .into_iter()
            .map(|c| c.clamp(0.0, 1.0))
            .collect();
        let k = self.dec.locate(&u);
        (multi, k)
    }

    /// Vertex linearization `j` of simplex `(multi, k)`.
    pub fn patch(&self, multi: &[u64], k: usize, j: usize) -> Result<LinearPatch> {
        let key = self.grid.vertex_key(multi, &self.dec.shapes()[k].keys[j]);
        let (value, jacobian) = self.vertex_data(&key)?;
        Ok(LinearPatch {
            vertex: self.grid.key_point(&key),
            value,
            jacobian,
        })
    }

    pub fn vertex_data(&self, key: &[u64]) -> Result<(Vec<f64>, Jacobian)> {
        let m = self.f.output_dim();
        let d = self.grid.d;
        match &self.store {
            VertexStore::Cached {
                stride,
                values,
                jacobians,
            } => {
                let idx = linear_key(key, *stride) as usize;
                let v = values[idx * m..(idx + 1) * m].to_vec();
                let jac = Jacobian::from_row_slice(m, d, &jacobians[idx * m * d..(idx + 1) * m * d]);
                Ok((v, jac))
            }
            VertexStore::OnDemand => self.f.value_and_jacobian(&self.grid.key_point(key)),
        }
    }

    /// Barycentric data of `x` relative to simplex `(multi, k)`, valid for
    /// any `x` (coordinates may be negative outside the simplex).
    pub fn barycentric(&self, multi: &[u64], k: usize, x: &[f64]) -> Barycentric {
        let d = self.grid.d;
        let shape = &self.dec.shapes()[k];
        let u = self.grid.local_coords(multi, x);
        let mut alpha = vec![0.0; d + 1];
        shape.unit_barycentric(&u, &mut alpha);
        let d_sum = alpha.iter().map(|a| a * a).sum();
        let scale = self.grid.per_axis as f64;
        let mut grad = DMatrix::zeros(d + 1, d);
        for c in 0..d {
            let mut col = 0.0;
            for r in 0..d {
                let v = shape.a_inv_unit[(r, c)] * scale;
                grad[(r, c)] = v;
                col += v;
            }
            grad[(d, c)] = -col;
        }
        Barycentric { alpha, d_sum, grad }
    }

    /// `(g, Dg)` from the formula of simplex `(multi, k)`, without checking
    /// that `x` lies in it.
    pub fn eval_on_simplex(&self, multi: &[u64], k: usize, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        let d = self.grid.d;
        let m = self.f.output_dim();
        let bc = self.barycentric(multi, k, x);
        let bw = blend_weights(&bc);
        let mut ws = Vec::with_capacity(d + 1);
        let mut jac = DMatrix::zeros(m, d);
        let mut value = vec![0.0; m];
        for j in 0..=d {
            let patch = self.patch(multi, k, j)?;
            let w = patch.eval(x);
            for r in 0..m {
                value[r] += bw.beta[j] * w[r];
            }
            jac += patch.jacobian.matrix() * bw.beta[j];
            ws.push(w);
        }
        // Centred form: sum_j (w_j - g) (x) D beta_j; the weights' gradients
        // sum to zero, so subtracting g leaves the value unchanged but keeps
        // the products O(side) on fine lattices.
        for (j, w) in ws.iter().enumerate() {
            for r in 0..m {
                let dw = w[r] - value[r];
                for c in 0..d {
                    jac[(r, c)] += dw * bw.dbeta[(j, c)];
                }
            }
        }
        Ok((value, Jacobian(jac)))
    }

    pub fn eval_g(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        check_point(x, self.grid.d)?;
        let (multi, k) = self.locate(x);
        self.eval_on_simplex(&multi, k, x)
    }

    /// Rank deficiency test `sigma_min(Dg) < tol_rel * |Dg|`.
    pub fn is_rank_deficient(&self, jac: &Jacobian) -> bool {
        jac.sigma_min() < self.sigma_tol_rel * jac.frobenius()
    }

    /// JSON manifest: calibration, lattice size, counts.
    pub fn manifest_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            d: usize,
            m: usize,
            certificate: &'a Certificate,
            cubes: String,
            simplices: String,
            cached: bool,
        }
        Ok(serde_json::to_string_pretty(&Manifest {
            d: self.grid.d,
            m: self.f.output_dim(),
            certificate: &self.certificate,
            cubes: self.grid.cube_count().to_string(),
            simplices: self.grid.simplex_count(&self.dec).to_string(),
            cached: self.is_cached(),
        })?)
    }

    /// CSV of vertex values and Jacobians (cached stores only).
    pub fn vertex_table_csv(&self) -> Result<String> {
        let VertexStore::Cached { .. } = &self.store else {
            return Err(Error::Unsupported("vertex table of an on-demand approximant".into()));
        };
        let d = self.grid.d;
        let m = self.f.output_dim();
        let mut out = String::new();
        let mut head: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        head.extend((1..=m).map(|r| format!("f{r}")));
        for r in 1..=m {
            head.extend((1..=d).map(|c| format!("df{r}_{c}")));
        }
        out.push_str(&head.join(","));
        out.push('\n');
        for key in self.vertex_keys() {
            let (v, j) = self.vertex_data(&key)?;
            let mut row: Vec<String> = self.grid.key_point(&key).iter().map(|c| c.to_string()).collect();
            row.extend(v.iter().map(|c| c.to_string()));
            for r in 0..m {
                row.extend((0..d).map(|c| j.get(r, c).to_string()));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Every lattice key used by some simplex, in increasing linear order.
    pub fn vertex_keys(&self) -> Vec<Vec<u64>> {
        used_keys(&self.grid, &self.dec)
    }
}

impl DifferentiableMap for BlendedApproximant {
    fn input_dim(&self) -> usize {
        self.grid.d
    }
    fn output_dim(&self) -> usize {
        self.f.output_dim()
    }
    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_g(x).map(|(v, _)| v)
    }
    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        self.eval_g(x)
    }
}

fn linear_key(key: &[u64], stride: u64) -> u64 {
    key.iter().rev().fold(0, |acc, &k| acc * stride + k)
}

fn used_keys(grid: &CubeGrid, dec: &CubeDecomposition) -> Vec<Vec<u64>> {
    let d = grid.d;
    let stride = 2 * grid.per_axis + 1;
    let mut local: Vec<Vec<u8>> = dec.shapes().iter().flat_map(|s| s.keys.iter().cloned()).collect();
    local.sort();
    local.dedup();
    let total = (stride as u128).pow(d as u32) as usize;
    let mut used = vec![false; total];
    for iota in 0..grid.cube_count() {
        let multi = grid.cube_multi_index(iota);
        for l in &local {
            used[linear_key(&grid.vertex_key(&multi, l), stride) as usize] = true;
        }
    }
    used.iter()
        .enumerate()
        .filter(|(_, &u)| u)
        .map(|(i, _)| {
            let mut i = i as u64;
            (0..d)
                .map(|_| {
                    let k = i % stride;
                    i /= stride;
                    k
                })
                .collect()
        })
        .collect()
}

fn build_cache(f: &dyn DifferentiableMap, grid: &CubeGrid, dec: &CubeDecomposition, stride: u64) -> Result<VertexStore> {
    let d = grid.d;
    let m = f.output_dim();
    let total = (stride as u128).pow(d as u32) as usize;
    let keys = used_keys(grid, dec);
    let evaluated: Vec<(usize, Vec<f64>, Jacobian)> = keys
        .par_iter()
        .map(|key| {
            let (v, j) = f.value_and_jacobian(&grid.key_point(key))?;
            Ok((linear_key(key, stride) as usize, v, j))
        })
        .collect::<Result<_>>()?;
    let mut values = vec![f64::NAN; total * m];
    let mut jacobians = vec![f64::NAN; total * m * d];
    for (idx, v, j) in evaluated {
        values[idx * m..(idx + 1) * m].copy_from_slice(&v);
        for r in 0..m {
            for c in 0..d {
                jacobians[idx * m * d + r * d + c] = j.get(r, c);
            }
        }
    }
    Ok(VertexStore::Cached {
        stride,
        values,
        jacobians,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_function;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx(src: &str, d: usize, m: usize, delta: f64, policy: StorePolicy) -> BlendedApproximant {
        let f = parse_function(src, d, m).unwrap();
        BlendedApproximant::with_mesh(Arc::new(f), delta, policy).unwrap()
    }

    #[test]
    fn weights_at_vertex_and_centroid() {
        let s = crate::decomposition::decompose_unit_cube(2).unwrap();
        for simplex in &s {
            for j in 0..3 {
                let bw = blend_weights(&simplex.barycentric(&simplex.vertices[j]));
                assert!((bw.beta[j] - 1.0).abs() < 1e-15);
                assert!(bw.dbeta.norm() < 1e-12);
            }
            let c: Vec<f64> = (0..2).map(|i| simplex.vertices.iter().map(|v| v[i]).sum::<f64>() / 3.0).collect();
            let bw = blend_weights(&simplex.barycentric(&c));
            for b in &bw.beta {
                assert!((b - 1.0 / 3.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weight_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = crate::decomposition::decompose_unit_cube(2).unwrap();
        let h = 1e-6;
        for _ in 0..200 {
            let simplex = &s[rng.gen_range(0..s.len())];
            let mut a = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let tot: f64 = a.iter().sum();
            a.iter_mut().for_each(|v| *v /= tot);
            let x: Vec<f64> = (0..2).map(|i| (0..3).map(|j| a[j] * simplex.vertices[j][i]).sum()).collect();
            let bw = blend_weights(&simplex.barycentric(&x));
            for c in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let bp = blend_weights(&simplex.barycentric(&xp)).beta;
                let bm = blend_weights(&simplex.barycentric(&xm)).beta;
                for j in 0..3 {
                    let fd = (bp[j] - bm[j]) / (2.0 * h);
                    assert!((fd - bw.dbeta[(j, c)]).abs() < 1e-6, "{fd} vs {}", bw.dbeta[(j, c)]);
                }
            }
        }
    }

    #[test]
    fn affine_map_is_reproduced() {
        let g = approx("2*x1 - x2 + 0.5; x3 + x1", 3, 2, 0.5, StorePolicy::Auto);
        let f = parse_function("2*x1 - x2 + 0.5; x3 + x1", 3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let (gv, gj) = g.eval_g(&x).unwrap();
            let (fv, fj) = f.eval_with_jacobian(&x).unwrap();
            assert!(crate::map::vec_distance(&gv, &fv) < 1e-13);
            assert!(gj.frobenius_distance(&fj) < 1e-11);
        }
    }

    #[test]
    fn vertex_interpolation() {
        for (src, d) in [("sin(3*x1)*cos(2*x2)", 2), ("exp(x1)*x2 - x3^2", 3), ("x1^3", 1)] {
            let g = approx(src, d, 1, 0.26, StorePolicy::Cached);
            let f = parse_function(src, d, 1).unwrap();
            for key in g.vertex_keys() {
                let x = g.grid().key_point(&key);
                let (gv, gj) = g.eval_g(&x).unwrap();
                let (fv, fj) = f.eval_with_jacobian(&x).unwrap();
                assert!((gv[0] - fv[0]).abs() <= 4.0 * f64::EPSILON * fv[0].abs().max(1.0));
                assert!(gj.frobenius_distance(&fj) <= 1e-9);
            }
        }
    }

    #[test]
    fn on_demand_matches_cached() {
        let a = approx("x1*x2^2; sin(x2)", 2, 2, 0.3, StorePolicy::Cached);
        let b = approx("x1*x2^2; sin(x2)", 2, 2, 0.3, StorePolicy::OnDemand);
        assert!(a.is_cached() && !b.is_cached());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
            assert_eq!(a.eval_g(&x).unwrap(), b.eval_g(&x).unwrap());
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_of_values() {
        let g = approx("sin(3*x1)*cos(3*x2)", 2, 1, 0.2, StorePolicy::Auto);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = 1e-7;
        for _ in 0..300 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(0.01..0.99)).collect();
            let (multi, k) = g.locate(&x);
            let (_, j) = g.eval_on_simplex(&multi, k, &x).unwrap();
            for c in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                // Same simplex formula on both sides so the difference is smooth.
                let fp = g.eval_on_simplex(&multi, k, &xp).unwrap().0[0];
                let fm = g.eval_on_simplex(&multi, k, &xm).unwrap().0[0];
                assert!(((fp - fm) / (2.0 * h) - j.get(0, c)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_points_outside() {
        let g = approx("x1", 1, 1, 0.5, StorePolicy::Auto);
        assert!(matches!(g.eval_g(&[1.01]), Err(Error::OutsideCube { .. })));
        assert!(g.manifest_json().unwrap().contains("\"simplices\": \"2\""));
        assert!(g.vertex_table_csv().unwrap().starts_with("x1,f1,df1_1\n"));
    }

    /// Across a shared face the two neighbouring pieces take the same value
    /// but their Jacobians differ: the normal derivatives of the surviving
    /// barycentric coordinates are not the same on both sides. The jump is
    /// bounded by twice the per-simplex C^1 estimate.
    #[test]
    fn face_values_agree_and_jacobian_jump_is_bounded() {
        let g = approx("sin(3*x1)*cos(3*x2)", 2, 1, 0.25, StorePolicy::Cached);
        let omega = Modulus::holder(18.0, 1.0, 2f64.sqrt()).unwrap();
        let beta = BetaCalibration::new(2, omega).unwrap().beta_f(0.25).unwrap();
        let grid = *g.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut checked, mut max_jump) = (0, 0.0f64);
        while checked < 1000 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
            let (multi, k) = g.locate(&x);
            let s = grid.simplex(g.decomposition(), grid.cube_linear_index(&multi), k);
            let drop = rng.gen_range(0..3);
            let w: f64 = rng.gen();
            let others: Vec<usize> = (0..3).filter(|&j| j != drop).collect();
            let p: Vec<f64> = (0..2).map(|c| w * s.vertices[others[0]][c] + (1.0 - w) * s.vertices[others[1]][c]).collect();
            let n = g.barycentric(&multi, k, &p).grad.row(drop).into_owned();
            let q: Vec<f64> = (0..2).map(|c| p[c] - 1e-7 * n[c] / n.norm()).collect();
            if q.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                continue;
            }
            let (other, j) = g.locate(&q);
            if other == multi && j == k {
                continue;
            }
            let (va, ja) = g.eval_on_simplex(&multi, k, &p).unwrap();
            let (vb, jb) = g.eval_on_simplex(&other, j, &p).unwrap();
            assert!((va[0] - vb[0]).abs() < 1e-8);
            let jump = (ja.matrix() - jb.matrix()).norm();
            assert!(jump <= 2.0 * beta, "{jump} > {}", 2.0 * beta);
            max_jump = max_jump.max(jump);
            checked += 1;
        }
        assert!(max_jump > 1e-2, "{max_jump}");
    }

    #[test]
    fn calibrated_build_records_certificate() {
        let f = parse_function("x1^2/2", 1, 1).unwrap();
        let omega = Modulus::holder(1.0, 1.0, 1.0).unwrap();
        let cal = BetaCalibration::new(1, omega.clone()).unwrap();
        let eps = cal.beta_f(0.25).unwrap();
        let g = build_approximant(f, eps, &omega).unwrap();
        assert_eq!(g.grid().per_axis, 4);
        let cert = g.certificate();
        assert!((cert.c1_bound.unwrap() - eps).abs() <= 1e-9 * eps);
        assert!(!cert.critical_set_free);

        let affine = parse_function("3*x1 - x2", 2, 1).unwrap();
        let zero = Modulus::holder(0.0, 1.0, 2f64.sqrt()).unwrap();
        let g = build_approximant(affine, 1e-3, &zero).unwrap();
        assert!(g.certificate().critical_set_free);
        assert_eq!(g.grid().per_axis, 1);
    }
}
