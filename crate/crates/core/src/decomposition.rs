//! Partition of the unit cube into `2^(d-1) d!` simplices by recursive
//! coning from face centers, the `delta`-cube lattice built on top of it,
//! and barycentric coordinates.
//!
//! Vertices are kept in half-lattice units: inside one cube every vertex
//! coordinate is `0`, `1` or `2` times half the side length. Globally a vertex
//! is identified by integer coordinates in `0..=2K`, which makes vertices
//! shared between neighbouring simplices bitwise identical.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

/// Barycentric membership tolerance; shared faces belong to every simplex
/// adjacent to them.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// One simplex of the unit-cube decomposition in half units.
#[derive(Debug, Clone)]
pub struct Shape {
    /// `d + 1` vertices, each with coordinates in `{0, 1, 2}`; the last one
    /// is the cube center `(1, .., 1)`.
    pub keys: Vec<Vec<u8>>,
    /// Edge matrix for the unit cube, columns `v^j - v^(d+1)`.
    pub a_unit: DMatrix<f64>,
    pub a_inv_unit: DMatrix<f64>,
}

impl Shape {
    fn new(keys: Vec<Vec<u8>>) -> Self {
        let d = keys.len() - 1;
        let apex = &keys[d];
        let a_unit = DMatrix::from_fn(d, d, |r, c| (keys[c][r] as f64 - apex[r] as f64) * 0.5);
        let a_inv_unit = a_unit
            .clone()
            .try_inverse()
            .expect("decomposition simplices are nondegenerate");
        Shape {
            keys,
            a_unit,
            a_inv_unit,
        }
    }

    pub fn dim(&self) -> usize {
        self.keys.len() - 1
    }

    /// Unit-cube vertex coordinates.
    pub fn unit_vertex(&self, j: usize) -> Vec<f64> {
        self.keys[j].iter().map(|&k| k as f64 * 0.5).collect()
    }

    /// Barycentric coordinates of a point given in unit-cube coordinates.
    pub fn unit_barycentric(&self, u: &[f64], alpha: &mut [f64]) {
        let d = self.dim();
        let apex = &self.keys[d];
        let mut sum = 0.0;
        for r in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                acc += self.a_inv_unit[(r, c)] * (u[c] - apex[c] as f64 * 0.5);
            }
            alpha[r] = acc;
            sum += acc;
        }
        alpha[d] = 1.0 - sum;
    }
}

fn shape_keys(d: usize) -> Vec<Vec<Vec<u8>>> {
    if d == 1 {
        return vec![vec![vec![0], vec![2]]];
    }
    let faces = shape_keys(d - 1);
    let mut out = Vec::with_capacity(2 * d * faces.len());
    for axis in 0..d {
        for side in [0u8, 2u8] {
            for face in &faces {
                let mut verts: Vec<Vec<u8>> = face
                    .iter()
                    .map(|v| {
                        let mut w = v.clone();
                        w.insert(axis, side);
                        w
                    })
                    .collect();
                verts.push(vec![1; d]);
                out.push(verts);
            }
        }
    }
    out
}

/// The unit cube decomposition, computed once per dimension.
#[derive(Debug, Clone)]
pub struct CubeDecomposition {
    d: usize,
    shapes: Vec<Shape>,
}

impl CubeDecomposition {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Argument(format!(
                "dimension must lie in 1..={MAX_DIM}, got {d}"
            )));
        }
        let shapes = shape_keys(d).into_iter().map(Shape::new).collect();
        Ok(CubeDecomposition { d, shapes })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Index of the simplex containing `u in [0,1]^d`, lowest index on ties.
    ///
    /// The cone over face `(axis, side)` holds exactly the points whose
    /// largest deviation from the center is along `axis`, so the owner is
    /// found by descending through the faces instead of testing every shape.
    pub fn locate(&self, u: &[f64]) -> usize {
        let mut coords: Vec<f64> = u.to_vec();
        let mut index = 0usize;
        let mut dim = self.d;
        let mut block = self.shapes.len();
        while dim > 1 {
            block /= 2 * dim;
            let mut axis = 0;
            let mut best = -1.0;
            for (i, &c) in coords.iter().enumerate() {
                let dev = (c - 0.5).abs();
                if dev > best {
                    best = dev;
                    axis = i;
                }
            }
            let side = usize::from(coords[axis] >= 0.5 && best > 0.0);
            index += (2 * axis + side) * block;
            // Project radially from the center onto the chosen face.
            let scale = if best > 0.0 { 0.5 / best } else { 0.0 };
            coords = coords
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != axis)
                .map(|(_, &c)| 0.5 + (c - 0.5) * scale)
                .collect();
            dim -= 1;
        }
        index
    }
}

/// Returns the `2^(d-1) d!` simplices of `[0,1]^d`.
pub fn decompose_unit_cube(d: usize) -> Result<Vec<Simplex>> {
    let dec = CubeDecomposition::new(d)?;
    let grid = CubeGrid::new(d, 1.0)?;
    Ok((0..dec.len()).map(|k| grid.simplex(&dec, 0, k)).collect())
}

/// A simplex with explicit geometry. Produced on demand; the hot paths
/// work from [`Shape`] and the cube offset instead.
#[derive(Debug, Clone, Serialize)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
    #[serde(skip)]
    pub a: DMatrix<f64>,
    #[serde(skip)]
    pub a_inv: DMatrix<f64>,
    pub cube_index: usize,
    pub simplex_index: usize,
}

/// Barycentric data of a point relative to one simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Barycentric {
    pub alpha: Vec<f64>,
    /// `sum_l alpha_l^2`.
    pub d_sum: f64,
    /// `(d+1) x d` gradients: rows of `A^-1`, then minus their column sums.
    pub grad: DMatrix<f64>,
}

impl Barycentric {
    pub fn contains(&self) -> bool {
        self.alpha.iter().all(|&a| a >= -MEMBERSHIP_TOL)
    }
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn apex(&self) -> &[f64] {
        &self.vertices[self.dim()]
    }

    pub fn volume(&self) -> f64 {
        let d = self.dim();
        self.a.determinant().abs() / factorial(d)
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                best = best.max(crate::map::vec_distance(p, q));
            }
        }
        best
    }

    pub fn barycentric(&self, x: &[f64]) -> Barycentric {
        barycentric_from(&self.a_inv, self.apex(), x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.barycentric(x).contains()
    }
}

pub(crate) fn barycentric_from(a_inv: &DMatrix<f64>, apex: &[f64], x: &[f64]) -> Barycentric {
    let d = apex.len();
    let rel = DVector::from_iterator(d, x.iter().zip(apex).map(|(a, b)| a - b));
    let head = a_inv * rel;
    let mut alpha: Vec<f64> = head.iter().cloned().collect();
    alpha.push(1.0 - head.sum());
    let d_sum = alpha.iter().map(|a| a * a).sum();
    let mut grad = DMatrix::zeros(d + 1, d);
    for c in 0..d {
        let mut col = 0.0;
        for r in 0..d {
            grad[(r, c)] = a_inv[(r, c)];
            col += a_inv[(r, c)];
        }
        grad[(d, c)] = -col;
    }
    Barycentric { alpha, d_sum, grad }
}

pub(crate) fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// `[0,1]^d` split into `K^d` cubes of side `1/K`, `K = ceil(1/delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeGrid {
    pub d: usize,
    pub delta_target: f64,
    pub per_axis: u64,
    pub side: f64,
}

impl CubeGrid {
    pub fn new(d: usize, delta: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Argument(format!("dimension must lie in 1..={MAX_DIM}, got {d}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Argument(format!("delta must lie in (0, 1], got {delta}")));
        }
        let k = (1.0 / delta).ceil();
        if k > 2f64.powi(40) {
            return Err(Error::Argument(format!("delta {delta:e} is below the supported mesh size")));
        }
        let per_axis = k as u64;
        Ok(CubeGrid {
            d,
            delta_target: delta,
            per_axis,
            side: 1.0 / per_axis as f64,
        })
    }

    /// Total number of cubes, `K^d`, saturating.
    pub fn cube_count(&self) -> u128 {
        (self.per_axis as u128).saturating_pow(self.d as u32)
    }

    pub fn simplex_count(&self, dec: &CubeDecomposition) -> u128 {
        self.cube_count().saturating_mul(dec.len() as u128)
    }

    pub fn cube_multi_index(&self, mut iota: u128) -> Vec<u64> {
        let k = self.per_axis as u128;
        (0..self.d)
            .map(|_| {
                let i = (iota % k) as u64;
                iota /= k;
                i
            })
            .collect()
    }

    pub fn cube_linear_index(&self, multi: &[u64]) -> u128 {
        multi
            .iter()
            .rev()
            .fold(0u128, |acc, &i| acc * self.per_axis as u128 + i as u128)
    }

    /// The cube owning `x`; points on shared cube faces go to the lower cube.
    pub fn cube_of(&self, x: &[f64]) -> Vec<u64> {
        let k = self.per_axis as f64;
        x.iter()
            .map(|&c| {
                let t = (c * k).ceil() - 1.0;
                t.clamp(0.0, k - 1.0) as u64
            })
            .collect()
    }

    /// Local coordinates of `x` inside cube `multi`, nominally in `[0,1]^d`.
    pub fn local_coords(&self, multi: &[u64], x: &[f64]) -> Vec<f64> {
        let k = self.per_axis as f64;
        x.iter()
            .zip(multi)
            .map(|(&c, &i)| (c - i as f64 / k) * k)
            .collect()
    }

    /// Global half-unit key of a shape vertex inside cube `multi`.
    pub fn vertex_key(&self, multi: &[u64], local: &[u8]) -> Vec<u64> {
        multi
            .iter()
            .zip(local)
            .map(|(&i, &l)| 2 * i + l as u64)
            .collect()
    }

    pub fn key_point(&self, key: &[u64]) -> Vec<f64> {
        let denom = 2.0 * self.per_axis as f64;
        key.iter().map(|&k| k as f64 / denom).collect()
    }

    /// Explicit simplex `(iota, k)`.
    pub fn simplex(&self, dec: &CubeDecomposition, iota: u128, k: usize) -> Simplex {
        let shape = &dec.shapes()[k];
        let multi = self.cube_multi_index(iota);
        let vertices = shape
            .keys
            .iter()
            .map(|local| self.key_point(&self.vertex_key(&multi, local)))
            .collect();
        Simplex {
            vertices,
            a: &shape.a_unit * self.side,
            a_inv: &shape.a_inv_unit / self.side,
            cube_index: iota as usize,
            simplex_index: k,
        }
    }

    pub fn simplices<'a>(&'a self, dec: &'a CubeDecomposition) -> impl Iterator<Item = Simplex> + 'a {
        (0..self.cube_count()).flat_map(move |iota| (0..dec.len()).map(move |k| self.simplex(dec, iota, k)))
    }
}

/// JSON array with one `{cube, simplex, vertices}` record per simplex.
pub fn simplex_dump_json(grid: &CubeGrid, dec: &CubeDecomposition) -> Result<String> {
    #[derive(Serialize)]
    struct Rec {
        cube: usize,
        simplex: usize,
        vertices: Vec<Vec<f64>>,
    }
    let recs: Vec<Rec> = grid
        .simplices(dec)
        .map(|s| Rec {
            cube: s.cube_index,
            simplex: s.simplex_index,
            vertices: s.vertices,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&recs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_and_volumes() {
        for (d, count) in [(1, 1), (2, 4), (3, 24), (4, 192)] {
            let s = decompose_unit_cube(d).unwrap();
            assert_eq!(s.len(), count);
            let want = 1.0 / (2f64.powi(d as i32 - 1) * factorial(d));
            let mut total = 0.0;
            for simplex in &s {
                let v = simplex.volume();
                assert!((v - want).abs() <= 1e-12 * want);
                total += v;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(decompose_unit_cube(0).is_err());
        assert!(decompose_unit_cube(9).is_err());
    }

    #[test]
    fn apex_is_last_and_center() {
        for d in 1..=4 {
            let dec = CubeDecomposition::new(d).unwrap();
            for shape in dec.shapes() {
                if d > 1 {
                    assert!(shape.keys[d].iter().all(|&k| k == 1));
                }
            }
        }
    }

    #[test]
    fn grid_examples() {
        let g = CubeGrid::new(2, 0.3).unwrap();
        assert_eq!(g.per_axis, 4);
        assert_eq!(g.side, 0.25);
        assert_eq!(g.cube_count(), 16);
        assert_eq!(g.simplex_count(&CubeDecomposition::new(2).unwrap()), 64);
        let g = CubeGrid::new(1, 1.0).unwrap();
        assert_eq!(g.cube_count(), 1);
        assert_eq!(g.simplex_count(&CubeDecomposition::new(1).unwrap()), 1);
        let g = CubeGrid::new(3, 0.5).unwrap();
        assert_eq!(g.simplex_count(&CubeDecomposition::new(3).unwrap()), 192);
        assert!(CubeGrid::new(2, 0.0).is_err());
        assert!(CubeGrid::new(2, -1.0).is_err());
        assert!(CubeGrid::new(2, 1.5).is_err());
    }

    #[test]
    fn barycentric_examples() {
        for d in 1..=3 {
            for s in decompose_unit_cube(d).unwrap() {
                let apex = s.apex().to_vec();
                let b = s.barycentric(&apex);
                for (j, a) in b.alpha.iter().enumerate() {
                    let want = if j == d { 1.0 } else { 0.0 };
                    assert!((a - want).abs() < 1e-14);
                }
                assert!((b.d_sum - 1.0).abs() < 1e-14);
                let b = s.barycentric(&s.vertices[0].clone());
                assert!((b.alpha[0] - 1.0).abs() < 1e-14);
                let centroid: Vec<f64> = (0..d)
                    .map(|c| s.vertices.iter().map(|v| v[c]).sum::<f64>() / (d + 1) as f64)
                    .collect();
                let b = s.barycentric(&centroid);
                for a in &b.alpha {
                    assert!((a - 1.0 / (d + 1) as f64).abs() < 1e-14);
                }
                assert!((b.d_sum - 1.0 / (d + 1) as f64).abs() < 1e-14);
                let total: f64 = b.alpha.iter().sum();
                assert_eq!(total, 1.0);
            }
        }
    }

    #[test]
    fn reconstruction_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=4 {
            let grid = CubeGrid::new(d, 0.34).unwrap();
            let dec = CubeDecomposition::new(d).unwrap();
            for s in grid.simplices(&dec).take(400) {
                let prod = &s.a * &s.a_inv;
                let err = (prod - DMatrix::<f64>::identity(d, d)).norm();
                assert!(err <= 1e-10 * s.a.norm());
                let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
                let b = s.barycentric(&x);
                let rec = &s.a * DVector::from_column_slice(&b.alpha[..d]);
                for c in 0..d {
                    assert!((rec[c] + s.apex()[c] - x[c]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn geometric_bounds() {
        for d in 1..=4 {
            for delta in [1.0, 0.5, 0.3] {
                let grid = CubeGrid::new(d, delta).unwrap();
                let dec = CubeDecomposition::new(d).unwrap();
                let l = grid.side;
                let sd = (d as f64).sqrt();
                for s in grid.simplices(&dec).take(2000) {
                    assert!(s.diameter() <= sd * l * (1.0 + 1e-12));
                    let detv = s.a.determinant().abs();
                    let want = l.powi(d as i32) / 2f64.powi(d as i32 - 1);
                    assert!((detv - want).abs() <= 1e-12 * want);
                    let b = s.barycentric(s.apex());
                    for j in 0..=d {
                        let row = b.grad.row(j).norm();
                        assert!(row <= (d as f64).powi(d as i32) / l * (1.0 + 1e-12));
                    }
                    if d >= 2 {
                        for j in 0..d {
                            let dist = crate::map::vec_distance(&s.vertices[j], s.apex());
                            assert!(dist <= sd * l / 2.0 * (1.0 + 1e-12));
                            let corner = dec.shapes()[s.simplex_index].keys[j].iter().all(|&k| k != 1);
                            if corner {
                                assert!((dist - sd * l / 2.0).abs() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interior_points_have_single_owner_and_locate_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=4 {
            let dec = CubeDecomposition::new(d).unwrap();
            let simplices = decompose_unit_cube(d).unwrap();
            for _ in 0..5000 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
                let owners: Vec<usize> = simplices
                    .iter()
                    .filter(|s| s.barycentric(&x).alpha.iter().all(|&a| a > MEMBERSHIP_TOL))
                    .map(|s| s.simplex_index)
                    .collect();
                assert_eq!(owners.len(), 1, "{x:?}");
                assert_eq!(dec.locate(&x), owners[0]);
            }
        }
    }

    #[test]
    fn locate_prefers_lowest_index_on_faces() {
        let dec = CubeDecomposition::new(2).unwrap();
        let simplices = decompose_unit_cube(2).unwrap();
        for x in [[0.5, 0.5], [0.2, 0.2], [0.8, 0.2], [0.0, 0.0], [1.0, 1.0], [0.3, 0.7]] {
            let first = simplices.iter().position(|s| s.contains(&x)).unwrap();
            assert_eq!(dec.locate(&x), first, "{x:?}");
        }
    }

    #[test]
    fn cube_lookup_tie_breaks_low() {
        let g = CubeGrid::new(2, 0.25).unwrap();
        assert_eq!(g.cube_of(&[0.25, 0.0]), vec![0, 0]);
        assert_eq!(g.cube_of(&[0.26, 1.0]), vec![1, 3]);
        let multi = vec![2, 1];
        let iota = g.cube_linear_index(&multi);
        assert_eq!(g.cube_multi_index(iota), multi);
    }

    #[test]
    fn dump_is_valid_json() {
        let grid = CubeGrid::new(2, 0.5).unwrap();
        let dec = CubeDecomposition::new(2).unwrap();
        let text = simplex_dump_json(&grid, &dec).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 16);
        assert_eq!(v[0]["vertices"].as_array().unwrap().len(), 3);
    }
}
