//! Numerical `H^{d-1}` of zero sets and critical sets for `d <= 3`.

pub mod marching;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{DifferentiableMap, Jacobian};
use crate::perturbation::{critical_polynomial_in, BlendedApproximant};
use marching::{extract, Extraction, NodeGrid};
pub use marching::{HalfSpace, Pieces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Marching,
    BoxCounting,
    CrossingCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    /// Count (d = 1), length (d = 2) or area (d = 3); infinite when the
    /// field vanishes on an open set.
    pub value: f64,
    pub method: Method,
    pub resolution: usize,
    /// `|value(res) - value(res / 2)|`.
    pub uncertainty: f64,
    pub degenerate: bool,
}

impl MeasureEstimate {
    fn from_pair(fine: (f64, bool), coarse: Option<(f64, bool)>, method: Method, resolution: usize) -> Self {
        let degenerate = fine.1;
        let value = if degenerate { f64::INFINITY } else { fine.0 + 0.0 };
        let uncertainty = match coarse {
            _ if degenerate => f64::INFINITY,
            Some((c, false)) => (fine.0 - c).abs(),
            Some((_, true)) => f64::INFINITY,
            None => 0.0,
        };
        MeasureEstimate {
            value,
            method,
            resolution,
            uncertainty,
            degenerate,
        }
    }
}

/// Region of integration.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex { vertices: Vec<Vec<f64>> },
}

impl Region {
    pub fn unit_cube(d: usize) -> Self {
        Region::Box {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Simplex { vertices } => vertices.len() - 1,
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Simplex { vertices } => {
                let d = self.dim();
                let lo = (0..d).map(|c| vertices.iter().map(|v| v[c]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..d).map(|c| vertices.iter().map(|v| v[c]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            }
        }
    }

    /// `alpha_j >= 0` constraints of a simplex; boxes need none.
    fn half_spaces(&self) -> Result<Vec<HalfSpace>> {
        match self {
            Region::Box { .. } => Ok(Vec::new()),
            Region::Simplex { vertices } => {
                let d = self.dim();
                let apex = &vertices[d];
                let a = nalgebra::DMatrix::from_fn(d, d, |r, c| vertices[c][r] - apex[r]);
                let inv = a
                    .try_inverse()
                    .ok_or_else(|| Error::Argument("degenerate simplex".into()))?;
                Ok(simplex_half_spaces(&inv, apex))
            }
        }
    }
}

fn simplex_half_spaces(a_inv: &nalgebra::DMatrix<f64>, apex: &[f64]) -> Vec<HalfSpace> {
    let d = apex.len();
    let mut hs: Vec<HalfSpace> = (0..d)
        .map(|j| {
            let normal: Vec<f64> = (0..d).map(|c| a_inv[(j, c)]).collect();
            let offset = -normal.iter().zip(apex).map(|(a, b)| a * b).sum::<f64>();
            HalfSpace { normal, offset }
        })
        .collect();
    let normal: Vec<f64> = (0..d).map(|c| -hs.iter().map(|h| h.normal[c]).sum::<f64>()).collect();
    let offset = 1.0 - hs.iter().map(|h| h.offset).sum::<f64>();
    hs.push(HalfSpace { normal, offset });
    hs
}

fn check_measurable(d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(Error::Unsupported(format!("measure unsupported for d = {d} (d must be 1, 2 or 3)")));
    }
    Ok(())
}

fn method_for(d: usize) -> Method {
    if d == 1 {
        Method::CrossingCount
    } else {
        Method::Marching
    }
}

fn sample<F>(grid: &NodeGrid, p: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    (0..grid.node_count())
        .into_par_iter()
        .map(|i| p(&grid.node(i)))
        .collect()
}

fn extract_region<F>(p: &F, region: &Region, res: usize) -> Result<Extraction>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let (lo, hi) = region.bounds();
    let grid = NodeGrid::uniform(lo, hi, res);
    let values = sample(&grid, p);
    Ok(extract(&grid, &values, &region.half_spaces()?))
}

/// `H^{d-1}` of `{p = 0}` inside `region`: crossing count, marching squares
/// or marching tetrahedra on a grid of `res` cells per axis of the region's
/// bounding box, clipped to the region.
pub fn zero_set_measure<F>(p: &F, region: &Region, res: usize) -> Result<MeasureEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let d = region.dim();
    check_measurable(d)?;
    if res == 0 {
        return Err(Error::Argument("resolution must be positive".into()));
    }
    let fine = extract_region(p, region, res)?;
    let coarse = if res >= 2 {
        let c = extract_region(p, region, res / 2)?;
        Some((c.measure(), c.degenerate))
    } else {
        None
    };
    Ok(MeasureEstimate::from_pair((fine.measure(), fine.degenerate), coarse, method_for(d), res))
}

/// The extracted pieces themselves, for plotting.
pub fn zero_set_pieces<F>(p: &F, region: &Region, res: usize) -> Result<Pieces>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    check_measurable(region.dim())?;
    Ok(extract_region(p, region, res)?.into_pieces())
}

/// Heuristic cross-check: cells whose corners change sign, times the cell
/// diameter to the power `d - 1`.
pub fn box_counting_measure<F>(p: &F, region: &Region, res: usize) -> Result<MeasureEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let d = region.dim();
    check_measurable(d)?;
    let count = |res: usize| -> Result<f64> {
        let e = extract_region(p, region, res)?;
        let (lo, hi) = region.bounds();
        let diam = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / res as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(e.cells.len() as f64 * diam.powi(d as i32 - 1))
    };
    let fine = count(res)?;
    let coarse = count((res / 2).max(1))?;
    Ok(MeasureEstimate {
        value: fine,
        method: Method::BoxCounting,
        resolution: res,
        uncertainty: (fine - coarse).abs(),
        degenerate: false,
    })
}

/// `d 2^(2m) delta^(d-1)`: bound on `H^{d-1}` of the zero set of a degree
/// `4m` polynomial inside one simplex of diameter `~ delta`.
pub fn mn0_bound(d: usize, m: usize, delta: f64) -> Result<f64> {
    if m == 0 || m > d {
        return Err(Error::Argument(format!("need 1 <= m <= d, got d = {d}, m = {m}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("delta must be positive, got {delta}")));
    }
    Ok(d as f64 * 4f64.powi(m as i32) * delta.powi(d as i32 - 1))
}

/// Tolerance rule for [`critical_set_mask`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "value")]
pub enum MaskTolerance {
    /// Mark when `sigma_min` at the centre is below this constant.
    Absolute(f64),
    /// Mark when `sigma_min` at the centre is below the largest change of
    /// the Jacobian between the centre and the cell corners, i.e. when a
    /// rank-deficient point inside the cell cannot be ruled out to first
    /// order.
    CellScaled,
}

/// Cells of a uniform grid over `[0,1]^d` whose Jacobian may be rank
/// deficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalMask {
    pub d: usize,
    pub res: usize,
    pub cells: Vec<bool>,
}

impl CriticalMask {
    pub fn marked(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

fn cell_is_critical(g: &dyn Fn(&[f64]) -> Result<Jacobian>, centre: &[f64], corners: &[Vec<f64>], tol: MaskTolerance) -> Result<bool> {
    let jc = g(centre)?;
    let s = jc.sigma_min();
    match tol {
        MaskTolerance::Absolute(t) => Ok(s < t),
        MaskTolerance::CellScaled => {
            let mut spread = 0.0f64;
            for c in corners {
                spread = spread.max(g(c)?.frobenius_distance(&jc));
            }
            Ok(s < spread)
        }
    }
}

pub fn critical_set_mask(g: &dyn DifferentiableMap, res: usize, tol: MaskTolerance) -> Result<CriticalMask> {
    let d = g.input_dim();
    check_measurable(d)?;
    if res < 8 {
        return Err(Error::Argument(format!("mask resolution must be >= 8, got {res}")));
    }
    let grid = NodeGrid::uniform(vec![0.0; d], vec![1.0; d], res);
    let jac = |x: &[f64]| g.jacobian(x);
    let cells = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let cell = grid.cell_multi(i);
            cell_is_critical(&jac, &grid.cell_center(&cell), &grid.cell_corners(&cell), tol)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(CriticalMask { d, res, cells })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSetMeasure {
    /// Zero set of the critical polynomials restricted to cells flagged by
    /// the rank-deficiency mask.
    pub masked: MeasureEstimate,
    /// Zero set of the critical polynomials, `{det L(Dg) = 0}`.
    pub unmasked: MeasureEstimate,
    pub simplices: u128,
    /// Largest per-simplex unmasked measure, to compare with [`mn0_bound`].
    pub max_per_simplex: f64,
    pub mask_tolerance: MaskTolerance,
}

struct SimplexMeasure {
    masked: f64,
    unmasked: f64,
    degenerate: bool,
    degenerate_masked: bool,
}

fn measure_simplex(g: &BlendedApproximant, multi: &[u64], k: usize, n: usize, tol: MaskTolerance) -> Result<SimplexMeasure> {
    let grid = g.grid();
    let cp = critical_polynomial_in(g, multi, k)?;
    let lo: Vec<f64> = multi.iter().map(|&i| i as f64 * grid.side).collect();
    let hi: Vec<f64> = multi.iter().map(|&i| (i + 1) as f64 * grid.side).collect();
    let nodes = NodeGrid::uniform(lo, hi, n);
    let values: Vec<f64> = (0..nodes.node_count()).map(|i| cp.eval(&nodes.node(i))).collect();
    let s = grid.simplex(g.decomposition(), grid.cube_linear_index(multi), k);
    let hs = simplex_half_spaces(&s.a_inv, s.apex());
    let ex = extract(&nodes, &values, &hs);
    let jac = |x: &[f64]| g.eval_on_simplex(multi, k, x).map(|(_, j)| j);
    let mut out = SimplexMeasure {
        masked: 0.0,
        unmasked: 0.0,
        degenerate: ex.degenerate,
        degenerate_masked: false,
    };
    if ex.degenerate {
        // p vanishes on an open set; only rank-deficient cells there count.
        out.degenerate_masked = (0..nodes.cell_count()).try_fold(false, |acc, i| -> Result<bool> {
            if acc {
                return Ok(true);
            }
            let cell = nodes.cell_multi(i);
            let c = nodes.cell_center(&cell);
            if hs.iter().any(|h| h.eval(&c) < 0.0) {
                return Ok(false);
            }
            cell_is_critical(&jac, &c, &nodes.cell_corners(&cell), tol)
        })?;
    }
    for cp in &ex.cells {
        let len = cp.pieces.measure();
        out.unmasked += len;
        if cell_is_critical(&jac, &nodes.cell_center(&cp.cell), &nodes.cell_corners(&cp.cell), tol)? {
            out.masked += len;
        }
    }
    Ok(out)
}

/// Sums, over all simplices, the measure of the zero set of the simplex's
/// critical polynomial clipped to the simplex. Each cube is sampled with
/// `ceil(res / K)` cells per axis so the global resolution is about `res`.
pub fn measure_critical_set(g: &BlendedApproximant, res: usize, tol: MaskTolerance) -> Result<CriticalSetMeasure> {
    let grid = g.grid();
    let d = grid.d;
    check_measurable(d)?;
    if !g.is_cached() {
        return Err(Error::Unsupported(
            "per-simplex measurement needs a cached approximant; use measure_determinant_zero_set".into(),
        ));
    }
    let simplices = grid.simplex_count(g.decomposition());
    let run = |res: usize| -> Result<(f64, f64, bool, bool, f64)> {
        let n = res.div_ceil(grid.per_axis as usize).max(1);
        let per: Vec<SimplexMeasure> = (0..simplices)
            .into_par_iter()
            .map(|idx| {
                let iota = idx / g.decomposition().len() as u128;
                let k = (idx % g.decomposition().len() as u128) as usize;
                measure_simplex(g, &grid.cube_multi_index(iota), k, n, tol)
            })
            .collect::<Result<_>>()?;
        let masked = per.iter().map(|s| s.masked).sum();
        let unmasked = per.iter().map(|s| s.unmasked).sum();
        let deg = per.iter().any(|s| s.degenerate);
        let deg_masked = per.iter().any(|s| s.degenerate_masked);
        let max = per.iter().map(|s| s.unmasked).fold(0.0, f64::max);
        Ok((masked, unmasked, deg, deg_masked, max))
    };
    let fine = run(res)?;
    let coarse = run((res / 2).max(1))?;
    let method = method_for(d);
    Ok(CriticalSetMeasure {
        masked: MeasureEstimate::from_pair((fine.0, fine.3), Some((coarse.0, coarse.3)), method, res),
        unmasked: MeasureEstimate::from_pair((fine.1, fine.2), Some((coarse.1, coarse.2)), method, res),
        simplices,
        max_per_simplex: fine.4,
        mask_tolerance: tol,
    })
}

/// Geometry of `{det L(Dg) = 0}` assembled simplex by simplex, for export.
pub fn critical_set_pieces(g: &BlendedApproximant, res: usize) -> Result<Pieces> {
    let grid = g.grid();
    check_measurable(grid.d)?;
    if !g.is_cached() {
        return Err(Error::Unsupported("per-simplex geometry needs a cached approximant".into()));
    }
    let n = res.div_ceil(grid.per_axis as usize).max(1);
    let per_cube = g.decomposition().len() as u128;
    let parts = (0..grid.simplex_count(g.decomposition()))
        .into_par_iter()
        .map(|idx| {
            let (iota, k) = (idx / per_cube, (idx % per_cube) as usize);
            let multi = grid.cube_multi_index(iota);
            let cp = critical_polynomial_in(g, &multi, k)?;
            let lo: Vec<f64> = multi.iter().map(|&i| i as f64 * grid.side).collect();
            let hi: Vec<f64> = multi.iter().map(|&i| (i + 1) as f64 * grid.side).collect();
            let nodes = NodeGrid::uniform(lo, hi, n);
            let values: Vec<f64> = (0..nodes.node_count()).map(|i| cp.eval(&nodes.node(i))).collect();
            let s = grid.simplex(g.decomposition(), iota, k);
            Ok(extract(&nodes, &values, &simplex_half_spaces(&s.a_inv, s.apex())).into_pieces())
        })
        .collect::<Result<Vec<Pieces>>>()?;
    let mut out = Pieces::default();
    for p in parts {
        out.append(p);
    }
    Ok(out)
}

/// `H^{d-1}` of `{det L(Dg) = 0}` over a box, sampling the field directly.
/// Works for any map, including on-demand approximants on lattices far too
/// fine for per-simplex work. `cells` gives the resolution per axis.
///
/// The blended approximant's Jacobian jumps by `O(omega(delta))` across
/// simplex faces, so for an approximant this is only meaningful when the
/// sampling cells are much coarser than the lattice.
pub fn measure_determinant_zero_set(g: &dyn DifferentiableMap, lo: &[f64], hi: &[f64], cells: &[usize]) -> Result<MeasureEstimate> {
    let d = g.input_dim();
    check_measurable(d)?;
    if lo.len() != d || hi.len() != d || cells.len() != d {
        return Err(Error::Dimension("box and resolution must have d entries".into()));
    }
    let run = |cells: Vec<usize>| -> Result<(f64, bool)> {
        let grid = NodeGrid::new(lo.to_vec(), hi.to_vec(), cells);
        let values = (0..grid.node_count())
            .into_par_iter()
            .map(|i| g.jacobian(&grid.node(i)).map(|j| j.leading_minor_det()))
            .collect::<Result<Vec<f64>>>()?;
        let ex = extract(&grid, &values, &[]);
        Ok((ex.measure(), ex.degenerate))
    };
    let fine = run(cells.to_vec())?;
    let coarse = run(cells.iter().map(|&c| (c / 2).max(1)).collect())?;
    let res = cells.iter().copied().max().unwrap_or(0);
    Ok(MeasureEstimate::from_pair(fine, Some(coarse), method_for(d), res))
}
