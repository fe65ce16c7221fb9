//! The per-simplex critical polynomial `p = D^(2m) det L(Dg)`, expanded
//! exactly in the local coordinates `t = (alpha_1, .., alpha_d)`.

use nalgebra::DMatrix;

use super::BlendedApproximant;
use crate::error::{Error, Result};
use crate::poly::{det, Poly};

#[derive(Debug, Clone)]
pub struct CriticalPolynomial {
    pub cube: Vec<u64>,
    pub simplex: usize,
    pub poly: Poly,
    /// `4m`, the degree bound of the construction.
    pub degree_bound: usize,
    /// `2^(2m)`, the weaker bound quoted for the same polynomial.
    pub stated_degree_bound: usize,
    apex: Vec<f64>,
    a_inv: DMatrix<f64>,
}

impl CriticalPolynomial {
    /// Local coordinates `t_j = alpha_j(x)`, `j = 1..d`.
    pub fn local_coords(&self, x: &[f64]) -> Vec<f64> {
        let d = self.apex.len();
        (0..d)
            .map(|r| (0..d).map(|c| self.a_inv[(r, c)] * (x[c] - self.apex[c])).sum())
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(&self.local_coords(x))
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.degree()
    }
}

/// Expands `[D^2 Dg]` restricted to its leading `m x m` block and takes the
/// determinant. Each entry has degree at most 4.
pub fn critical_polynomial(g: &BlendedApproximant, iota: u128, k: usize) -> Result<CriticalPolynomial> {
    let grid = g.grid();
    if iota >= grid.cube_count() || k >= g.decomposition().len() {
        return Err(Error::Argument(format!("no simplex ({iota}, {k})")));
    }
    critical_polynomial_in(g, &grid.cube_multi_index(iota), k)
}

pub(crate) fn critical_polynomial_in(g: &BlendedApproximant, multi: &[u64], k: usize) -> Result<CriticalPolynomial> {
    let grid = g.grid();
    let d = grid.d;
    let m = g.source().output_dim();
    let shape = &g.decomposition().shapes()[k];
    let apex_key = grid.vertex_key(multi, &shape.keys[d]);
    let apex = grid.key_point(&apex_key);
    let a = &shape.a_unit * grid.side;
    let bc = g.barycentric(multi, k, &apex);
    let gradient = &bc.grad;
    let a_inv = gradient.rows(0, d).into_owned();

    let alpha: Vec<Poly> = (0..=d)
        .map(|j| {
            if j < d {
                let mut lin = vec![0.0; d];
                lin[j] = 1.0;
                Poly::affine(0.0, &lin)
            } else {
                Poly::affine(1.0, &vec![-1.0; d])
            }
        })
        .collect();
    let mut dsum = Poly::zero(d, 2);
    for a_j in &alpha {
        dsum.add_assign_scaled(&a_j.mul(a_j), 1.0);
    }
    let s: Vec<Poly> = (0..m)
        .map(|c| {
            let mut acc = Poly::zero(d, 1);
            for (l, a_l) in alpha.iter().enumerate() {
                acc.add_assign_scaled(a_l, gradient[(l, c)]);
            }
            acc
        })
        .collect();

    let apex_value = g.patch(multi, k, d)?.value;
    let mut entries: Vec<Vec<Poly>> = vec![vec![Poly::zero(d, 4); m]; m];
    for j in 0..=d {
        let patch = g.patch(multi, k, j)?;
        let b = patch.jacobian.matrix() * &a;
        // w_j - f(apex) as a polynomial in t; the constant offset drops out of
        // sum_j w_j (x) D beta_j because the gradients sum to zero.
        let w: Vec<Poly> = (0..m)
            .map(|r| {
                let shift = if j < d { b[(r, j)] } else { 0.0 };
                let lin: Vec<f64> = (0..d).map(|q| b[(r, q)]).collect();
                Poly::affine(patch.value[r] - apex_value[r] - shift, &lin)
            })
            .collect();
        let aj2 = alpha[j].mul(&alpha[j]);
        let d_aj2 = dsum.mul(&aj2);
        for c in 0..m {
            let mut inner = dsum.scale(gradient[(j, c)]);
            inner.add_assign_scaled(&alpha[j].mul(&s[c]), -1.0);
            let pjc = alpha[j].mul(&inner).scale(2.0);
            for r in 0..m {
                entries[r][c].add_assign_scaled(&w[r].mul(&pjc), 1.0);
                entries[r][c].add_assign_scaled(&d_aj2, patch.jacobian.get(r, c));
            }
        }
    }
    let poly = det(&entries);
    poly.check_finite()?;
    let degree_bound = 4 * m;
    if poly.degree().unwrap_or(0) > degree_bound {
        return Err(Error::Numerical(format!(
            "critical polynomial degree {:?} exceeds {degree_bound}",
            poly.degree()
        )));
    }
    Ok(CriticalPolynomial {
        cube: multi.to_vec(),
        simplex: k,
        poly,
        degree_bound,
        stated_degree_bound: 1 << (2 * m),
        apex,
        a_inv,
    })
}
