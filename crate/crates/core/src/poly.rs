//! Dense multivariate polynomials over a graded monomial basis.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// All monomials in `nvars` variables of total degree `<= degree`, ordered
/// by degree and then lexicographically by exponent.
#[derive(Debug)]
pub struct Basis {
    pub nvars: usize,
    pub degree: usize,
    pub monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl Basis {
    fn build(nvars: usize, degree: usize) -> Self {
        let mut monomials = Vec::new();
        for total in 0..=degree {
            let mut cur = vec![0u8; nvars];
            fill(&mut cur, 0, total, &mut monomials);
        }
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Basis {
            nvars,
            degree,
            monomials,
            index,
        }
    }

    pub fn get(nvars: usize, degree: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, degree))
            .or_insert_with(|| Arc::new(Basis::build(nvars, degree)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn fill(cur: &mut Vec<u8>, var: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e as u8;
        fill(cur, var + 1, remaining - e, out);
    }
    cur[var] = 0;
}

#[derive(Debug, Clone)]
pub struct Poly {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars() == other.nvars() && (self - other).coeffs.iter().all(|&c| c == 0.0)
    }
}

impl Poly {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        let basis = Basis::get(nvars, degree);
        let coeffs = vec![0.0; basis.len()];
        Poly { basis, coeffs }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars, 0);
        p.coeffs[0] = c;
        p
    }

    /// `c0 + sum_i lin[i] t_i`.
    pub fn affine(c0: f64, lin: &[f64]) -> Self {
        let n = lin.len();
        let mut p = Poly::zero(n, 1);
        p.coeffs[0] = c0;
        for (i, &c) in lin.iter().enumerate() {
            let mut e = vec![0u8; n];
            e[i] = 1;
            let k = p.basis.index_of(&e).unwrap();
            p.coeffs[k] = c;
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars
    }

    pub fn capacity_degree(&self) -> usize {
        self.basis.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], f64)> {
        self.basis
            .monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.basis.index_of(exps).map_or(0.0, |k| self.coeffs[k])
    }

    /// Total degree of the highest nonzero term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms()
            .map(|(e, _)| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, &c| a.max(c.abs()))
    }

    fn widen(&self, degree: usize) -> Poly {
        if degree <= self.basis.degree {
            return self.clone();
        }
        let mut out = Poly::zero(self.nvars(), degree);
        for (e, c) in self.terms() {
            let k = out.basis.index_of(e).unwrap();
            out.coeffs[k] = c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Poly, s: f64) {
        assert_eq!(self.nvars(), other.nvars());
        if other.basis.degree > self.basis.degree {
            *self = self.widen(other.basis.degree);
        }
        if Arc::ptr_eq(&self.basis, &other.basis) {
            for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *a += s * b;
            }
        } else {
            // Bases are nested prefixes of the same graded order.
            for (k, b) in other.coeffs.iter().enumerate() {
                self.coeffs[k] += s * b;
            }
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars(), other.nvars());
        let da = self.degree().unwrap_or(0);
        let db = other.degree().unwrap_or(0);
        let mut out = Poly::zero(self.nvars(), da + db);
        let mut e = vec![0u8; self.nvars()];
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                for i in 0..e.len() {
                    e[i] = ea[i] + eb[i];
                }
                let k = out.basis.index_of(&e).unwrap();
                out.coeffs[k] += ca * cb;
            }
        }
        out
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let n = self.nvars();
        let deg = self.basis.degree;
        let mut powers = vec![1.0; n * (deg + 1)];
        for i in 0..n {
            for p in 1..=deg {
                powers[i * (deg + 1) + p] = powers[i * (deg + 1) + p - 1] * t[i];
            }
        }
        let mut acc = 0.0;
        for (e, &c) in self.basis.monomials.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut term = c;
            for i in 0..n {
                term *= powers[i * (deg + 1) + e[i] as usize];
            }
            acc += term;
        }
        acc
    }

    /// CSV with one `e1,..,en,coefficient` row per nonzero term.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = (1..=self.nvars()).map(|i| format!("e{i}")).collect();
        out.push_str(&head.join(","));
        out.push_str(",coefficient\n");
        for (e, c) in self.terms() {
            for x in e {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{c:e}\n"));
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numerical("polynomial coefficient overflow".into()))
        }
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, 1.0);
        out
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, -1.0);
        out
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

/// Determinant of a square matrix of polynomials: cofactor expansion up to
/// order 3, Leibniz sum above.
pub fn det(entries: &[Vec<Poly>]) -> Poly {
    let n = entries.len();
    let nvars = entries[0][0].nvars();
    match n {
        1 => entries[0][0].clone(),
        2 | 3 => {
            let mut acc = Poly::zero(nvars, 0);
            for c in 0..n {
                let minor: Vec<Vec<Poly>> = entries[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = entries[0][c].mul(&det(&minor));
                acc.add_assign_scaled(&term, if c % 2 == 0 { 1.0 } else { -1.0 });
            }
            acc
        }
        _ => {
            let mut acc = Poly::zero(nvars, 0);
            let mut perm: Vec<usize> = (0..n).collect();
            permutations(&mut perm, 0, 1.0, &mut |p, sign| {
                let mut term = entries[0][p[0]].clone();
                for (r, &c) in p.iter().enumerate().skip(1) {
                    term = term.mul(&entries[r][c]);
                }
                acc.add_assign_scaled(&term, sign);
            });
            acc
        }
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, sign: f64, f: &mut dyn FnMut(&[usize], f64)) {
    if k == p.len() {
        f(p, sign);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, if i == k { sign } else { -sign }, f);
        p.swap(k, i);
    }
}
