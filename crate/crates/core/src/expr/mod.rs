//! Function definitions given as text, evaluated with exact forward-mode
//! derivatives.
//!
//! Each component is compiled to a postfix tape. Jacobians are obtained by
//! pushing `(value, gradient)` pairs through the tape, so they are exact up to
//! roundoff; no finite differencing is involved anywhere.

mod parser;

pub use parser::{Expr, Func};

use crate::error::{Error, Result};
use crate::map::{check_point, DifferentiableMap, Jacobian};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Call(Func),
}

fn compile(e: &Expr, out: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => out.push(Op::Const(*v)),
        Expr::Var(i) => out.push(Op::Var(*i)),
        Expr::Neg(a) => {
            compile(a, out);
            out.push(Op::Neg);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            compile(a, out);
            compile(b, out);
            out.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
        Expr::Pow(a, n) => {
            compile(a, out);
            out.push(Op::Pow(*n));
        }
        Expr::Call(f, a) => {
            compile(a, out);
            out.push(Op::Call(*f));
        }
    }
}

/// A parsed map `f: [0,1]^d -> R^m`. Immutable once built.
#[derive(Debug, Clone)]
pub struct FunctionDef {
    source: String,
    d: usize,
    m: usize,
    components: Vec<Expr>,
    tapes: Vec<Vec<Op>>,
}

/// Parses `src` as `m` semicolon-separated components over `x1..xd`.
pub fn parse_function(src: &str, d: usize, m: usize) -> Result<FunctionDef> {
    FunctionDef::parse(src, d, m)
}

impl FunctionDef {
    pub fn parse(src: &str, d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 || m > d {
            return Err(Error::Argument(format!(
                "need 1 <= m <= d, got d = {d}, m = {m}"
            )));
        }
        let components = parser::parse_components(src, d)?;
        if components.len() != m {
            return Err(Error::Arity {
                expected: m,
                found: components.len(),
            });
        }
        let tapes = components
            .iter()
            .map(|c| {
                let mut t = Vec::new();
                compile(c, &mut t);
                t
            })
            .collect();
        Ok(FunctionDef {
            source: src.to_string(),
            d,
            m,
            components,
            tapes,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn out_dim(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Componentwise evaluation at a point of the closed unit cube.
    pub fn eval_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(x, self.d)?;
        self.tapes
            .iter()
            .enumerate()
            .map(|(c, tape)| eval_value(tape, x, c))
            .collect()
    }

    /// Exact Jacobian by forward accumulation.
    pub fn eval_jacobian(&self, x: &[f64]) -> Result<Jacobian> {
        self.eval_with_jacobian(x).map(|(_, j)| j)
    }

    pub fn eval_with_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        check_point(x, self.d)?;
        let d = self.d;
        let mut values = Vec::with_capacity(self.m);
        let mut jac = Jacobian::zeros(self.m, d);
        let mut stack = Vec::with_capacity(16 * (d + 1));
        for (c, tape) in self.tapes.iter().enumerate() {
            eval_dual(tape, x, c, &mut stack)?;
            values.push(stack[0]);
            for j in 0..d {
                jac.0[(c, j)] = stack[1 + j];
            }
        }
        Ok((values, jac))
    }
}

impl DifferentiableMap for FunctionDef {
    fn input_dim(&self) -> usize {
        self.d
    }
    fn output_dim(&self) -> usize {
        self.m
    }
    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_f(x)
    }
    fn value_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Jacobian)> {
        self.eval_with_jacobian(x)
    }
}

fn domain(component: usize, message: impl Into<String>) -> Error {
    Error::Domain {
        component,
        message: message.into(),
    }
}

fn finite(v: f64, component: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(component, "non-finite intermediate value"))
    }
}

fn eval_value(tape: &[Op], x: &[f64], component: usize) -> Result<f64> {
    let mut st: Vec<f64> = Vec::with_capacity(16);
    for op in tape {
        let v = match *op {
            Op::Const(c) => c,
            Op::Var(i) => x[i],
            Op::Neg => -st.pop().unwrap(),
            Op::Add | Op::Sub | Op::Mul | Op::Div => {
                let b = st.pop().unwrap();
                let a = st.pop().unwrap();
                match *op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    _ => {
                        if b == 0.0 {
                            return Err(domain(component, "division by zero"));
                        }
                        a / b
                    }
                }
            }
            Op::Pow(n) => {
                let a = st.pop().unwrap();
                if n < 0 && a == 0.0 {
                    return Err(domain(component, "negative power of zero"));
                }
                a.powi(n)
            }
            Op::Call(f) => {
                let a = st.pop().unwrap();
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain(component, "log of nonpositive argument"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(component, "sqrt of negative argument"));
                        }
                        a.sqrt()
                    }
                }
            }
        };
        st.push(finite(v, component)?);
    }
    Ok(st[0])
}

/// Dual-number evaluation. The stack holds slots of `1 + d` floats:
/// value followed by the gradient. On return `st[..1 + d]` is the result.
fn eval_dual(tape: &[Op], x: &[f64], component: usize, st: &mut Vec<f64>) -> Result<()> {
    let d = x.len();
    let w = d + 1;
    st.clear();
    for op in tape {
        match *op {
            Op::Const(c) => {
                st.push(c);
                st.extend(std::iter::repeat_n(0.0, d));
            }
            Op::Var(i) => {
                st.push(x[i]);
                st.extend((0..d).map(|j| if j == i { 1.0 } else { 0.0 }));
            }
            Op::Neg => {
                let n = st.len();
                for v in &mut st[n - w..] {
                    *v = -*v;
                }
            }
            Op::Add | Op::Sub | Op::Mul | Op::Div => {
                let n = st.len();
                let (a_slot, b_slot) = st[n - 2 * w..].split_at_mut(w);
                let (a, b) = (a_slot[0], b_slot[0]);
                match *op {
                    Op::Add => {
                        for j in 0..w {
                            a_slot[j] += b_slot[j];
                        }
                    }
                    Op::Sub => {
                        for j in 0..w {
                            a_slot[j] -= b_slot[j];
                        }
                    }
                    Op::Mul => {
                        a_slot[0] = a * b;
                        for j in 1..w {
                            a_slot[j] = a_slot[j] * b + a * b_slot[j];
                        }
                    }
                    _ => {
                        if b == 0.0 {
                            return Err(domain(component, "division by zero"));
                        }
                        let q = a / b;
                        a_slot[0] = q;
                        for j in 1..w {
                            a_slot[j] = (a_slot[j] - q * b_slot[j]) / b;
                        }
                    }
                }
                st.truncate(n - w);
            }
            Op::Pow(k) => {
                let n = st.len();
                let slot = &mut st[n - w..];
                let a = slot[0];
                if k < 0 && a == 0.0 {
                    return Err(domain(component, "negative power of zero"));
                }
                let dv = if k == 0 { 0.0 } else { k as f64 * a.powi(k - 1) };
                slot[0] = a.powi(k);
                for g in &mut slot[1..] {
                    *g *= dv;
                }
            }
            Op::Call(f) => {
                let n = st.len();
                let slot = &mut st[n - w..];
                let a = slot[0];
                let (v, dv) = match f {
                    Func::Sin => (a.sin(), a.cos()),
                    Func::Cos => (a.cos(), -a.sin()),
                    Func::Exp => {
                        let e = a.exp();
                        (e, e)
                    }
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain(component, "log of nonpositive argument"));
                        }
                        (a.ln(), 1.0 / a)
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(component, "sqrt of negative argument"));
                        }
                        if a == 0.0 {
                            return Err(Error::NotDifferentiable {
                                component,
                                message: "sqrt at zero".into(),
                            });
                        }
                        let r = a.sqrt();
                        (r, 0.5 / r)
                    }
                };
                slot[0] = v;
                for g in &mut slot[1..] {
                    *g *= dv;
                }
            }
        }
        let n = st.len();
        for v in &st[n - w..] {
            finite(*v, component)?;
        }
    }
    Ok(())
}
