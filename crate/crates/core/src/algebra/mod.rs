//! Differentiation, substitution, canonical forms and numeric evaluation.

mod nf;
mod poly;
mod scalar;
pub mod special;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{Expr, Slot, PI};

pub use nf::NormalForm;
pub use poly::{Atom, Monomial, Poly};
pub use scalar::{decimal_to_rational, float_to_expr, fold_expr, rational_to_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("unbound variable x{0}")]
    UnboundVariable(u32),
    #[error("negative base under a fractional power")]
    NegativeBase,
    #[error("square root of a negative constant")]
    NegativeRadicand,
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent {0} is not supported here")]
    UnsupportedExponent(String),
    #[error("transcendental residue: {0}")]
    TranscendentalResidue(String),
}

/// Numeric values for symbols and variable slots. `pi` is pre-bound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    syms: HashMap<String, f64>,
    vars: HashMap<u32, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn sym(mut self, name: &str, v: f64) -> Self {
        self.syms.insert(name.to_string(), v);
        self
    }

    pub fn var(mut self, i: u32, v: f64) -> Self {
        self.vars.insert(i, v);
        self
    }

    pub fn set_sym(&mut self, name: &str, v: f64) {
        self.syms.insert(name.to_string(), v);
    }

    pub fn set_var(&mut self, i: u32, v: f64) {
        self.vars.insert(i, v);
    }

    pub fn sym_value(&self, name: &str) -> Result<f64, AlgebraError> {
        match self.syms.get(name) {
            Some(v) => Ok(*v),
            None if name == PI => Ok(std::f64::consts::PI),
            None => Err(AlgebraError::UnboundSymbol(name.to_string())),
        }
    }

    pub fn var_value(&self, i: u32) -> Result<f64, AlgebraError> {
        self.vars.get(&i).copied().ok_or(AlgebraError::UnboundVariable(i))
    }
}

/// Mixed partial derivative of `e`, one variable after another.
pub fn differentiate(e: &Expr, vars: &[u32]) -> Expr {
    e.partial(vars)
}

pub fn substitute(e: &Expr, map: &HashMap<Slot, Expr>) -> Expr {
    e.substitute(map)
}

pub fn eval_numeric(e: &Expr, b: &Bindings) -> Result<f64, AlgebraError> {
    fold_expr::<f64>(e, &mut |leaf| match leaf {
        Expr::Var(i) => b.var_value(*i),
        Expr::Sym(s) => b.sym_value(s.name()),
        _ => unreachable!("leaves are variables or symbols"),
    })
}

/// Canonical form on the rational-with-square-root-kernels subclass.
pub fn normalize(e: &Expr) -> Result<NormalForm, AlgebraError> {
    fold_expr::<NormalForm>(e, &mut |leaf| match leaf {
        Expr::Var(i) => Ok(NormalForm::var(*i)),
        Expr::Sym(s) => Ok(NormalForm::sym(s.name())),
        _ => unreachable!("leaves are variables or symbols"),
    })
}

/// Exact simplification of the algebraic skeleton of `e`. Calls to `exp`,
/// `Phi` and `phi` stay as opaque factors with simplified arguments.
pub fn simplify(e: &Expr) -> Expr {
    let mut opaque = Vec::new();
    let skeleton = hide_calls(e, &mut opaque);
    let Ok(nf) = normalize(&skeleton) else { return e.clone() };
    let out = nf.to_expr();
    if opaque.is_empty() {
        return out;
    }
    let map: HashMap<Slot, Expr> = opaque.into_iter().enumerate().map(|(i, node)| (Slot::Sym(opaque_name(i)), node)).collect();
    out.substitute(&map)
}

fn opaque_name(i: usize) -> String {
    // '#' never parses, so no clash with user symbols
    format!("#call{i}")
}

fn hide_calls(e: &Expr, opaque: &mut Vec<Expr>) -> Expr {
    match e {
        Expr::Exp(a) | Expr::NormCdf(a) | Expr::NormPdf(a) => {
            let arg = simplify(a);
            let node = match e {
                Expr::Exp(_) => Scalar::exp(&arg),
                Expr::NormCdf(_) => Scalar::norm_cdf(&arg),
                _ => Scalar::norm_pdf(&arg),
            }
            .expect("Expr backend is total");
            if !matches!(node, Expr::Exp(_) | Expr::NormCdf(_) | Expr::NormPdf(_)) {
                return node;
            }
            let i = opaque.iter().position(|o| *o == node).unwrap_or_else(|| {
                opaque.push(node);
                opaque.len() - 1
            });
            Expr::sym(&opaque_name(i))
        }
        Expr::Add(ts) => Expr::add(ts.iter().map(|t| hide_calls(t, opaque)).collect()),
        Expr::Mul(fs) => Expr::mul(fs.iter().map(|f| hide_calls(f, opaque)).collect()),
        Expr::Pow(b, r) => Expr::pow(hide_calls(b, opaque), r.clone()),
        leaf => leaf.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymEquality {
    /// The difference normalizes to zero.
    Identical,
    /// Agreement at every random binding; no symbolic proof.
    NumericallyEqual,
    NotEqual,
}

impl SymEquality {
    pub fn holds(self) -> bool {
        self != SymEquality::NotEqual
    }
}

const NUMERIC_TRIALS: usize = 50;

/// Deterministic pseudo-random bindings for every symbol and variable of
/// the given expressions, all in `[0.25, 1.75]`.
pub fn random_bindings(exprs: &[&Expr], count: usize, seed: u64) -> Vec<Bindings> {
    let mut syms: Vec<String> = exprs.iter().flat_map(|e| e.symbols()).filter(|s| s != PI).collect();
    syms.sort();
    syms.dedup();
    let mut vars: Vec<u32> = exprs.iter().flat_map(|e| e.variables()).collect();
    vars.sort_unstable();
    vars.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut b = Bindings::new();
            for s in &syms {
                b.set_sym(s, rng.gen_range(0.25..1.75));
            }
            for v in &vars {
                b.set_var(*v, rng.gen_range(0.25..1.75));
            }
            b
        })
        .collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn sym_equal(a: &Expr, b: &Expr) -> SymEquality {
    let diff = a.clone() - b.clone();
    if let Ok(nf) = normalize(&diff) {
        if nf.is_zero() {
            return SymEquality::Identical;
        }
    }
    let mut compared = 0;
    for bind in random_bindings(&[a, b], NUMERIC_TRIALS, 0x5eed) {
        match (eval_numeric(a, &bind), eval_numeric(b, &bind)) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
                if !close(x, y, 1e-9) && (x - y).abs() > 1e-12 {
                    return SymEquality::NotEqual;
                }
                compared += 1;
            }
            (Err(_), Err(_)) => {}
            _ => return SymEquality::NotEqual,
        }
    }
    if compared == 0 {
        SymEquality::NotEqual
    } else {
        SymEquality::NumericallyEqual
    }
}
