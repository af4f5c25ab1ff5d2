//! Expression trees for statistics and symbolic results.
//!
//! Every tree is built through the canonical constructors ([`Expr::add`],
//! [`Expr::mul`], [`Expr::pow`], ...). They flatten nested sums and products,
//! fold rational constants and drop neutral elements, but never reorder or
//! combine non-constant operands. Parsing and pretty-printing round-trip on
//! trees produced this way.

mod parse;
mod print;

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use parse::{parse, ParseError};
pub use print::{pretty_print, print_with, PrintStyle};

pub const MU: &str = "mu";
pub const SIGMA: &str = "sigma";
pub const GAMMA1: &str = "Gamma1";
pub const KAPPA1: &str = "kappa1";
pub const LAMBDA: &str = "lambda";
pub const PI: &str = "pi";

/// Name of the k-th standardized central moment symbol (`mu5`, `mu6`, ...).
pub fn moment_symbol(k: usize) -> String {
    format!("mu{k}")
}

/// A named symbol. Names are the identity; positivity is a property of the
/// reserved names `sigma`, `lambda` and `pi`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Known-positive symbols; square roots of their even powers are taken
    /// without absolute values.
    pub fn is_positive(&self) -> bool {
        matches!(&*self.0, SIGMA | LAMBDA | PI)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Const(BigRational),
    Sym(Symbol),
    /// The i-th power-mean slot `x_i`, `i >= 1`.
    Var(u32),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, BigRational),
    Exp(Box<Expr>),
    /// Standard normal CDF.
    NormCdf(Box<Expr>),
    /// Standard normal density.
    NormPdf(Box<Expr>),
}

/// Substitution key: a variable slot or a symbol name.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Slot {
    Var(u32),
    Sym(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Expr {
    pub fn constant(r: BigRational) -> Expr {
        Expr::Const(r)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(int(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Const(rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }

    pub fn var(i: u32) -> Expr {
        assert!(i >= 1, "variable slots start at x1");
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        let mut constant = BigRational::zero();
        let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            match t {
                Expr::Add(inner) => stack.extend(inner.into_iter().rev()),
                Expr::Const(c) => constant += c,
                other => flat.push(other),
            }
        }
        if !constant.is_zero() {
            flat.push(Expr::Const(constant));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len() + 1);
        let mut constant = BigRational::one();
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Mul(inner) => stack.extend(inner.into_iter().rev()),
                Expr::Const(c) => constant *= c,
                other => flat.push(other),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if flat.is_empty() {
            return Expr::Const(constant);
        }
        if constant.is_one() && flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if !constant.is_one() {
            flat.insert(0, Expr::Const(constant));
        }
        Expr::Mul(flat)
    }

    pub fn pow(base: Expr, exponent: BigRational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        match base {
            Expr::Const(c) => {
                if c.is_one() {
                    return Expr::one();
                }
                if c.is_zero() && exponent.is_positive() {
                    return Expr::zero();
                }
                if exponent.is_integer() && !c.is_zero() {
                    let e = exponent.to_integer().to_i32().expect("exponent out of range");
                    return Expr::Const(c.pow(e));
                }
                Expr::Pow(Box::new(Expr::Const(c)), exponent)
            }
            Expr::Pow(inner, e1) if exponent.is_integer() => Expr::pow(*inner, e1 * exponent),
            other => Expr::Pow(Box::new(other), exponent),
        }
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, int(n))
    }

    pub fn sqrt(base: Expr) -> Expr {
        Expr::pow(base, rat(1, 2))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::Exp(Box::new(arg))
    }

    pub fn norm_cdf(arg: Expr) -> Expr {
        Expr::NormCdf(Box::new(arg))
    }

    pub fn norm_pdf(arg: Expr) -> Expr {
        Expr::NormPdf(Box::new(arg))
    }

    /// Largest variable index used, 0 for expressions without variables.
    pub fn arity(&self) -> u32 {
        match self {
            Expr::Var(i) => *i,
            Expr::Const(_) | Expr::Sym(_) => 0,
            Expr::Add(v) | Expr::Mul(v) => v.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Pow(b, _) => b.arity(),
            Expr::Exp(a) | Expr::NormCdf(a) | Expr::NormPdf(a) => a.arity(),
        }
    }

    /// True when the tree contains `exp`, `Phi` or `phi` nodes.
    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Exp(_) | Expr::NormCdf(_) | Expr::NormPdf(_) => true,
            Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => false,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(Expr::is_transcendental),
            Expr::Pow(b, _) => b.is_transcendental(),
        }
    }

    /// Symbol names occurring in the tree, sorted and deduplicated.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Sym(s) = e {
                out.push(s.name().to_string());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// Variable indices occurring in the tree, sorted and deduplicated.
    pub fn variables(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                out.push(*i);
            }
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|c| c.visit(f)),
            Expr::Pow(b, _) => b.visit(f),
            Expr::Exp(a) | Expr::NormCdf(a) | Expr::NormPdf(a) => a.visit(f),
            _ => {}
        }
    }

    /// Rebuilds the tree bottom-up through the canonical constructors.
    pub fn canonical(&self) -> Expr {
        match self {
            Expr::Add(v) => Expr::add(v.iter().map(Expr::canonical).collect()),
            Expr::Mul(v) => Expr::mul(v.iter().map(Expr::canonical).collect()),
            Expr::Pow(b, e) => Expr::pow(b.canonical(), e.clone()),
            Expr::Exp(a) => Expr::exp(a.canonical()),
            Expr::NormCdf(a) => Expr::norm_cdf(a.canonical()),
            Expr::NormPdf(a) => Expr::norm_pdf(a.canonical()),
            leaf => leaf.clone(),
        }
    }

    /// Partial derivative with respect to `x_var`.
    pub fn differentiate(&self, var: u32) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) => Expr::zero(),
            Expr::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(terms) => Expr::add(terms.iter().map(|t| t.differentiate(var)).collect()),
            Expr::Mul(factors) => {
                let mut sum = Vec::new();
                for (k, f) in factors.iter().enumerate() {
                    let df = f.differentiate(var);
                    if df.is_zero() {
                        continue;
                    }
                    let mut prod = Vec::with_capacity(factors.len());
                    for (j, g) in factors.iter().enumerate() {
                        prod.push(if j == k { df.clone() } else { g.clone() });
                    }
                    sum.push(Expr::mul(prod));
                }
                Expr::add(sum)
            }
            Expr::Pow(base, e) => {
                let db = base.differentiate(var);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::Const(e.clone()),
                    Expr::pow((**base).clone(), e - BigRational::one()),
                    db,
                ])
            }
            Expr::Exp(u) => chain(u, var, |_| self.clone()),
            Expr::NormCdf(u) => chain(u, var, |u| Expr::norm_pdf(u.clone())),
            Expr::NormPdf(u) => chain(u, var, |u| Expr::mul(vec![Expr::int(-1), u.clone(), self.clone()])),
        }
    }

    /// Mixed partial derivative, applied left to right.
    pub fn partial(&self, vars: &[u32]) -> Expr {
        vars.iter().fold(self.clone(), |e, &v| e.differentiate(v))
    }

    /// Simultaneous substitution of variable slots and symbols.
    pub fn substitute(&self, map: &HashMap<Slot, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Expr::Var(i) => map.get(&Slot::Var(*i)).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sym(s) => map
                .get(&Slot::Sym(s.name().to_string()))
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Expr::Const(_) => self.clone(),
            Expr::Add(v) => Expr::add(v.iter().map(|t| t.substitute(map)).collect()),
            Expr::Mul(v) => Expr::mul(v.iter().map(|t| t.substitute(map)).collect()),
            Expr::Pow(b, e) => Expr::pow(b.substitute(map), e.clone()),
            Expr::Exp(a) => Expr::exp(a.substitute(map)),
            Expr::NormCdf(a) => Expr::norm_cdf(a.substitute(map)),
            Expr::NormPdf(a) => Expr::norm_pdf(a.substitute(map)),
        }
    }
}

fn chain(u: &Expr, var: u32, outer: impl FnOnce(&Expr) -> Expr) -> Expr {
    let du = u.differentiate(var);
    if du.is_zero() {
        return Expr::zero();
    }
    Expr::mul(vec![outer(u), du])
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, Expr::powi(rhs, -1)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_and_flatten() {
        let e = Expr::add(vec![Expr::var(1), Expr::add(vec![Expr::int(2), Expr::var(2)]), Expr::int(-2)]);
        assert_eq!(e, Expr::Add(vec![Expr::var(1), Expr::var(2)]));
        assert_eq!(Expr::mul(vec![Expr::int(3), Expr::var(1), Expr::zero()]), Expr::zero());
        assert_eq!(Expr::powi(Expr::powi(Expr::var(1), 2), 3), Expr::powi(Expr::var(1), 6));
        // (x^2)^(1/2) is |x|, not folded
        assert!(matches!(Expr::sqrt(Expr::powi(Expr::var(1), 2)), Expr::Pow(..)));
    }

    #[test]
    fn arity_counts_largest_slot() {
        assert_eq!(parse("x1").unwrap().arity(), 1);
        assert_eq!(parse("x2 - x1^2").unwrap().arity(), 2);
        assert_eq!(parse("sigma").unwrap().arity(), 0);
        // rearranged: same arity
        assert_eq!(parse("-x1^2 + x2").unwrap().arity(), 2);
    }

    #[test]
    fn derivative_rules() {
        let g = parse("x2 - x1^2").unwrap();
        assert_eq!(g.differentiate(1), parse("-2*x1").unwrap());
        assert_eq!(parse("x1").unwrap().partial(&[1, 1]), Expr::zero());
        let phi = parse("Phi((lambda - x1)/sigma)").unwrap();
        let d = phi.differentiate(1);
        let expected = parse("-phi((lambda - x1)/sigma)/sigma").unwrap();
        assert_eq!(
            crate::algebra::eval_numeric(&d, &crate::algebra::Bindings::new().sym("lambda", 0.7).sym("sigma", 1.3).var(1, 0.2))
                .unwrap(),
            crate::algebra::eval_numeric(
                &expected,
                &crate::algebra::Bindings::new().sym("lambda", 0.7).sym("sigma", 1.3).var(1, 0.2)
            )
            .unwrap()
        );
    }

    #[test]
    fn substitution_is_simultaneous() {
        let g = parse("x2 - x1^2").unwrap();
        let mut map = HashMap::new();
        map.insert(Slot::Var(1), parse("mu").unwrap());
        map.insert(Slot::Var(2), parse("mu^2 + sigma^2").unwrap());
        let s = g.substitute(&map);
        assert!(crate::algebra::sym_equal(&s, &parse("sigma^2").unwrap()).holds());
        let x = parse("x1").unwrap();
        assert_eq!(x.substitute(&HashMap::new()), x);
        let mut gauss = HashMap::new();
        gauss.insert(Slot::Sym(GAMMA1.into()), Expr::zero());
        assert_eq!(parse("Gamma1*x").unwrap().substitute(&gauss), Expr::zero());
    }
}
