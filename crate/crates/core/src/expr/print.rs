//! Deterministic infix printing. Output re-parses to the same canonical tree.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrintStyle {
    /// `x2 - x1^2`, `-Gamma1/2`
    #[default]
    Compact,
    /// Spaces around `*` and `/`, as used in exported assignment files.
    Spaced,
}

pub fn pretty_print(e: &Expr) -> String {
    print_with(e, PrintStyle::Compact)
}

pub fn print_with(e: &Expr, style: PrintStyle) -> String {
    Printer { style }.expr(e)
}

struct Printer {
    style: PrintStyle,
}

fn rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// If the term prints with a leading minus, returns its negation.
fn negated_term(t: &Expr) -> Option<Expr> {
    match t {
        Expr::Const(c) if c.is_negative() => Some(Expr::Const(-c)),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let c = -c;
                let mut rest: Vec<Expr> = fs[1..].to_vec();
                if c.is_one() {
                    Some(if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) })
                } else {
                    rest.insert(0, Expr::Const(c));
                    Some(Expr::Mul(rest))
                }
            }
            _ => None,
        },
        _ => None,
    }
}

impl Printer {
    fn op(&self, c: char) -> String {
        match self.style {
            PrintStyle::Compact => c.to_string(),
            PrintStyle::Spaced => format!(" {c} "),
        }
    }

    fn expr(&self, e: &Expr) -> String {
        match e {
            Expr::Const(c) => rational(c),
            Expr::Sym(s) => s.name().to_string(),
            Expr::Var(i) => format!("x{i}"),
            Expr::Add(terms) => self.add(terms),
            Expr::Mul(fs) => self.mul(fs),
            Expr::Pow(b, r) => self.pow(b, r),
            Expr::Exp(a) => format!("exp({})", self.expr(a)),
            Expr::NormCdf(a) => format!("Phi({})", self.expr(a)),
            Expr::NormPdf(a) => format!("phi({})", self.expr(a)),
        }
    }

    fn add(&self, terms: &[Expr]) -> String {
        let mut out = String::new();
        for (k, t) in terms.iter().enumerate() {
            if k == 0 {
                out.push_str(&self.expr(t));
            } else if let Some(neg) = negated_term(t) {
                out.push_str(" - ");
                out.push_str(&self.expr(&neg));
            } else {
                out.push_str(" + ");
                out.push_str(&self.expr(t));
            }
        }
        out
    }

    fn mul(&self, fs: &[Expr]) -> String {
        let (coef, rest) = match fs.first() {
            Some(Expr::Const(c)) => (c.clone(), &fs[1..]),
            _ => (BigRational::one(), fs),
        };
        let p: BigInt = coef.numer().abs();
        let q = coef.denom().clone();
        let mut s = String::new();
        let mut have = false;
        if !p.is_one() {
            s.push_str(&p.to_string());
            have = true;
        }
        for f in rest {
            match f {
                Expr::Pow(b, r) if r.is_negative() => {
                    if !have {
                        s.push('1');
                        have = true;
                    }
                    s.push_str(&self.op('/'));
                    s.push_str(&self.factor(&Expr::pow((**b).clone(), -r)));
                }
                _ => {
                    if have {
                        s.push_str(&self.op('*'));
                    }
                    s.push_str(&self.factor(f));
                    have = true;
                }
            }
        }
        if !have {
            s.push('1');
        }
        if !q.is_one() {
            s.push_str(&self.op('/'));
            s.push_str(&q.to_string());
        }
        if coef.is_negative() {
            format!("-{s}")
        } else {
            s
        }
    }

    fn factor(&self, f: &Expr) -> String {
        let wrap = match f {
            Expr::Add(_) | Expr::Mul(_) => true,
            Expr::Const(c) => c.is_negative() || !c.is_integer(),
            Expr::Pow(_, r) => r.is_negative(),
            _ => false,
        };
        if wrap {
            format!("({})", self.expr(f))
        } else {
            self.expr(f)
        }
    }

    fn pow(&self, b: &Expr, r: &BigRational) -> String {
        if r.is_negative() {
            return format!("1{}{}", self.op('/'), self.factor(&Expr::pow(b.clone(), -r)));
        }
        if *r == BigRational::new(1.into(), 2.into()) {
            return format!("sqrt({})", self.expr(b));
        }
        let plain_base = match b {
            Expr::Sym(_) | Expr::Var(_) | Expr::Exp(_) | Expr::NormCdf(_) | Expr::NormPdf(_) => true,
            Expr::Const(c) => c.is_integer() && !c.is_negative(),
            Expr::Pow(_, e) => *e == BigRational::new(1.into(), 2.into()),
            _ => false,
        };
        let base = if plain_base { self.expr(b) } else { format!("({})", self.expr(b)) };
        if r.is_integer() && !r.is_zero() {
            format!("{base}^{}", r.numer())
        } else {
            format!("{base}^({})", rational(r))
        }
    }
}
