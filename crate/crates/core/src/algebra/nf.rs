//! Canonical fractions over polynomials with square-root kernels.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{gcd, square_part, Atom, Monomial, Poly};
use super::{AlgebraError, Bindings};
use crate::expr::{Expr, Symbol, PI};

/// `num / den` with a kernel-free monic denominator and no common factor
/// between the denominator and the numerator's kernel coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NormalForm {
    num: Poly,
    den: Poly,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        NormalForm::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        NormalForm { num: Poly::constant(r), den: Poly::one() }
    }

    pub fn from_atom(a: Atom) -> Self {
        NormalForm { num: Poly::atom(a), den: Poly::one() }
    }

    pub fn var(i: u32) -> Self {
        NormalForm::from_atom(Atom::Var(i))
    }

    pub fn sym(name: &str) -> Self {
        NormalForm::from_atom(Atom::Sym(Symbol::new(name)))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// Builds the canonical fraction.
    pub fn reduce(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let (mut num, mut den) = (num, den);
        while let Some(s) = den.atoms().into_iter().filter(Atom::is_kernel).max_by_key(Atom::depth) {
            let (a, b) = den.split_linear(&s);
            let conj = a.sub(&b.mul(&Poly::atom(s)));
            num = num.mul(&conj);
            den = den.mul(&conj);
            if den.is_zero() {
                return Err(AlgebraError::DivisionByZero);
            }
        }
        if num.is_zero() {
            return Ok(NormalForm::zero());
        }
        if !den.is_constant() {
            let mut g = den.clone();
            for c in num.kernel_components().values() {
                g = gcd(&g, c);
                if g.is_constant() {
                    break;
                }
            }
            if !g.is_constant() {
                num = num.div_exact(&g).expect("gcd divides numerator");
                den = den.div_exact(&g).expect("gcd divides denominator");
            }
        }
        let lc = den.lead().expect("nonzero denominator").1.recip();
        Ok(NormalForm { num: num.scale(&lc), den: den.scale(&lc) })
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return NormalForm::reduce(self.num.add(&o.num), self.den.clone()).expect("nonzero denominator");
        }
        let g = gcd(&self.den, &o.den);
        let l = o.den.div_exact(&g).unwrap();
        let r = self.den.div_exact(&g).unwrap();
        NormalForm::reduce(self.num.mul(&l).add(&o.num.mul(&r)), self.den.mul(&l)).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Self {
        NormalForm { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return NormalForm::zero();
        }
        if self.den.is_one() && o.den.is_one() && !self.num.has_kernels() && !o.num.has_kernels() {
            return NormalForm { num: self.num.mul(&o.num), den: Poly::one() };
        }
        NormalForm::reduce(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominator")
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return NormalForm::zero();
        }
        NormalForm { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        NormalForm::reduce(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self, AlgebraError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, n: i64) -> Result<Self, AlgebraError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut out = NormalForm::one();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Principal square root; denominators are taken to be positive.
    pub fn sqrt(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(NormalForm::zero());
        }
        let root = sqrt_poly(&self.num.mul(&self.den))?;
        NormalForm::reduce(root, self.den.clone())
    }

    pub fn powr(&self, e: &BigRational) -> Result<Self, AlgebraError> {
        let unsupported = || AlgebraError::UnsupportedExponent(e.to_string());
        let p = e.numer().to_i64().ok_or_else(unsupported)?;
        match e.denom().to_i64() {
            Some(1) => self.powi(p),
            Some(2) => self.sqrt()?.powi(p),
            _ => Err(unsupported()),
        }
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, AlgebraError> {
        let mut atom = |a: &Atom| eval_atom(a, b);
        let n = self.num.eval(&mut atom)?;
        let d = self.den.eval(&mut atom)?;
        if d == 0.0 {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(n / d)
    }

    /// Expression form; the denominator is shown factored over the kernel
    /// radicands that occur in the numerator where possible.
    pub fn to_expr(&self) -> Expr {
        if self.den.is_one() {
            return self.num.to_expr();
        }
        let mut factors = Vec::new();
        let mut rest = self.den.clone();
        let mut candidates: Vec<Poly> = Vec::new();
        for a in self.num.atoms() {
            if let Atom::Kernel(r) = a {
                if !r.is_constant() {
                    candidates.push(r.monic());
                }
            }
        }
        for r in candidates {
            let mut k = 0;
            while let Some(q) = rest.div_exact(&r) {
                rest = q;
                k += 1;
            }
            if k > 0 {
                factors.push(Expr::powi(r.to_expr(), -k));
            }
        }
        let lc = rest.lead().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::one);
        let rest = rest.scale(&lc.recip());
        let num = self.num.scale(&lc.recip()).to_expr();
        if !rest.is_one() {
            let mono = rest.len() == 1;
            if mono {
                let (m, _) = rest.lead().unwrap();
                for (a, e) in m.factors() {
                    factors.push(Expr::powi(a.to_expr(), -i64::from(*e)));
                }
            } else {
                factors.push(Expr::powi(rest.to_expr(), -1));
            }
        }
        let mut parts = match num {
            Expr::Mul(fs) => fs,
            other => vec![other],
        };
        parts.extend(factors);
        Expr::mul(parts)
    }
}

fn eval_atom(a: &Atom, b: &Bindings) -> Result<f64, AlgebraError> {
    match a {
        Atom::Var(i) => b.var_value(*i),
        Atom::Sym(s) => b.sym_value(s.name()),
        Atom::Kernel(r) => {
            let v = r.eval(&mut |a| eval_atom(a, b))?;
            if v < 0.0 {
                return Err(AlgebraError::NegativeBase);
            }
            Ok(v.sqrt())
        }
    }
}

/// Square root of a polynomial, extracting rational squares and even
/// powers of positive atoms before adjoining kernels.
fn sqrt_poly(p: &Poly) -> Result<Poly, AlgebraError> {
    let mut c = p.rational_content();
    let mut r = p.scale(&c.recip());
    if c.is_negative() {
        c = -c;
        r = r.neg();
    }
    if let Some(k) = r.as_constant() {
        if k.is_negative() {
            return Err(AlgebraError::NegativeRadicand);
        }
    }
    let m = r.monomial_content();
    r = r.div_exact(&Poly::term(m.clone(), BigRational::one())).expect("monomial content divides");
    let mut out = Monomial::one();
    let mut inside = Monomial::one();
    for (a, e) in m.factors() {
        if a.is_positive() {
            out = out.mul(&Monomial::atom(a.clone(), e / 2));
            inside = inside.mul(&Monomial::atom(a.clone(), e % 2));
        } else {
            inside = inside.mul(&Monomial::atom(a.clone(), *e));
        }
    }
    let radicand = r.mul_monomial(&inside, &BigRational::one());
    // sqrt(a/b) = sqrt(a*b)/b
    let ab: BigInt = c.numer() * c.denom();
    let (s, f) = square_part(&ab);
    let mut root = Poly::term(out, BigRational::new(s, c.denom().clone()));
    if f != BigInt::one() {
        root = root.mul(&Poly::atom(Atom::Kernel(Arc::new(Poly::constant(BigRational::from_integer(f))))));
    }
    if !radicand.is_one() {
        root = root.mul(&Poly::atom(Atom::Kernel(Arc::new(radicand))));
    }
    Ok(root)
}

/// `1/sqrt(2*pi)`, the exact value of the normal density at 0.
pub fn inv_sqrt_2pi() -> NormalForm {
    NormalForm::sym(PI)
        .scale(&BigRational::from_integer(2.into()))
        .sqrt()
        .and_then(|s| s.recip())
        .expect("2*pi is positive")
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}
