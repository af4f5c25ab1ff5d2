//! Arithmetic backends shared by the symbolic and numeric pipelines.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::nf::{inv_sqrt_2pi, NormalForm};
use super::special::{norm_cdf, norm_pdf};
use super::{AlgebraError, Bindings};
use crate::expr::{rat, Expr};

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A value type the expansion machinery can run on: `f64` for numbers,
/// [`NormalForm`] for exact canonical results, [`Expr`] for closed forms
/// that may contain `exp`, `Phi` and `phi`.
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    fn from_rational(r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, AlgebraError>;
    fn powr(&self, e: &BigRational) -> Result<Self, AlgebraError>;
    fn exp(&self) -> Result<Self, AlgebraError>;
    fn norm_cdf(&self) -> Result<Self, AlgebraError>;
    fn norm_pdf(&self) -> Result<Self, AlgebraError>;
    fn is_zero(&self) -> bool;
    fn to_expr(&self) -> Expr;
    fn to_f64(&self, b: &Bindings) -> Result<f64, AlgebraError>;

    fn zero() -> Self {
        Self::from_rational(&BigRational::zero())
    }

    fn one() -> Self {
        Self::from_rational(&BigRational::one())
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.into()))
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn scale(&self, k: &BigRational) -> Self {
        self.mul(&Self::from_rational(k))
    }

    fn sqrt(&self) -> Result<Self, AlgebraError> {
        self.powr(&rat(1, 2))
    }

    fn powi(&self, n: i64) -> Result<Self, AlgebraError> {
        self.powr(&BigRational::from_integer(n.into()))
    }

    /// A free symbol, if the backend can carry one.
    fn symbol(_name: &str) -> Option<Self> {
        None
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self, AlgebraError> {
        if *o == 0.0 {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(self / o)
    }
    fn powr(&self, e: &BigRational) -> Result<Self, AlgebraError> {
        if e.is_integer() {
            let n = e.to_i32().ok_or_else(|| AlgebraError::UnsupportedExponent(e.to_string()))?;
            if n < 0 && *self == 0.0 {
                return Err(AlgebraError::DivisionByZero);
            }
            return Ok(f64::powi(*self, n));
        }
        if *self < 0.0 {
            return Err(AlgebraError::NegativeBase);
        }
        if *self == 0.0 && e < &BigRational::zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if *e == rat(1, 2) {
            return Ok(f64::sqrt(*self));
        }
        Ok(self.powf(rational_to_f64(e)))
    }
    fn exp(&self) -> Result<Self, AlgebraError> {
        Ok(f64::exp(*self))
    }
    fn norm_cdf(&self) -> Result<Self, AlgebraError> {
        Ok(norm_cdf(*self))
    }
    fn norm_pdf(&self) -> Result<Self, AlgebraError> {
        Ok(norm_pdf(*self))
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_expr(&self) -> Expr {
        float_to_expr(*self)
    }
    fn to_f64(&self, _: &Bindings) -> Result<f64, AlgebraError> {
        Ok(*self)
    }
}

/// Exact rational image of a double (shortest round-trip decimal).
pub fn float_to_expr(v: f64) -> Expr {
    match decimal_to_rational(&format!("{v:e}")) {
        Some(r) => Expr::Const(r),
        None => Expr::zero(),
    }
}

/// Parses a plain or scientific decimal literal into an exact rational.
pub fn decimal_to_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: num_bigint::BigInt = digits.parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigRational::from_integer(10.into());
    let mut r = BigRational::from_integer(n) * ten.pow(shift);
    if neg {
        r = -r;
    }
    Some(r)
}

impl Scalar for NormalForm {
    fn from_rational(r: &BigRational) -> Self {
        NormalForm::from_rational(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        NormalForm::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        NormalForm::mul(self, o)
    }
    fn neg(&self) -> Self {
        NormalForm::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, AlgebraError> {
        NormalForm::div(self, o)
    }
    fn powr(&self, e: &BigRational) -> Result<Self, AlgebraError> {
        NormalForm::powr(self, e)
    }
    fn exp(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(NormalForm::one());
        }
        Err(AlgebraError::TranscendentalResidue(format!("exp({self})")))
    }
    fn norm_cdf(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(NormalForm::from_rational(rat(1, 2)));
        }
        Err(AlgebraError::TranscendentalResidue(format!("Phi({self})")))
    }
    fn norm_pdf(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(inv_sqrt_2pi());
        }
        Err(AlgebraError::TranscendentalResidue(format!("phi({self})")))
    }
    fn is_zero(&self) -> bool {
        NormalForm::is_zero(self)
    }
    fn to_expr(&self) -> Expr {
        NormalForm::to_expr(self)
    }
    fn to_f64(&self, b: &Bindings) -> Result<f64, AlgebraError> {
        self.eval(b)
    }
    fn scale(&self, k: &BigRational) -> Self {
        NormalForm::scale(self, k)
    }
    fn symbol(name: &str) -> Option<Self> {
        Some(NormalForm::sym(name))
    }
}

impl Scalar for Expr {
    fn from_rational(r: &BigRational) -> Self {
        Expr::Const(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        super::simplify(&Expr::add(vec![self.clone(), o.clone()]))
    }
    fn mul(&self, o: &Self) -> Self {
        super::simplify(&Expr::mul(vec![self.clone(), o.clone()]))
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn div(&self, o: &Self) -> Result<Self, AlgebraError> {
        if Expr::is_zero(o) {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(super::simplify(&(self.clone() / o.clone())))
    }
    fn powr(&self, e: &BigRational) -> Result<Self, AlgebraError> {
        if Expr::is_zero(self) && e < &BigRational::zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(super::simplify(&Expr::pow(self.clone(), e.clone())))
    }
    fn exp(&self) -> Result<Self, AlgebraError> {
        Ok(if Expr::is_zero(self) { Expr::one() } else { Expr::exp(self.clone()) })
    }
    fn norm_cdf(&self) -> Result<Self, AlgebraError> {
        Ok(if Expr::is_zero(self) { Expr::rational(1, 2) } else { Expr::norm_cdf(self.clone()) })
    }
    fn norm_pdf(&self) -> Result<Self, AlgebraError> {
        Ok(Expr::norm_pdf(self.clone()))
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn to_expr(&self) -> Expr {
        self.clone()
    }
    fn to_f64(&self, b: &Bindings) -> Result<f64, AlgebraError> {
        super::eval_numeric(self, b)
    }
    fn symbol(name: &str) -> Option<Self> {
        Some(Expr::sym(name))
    }
}

/// Evaluates `e` in backend `S`, resolving variables and symbols through `leaf`.
pub fn fold_expr<S: Scalar>(e: &Expr, leaf: &mut dyn FnMut(&Expr) -> Result<S, AlgebraError>) -> Result<S, AlgebraError> {
    Ok(match e {
        Expr::Const(c) => S::from_rational(c),
        Expr::Sym(_) | Expr::Var(_) => leaf(e)?,
        Expr::Add(ts) => {
            let mut acc = S::zero();
            for t in ts {
                acc = acc.add(&fold_expr(t, leaf)?);
            }
            acc
        }
        Expr::Mul(fs) => {
            let mut acc = S::one();
            for f in fs {
                let v = fold_expr(f, leaf)?;
                if v.is_zero() {
                    // keep evaluating would only surface errors of a zero product
                    return Ok(S::zero());
                }
                acc = acc.mul(&v);
            }
            acc
        }
        Expr::Pow(b, r) => fold_expr(b, leaf)?.powr(r)?,
        Expr::Exp(a) => fold_expr(a, leaf)?.exp()?,
        Expr::NormCdf(a) => fold_expr(a, leaf)?.norm_cdf()?,
        Expr::NormPdf(a) => fold_expr(a, leaf)?.norm_pdf()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_become_exact() {
        assert_eq!(decimal_to_rational("0.1"), Some(rat(1, 10)));
        assert_eq!(decimal_to_rational("-2.5e-3"), Some(rat(-1, 400)));
        assert_eq!(decimal_to_rational("3"), Some(rat(3, 1)));
        assert_eq!(decimal_to_rational("abc"), None);
        assert_eq!(float_to_expr(0.7), Expr::rational(7, 10));
    }

    #[test]
    fn backends_agree_on_rational_arithmetic() {
        let e = crate::expr::parse("(x1 + 1/3)^2 / (2 - x1)").unwrap();
        let b = Bindings::new().var(1, 0.5);
        let f: f64 = fold_expr(&e, &mut |l| match l {
            Expr::Var(_) => Ok(0.5),
            _ => unreachable!(),
        })
        .unwrap();
        let n: NormalForm = fold_expr(&e, &mut |_| Ok(NormalForm::from_rational(rat(1, 2)))).unwrap();
        assert_eq!(n.as_rational(), Some(rat(25, 54)));
        assert!((f - 25.0 / 54.0).abs() < 1e-15);
        assert!((Scalar::to_f64(&e, &b).unwrap() - f).abs() < 1e-15);
    }
}
