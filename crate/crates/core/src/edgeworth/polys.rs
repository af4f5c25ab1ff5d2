//! Edgeworth and Cornish-Fisher polynomials in the expansion variable `x`.

use num_rational::BigRational;

use super::{CumulantCoeffs, EdgeworthError};
use crate::algebra::special::{norm_cdf, norm_pdf, norm_quantile};
use crate::algebra::{AlgebraError, Bindings, Scalar};
use crate::expr::{rat, Expr};

/// Univariate polynomial with coefficients in `S`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    /// `c * x^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let mut v = vec![S::zero(); k];
        v.push(c);
        Poly::new(v)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }

    pub fn neg(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.scale(k)).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.scale(&rat(k as i64, 1))).collect())
    }

    /// True when every nonzero coefficient sits at a power of the given parity.
    pub fn has_parity(&self, odd: bool) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| (k % 2 == 1) == odd || c.is_zero())
    }

    pub fn to_f64(&self, b: &Bindings) -> Result<Poly<f64>, AlgebraError> {
        Ok(Poly::new(self.coeffs.iter().map(|c| c.to_f64(b)).collect::<Result<_, _>>()?))
    }

    /// Closed form in the symbol `x`.
    pub fn to_expr(&self) -> Expr {
        let x = Expr::sym("x");
        Expr::add(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| c.to_expr() * Expr::powi(x.clone(), k as i64))
                .collect(),
        )
    }
}

impl Poly<f64> {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// `(p1, p2)` of the CDF expansion.
pub fn edgeworth_polys<S: Scalar>(k: &CumulantCoeffs<S>) -> (Poly<S>, Poly<S>) {
    let p1 = Poly::new(vec![k.k12.neg().add(&k.k31.scale(&rat(1, 6))), S::zero(), k.k31.scale(&rat(-1, 6))]);
    let a = k.k22.add(&k.k12.mul(&k.k12)).scale(&rat(1, 2));
    let b = k.k41.add(&k.k12.mul(&k.k31).scale(&rat(4, 1))).scale(&rat(1, 24));
    let c = k.k31.mul(&k.k31).scale(&rat(1, 72));
    let c0 = a.sub(&b.scale(&rat(3, 1))).add(&c.scale(&rat(15, 1)));
    let c2 = b.sub(&c.scale(&rat(10, 1)));
    let p2 = Poly::new(vec![S::zero(), c0.neg(), S::zero(), c2.neg(), S::zero(), c.neg()]);
    (p1, p2)
}

/// `(p11, p21)` of the quantile expansion.
pub fn cornish_fisher_polys<S: Scalar>(p1: &Poly<S>, p2: &Poly<S>) -> (Poly<S>, Poly<S>) {
    let p11 = p1.neg();
    let x = Poly::monomial(S::one(), 1);
    let p21 = p1.mul(&p1.derivative()).sub(&x.mul(&p1.mul(p1)).scale(&rat(1, 2))).sub(p2);
    (p11, p21)
}

/// Adds `gamma * x` to `p2`, for a statistic rescaled by `1 + gamma/n`.
pub fn scale_adjust<S: Scalar>(p1: &Poly<S>, p2: &Poly<S>, gamma: &S) -> (Poly<S>, Poly<S>) {
    (p1.clone(), p2.add(&Poly::monomial(gamma.clone(), 1)))
}

fn check_n(n: f64) -> Result<(), EdgeworthError> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(EdgeworthError::InvalidArgument(format!("sample size must be positive, got {n}")));
    }
    Ok(())
}

/// `Phi(x) + n^-1/2 p1(x) phi(x) + n^-1 p2(x) phi(x)`, truncated after `order` terms.
/// Not clipped to [0, 1].
pub fn cdf_eval<S: Scalar>(p1: &Poly<S>, p2: &Poly<S>, b: &Bindings, n: f64, x: f64, order: usize) -> Result<f64, EdgeworthError> {
    check_n(n)?;
    let mut v = norm_cdf(x);
    if order >= 1 {
        v += p1.to_f64(b)?.eval(x) * norm_pdf(x) / n.sqrt();
    }
    if order >= 2 {
        v += p2.to_f64(b)?.eval(x) * norm_pdf(x) / n;
    }
    Ok(v)
}

/// `z + n^-1/2 p11(z) + n^-1 p21(z)` with `z = Phi^-1(alpha)`.
pub fn quantile_eval<S: Scalar>(p11: &Poly<S>, p21: &Poly<S>, b: &Bindings, n: f64, alpha: f64, order: usize) -> Result<f64, EdgeworthError> {
    check_n(n)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EdgeworthError::InvalidArgument(format!("probability must lie in (0, 1), got {alpha}")));
    }
    let z = norm_quantile(alpha);
    let mut v = z;
    if order >= 1 {
        v += p11.to_f64(b)?.eval(z) / n.sqrt();
    }
    if order >= 2 {
        v += p21.to_f64(b)?.eval(z) / n;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(k12: f64, k22: f64, k31: f64, k41: f64) -> CumulantCoeffs<f64> {
        CumulantCoeffs { k12, k22, k31, k41 }
    }

    #[test]
    fn poly_arithmetic() {
        let p = Poly::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        let q = p.mul(&p);
        assert_eq!(q.coeffs(), &[1.0, 4.0, 4.0]);
        assert_eq!(q.derivative().coeffs(), &[4.0, 8.0]);
        assert_eq!(q.eval(2.0), 25.0);
        assert!(Poly::new(vec![0.0, 1.0, 0.0, 3.0]).has_parity(true));
        assert!(!q.has_parity(false));
    }

    #[test]
    fn studentized_mean_cdf_example() {
        // Gaussian data: the skewness and excess kurtosis vanish
        let c = coeffs(0.0, 3.0, 0.0, 6.0);
        let (p1, p2) = edgeworth_polys(&c);
        assert_eq!(p2.to_f64(&Bindings::new()).unwrap().eval(1.0), -1.0);
        let v = cdf_eval(&p1, &p2, &Bindings::new(), 10.0, 1.0, 2).unwrap();
        assert!((v - 0.8171476).abs() < 1e-6, "{v}");
        let (p11, p21) = cornish_fisher_polys(&p1, &p2);
        let q = quantile_eval(&p11, &p21, &Bindings::new(), 10.0, 0.975, 2).unwrap();
        assert!((q - 2.295189).abs() < 1e-6, "{q}");
    }

    #[test]
    fn cornish_fisher_inverts_to_second_order() {
        let c = coeffs(0.3, -0.2, 1.1, 0.7);
        let (p1, p2) = edgeworth_polys(&c);
        let (p11, p21) = cornish_fisher_polys(&p1, &p2);
        let b = Bindings::new();
        for n in [1e4, 1e5] {
            let q = quantile_eval(&p11, &p21, &b, n, 0.9, 2).unwrap();
            let back = cdf_eval(&p1, &p2, &b, n, q, 2).unwrap();
            assert!((back - 0.9).abs() < 20.0 / n.powf(1.5), "{n}: {back}");
        }
        assert!(p11.has_parity(false) && p21.has_parity(true));
    }

    #[test]
    fn scale_adjust_adds_linear_term() {
        let c = coeffs(0.0, 1.0, 0.0, 0.0);
        let (p1, p2) = edgeworth_polys(&c);
        let (_, q2) = scale_adjust(&p1, &p2, &0.25);
        assert_eq!(q2.coeff(1), p2.coeff(1) + 0.25);
    }

    #[test]
    fn invalid_arguments() {
        let p = Poly::<f64>::zero();
        assert!(cdf_eval(&p, &p, &Bindings::new(), 0.0, 1.0, 2).is_err());
        assert!(quantile_eval(&p, &p, &Bindings::new(), 10.0, 1.0, 2).is_err());
    }
}
