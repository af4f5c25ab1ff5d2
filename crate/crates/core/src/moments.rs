//! Moments of the power-basis vector `X = (W, W^2, ..., W^D)`.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, NormalForm, Scalar};
use crate::expr::{moment_symbol, GAMMA1, KAPPA1, MU, SIGMA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("moment of order {order} requested but only {max} available")]
    OrderExceeded { order: usize, max: usize },
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("cross moments take 1 to 4 indices, got {0}")]
    Arity(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Distribution of `W` through its mean, scale and standardized central
/// moments `m[0..=K]` (`m[0]=1, m[1]=0, m[2]=1, m[3]=Gamma1, m[4]=kappa1+3`).
#[derive(Debug)]
pub struct MomentSpec<S: Scalar> {
    mean: S,
    scale: S,
    m: Vec<S>,
    raw: Vec<S>,
    table: RwLock<HashMap<Vec<usize>, S>>,
}

impl<S: Scalar> Clone for MomentSpec<S> {
    fn clone(&self) -> Self {
        MomentSpec {
            mean: self.mean.clone(),
            scale: self.scale.clone(),
            m: self.m.clone(),
            raw: self.raw.clone(),
            table: RwLock::new(self.table.read().expect("moment table poisoned").clone()),
        }
    }
}

fn binomial(n: usize, k: usize) -> BigRational {
    let mut c = BigInt::one();
    for j in 0..k {
        c = c * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    BigRational::from_integer(c)
}

impl<S: Scalar> MomentSpec<S> {
    /// `standardized` holds `m[3], m[4], ...`; `m[0..3]` are implied.
    pub fn new(mean: S, scale: S, standardized: Vec<S>) -> Self {
        let mut m = vec![S::one(), S::zero(), S::one()];
        m.extend(standardized);
        let k = m.len() - 1;
        let mut raw = Vec::with_capacity(k + 1);
        let mut mean_pows = vec![S::one()];
        let mut scale_pows = vec![S::one()];
        for i in 1..=k {
            mean_pows.push(mean_pows[i - 1].mul(&mean));
            scale_pows.push(scale_pows[i - 1].mul(&scale));
        }
        for i in 0..=k {
            let mut acc = S::zero();
            for j in 0..=i {
                if m[j].is_zero() {
                    continue;
                }
                let t = m[j].mul(&scale_pows[j]).mul(&mean_pows[i - j]).scale(&binomial(i, j));
                acc = acc.add(&t);
            }
            raw.push(acc);
        }
        MomentSpec { mean, scale, m, raw, table: RwLock::new(HashMap::new()) }
    }

    pub fn mean(&self) -> &S {
        &self.mean
    }

    pub fn scale(&self) -> &S {
        &self.scale
    }

    /// Highest standardized moment order available.
    pub fn max_order(&self) -> usize {
        self.m.len() - 1
    }

    pub fn standardized(&self, k: usize) -> Result<&S, MomentError> {
        self.m.get(k).ok_or(MomentError::OrderExceeded { order: k, max: self.max_order() })
    }

    /// `E[W^i] = sum_j C(i,j) m_j sigma^j mu^(i-j)`.
    pub fn raw_moment(&self, i: usize) -> Result<S, MomentError> {
        self.raw.get(i).cloned().ok_or(MomentError::OrderExceeded { order: i, max: self.max_order() })
    }

    /// `E[prod_k (W^{i_k} - E W^{i_k})]`, memoized on the sorted indices.
    pub fn cross_moment(&self, indices: &[usize]) -> Result<S, MomentError> {
        if indices.is_empty() || indices.len() > 4 {
            return Err(MomentError::Arity(indices.len()));
        }
        let mut key = indices.to_vec();
        key.sort_unstable();
        if let Some(v) = self.table.read().expect("moment table poisoned").get(&key) {
            return Ok(v.clone());
        }
        let total: usize = key.iter().sum();
        if total > self.max_order() {
            return Err(MomentError::OrderExceeded { order: total, max: self.max_order() });
        }
        let n = key.len();
        let mut acc = S::zero();
        for subset in 0u32..(1 << n) {
            let mut order = 0;
            let mut coef = S::one();
            for (k, &i) in key.iter().enumerate() {
                if subset & (1 << k) != 0 {
                    order += i;
                } else {
                    coef = coef.mul(&self.raw[i]).neg();
                }
            }
            if coef.is_zero() {
                continue;
            }
            acc = acc.add(&coef.mul(&self.raw[order]));
        }
        self.table.write().expect("moment table poisoned").insert(key, acc.clone());
        Ok(acc)
    }
}

fn double_factorial(k: usize) -> BigInt {
    let mut out = BigInt::one();
    let mut j = k;
    while j > 1 {
        out *= j;
        j -= 2;
    }
    out
}

/// Normal distribution: `m[k] = (k-1)!!` for even `k`, 0 for odd.
pub fn gaussian_spec<S: Scalar>(mean: S, scale: S, k: usize) -> MomentSpec<S> {
    let m = (3..=k)
        .map(|j| {
            if j % 2 == 1 {
                S::zero()
            } else {
                S::from_rational(&BigRational::from_integer(double_factorial(j - 1)))
            }
        })
        .collect();
    MomentSpec::new(mean, scale, m)
}

/// Standardized central moments of Exp(1): the subfactorials
/// `!k = (k-1)(!(k-1) + !(k-2))`, so `Gamma1 = 2`, `kappa1 = 6`.
pub fn exponential_moments(k: usize) -> Vec<BigInt> {
    let mut d = vec![BigInt::one(), BigInt::zero()];
    for j in 2..=k {
        let next = BigInt::from(j - 1) * (&d[j - 1] + &d[j - 2]);
        d.push(next);
    }
    d.truncate(k + 1);
    d
}

/// Exp(1) shifted to mean `1` with unit scale.
pub fn exponential_spec<S: Scalar>(k: usize) -> MomentSpec<S> {
    let m = exponential_moments(k).into_iter().skip(3).map(|v| S::from_rational(&BigRational::from_integer(v))).collect();
    MomentSpec::new(S::one(), S::one(), m)
}

/// Fully symbolic moments: `mu`, `sigma`, `Gamma1`, `kappa1 + 3`, `mu5`, ...
pub fn symbolic_spec(k: usize) -> MomentSpec<NormalForm> {
    symbolic_spec_at(NormalForm::sym(MU), NormalForm::sym(SIGMA), k)
}

/// Symbolic standardized moments with the given location and scale.
pub fn symbolic_spec_at(mean: NormalForm, scale: NormalForm, k: usize) -> MomentSpec<NormalForm> {
    let m = (3..=k)
        .map(|j| match j {
            3 => NormalForm::sym(GAMMA1),
            4 => NormalForm::sym(KAPPA1).add(&NormalForm::from_rational(BigRational::from_integer(3.into()))),
            _ => NormalForm::sym(&moment_symbol(j)),
        })
        .collect();
    MomentSpec::new(mean, scale, m)
}

/// Plug-in moments of a sample: divisor-`n` variance and standardized
/// central moments about the sample mean.
pub fn empirical_spec(sample: &[f64], k: usize) -> Result<MomentSpec<f64>, MomentError> {
    let n = sample.len();
    if n < 2 {
        return Err(MomentError::Degenerate(format!("need at least 2 observations, got {n}")));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(MomentError::Degenerate("zero sample variance".into()));
    }
    let sd = var.sqrt();
    let mut m = vec![0.0; k + 1];
    for w in sample {
        let z = (w - mean) / sd;
        let mut p = z * z;
        for slot in m.iter_mut().skip(3) {
            p *= z;
            *slot += p;
        }
    }
    // slot j accumulated z^j
    let m = m.into_iter().skip(3).map(|s| s / n as f64).collect();
    Ok(MomentSpec::new(mean, sd, m))
}

/// [`empirical_spec`] in exact arithmetic on the binary values of the sample.
pub fn empirical_spec_exact(sample: &[f64], k: usize) -> Result<MomentSpec<NormalForm>, MomentError> {
    let n = sample.len();
    if n < 2 {
        return Err(MomentError::Degenerate(format!("need at least 2 observations, got {n}")));
    }
    let xs: Vec<BigRational> = sample
        .iter()
        .map(|&w| BigRational::from_float(w).ok_or_else(|| MomentError::Degenerate(format!("non-finite observation {w}"))))
        .collect::<Result<_, _>>()?;
    let nn = BigRational::from_integer(n.into());
    let mean = xs.iter().fold(BigRational::zero(), |a, x| a + x) / &nn;
    let dev: Vec<BigRational> = xs.iter().map(|x| x - &mean).collect();
    let central = |j: i32| dev.iter().fold(BigRational::zero(), |a, d| a + d.pow(j)) / &nn;
    let var = central(2);
    if var.is_zero() {
        return Err(MomentError::Degenerate("zero sample variance".into()));
    }
    let sd = NormalForm::from_rational(var).sqrt()?;
    let mut m = Vec::new();
    for j in 3..=k {
        m.push(NormalForm::from_rational(central(j as i32)).div(&sd.powi(j as i64)?)?);
    }
    Ok(MomentSpec::new(NormalForm::from_rational(mean), sd, m))
}
