//! Nonparametric bootstrap: percentile and BCA intervals with seeded,
//! stream-split resampling.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::special::{norm_cdf, norm_quantile};
use crate::algebra::{fold_expr, AlgebraError, Bindings};
use crate::edgeworth::{accel_constant, build_model, EdgeworthError, Mode, Statistic};
use crate::expr::{Expr, Slot};
use crate::moments::{empirical_spec, empirical_spec_exact, MomentError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BootError {
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("{0}")]
    InvalidConfig(String),
    #[error("bias correction undefined: H(theta_hat) = {0}")]
    BiasCorrectionUndefined(f64),
    #[error("no finite bootstrap replicates")]
    NoFiniteReplicates,
    #[error("statistic is undefined on the observed data")]
    UndefinedStatistic,
    #[error("exhaustive enumeration needs n <= 8, got {0}")]
    TooLargeForEnumeration(usize),
    #[error(transparent)]
    Edgeworth(#[from] EdgeworthError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// `g` evaluated at the power means of a sample, with parameters folded in.
#[derive(Debug, Clone)]
pub struct SampleStatistic {
    g: Expr,
    d: usize,
}

impl SampleStatistic {
    pub fn new(stat: &Statistic) -> Self {
        Self::from_expr(&stat.g, stat, stat.d())
    }

    /// Any expression in the power means `x1..xd`, with the parameters of `stat`.
    pub fn from_expr(e: &Expr, stat: &Statistic, d: usize) -> Self {
        let map: HashMap<Slot, Expr> = stat.params.iter().map(|(k, v)| (Slot::Sym(k.clone()), Expr::Const(v.clone()))).collect();
        SampleStatistic { g: e.substitute(&map), d }
    }

    pub fn power_means(sample: &[f64], d: usize) -> Vec<f64> {
        let mut sums = vec![0.0; d];
        for &w in sample {
            let mut p = 1.0;
            for s in sums.iter_mut() {
                p *= w;
                *s += p;
            }
        }
        let n = sample.len() as f64;
        sums.into_iter().map(|s| s / n).collect()
    }

    /// `g` at given power means; NaN where undefined.
    pub fn at_means(&self, x: &[f64]) -> f64 {
        fold_expr::<f64>(&self.g, &mut |leaf| match leaf {
            Expr::Var(i) => x.get(*i as usize - 1).copied().ok_or(AlgebraError::UnboundVariable(*i)),
            Expr::Sym(s) if s.name() == crate::expr::PI => Ok(std::f64::consts::PI),
            Expr::Sym(s) => Err(AlgebraError::UnboundSymbol(s.name().to_string())),
            _ => unreachable!("leaves are variables or symbols"),
        })
        .ok()
        .filter(|v| v.is_finite())
        .unwrap_or(f64::NAN)
    }

    pub fn eval(&self, sample: &[f64]) -> f64 {
        self.at_means(&Self::power_means(sample, self.d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootConfig {
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Enumerate all `n^n` resamples instead of drawing `b`.
    pub exhaustive: bool,
}

impl BootConfig {
    pub fn new(b: usize, seed: u64, alpha: f64) -> Self {
        BootConfig { b, seed, alpha, exhaustive: false }
    }

    pub fn exhaustive(alpha: f64) -> Self {
        BootConfig { b: 0, seed: 0, alpha, exhaustive: true }
    }

    fn validate(&self) -> Result<(), BootError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(BootError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.exhaustive && self.b == 0 {
            return Err(BootError::InvalidConfig("B must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sorted finite replicates plus the count of undefined ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicates {
    pub sorted: Vec<f64>,
    pub nan_count: usize,
}

impl Replicates {
    pub fn from_values(mut v: Vec<f64>) -> Result<Self, BootError> {
        let before = v.len();
        v.retain(|x| x.is_finite());
        if v.is_empty() {
            return Err(BootError::NoFiniteReplicates);
        }
        v.sort_by(f64::total_cmp);
        Ok(Replicates { nan_count: before - v.len(), sorted: v })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `H(x) = #{theta* <= x} / B`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    /// 1-based rank used for `H^-1(p)`: the ceil(pB)-th order statistic.
    pub fn quantile_rank(&self, p: f64) -> usize {
        let b = self.len();
        ((p * b as f64 - 1e-9).ceil().max(1.0) as usize).min(b)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.sorted[self.quantile_rank(p) - 1]
    }
}

fn resample_indices(n: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

pub fn resample_distribution(data: &[f64], stat: &SampleStatistic, cfg: &BootConfig) -> Result<Replicates, BootError> {
    cfg.validate()?;
    let n = data.len();
    if n < 2 {
        return Err(BootError::TooFewObservations(n));
    }
    let values: Vec<f64> = if cfg.exhaustive {
        if n > 8 {
            return Err(BootError::TooLargeForEnumeration(n));
        }
        let total = n.pow(n as u32);
        (0..total)
            .into_par_iter()
            .map(|mut code| {
                let mut s = Vec::with_capacity(n);
                for _ in 0..n {
                    s.push(data[code % n]);
                    code /= n;
                }
                stat.eval(&s)
            })
            .collect()
    } else {
        (0..cfg.b)
            .into_par_iter()
            .map(|i| {
                let s: Vec<f64> = resample_indices(n, cfg.seed, i as u64).into_iter().map(|j| data[j]).collect();
                stat.eval(&s)
            })
            .collect()
    };
    Replicates::from_values(values)
}

/// Plug-in acceleration `A / (6 sigma^3 sqrt(n))` at the empirical distribution.
pub fn accel_plugin(data: &[f64], stat: &Statistic) -> Result<f64, BootError> {
    let n = data.len();
    if n < 2 {
        return Err(BootError::TooFewObservations(n));
    }
    // the constant is invariant to the normalization, so the plain model suffices
    let plain = stat.clone().with_mode(Mode::Plain);
    let k = 3 * plain.d();
    // exact rationals avoid the cancellation of raw power moments; transcendental
    // statistics fall back to floating point
    let exact = empirical_spec_exact(data, k)?;
    let a = match build_model(&plain, &exact).and_then(|m| accel_constant(&m, &exact)) {
        Ok(acc) => acc.a_over_sqrtn.eval(&Bindings::new()).map_err(EdgeworthError::from)?,
        Err(EdgeworthError::Algebra(AlgebraError::TranscendentalResidue(_))) => {
            let spec = empirical_spec(data, k)?;
            accel_constant(&build_model(&plain, &spec)?, &spec)?.a_over_sqrtn
        }
        Err(e) => return Err(e.into()),
    };
    Ok(a / (n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcaResult {
    pub theta_hat: f64,
    pub b: usize,
    pub nan_count: usize,
    pub h_theta: f64,
    pub m_hat: f64,
    pub a_hat: f64,
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    pub percentile_lower: f64,
    pub percentile_upper: f64,
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

/// BCA level adjustment: `Phi(m + (m + z) / (1 - a (m + z)))`.
pub fn bca_level(m_hat: f64, a_hat: f64, p: f64) -> f64 {
    let t = m_hat + norm_quantile(p);
    norm_cdf(m_hat + t / (1.0 - a_hat * t))
}

/// Two-sided interval at level `1 - alpha` from given replicates.
pub fn bca_from_replicates(theta_hat: f64, reps: &Replicates, a_hat: f64, alpha: f64) -> Result<BcaResult, BootError> {
    let h = reps.cdf(theta_hat);
    if h <= 0.0 || h >= 1.0 {
        return Err(BootError::BiasCorrectionUndefined(h));
    }
    let m_hat = norm_quantile(h);
    let lo = reps.quantile(bca_level(m_hat, a_hat, alpha / 2.0));
    let hi = reps.quantile(bca_level(m_hat, a_hat, 1.0 - alpha / 2.0));
    Ok(BcaResult {
        theta_hat,
        b: reps.len() + reps.nan_count,
        nan_count: reps.nan_count,
        h_theta: h,
        m_hat,
        a_hat,
        alpha,
        lower: lo.min(hi),
        upper: hi.max(lo),
        percentile_lower: reps.quantile(alpha / 2.0),
        percentile_upper: reps.quantile(1.0 - alpha / 2.0),
        replicates: reps.sorted.clone(),
    })
}

pub fn bca_interval(data: &[f64], stat: &Statistic, cfg: &BootConfig) -> Result<BcaResult, BootError> {
    let s = SampleStatistic::new(stat);
    let theta_hat = s.eval(data);
    if !theta_hat.is_finite() {
        return Err(BootError::UndefinedStatistic);
    }
    let reps = resample_distribution(data, &s, cfg)?;
    let h = reps.cdf(theta_hat);
    if h <= 0.0 || h >= 1.0 {
        return Err(BootError::BiasCorrectionUndefined(h));
    }
    let a_hat = accel_plugin(data, stat)?;
    bca_from_replicates(theta_hat, &reps, a_hat, cfg.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn mean() -> Statistic {
        Statistic::new("mean", parse("x1").unwrap(), Mode::Plain)
    }

    #[test]
    fn power_means_and_eval() {
        assert_eq!(SampleStatistic::power_means(&[1.0, 2.0, 3.0], 3), vec![2.0, 14.0 / 3.0, 12.0]);
        let var = SampleStatistic::new(&Statistic::new("v", parse("x2 - x1^2").unwrap(), Mode::Plain));
        assert!((var.eval(&[1.0, 2.0, 3.0]) - 2.0 / 3.0).abs() < 1e-15);
        let bad = SampleStatistic::new(&Statistic::new("r", parse("1/(x2 - x1^2)").unwrap(), Mode::Plain));
        assert!(bad.eval(&[1.0, 1.0]).is_nan());
    }

    #[test]
    fn quantile_convention() {
        let r = Replicates::from_values(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(r.quantile(0.25), 1.0);
        assert_eq!(r.quantile(0.26), 2.0);
        assert_eq!(r.quantile(0.0), 1.0);
        assert_eq!(r.quantile(1.0), 4.0);
        assert_eq!(r.cdf(2.0), 0.5);
        let r = Replicates::from_values(vec![f64::NAN, 1.0]).unwrap();
        assert_eq!((r.len(), r.nan_count), (1, 1));
    }

    #[test]
    fn exhaustive_small_sample() {
        let reps = resample_distribution(&[1.0, 2.0, 3.0], &SampleStatistic::new(&mean()), &BootConfig::exhaustive(0.1)).unwrap();
        assert_eq!(reps.len(), 27);
        // sums 3..9 occur 1,3,6,7,6,3,1 times
        assert!((reps.cdf(2.0) - 17.0 / 27.0).abs() < 1e-15);
        assert_eq!(accel_plugin(&[1.0, 2.0, 3.0], &mean()).unwrap(), 0.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let data: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let cfg = BootConfig::new(200, 42, 0.1);
        let s = SampleStatistic::new(&mean());
        let a = resample_distribution(&data, &s, &cfg).unwrap();
        let b = resample_distribution(&data, &s, &cfg).unwrap();
        assert_eq!(a, b);
        let c = resample_distribution(&data, &s, &BootConfig::new(200, 43, 0.1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_inputs() {
        let cfg = BootConfig::new(50, 1, 0.1);
        assert!(matches!(bca_interval(&[2.0; 5], &mean(), &cfg), Err(BootError::BiasCorrectionUndefined(_))));
        let reps = resample_distribution(&[2.0; 5], &SampleStatistic::new(&mean()), &cfg).unwrap();
        assert!(reps.sorted.iter().all(|v| *v == 2.0));
        assert!(accel_plugin(&[2.0; 5], &mean()).is_err());
        assert!(bca_interval(&[1.0], &mean(), &cfg).is_err());
        assert!(bca_interval(&[1.0, 2.0], &mean(), &BootConfig::new(50, 1, 1.5)).is_err());
    }

    #[test]
    fn plug_in_acceleration_of_mean() {
        let data = [0.2, 0.5, 1.1, 2.9, 0.1, 0.7, 4.0];
        let n = data.len() as f64;
        let m = data.iter().sum::<f64>() / n;
        let m2 = data.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m3 = data.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
        let g1 = m3 / m2.powf(1.5);
        let a = accel_plugin(&data, &mean()).unwrap();
        assert!((a - g1 / (6.0 * n.sqrt())).abs() < 1e-12);
        let stud = accel_plugin(&data, &mean().with_mode(Mode::Studentized)).unwrap();
        assert!((a - stud).abs() < 1e-12);
    }
}
