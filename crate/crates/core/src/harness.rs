//! Monte Carlo check of the expansions: empirical CDF of the normalized
//! statistic against the normal and Edgeworth approximations.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::special::norm_cdf;
use crate::algebra::Bindings;
use crate::bootstrap::SampleStatistic;
use crate::edgeworth::{cdf_eval, EdgeworthError, Expansion, Mode};
use crate::rearrange::{clip01, rearrange_increasing, Curve, CurveError};

pub const CSV_HEADER: &str = "x,empirical,normal,edge1,edge2,edge1_rearranged,edge2_rearranged";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    InvalidConfig(String),
    #[error("every draw was excluded")]
    AllExcluded,
    #[error("g(mu) is not available for this statistic")]
    MissingCenter,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Edgeworth(#[from] EdgeworthError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sampler {
    Gaussian { mu: f64, sigma: f64 },
    /// Unit-rate exponential.
    Exponential,
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        match *self {
            Sampler::Gaussian { mu, sigma } => {
                let d = Normal::new(mu, sigma).expect("finite positive sigma");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Sampler::Exponential => (0..n).map(|_| Exp1.sample(rng)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub sampler: Sampler,
    pub n: usize,
    pub reps: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
}

/// Draws of `sqrt(n) A(xbar)` in replicate order, undefined ones removed.
#[derive(Debug, Clone)]
pub struct McDraws {
    pub values: Vec<f64>,
    pub excluded: usize,
}

pub fn simulate_statistic(cfg: &McConfig, exp: &Expansion<f64>) -> Result<McDraws, HarnessError> {
    if cfg.n < 2 || cfg.reps == 0 {
        return Err(HarnessError::InvalidConfig(format!("need n >= 2 and reps >= 1, got n={} reps={}", cfg.n, cfg.reps)));
    }
    if let Sampler::Gaussian { sigma, .. } = cfg.sampler {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(HarnessError::InvalidConfig(format!("sigma must be positive, got {sigma}")));
        }
    }
    let m = &exp.model;
    let g0 = m.g0.ok_or(HarnessError::MissingCenter)?;
    let g = SampleStatistic::from_expr(&m.stat.g, &m.stat, m.d);
    let h2 = SampleStatistic::from_expr(&m.h2_expr, &m.stat, 2 * m.d);
    let root_n = (cfg.n as f64).sqrt();
    let raw: Vec<Option<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let sample = cfg.sampler.draw(&mut rng, cfg.n);
            let x = SampleStatistic::power_means(&sample, 2 * m.d);
            let scale = match m.mode {
                Mode::Plain => m.sigma_a,
                Mode::Studentized => {
                    let u = h2.at_means(&x);
                    if !(u > 0.0) {
                        return None;
                    }
                    u.sqrt()
                }
            };
            let t = root_n * (g.at_means(&x) - g0) / scale;
            t.is_finite().then_some(t)
        })
        .collect();
    let excluded = raw.iter().filter(|v| v.is_none()).count();
    let values: Vec<f64> = raw.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(HarnessError::AllExcluded);
    }
    Ok(McDraws { values, excluded })
}

/// Empirical CDF of the draws on `grid`.
pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> Result<Curve, HarnessError> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let cdf = grid.iter().map(|x| v.partition_point(|t| t <= x) as f64 / n).collect();
    Ok(Curve::new(grid.to_vec(), cdf)?)
}

pub fn simulate_statistic_cdf(cfg: &McConfig, exp: &Expansion<f64>) -> Result<(Curve, McDraws), HarnessError> {
    let draws = simulate_statistic(cfg, exp)?;
    Ok((empirical_cdf(&draws.values, &cfg.grid)?, draws))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub empirical: f64,
    pub normal: f64,
    pub edge1: f64,
    pub edge2: f64,
    pub edge1_rearranged: f64,
    pub edge2_rearranged: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupDistances {
    pub normal: f64,
    pub edge1: f64,
    pub edge2: f64,
    pub edge1_rearranged: f64,
    pub edge2_rearranged: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub excluded: usize,
    pub sup: SupDistances,
    pub edge1_monotone: bool,
    pub edge2_monotone: bool,
    pub rows: Vec<ComparisonRow>,
}

/// Runs the simulation and lines it up with the three approximations.
pub fn compare(cfg: &McConfig, exp: &Expansion<f64>) -> Result<Comparison, HarnessError> {
    let (emp, draws) = simulate_statistic_cdf(cfg, exp)?;
    let grid = emp.grid().to_vec();
    let n = cfg.n as f64;
    let b = Bindings::new();
    let approx = |order: usize| -> Result<Curve, HarnessError> {
        let v = grid.iter().map(|&x| cdf_eval(&exp.p1, &exp.p2, &b, n, x, order)).collect::<Result<Vec<_>, _>>()?;
        Ok(Curve::new(grid.clone(), v)?)
    };
    let normal = Curve::new(grid.clone(), grid.iter().map(|&x| norm_cdf(x)).collect())?;
    let (e1, e2) = (approx(1)?, approx(2)?);
    let (r1, r2) = (rearrange_increasing(&clip01(&e1)), rearrange_increasing(&clip01(&e2)));
    let sup = SupDistances {
        normal: normal.sup_distance(&emp),
        edge1: e1.sup_distance(&emp),
        edge2: e2.sup_distance(&emp),
        edge1_rearranged: r1.sup_distance(&emp),
        edge2_rearranged: r2.sup_distance(&emp),
    };
    let rows = (0..grid.len())
        .map(|i| ComparisonRow {
            x: grid[i],
            empirical: emp.values()[i],
            normal: normal.values()[i],
            edge1: e1.values()[i],
            edge2: e2.values()[i],
            edge1_rearranged: r1.values()[i],
            edge2_rearranged: r2.values()[i],
        })
        .collect();
    Ok(Comparison {
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        excluded: draws.excluded,
        sup,
        edge1_monotone: e1.is_nondecreasing(),
        edge2_monotone: e2.is_nondecreasing(),
        rows,
    })
}

/// CSV rows followed by a `#`-prefixed summary block.
pub fn write_csv(c: &Comparison, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &c.rows {
        writeln!(w, "{},{},{},{},{},{},{}", r.x, r.empirical, r.normal, r.edge1, r.edge2, r.edge1_rearranged, r.edge2_rearranged)?;
    }
    writeln!(w, "# n = {}", c.n)?;
    writeln!(w, "# reps = {}", c.reps)?;
    writeln!(w, "# seed = {}", c.seed)?;
    writeln!(w, "# excluded = {}", c.excluded)?;
    writeln!(w, "# sup_dist_normal = {}", c.sup.normal)?;
    writeln!(w, "# sup_dist_edge1 = {}", c.sup.edge1)?;
    writeln!(w, "# sup_dist_edge2 = {}", c.sup.edge2)?;
    writeln!(w, "# sup_dist_edge1_rearranged = {}", c.sup.edge1_rearranged)?;
    writeln!(w, "# sup_dist_edge2_rearranged = {}", c.sup.edge2_rearranged)?;
    Ok(())
}

pub fn compare_and_emit(cfg: &McConfig, exp: &Expansion<f64>, path: &std::path::Path) -> Result<Comparison, HarnessError> {
    let c = compare(cfg, exp)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(&c, &mut f)?;
    f.flush()?;
    Ok(c)
}
