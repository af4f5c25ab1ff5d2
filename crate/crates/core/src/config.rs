//! TOML statistic/moment/run configuration and the built-in presets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;
use thiserror::Error;

use crate::algebra::{decimal_to_rational, Scalar};
use crate::edgeworth::{Mode, Statistic};
use crate::expr::{moment_symbol, parse, rat, ParseError, GAMMA1, KAPPA1, MU, SIGMA};
use crate::moments::{empirical_spec, exponential_spec, gaussian_spec, MomentError, MomentSpec};
use crate::rearrange::linear_grid;

pub const PRESETS: [(&str, &str); 4] = [
    ("mean", include_str!("../presets/mean.cfg")),
    ("variance", include_str!("../presets/variance.cfg")),
    ("ml_sym", include_str!("../presets/ml_sym.cfg")),
    ("ml_general", include_str!("../presets/ml_general.cfg")),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bad expression for g: {0}")]
    Expr(#[from] ParseError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    statistic: RawStatistic,
    #[serde(default)]
    moments: RawMoments,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatistic {
    name: Option<String>,
    g: String,
    mode: Option<String>,
    dim: Option<usize>,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMoments {
    distribution: Option<String>,
    mu: Option<toml::Value>,
    sigma: Option<toml::Value>,
    gamma1: Option<toml::Value>,
    kappa1: Option<toml::Value>,
    /// Standardized central moments by order, e.g. `5 = 0`.
    #[serde(default)]
    moments: BTreeMap<String, toml::Value>,
    data_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    n: Option<usize>,
    reps: Option<usize>,
    grid: Option<String>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    /// Free `mu`, `sigma`, `Gamma1`, `kappa1`, `mu5`, ... unless given.
    Symbolic,
    Gaussian,
    Exponential,
    Empirical,
}

impl std::str::FromStr for DistKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symbolic" => Ok(DistKind::Symbolic),
            "gaussian" | "normal" => Ok(DistKind::Gaussian),
            "exponential" => Ok(DistKind::Exponential),
            "empirical" => Ok(DistKind::Empirical),
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsConfig {
    pub distribution: DistKind,
    pub mu: Option<BigRational>,
    pub sigma: Option<BigRational>,
    pub gamma1: Option<BigRational>,
    pub kappa1: Option<BigRational>,
    pub extra: BTreeMap<usize, BigRational>,
    pub data_file: Option<PathBuf>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            distribution: DistKind::Symbolic,
            mu: None,
            sigma: None,
            gamma1: None,
            kappa1: None,
            extra: BTreeMap::new(),
            data_file: None,
        }
    }
}

impl MomentsConfig {
    /// Moment specification up to order `k` in backend `S`; values not fixed by
    /// the config become free symbols when `S` allows it.
    pub fn spec<S: Scalar>(&self, k: usize) -> Result<MomentSpec<S>, ConfigError> {
        let val = |v: &Option<BigRational>, name: &str| -> Result<S, ConfigError> {
            match v {
                Some(r) => Ok(S::from_rational(r)),
                None => S::symbol(name).ok_or_else(|| ConfigError::Invalid(format!("moments: `{name}` needs a numeric value"))),
            }
        };
        Ok(match self.distribution {
            DistKind::Gaussian => gaussian_spec(val(&self.mu, MU)?, val(&self.sigma, SIGMA)?, k),
            DistKind::Exponential => exponential_spec(k),
            DistKind::Empirical => {
                return Err(ConfigError::Invalid("empirical moments need data; use empirical_spec".into()));
            }
            DistKind::Symbolic => {
                let mut m = Vec::new();
                for j in 3..=k {
                    m.push(match j {
                        3 => val(&self.extra.get(&3).cloned().or(self.gamma1.clone()), GAMMA1)?,
                        4 => match (self.extra.get(&4), &self.kappa1) {
                            (Some(r), _) => S::from_rational(r),
                            (None, Some(k1)) => S::from_rational(&(k1 + rat(3, 1))),
                            (None, None) => val(&None, KAPPA1)?.add(&S::from_i64(3)),
                        },
                        _ => val(&self.extra.get(&j).cloned(), &moment_symbol(j))?,
                    });
                }
                MomentSpec::new(val(&self.mu, MU)?, val(&self.sigma, SIGMA)?, m)
            }
        })
    }

    /// Plug-in spec from the configured data file.
    pub fn empirical(&self, k: usize, base: Option<&Path>) -> Result<MomentSpec<f64>, ConfigError> {
        let path = self.data_file.as_ref().ok_or_else(|| ConfigError::Invalid("moments: data_file is required for empirical".into()))?;
        let path = match base {
            Some(b) if path.is_relative() => b.join(path),
            _ => path.clone(),
        };
        Ok(empirical_spec(&read_data(&path)?, k)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub statistic: Statistic,
    pub moments: MomentsConfig,
    pub run: RunConfig,
}

fn value_to_rational(v: &toml::Value, what: &str) -> Result<BigRational, ConfigError> {
    let r = match v {
        toml::Value::Integer(i) => Some(BigRational::from_integer((*i).into())),
        toml::Value::Float(f) if f.is_finite() => decimal_to_rational(&f.to_string()),
        toml::Value::String(s) => decimal_to_rational(s),
        _ => None,
    };
    r.ok_or_else(|| ConfigError::Invalid(format!("{what}: expected a number, got {v}")))
}

/// `from:to:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("grid `{s}` is not from:to:step"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [from, to, step] = parts[..] else { return Err(bad()) };
    let g = linear_grid(from, to, step);
    if g.is_empty() {
        return Err(bad());
    }
    Ok(g)
}

/// One number per line; a non-numeric first line is taken as a header.
pub fn read_data(path: &Path) -> Result<Vec<f64>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_data(&text)
}

pub fn parse_data(text: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if i == 0 => continue,
            _ => return Err(ConfigError::Invalid(format!("data line {}: `{field}` is not a number", i + 1))),
        }
    }
    Ok(out)
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let g = parse(&raw.statistic.g)?;
        let mode = match &raw.statistic.mode {
            Some(m) => m.parse::<Mode>().map_err(ConfigError::Invalid)?,
            None => Mode::Plain,
        };
        let mut stat = Statistic::new(raw.statistic.name.as_deref().unwrap_or("statistic"), g, mode);
        stat.dim = raw.statistic.dim;
        for (k, v) in &raw.statistic.params {
            stat.params.insert(k.clone(), value_to_rational(v, &format!("params.{k}"))?);
        }
        let m = &raw.moments;
        let opt = |v: &Option<toml::Value>, what: &str| v.as_ref().map(|v| value_to_rational(v, what)).transpose();
        let mut extra = BTreeMap::new();
        for (k, v) in &m.moments {
            let order: usize = k.trim_start_matches("mu").parse().map_err(|_| ConfigError::Invalid(format!("moments.moments: bad order `{k}`")))?;
            extra.insert(order, value_to_rational(v, &format!("moments.{k}"))?);
        }
        let moments = MomentsConfig {
            distribution: match &m.distribution {
                Some(d) => d.parse().map_err(ConfigError::Invalid)?,
                None => DistKind::Symbolic,
            },
            mu: opt(&m.mu, "moments.mu")?,
            sigma: opt(&m.sigma, "moments.sigma")?,
            gamma1: opt(&m.gamma1, "moments.gamma1")?,
            kappa1: opt(&m.kappa1, "moments.kappa1")?,
            extra,
            data_file: m.data_file.clone(),
        };
        if moments.sigma.as_ref().is_some_and(|s| s.to_f64().is_none_or(|v| v <= 0.0)) {
            return Err(ConfigError::Invalid("moments.sigma must be positive".into()));
        }
        let run = RunConfig { n: raw.run.n, reps: raw.run.reps, grid: raw.run.grid.as_deref().map(parse_grid).transpose()?, seed: raw.run.seed };
        Ok(Config { statistic: stat, moments, run })
    }

    /// A file path, or the name of a built-in preset (`mean`, `mean.cfg`, ...).
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        let path = Path::new(spec);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
            return Self::from_toml(&text);
        }
        let name = spec.strip_suffix(".cfg").unwrap_or(spec);
        match preset(name) {
            Some(text) => Self::from_toml(text),
            None => Err(ConfigError::Io { path: path.to_path_buf(), source: std::io::ErrorKind::NotFound.into() }),
        }
    }
}

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
