use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use edgeworth_core::algebra::{decimal_to_rational, AlgebraError, Bindings, NormalForm, Scalar};
use edgeworth_core::bootstrap::{bca_interval, BootConfig};
use edgeworth_core::codegen::emit_assignments;
use edgeworth_core::config::{read_data, Config, DistKind};
use edgeworth_core::edgeworth::{
    accel_constant, build_model, cdf_eval, expand, quantile_eval, AccelResult, EdgeworthError, Expansion, Mode, Poly,
};
use edgeworth_core::expr::{pretty_print, Expr, LAMBDA};
use edgeworth_core::harness::{compare, write_csv, McConfig, Sampler};
use edgeworth_core::moments::MomentSpec;

#[derive(Parser)]
#[command(name = "edgeworth", version, about = "Edgeworth and Cornish-Fisher expansions for smooth functions of means")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Cumulant coefficients and expansion polynomials.
    Expand(StatArgs),
    /// Acceleration constant.
    Accel {
        #[command(flatten)]
        stat: StatArgs,
        /// Also report `a` at this sample size.
        #[arg(long)]
        n: Option<f64>,
    },
    /// Edgeworth approximation of the CDF at one point.
    Cdf {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
        order: u8,
    },
    /// Cornish-Fisher approximation of a quantile.
    Quantile {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
        order: u8,
    },
    /// Monte Carlo comparison of the approximations, written as CSV.
    Mc {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, value_parser = ["gaussian", "exponential"])]
        dist: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        /// `from:to:step`
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Percentile and BCA bootstrap intervals.
    Bca {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long = "B", default_value_t = 1999)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        /// Enumerate every resample (n <= 8).
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed forms as `name = expr;` lines.
    Export {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value = "A,a,p1,p2,p11,p21", value_delimiter = ',')]
        what: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct StatArgs {
    /// Config file or preset name (mean, variance, ml_sym, ml_general).
    #[arg(long)]
    stat: String,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// symbolic, gaussian, exponential or empirical.
    #[arg(long, value_parser = parse_dist)]
    moments: Option<DistKind>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    mu: Option<BigRational>,
    #[arg(long, value_parser = parse_number)]
    sigma: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    gamma1: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    kappa1: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_number)]
    lambda: Option<BigRational>,
    /// Statistic parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    params: Vec<(String, BigRational)>,
    /// Leave a preset value symbolic: mu, sigma, gamma1, kappa1 or a parameter name.
    #[arg(long = "free", value_name = "NAME")]
    free: Vec<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Data file: one number per line, optional header.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Use floating point even when exact arithmetic is possible.
    #[arg(long)]
    numeric: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_dist(s: &str) -> Result<DistKind, String> {
    s.parse()
}

fn parse_number(s: &str) -> Result<BigRational, String> {
    decimal_to_rational(s).ok_or_else(|| format!("`{s}` is not a decimal number"))
}

fn parse_param(s: &str) -> Result<(String, BigRational), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    Ok((k.trim().to_string(), parse_number(v.trim())?))
}

enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load(args: &StatArgs) -> Result<Config, Failure> {
    let mut cfg = Config::load(&args.stat).map_err(|e| usage(format!("{}: {e}", args.stat)))?;
    let st = &mut cfg.statistic;
    if let Some(m) = args.mode {
        st.mode = m;
    }
    if let Some(d) = args.dim {
        st.dim = Some(d);
    }
    if let Some(l) = &args.lambda {
        st.params.insert(LAMBDA.to_string(), l.clone());
    }
    for (k, v) in &args.params {
        st.params.insert(k.clone(), v.clone());
    }
    let m = &mut cfg.moments;
    if let Some(d) = args.moments {
        m.distribution = d;
    }
    for (slot, v) in [(&mut m.mu, &args.mu), (&mut m.sigma, &args.sigma), (&mut m.gamma1, &args.gamma1), (&mut m.kappa1, &args.kappa1)] {
        if v.is_some() {
            *slot = v.clone();
        }
    }
    if args.sigma.as_ref().is_some_and(|s| s <= &BigRational::from_integer(0.into())) {
        return Err(usage("--sigma must be positive"));
    }
    if let Some(p) = &args.data {
        m.data_file = Some(p.clone());
    }
    for name in &args.free {
        match name.as_str() {
            "mu" => m.mu = None,
            "sigma" => m.sigma = None,
            "gamma1" | "Gamma1" => m.gamma1 = None,
            "kappa1" => m.kappa1 = None,
            p if cfg.statistic.params.remove(p).is_some() => {}
            other => return Err(usage(format!("--free: nothing named `{other}` to release"))),
        }
    }
    Ok(cfg)
}

/// Moment order needed by the four cumulant coefficients.
fn order_needed(cfg: &Config) -> usize {
    4 * cfg.statistic.dims()
}

fn spec_for<S: Scalar>(cfg: &Config) -> Result<MomentSpec<S>, Failure> {
    cfg.moments.spec(order_needed(cfg)).map_err(|e| usage(e.to_string()))
}

fn empirical_spec(cfg: &Config) -> Result<MomentSpec<f64>, Failure> {
    cfg.moments.empirical(order_needed(cfg), None).map_err(|e| usage(e.to_string()))
}

fn is_residue(e: &EdgeworthError) -> bool {
    matches!(e, EdgeworthError::Algebra(AlgebraError::TranscendentalResidue(_)))
}

/// Result values in whichever backend could represent them.
enum Shown {
    Exact(Expr),
    Number(f64),
}

impl Shown {
    fn text(&self) -> String {
        match self {
            Shown::Exact(e) => pretty_print(e),
            Shown::Number(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Shown::Exact(e) => Value::String(pretty_print(e)),
            Shown::Number(v) => json!(v),
        }
    }

    fn to_f64(&self) -> anyhow::Result<f64> {
        match self {
            Shown::Number(v) => Ok(*v),
            Shown::Exact(e) => Scalar::to_f64(e, &Bindings::new()).map_err(|err| {
                anyhow!("{err}; bind it with a numeric moment option such as --gamma1, --kappa1, --mu or --sigma")
            }),
        }
    }
}

trait Show: Scalar {
    fn show(&self) -> Shown;
}

impl Show for f64 {
    fn show(&self) -> Shown {
        Shown::Number(*self)
    }
}

impl Show for NormalForm {
    fn show(&self) -> Shown {
        Shown::Exact(self.to_expr())
    }
}

impl Show for Expr {
    fn show(&self) -> Shown {
        Shown::Exact(self.clone())
    }
}

struct Report {
    backend: &'static str,
    coeffs: Vec<(&'static str, Shown)>,
    polys: Vec<(&'static str, ShownPoly)>,
    accel: Vec<(&'static str, Shown)>,
}

/// Polynomial coefficients as rendered, lowest degree first.
struct ShownPoly(Vec<Shown>);

fn poly_shown<S: Show>(p: &Poly<S>) -> ShownPoly {
    ShownPoly(p.coeffs().iter().map(|c| c.show()).collect())
}

fn accel_rows<S: Show>(a: &AccelResult<S>) -> Vec<(&'static str, Shown)> {
    vec![("A", a.a_value.show()), ("a_sqrt_n", a.a_over_sqrtn.show())]
}

fn report_of<S: Show>(backend: &'static str, e: &Expansion<S>) -> Report {
    let c = &e.coeffs;
    Report {
        backend,
        coeffs: vec![("k12", c.k12.show()), ("k22", c.k22.show()), ("k31", c.k31.show()), ("k41", c.k41.show())],
        polys: vec![("p1", poly_shown(&e.p1)), ("p2", poly_shown(&e.p2)), ("p11", poly_shown(&e.p11)), ("p21", poly_shown(&e.p21))],
        accel: accel_rows(&e.accel),
    }
}

fn poly_expr(p: &ShownPoly) -> Expr {
    let x = Expr::sym("x");
    Expr::add(
        p.0.iter()
            .enumerate()
            .map(|(k, c)| {
                let c = match c {
                    Shown::Exact(e) => e.clone(),
                    Shown::Number(v) => edgeworth_core::algebra::float_to_expr(*v),
                };
                c * Expr::powi(x.clone(), k as i64)
            })
            .collect(),
    )
}

/// Full expansion: exact when possible, then floating point, then unsimplified closed form.
fn full_report(cfg: &Config, numeric: bool) -> Result<Report, Failure> {
    let stat = &cfg.statistic;
    if cfg.moments.distribution == DistKind::Empirical {
        let spec = empirical_spec(cfg)?;
        return Ok(report_of("numeric", &expand(stat, &spec).map_err(anyhow::Error::from)?));
    }
    if !numeric {
        match expand::<NormalForm>(stat, &spec_for(cfg)?) {
            Ok(e) => return Ok(report_of("exact", &e)),
            Err(e) if is_residue(&e) => {}
            Err(e) => return Err(Failure::Compute(e.into())),
        }
    }
    match spec_for::<f64>(cfg) {
        Ok(spec) => Ok(report_of("numeric", &expand(stat, &spec).map_err(anyhow::Error::from)?)),
        Err(_) if !numeric => {
            let spec: MomentSpec<Expr> = spec_for(cfg)?;
            Ok(report_of("closed-form", &expand(stat, &spec).map_err(anyhow::Error::from)?))
        }
        Err(e) => Err(e),
    }
}

fn accel_of<S: Show>(cfg: &Config, spec: &MomentSpec<S>) -> Result<AccelResult<S>, EdgeworthError> {
    let m = build_model(&cfg.statistic, spec)?;
    accel_constant(&m, spec)
}

fn accel_report(cfg: &Config, numeric: bool) -> Result<(&'static str, Vec<(&'static str, Shown)>), Failure> {
    let comp = |e: EdgeworthError| Failure::Compute(e.into());
    if cfg.moments.distribution == DistKind::Empirical {
        return Ok(("numeric", accel_rows(&accel_of(cfg, &empirical_spec(cfg)?).map_err(comp)?)));
    }
    if !numeric {
        match accel_of::<NormalForm>(cfg, &spec_for(cfg)?) {
            Ok(a) => return Ok(("exact", accel_rows(&a))),
            Err(e) if is_residue(&e) => {}
            Err(e) => return Err(comp(e)),
        }
    }
    match spec_for::<f64>(cfg) {
        Ok(spec) => Ok(("numeric", accel_rows(&accel_of(cfg, &spec).map_err(comp)?))),
        Err(_) if !numeric => Ok(("closed-form", accel_rows(&accel_of::<Expr>(cfg, &spec_for(cfg)?).map_err(comp)?))),
        Err(e) => Err(e),
    }
}

fn header(cfg: &Config, backend: &str) -> Vec<(String, Value)> {
    vec![
        ("statistic".into(), json!(cfg.statistic.name)),
        ("g".into(), json!(pretty_print(&cfg.statistic.g))),
        ("mode".into(), json!(cfg.statistic.mode.to_string())),
        ("backend".into(), json!(backend)),
    ]
}

fn emit(format: Format, meta: Vec<(String, Value)>, rows: Vec<(String, Shown)>) {
    match format {
        Format::Text => {
            for (k, v) in &meta {
                match v {
                    Value::String(s) => println!("{k} = {s}"),
                    other => println!("{k} = {other}"),
                }
            }
            for (k, v) in &rows {
                println!("{k} = {}", v.text());
            }
        }
        Format::Json => {
            let mut obj = Map::new();
            for (k, v) in meta {
                obj.insert(k, v);
            }
            let mut vals = Map::new();
            for (k, v) in &rows {
                vals.insert(k.clone(), v.json());
            }
            obj.insert("values".into(), Value::Object(vals));
            println!("{}", serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable"));
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    match cli.cmd {
        Command::Expand(args) => {
            let cfg = load(&args)?;
            let r = full_report(&cfg, args.numeric)?;
            let mut rows: Vec<(String, Shown)> = r.coeffs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            for (k, p) in &r.polys {
                rows.push((k.to_string(), Shown::Exact(poly_expr(p))));
            }
            rows.extend(r.accel.into_iter().map(|(k, v)| (k.to_string(), v)));
            emit(format, header(&cfg, r.backend), rows);
        }
        Command::Accel { stat: args, n } => {
            let cfg = load(&args)?;
            let (backend, acc) = accel_report(&cfg, args.numeric)?;
            let mut rows: Vec<(String, Shown)> = Vec::new();
            let a_sqrt_n = acc[1].1.to_f64().ok();
            rows.extend(acc.into_iter().map(|(k, v)| (k.to_string(), v)));
            if let Some(n) = n {
                if !(n > 0.0) {
                    return Err(usage("--n must be positive"));
                }
                let v = a_sqrt_n.ok_or_else(|| anyhow!("acceleration is not numeric; bind the free moments"))?;
                rows.push(("a".into(), Shown::Number(v / n.sqrt())));
            }
            emit(format, header(&cfg, backend), rows);
        }
        Command::Cdf { stat: args, x, n, order } => {
            let cfg = load(&args)?;
            let r = full_report(&cfg, args.numeric)?;
            let (p1, p2) = (&r.polys[0].1, &r.polys[1].1);
            let coeffs = |p: &ShownPoly| -> anyhow::Result<Poly<f64>> {
                Ok(Poly::new(p.0.iter().map(|c| c.to_f64()).collect::<anyhow::Result<_>>()?))
            };
            let v = cdf_eval(&coeffs(p1)?, &coeffs(p2)?, &Bindings::new(), n, x, order as usize).map_err(|e| usage(e.to_string()))?;
            let mut meta = header(&cfg, r.backend);
            meta.extend([("x".into(), json!(x)), ("n".into(), json!(n)), ("order".into(), json!(order))]);
            emit(format, meta, vec![("cdf".into(), Shown::Number(v))]);
        }
        Command::Quantile { stat: args, alpha, n, order } => {
            let cfg = load(&args)?;
            let r = full_report(&cfg, args.numeric)?;
            let (p11, p21) = (&r.polys[2].1, &r.polys[3].1);
            let coeffs = |p: &ShownPoly| -> anyhow::Result<Poly<f64>> {
                Ok(Poly::new(p.0.iter().map(|c| c.to_f64()).collect::<anyhow::Result<_>>()?))
            };
            let v = quantile_eval(&coeffs(p11)?, &coeffs(p21)?, &Bindings::new(), n, alpha, order as usize).map_err(|e| usage(e.to_string()))?;
            let mut meta = header(&cfg, r.backend);
            meta.extend([("alpha".into(), json!(alpha)), ("n".into(), json!(n)), ("order".into(), json!(order))]);
            emit(format, meta, vec![("quantile".into(), Shown::Number(v))]);
        }
        Command::Mc { stat: args, dist, n, reps, grid, seed, out } => {
            let mut cfg = load(&args)?;
            let kind = match dist.as_deref() {
                Some("exponential") => DistKind::Exponential,
                Some(_) => DistKind::Gaussian,
                None if cfg.moments.distribution == DistKind::Exponential => DistKind::Exponential,
                None => DistKind::Gaussian,
            };
            cfg.moments.distribution = kind;
            let zero = BigRational::from_integer(0.into());
            let one = BigRational::from_integer(1.into());
            cfg.moments.mu.get_or_insert(zero);
            cfg.moments.sigma.get_or_insert(one);
            let to_f = |r: &BigRational| edgeworth_core::algebra::rational_to_f64(r);
            let sampler = match kind {
                DistKind::Exponential => Sampler::Exponential,
                _ => Sampler::Gaussian { mu: to_f(cfg.moments.mu.as_ref().unwrap()), sigma: to_f(cfg.moments.sigma.as_ref().unwrap()) },
            };
            let grid = match grid {
                Some(g) => edgeworth_core::config::parse_grid(&g).map_err(|e| usage(e.to_string()))?,
                None => cfg.run.grid.clone().unwrap_or_else(|| edgeworth_core::rearrange::linear_grid(-4.0, 4.0, 0.02)),
            };
            let n = n.or(cfg.run.n).ok_or_else(|| usage("--n is required"))?;
            let reps = reps.or(cfg.run.reps).unwrap_or(100_000);
            let spec: MomentSpec<f64> = spec_for(&cfg)?;
            let exp = expand(&cfg.statistic, &spec).map_err(anyhow::Error::from)?;
            let mc = McConfig { sampler, n, reps, grid, seed };
            let c = compare(&mc, &exp).map_err(|e| match e {
                edgeworth_core::harness::HarnessError::InvalidConfig(m) => usage(m),
                other => Failure::Compute(other.into()),
            })?;
            match out {
                Some(path) => {
                    let mut f = std::io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                    write_csv(&c, &mut f).and_then(|_| f.flush()).with_context(|| format!("writing {}", path.display()))?;
                    let mut meta = header(&cfg, "numeric");
                    meta.extend([
                        ("n".into(), json!(c.n)),
                        ("reps".into(), json!(c.reps)),
                        ("seed".into(), json!(c.seed)),
                        ("excluded".into(), json!(c.excluded)),
                        ("out".into(), json!(path.display().to_string())),
                    ]);
                    let s = &c.sup;
                    let rows = [
                        ("sup_dist_normal", s.normal),
                        ("sup_dist_edge1", s.edge1),
                        ("sup_dist_edge2", s.edge2),
                        ("sup_dist_edge1_rearranged", s.edge1_rearranged),
                        ("sup_dist_edge2_rearranged", s.edge2_rearranged),
                    ];
                    emit(format, meta, rows.into_iter().map(|(k, v)| (k.to_string(), Shown::Number(v))).collect());
                }
                None => {
                    let stdout = std::io::stdout();
                    write_csv(&c, &mut stdout.lock()).context("writing CSV")?;
                }
            }
        }
        Command::Bca { stat: args, b, alpha, seed, exhaustive, out } => {
            let cfg = load(&args)?;
            let path = args.data.as_ref().ok_or_else(|| usage("--data is required"))?;
            let data = read_data(path).map_err(|e| usage(e.to_string()))?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(usage("--alpha must lie in (0, 1)"));
            }
            if b == 0 {
                return Err(usage("--B must be at least 1"));
            }
            let bc = BootConfig { b, seed, alpha, exhaustive };
            let r = bca_interval(&data, &cfg.statistic, &bc).map_err(anyhow::Error::from)?;
            if let Some(path) = &out {
                let text = serde_json::to_string_pretty(&r).expect("serializable");
                fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            let mut meta = header(&cfg, "numeric");
            meta.extend([("n".into(), json!(data.len())), ("B".into(), json!(r.b)), ("seed".into(), json!(seed)), ("alpha".into(), json!(alpha))]);
            let rows = [
                ("theta_hat", r.theta_hat),
                ("h_theta", r.h_theta),
                ("m_hat", r.m_hat),
                ("a_hat", r.a_hat),
                ("lower", r.lower),
                ("upper", r.upper),
                ("percentile_lower", r.percentile_lower),
                ("percentile_upper", r.percentile_upper),
                ("nan_count", r.nan_count as f64),
            ];
            emit(format, meta, rows.into_iter().map(|(k, v)| (k.to_string(), Shown::Number(v))).collect());
        }
        Command::Export { stat: args, what, out } => {
            let cfg = load(&args)?;
            let known = ["k12", "k22", "k31", "k41", "p1", "p2", "p11", "p21", "A", "a"];
            if let Some(bad) = what.iter().find(|w| !known.contains(&w.as_str())) {
                return Err(usage(format!("--what: unknown item `{bad}` (known: {})", known.join(","))));
            }
            let only_accel = what.iter().all(|w| w == "A" || w == "a");
            let (coeffs, polys, acc) = if only_accel {
                let (_, acc) = accel_report(&cfg, args.numeric)?;
                (Vec::new(), Vec::new(), acc)
            } else {
                let r = full_report(&cfg, args.numeric)?;
                (r.coeffs, r.polys, r.accel)
            };
            let as_expr = |s: &Shown| match s {
                Shown::Exact(e) => e.clone(),
                Shown::Number(v) => edgeworth_core::algebra::float_to_expr(*v),
            };
            let mut pairs = Vec::new();
            for w in &what {
                let e = match w.as_str() {
                    "A" => as_expr(&acc[0].1),
                    "a" => as_expr(&acc[1].1) * Expr::pow(Expr::sym("n"), edgeworth_core::expr::rat(-1, 2)),
                    k if k.starts_with('k') => as_expr(&coeffs.iter().find(|(n, _)| *n == k).expect("known").1),
                    p => poly_expr(&polys.iter().find(|(n, _)| *n == p).expect("known").1),
                };
                pairs.push((w.clone(), e));
            }
            let text = emit_assignments(&pairs).map_err(anyhow::Error::from)?;
            match out {
                Some(path) => fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
