use edgeworth_core::bootstrap::{bca_interval, BootConfig};
use edgeworth_core::edgeworth::{expand, Mode, Statistic};
use edgeworth_core::expr::parse;
use edgeworth_core::harness::{compare, empirical_cdf, simulate_statistic, McConfig, Sampler};
use edgeworth_core::moments::{exponential_spec, gaussian_spec};
use edgeworth_core::rearrange::linear_grid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn stat(g: &str, mode: Mode) -> Statistic {
    Statistic::new("s", parse(g).unwrap(), mode)
}

#[test]
fn studentized_mean_matches_t9() {
    // divisor-n scale: T = t * sqrt(n / (n - 1))
    let exp = expand(&stat("x1", Mode::Studentized), &gaussian_spec(0.0, 1.0, 16)).unwrap();
    let grid = linear_grid(-3.0, 3.0, 0.25);
    let cfg = McConfig { sampler: Sampler::Gaussian { mu: 0.0, sigma: 1.0 }, n: 10, reps: 100_000, grid: grid.clone(), seed: 3 };
    let draws = simulate_statistic(&cfg, &exp).unwrap();
    let emp = empirical_cdf(&draws.values, &grid).unwrap();
    let t9 = StudentsT::new(0.0, 1.0, 9.0).unwrap();
    for (x, f) in grid.iter().zip(emp.values()) {
        let want = t9.cdf(x * (9.0f64 / 10.0).sqrt());
        assert!((f - want).abs() < 0.01, "x={x}: {f} vs {want}");
    }
}

#[test]
fn exponential_mean_skewness_is_captured() {
    let exp = expand(&stat("x1", Mode::Plain), &exponential_spec(16)).unwrap();
    let cfg = McConfig { sampler: Sampler::Exponential, n: 50, reps: 100_000, grid: linear_grid(-3.0, 3.0, 0.05), seed: 11 };
    let c = compare(&cfg, &exp).unwrap();
    assert!(c.sup.edge1 < 0.5 * c.sup.normal, "{:?}", c.sup);
    assert!(c.sup.edge2 < 0.5 * c.sup.normal, "{:?}", c.sup);
}

#[test]
fn bca_respects_monotone_transformations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<f64> = (0..25).map(|_| Exp1.sample(&mut rng)).collect();
    let cfg = BootConfig::new(1999, 4, 0.1);
    let plain = bca_interval(&data, &stat("x1", Mode::Plain), &cfg).unwrap();
    let logged = bca_interval(&data, &stat("exp(x1)", Mode::Plain), &cfg).unwrap();
    assert!((logged.a_hat - plain.a_hat).abs() < 1e-12);
    assert_eq!(logged.h_theta, plain.h_theta);
    assert!((logged.lower - plain.lower.exp()).abs() < 1e-12);
    assert!((logged.upper - plain.upper.exp()).abs() < 1e-12);
    assert!(plain.a_hat > 0.0);
}
