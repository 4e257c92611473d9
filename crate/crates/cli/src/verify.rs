use std::f64::consts::PI;

use anyhow::{anyhow, Result};
use sfhd_core::covariance::{covariance_from_kernel, covariance_from_spectrum};
use sfhd_core::fieldsim::{analyze, coefficients_from_kernel, synthesize};
use sfhd_core::kernel::{
    h_alpha_eq_beta, h_alpha_eq_beta_confluent, h_classical, h_laplace_oracle, h_series,
};
use sfhd_core::spectra::{angular_spectrum, angular_spectrum_discrete, spectrum_from_kernel};
use sfhd_core::Error;
use sfhd_core::{h_eval, DiscreteMeasure, ModelParams, SimulationConfig, SpectralMeasure};

use crate::config::RunConfig;

const MUS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
const TS: [f64; 4] = [0.05, 0.1, 0.3, 0.5];
const GAMMAS: [f64; 6] = [0.0, PI / 8.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.discrepancy <= self.tolerance
    }
}

fn run(name: &'static str, f: impl FnOnce() -> Result<(f64, f64)>) -> Check {
    match f() {
        Ok((discrepancy, tolerance)) => Check {
            name,
            discrepancy: if discrepancy.is_nan() {
                f64::INFINITY
            } else {
                discrepancy
            },
            tolerance,
            error: None,
        },
        Err(e) => Check {
            name,
            discrepancy: f64::INFINITY,
            tolerance: f64::NAN,
            error: Some(format!("{e:#}")),
        },
    }
}

fn grid_max(mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for mu in MUS {
        for t in TS {
            worst = worst.max(f(mu, t)?);
        }
    }
    Ok(worst)
}

/// α = β closed form, or its limit at the branch point.
fn closed_form(q: &ModelParams, mu: f64, t: f64) -> Result<f64> {
    match h_alpha_eq_beta(q, mu, t) {
        Err(Error::BranchPointSingularity { .. }) => Ok(h_alpha_eq_beta_confluent(q, t)?),
        r => Ok(r?),
    }
}

fn with_orders(p: &ModelParams, alpha: f64, beta: f64) -> Result<ModelParams> {
    Ok(ModelParams::new(alpha, beta, p.c, p.d_coef)?)
}

fn discrete_or_discretized(measure: &SpectralMeasure) -> Result<DiscreteMeasure> {
    Ok(match measure {
        SpectralMeasure::Discrete(m) => m.clone(),
        SpectralMeasure::Matern(s) => sfhd_core::spectra::discretize(s, 400, 40.0 * s.a.max(1.0))?,
    })
}

pub fn run_all(cfg: &RunConfig, replicates: usize) -> Vec<Check> {
    let p = &cfg.model;
    let k = &cfg.kernel;
    let mut checks = Vec::new();

    checks.push(run(
        "initial condition H(mu,0) = 1, |H(mu,1e-5) - 1|",
        || {
            let mut worst: f64 = 0.0;
            for mu in [0.0, 0.5, 1.0, 5.0, 20.0] {
                if h_eval(p, k, mu, 0.0)? != 1.0 {
                    return Err(anyhow!("H({mu}, 0) is not exactly 1"));
                }
                worst = worst.max((h_eval(p, k, mu, 1e-5)? - 1.0).abs());
            }
            Ok((worst, 1e-6))
        },
    ));

    checks.push(run(
        "series vs alpha = beta closed form (alpha = beta = 0.8)",
        || {
            let q = with_orders(p, 0.8, 0.8)?;
            let d =
                grid_max(|mu, t| Ok((h_series(&q, k, mu, t)? - closed_form(&q, mu, t)?).abs()))?;
            Ok((d, k.oracle_tol))
        },
    ));

    checks.push(run(
        "series vs classical closed form (alpha = beta = 1)",
        || {
            let q = with_orders(p, 1.0, 1.0)?;
            let d =
                grid_max(|mu, t| Ok((h_series(&q, k, mu, t)? - h_classical(&q, mu, t)?).abs()))?;
            Ok((d, k.oracle_tol))
        },
    ));

    checks.push(run(
        "series vs contour inversion (configured orders)",
        || {
            let d = grid_max(|mu, t| {
                Ok((h_series(p, k, mu, t)? - h_laplace_oracle(p, k, mu, t)?).abs())
            })?;
            Ok((d, 1e-6))
        },
    ));

    checks.push(run(
        "contour inversion vs classical closed form (D = 2)",
        || {
            let q = ModelParams::new(1.0, 1.0, 1.0, 2.0)?;
            Ok((
                (h_laplace_oracle(&q, k, 1.0, 0.05)? - h_classical(&q, 1.0, 0.05)?).abs(),
                1e-7,
            ))
        },
    ));

    checks.push(run("series truncation stability (doubled terms)", || {
        let big = k.with_terms(2 * k.n_terms, 2 * k.m_terms);
        let d = grid_max(|mu, t| Ok((h_series(p, k, mu, t)? - h_series(p, &big, mu, t)?).abs()))?;
        Ok((d, 1e-10))
    }));

    checks.push(run("kernel envelope max |H| on [0,20] x [0,1]", || {
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            for j in 0..=10 {
                worst = worst.max(h_eval(p, k, i as f64, j as f64 / 10.0)?.abs());
            }
        }
        Ok((worst, 1.5))
    }));

    checks.push(run("C_l(t,t) >= 0 at t = 0.1", || {
        let s = angular_spectrum(&cfg.measure, p, k, 30, 0.1, 0.1)?;
        let neg = s.values.iter().fold(0.0f64, |a, &c| a.max(-c));
        Ok((neg, 0.0))
    }));

    checks.push(run("C_l(t,t') = C_l(t',t)", || {
        let a = angular_spectrum(&cfg.measure, p, k, 30, 0.1, 0.5)?;
        let b = angular_spectrum(&cfg.measure, p, k, 30, 0.5, 0.1)?;
        let scale = a
            .values
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        let d = a
            .values
            .iter()
            .zip(&b.values)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale;
        Ok((d, 1e-12))
    }));

    checks.push(run(
        "addition theorem |R_direct - R_spectrum| / R(1)",
        || {
            let m = discrete_or_discretized(&cfg.measure)?;
            let h = m.kernel_values(p, k, 0.1)?;
            let spec = spectrum_from_kernel(&m, &h, &h, 100, 0.1, 0.1);
            let var = covariance_from_kernel(&m, &h, &h, 0.0);
            let d = GAMMAS
                .iter()
                .map(|&g| {
                    (covariance_from_kernel(&m, &h, &h, g) - covariance_from_spectrum(&spec, g))
                        .abs()
                })
                .fold(0.0, f64::max);
            Ok((d / var, 1e-6))
        },
    ));

    checks.push(run("variance dominates |R(cos gamma)|", || {
        let m = discrete_or_discretized(&cfg.measure)?;
        let h = m.kernel_values(p, k, 0.1)?;
        let var = covariance_from_kernel(&m, &h, &h, 0.0);
        let excess = (0..=180)
            .map(|i| covariance_from_kernel(&m, &h, &h, PI * i as f64 / 180.0).abs() - var)
            .fold(0.0, f64::max);
        Ok((excess, 0.0))
    }));

    if let SpectralMeasure::Discrete(m) = &cfg.measure {
        checks.push(run("summability of (2l+1) C_l, l_max 100 vs 150", || {
            let s = angular_spectrum_discrete(m, p, k, 150, 0.1, 0.1)?;
            let sums = s.partial_sums();
            Ok(((sums[150] - sums[100]).abs() / sums[150], 1e-9))
        }));
    }

    checks.push(run("synthesis / analysis round trip (l_max 20)", || {
        let m = discrete_or_discretized(&cfg.measure)?;
        let c = coefficients_from_kernel(&m, &vec![1.0; m.len()], 20, 1, 0.0)?;
        let sim = SimulationConfig {
            l_max: 20,
            grid_n_theta: 64,
            grid_n_phi: 128,
            ..SimulationConfig::default()
        };
        let back = analyze(&synthesize(&c, &sim)?, 20)?;
        let mut worst: f64 = 0.0;
        for l in 0..=20usize {
            for mm in -(l as i64)..=l as i64 {
                worst = worst.max((back.get(l, mm) - c.get(l, mm)).norm());
            }
        }
        Ok((worst, 1e-4))
    }));

    checks.push(run(
        "spectrum recovery, max |mean - C_l| / standard error",
        || {
            let m = discrete_or_discretized(&cfg.measure)?;
            let t = 0.05;
            let h = m.kernel_values(p, k, t)?;
            let ls = [0usize, 1, 2, 5, 10, 20];
            let spec = spectrum_from_kernel(&m, &h, &h, 20, t, t);
            let mut samples: Vec<Vec<f64>> = vec![Vec::new(); ls.len()];
            let base = cfg.simulation.as_ref().map_or(0, |s| s.seed);
            for r in 0..replicates {
                let c = coefficients_from_kernel(&m, &h, 20, base.wrapping_add(r as u64), t)?;
                for (s, &l) in samples.iter_mut().zip(&ls) {
                    for mm in -(l as i64)..=l as i64 {
                        s.push(c.get(l, mm).norm_sqr());
                    }
                }
            }
            let mut worst: f64 = 0.0;
            for (s, &l) in samples.iter().zip(&ls) {
                let n = s.len() as f64;
                let mean = s.iter().sum::<f64>() / n;
                let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                worst = worst.max((mean - spec.get(l)).abs() / (var / n).sqrt());
            }
            Ok((worst, 4.0))
        },
    ));

    checks.push(run(
        "simulation determinism (repeat with equal seed)",
        || {
            let m = discrete_or_discretized(&cfg.measure)?;
            let sim = SimulationConfig {
                l_max: 16,
                seed: cfg.simulation.as_ref().map_or(0, |s| s.seed),
                times: vec![0.05],
                grid_n_theta: 16,
                grid_n_phi: 32,
            };
            let h = m.kernel_values(p, k, 0.05)?;
            let a = synthesize(&coefficients_from_kernel(&m, &h, 16, sim.seed, 0.05)?, &sim)?;
            let b = synthesize(&coefficients_from_kernel(&m, &h, 16, sim.seed, 0.05)?, &sim)?;
            Ok((if a == b { 0.0 } else { 1.0 }, 0.0))
        },
    ));

    checks.push(run("configuration round trip", || {
        let text = serde_json::to_string(cfg)?;
        let back: RunConfig = serde_json::from_str(&text)?;
        Ok((if &back == cfg { 0.0 } else { 1.0 }, 0.0))
    }));

    checks
}

pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        match &c.error {
            None => s.push_str(&format!(
                "[{status}] {}: discrepancy {:.3e}, tolerance {:.3e}\n",
                c.name, c.discrepancy, c.tolerance
            )),
            Some(e) => s.push_str(&format!("[{status}] {}: error: {e}\n", c.name)),
        }
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    s
}
