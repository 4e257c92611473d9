use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use log::info;
use rayon::prelude::*;
use sfhd_core::covariance::{covariance_grid, covariance_grid_from_spectrum};
use sfhd_core::fieldsim::simulate_evolution;
use sfhd_core::spectra::angular_spectrum;
use sfhd_core::{h_eval_with_route, SpectralMeasure};

use crate::config::RunConfig;
use crate::Failure;

fn write(cfg: &RunConfig, name: &str, body: &str) -> Result<PathBuf, Failure> {
    let path = cfg.output_dir.join(name);
    fs::write(&path, body)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Compute)?;
    Ok(path)
}

pub fn kernel(cfg: &RunConfig, mus: &[f64], ts: &[f64]) -> Result<(), Failure> {
    if mus.is_empty() || ts.is_empty() {
        return Err(Failure::Usage(anyhow!("--mu and --t must be nonempty")));
    }
    let pairs: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|&m| ts.iter().map(move |&t| (m, t)))
        .collect();
    let rows: Vec<_> = pairs
        .par_iter()
        .map(|&(mu, t)| {
            h_eval_with_route(&cfg.model, &cfg.kernel, mu, t)
                .map_err(|e| anyhow!("kernel failed at mu = {mu}, t = {t}: {e}"))
        })
        .collect::<Result<_>>()
        .map_err(Failure::Compute)?;
    let mut out = String::from("mu,t,H,route\n");
    for ((mu, t), (h, route)) in pairs.iter().zip(rows) {
        let _ = writeln!(out, "{mu},{t},{h},{route}");
    }
    let path = write(cfg, "kernel.csv", &out)?;
    info!("wrote {} rows to {}", pairs.len(), path.display());
    Ok(())
}

pub fn spectrum(cfg: &RunConfig, l_max: usize, t: f64, t_prime: f64) -> Result<(), Failure> {
    let spec = angular_spectrum(&cfg.measure, &cfg.model, &cfg.kernel, l_max, t, t_prime)
        .map_err(|e| Failure::Compute(e.into()))?;
    let path = write(cfg, "spectrum.csv", &spec.to_csv())?;
    let total = spec.partial_sums().last().copied().unwrap_or(0.0);
    info!("sum_(l<={l_max}) (2l+1) C_l = {total}");
    info!("wrote {}", path.display());
    Ok(())
}

pub fn covariance(
    cfg: &RunConfig,
    gammas: &[f64],
    ts: &[f64],
    from_spectrum: Option<usize>,
) -> Result<(), Failure> {
    if gammas.is_empty() || ts.is_empty() {
        return Err(Failure::Usage(anyhow!("--gamma and --t must be nonempty")));
    }
    let grid = match from_spectrum {
        None => covariance_grid(&cfg.measure, &cfg.model, &cfg.kernel, gammas, ts),
        Some(l_max) => {
            covariance_grid_from_spectrum(&cfg.measure, &cfg.model, &cfg.kernel, gammas, ts, l_max)
        }
    }
    .map_err(|e| Failure::Compute(e.into()))?;
    let path = write(cfg, "covariance.csv", &grid.to_csv())?;
    info!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| Failure::Usage(anyhow!("configuration has no `simulation` section")))?;
    let SpectralMeasure::Discrete(measure) = &cfg.measure else {
        return Err(Failure::Usage(anyhow!(
            "simulation requires a discrete measure"
        )));
    };
    let snaps = simulate_evolution(measure, &cfg.model, &cfg.kernel, sim)
        .map_err(|e| Failure::Compute(e.into()))?;
    for (i, s) in snaps.iter().enumerate() {
        let grid = write(cfg, &format!("field_{i:03}.csv"), &s.grid.to_csv())?;
        write(cfg, &format!("coefficients_{i:03}.csv"), &s.coeffs.to_csv())?;
        println!(
            "t = {}  variance = {}  ({})",
            s.t,
            s.grid.sample_variance(),
            grid.display()
        );
    }
    Ok(())
}
