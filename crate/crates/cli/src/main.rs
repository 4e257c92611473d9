//! `sfhd`: kernel, spectrum, covariance and simulation driver.

mod commands;
mod config;
mod verify;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};

use config::{split_overrides, RunConfig};

const EXIT_VERIFY: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Failure classes, mapped to exit codes.
pub enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
    Verify(String),
}

#[derive(Parser)]
#[command(
    name = "sfhd",
    version,
    about = "Fractional hyperbolic diffusion random fields on the sphere"
)]
#[command(
    after_help = "Any configuration field can be overridden with a dotted flag, e.g. --model.alpha 0.8"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate H(mu, t) on a grid; writes kernel.csv.
    Kernel {
        #[arg(long)]
        config: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        mu: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        t: Vec<f64>,
    },
    /// Angular power spectrum C_l(t, t'); writes spectrum.csv.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        l_max: usize,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Defaults to --t.
        #[arg(long)]
        t_prime: Option<f64>,
    },
    /// Covariance R(cos gamma, t, t); writes covariance.csv.
    Covariance {
        #[arg(long)]
        config: PathBuf,
        /// Angles in radians; defaults to 181 points on [0, pi].
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        t: Vec<f64>,
        /// Reconstruct from C_l instead of summing over the measure.
        #[arg(long)]
        from_spectrum: bool,
        #[arg(long, default_value_t = 100)]
        l_max: usize,
    },
    /// Simulate one realisation at every configured time.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the invariant checks and print a report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Seeds used by the spectrum recovery check.
        #[arg(long, default_value_t = 200)]
        replicates: usize,
    },
}

impl Command {
    fn config(&self) -> &PathBuf {
        match self {
            Command::Kernel { config, .. }
            | Command::Spectrum { config, .. }
            | Command::Covariance { config, .. }
            | Command::Simulate { config }
            | Command::Verify { config, .. } => config,
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SFHD_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(anyhow!(
            "SFHD_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(anyhow!("thread pool: {e}")))
}

fn run() -> Result<(), Failure> {
    let args: Vec<String> = std::env::args().collect();
    let (args, overrides) = split_overrides(args).map_err(Failure::Usage)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return Ok(());
        }
        Err(e) => return Err(Failure::Usage(anyhow!(e.to_string()))),
    };
    init_threads()?;
    let cfg = RunConfig::load(cli.command.config(), &overrides).map_err(Failure::Usage)?;
    cfg.prepare_output().map_err(Failure::Usage)?;

    match cli.command {
        Command::Kernel { mu, t, .. } => commands::kernel(&cfg, &mu, &t),
        Command::Spectrum {
            l_max, t, t_prime, ..
        } => commands::spectrum(&cfg, l_max, t, t_prime.unwrap_or(t)),
        Command::Covariance {
            gamma,
            t,
            from_spectrum,
            l_max,
            ..
        } => {
            let gamma = if gamma.is_empty() {
                (0..=180).map(|i| PI * i as f64 / 180.0).collect()
            } else {
                gamma
            };
            commands::covariance(&cfg, &gamma, &t, from_spectrum.then_some(l_max))
        }
        Command::Simulate { .. } => commands::simulate(&cfg),
        Command::Verify { replicates, .. } => {
            let checks = verify::run_all(&cfg, replicates);
            print!("{}", verify::report(&checks));
            match checks.iter().find(|c| !c.passed()) {
                Some(c) => Err(Failure::Verify(c.name.to_string())),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_COMPUTE)
        }
        Err(Failure::Verify(name)) => {
            eprintln!("verification failed; first failing check: {name}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
