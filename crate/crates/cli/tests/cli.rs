use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn repo_config(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name),
    )
    .unwrap()
}

struct Run {
    dir: TempDir,
    config: PathBuf,
}

impl Run {
    fn new(mut cfg: Value) -> Run {
        let dir = tempfile::tempdir().unwrap();
        cfg["output_dir"] = json!(dir.path().join("out"));
        let config = dir.path().join("config.json");
        fs::write(&config, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        Run { dir, config }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn sfhd(&self, args: &[&str]) -> Output {
        self.sfhd_env(args, &[])
    }

    fn sfhd_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfhd"));
        cmd.arg(args[0])
            .arg("--config")
            .arg(&self.config)
            .args(&args[1..]);
        cmd.env("RUST_LOG", "warn").env_remove("SFHD_THREADS");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out().join(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect()
}

fn assert_close_csv(got: &str, want: &str, rel: f64) {
    assert_eq!(got.lines().next(), want.lines().next(), "header");
    let (g, w) = (rows(got), rows(want));
    assert_eq!(g.len(), w.len());
    for (a, b) in g.iter().zip(&w) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= rel * y.abs().max(1e-300), "{x} vs {y}");
        }
    }
}

#[test]
fn kernel_trivial_rows() {
    let run = Run::new(repo_config("default.json"));
    let o = run.sfhd(&["kernel", "--mu", "0,1", "--t", "0.3,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = run.read("kernel.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "mu,t,H,route");
    assert!(lines.contains(&"0,0.3,1,series"));
    assert!(lines.contains(&"1,0,1,series"));
}

#[test]
fn kernel_surface_matches_fixture() {
    let run = Run::new(repo_config("default.json"));
    let mus = (1..=20)
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let o = run.sfhd(&[
        "kernel",
        "--mu",
        &mus,
        "--t",
        "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_close_csv(
        &run.read("kernel.csv"),
        &fixture("kernel_surface.csv"),
        1e-10,
    );
}

#[test]
fn kernel_routes_follow_orders() {
    let run = Run::new(repo_config("default.json"));
    let route = |args: &[&str]| {
        let mut a = vec!["kernel", "--mu", "1", "--t", "0.1"];
        a.extend_from_slice(args);
        let o = run.sfhd(&a);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        run.read("kernel.csv")
            .lines()
            .nth(1)
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(route(&[]), "series");
    assert_eq!(route(&["--model.alpha", "1"]), "classical");
    assert_eq!(route(&["--model.beta=0.8"]), "alpha_eq_beta");
}

#[test]
fn kernel_failure_names_the_point() {
    let run = Run::new(repo_config("default.json"));
    let o = run.sfhd(&["kernel", "--mu", "-1", "--t", "0.2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mu = -1, t = 0.2"), "{}", stderr(&o));
}

#[test]
fn spectrum_positive_and_decaying() {
    let run = Run::new(repo_config("default.json"));
    let mut cols = Vec::new();
    for t in ["0", "0.1", "0.5"] {
        let o = run.sfhd(&["spectrum", "--l-max", "40", "--t", t]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        cols.push(
            rows(&run.read("spectrum.csv"))
                .into_iter()
                .map(|r| r[1])
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(cols[0].len(), 41);
    assert!(cols[0].iter().all(|&c| c > 0.0));
    let total = |c: &[f64]| {
        c.iter()
            .enumerate()
            .map(|(l, c)| (2 * l + 1) as f64 * c)
            .sum::<f64>()
    };
    assert!(total(&cols[1]) < total(&cols[0]));
    assert!(total(&cols[2]) < total(&cols[1]));
}

#[test]
fn covariance_at_origin_is_total_variance() {
    let run = Run::new(repo_config("default.json"));
    let o = run.sfhd(&["covariance", "--gamma", "0", "--t", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = run.read("covariance.csv");
    assert_eq!(csv.lines().next().unwrap(), "gamma_rad,t,t_prime,R");
    let want: f64 = (1..=10).map(|i| (100.0 / i as f64).powi(2)).sum();
    let r = rows(&csv)[0][3];
    assert!((r - want).abs() <= 1e-12 * want, "{r} vs {want}");
}

#[test]
fn covariance_matches_fixture_and_spectrum_route() {
    let run = Run::new(repo_config("default.json"));
    let gammas = "0,0.3926990816987241,0.7853981633974483,1.5707963267948966,2.356194490192345,3.141592653589793";
    let args = [
        "covariance",
        "--gamma",
        gammas,
        "--t",
        "0,0.1,0.5",
        "--model.alpha",
        "1",
    ];
    let o = run.sfhd(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let direct = run.read("covariance.csv");
    assert_close_csv(&direct, &fixture("covariance_classical.csv"), 1e-10);

    let mut a = args.to_vec();
    a.push("--from-spectrum");
    let o = run.sfhd(&a);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (d, s) = (rows(&direct), rows(&run.read("covariance.csv")));
    for t in [0.0, 0.1, 0.5] {
        let r1 = d.iter().find(|r| r[0] == 0.0 && r[1] == t).unwrap()[3];
        for (x, y) in d.iter().zip(&s).filter(|(x, _)| x[1] == t) {
            assert!((x[3] - y[3]).abs() <= 1e-6 * r1);
        }
    }
}

#[test]
fn simulate_single_atom_is_reproducible() {
    let mut cfg = repo_config("default.json");
    cfg["measure"] = json!({"discrete": {"mu": [3.0], "weight": [2.0]}});
    cfg["simulation"] =
        json!({"l_max": 12, "seed": 5, "times": [0.0], "grid_n_theta": 16, "grid_n_phi": 32});
    let run = Run::new(cfg);
    let o = run.sfhd(&["simulate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = run.read("field_000.csv");
    assert_eq!(first.lines().next().unwrap(), "theta_rad,phi_rad,value");
    assert_eq!(first.lines().count(), 1 + 16 * 32);
    let coeffs = run.read("coefficients_000.csv");
    assert_eq!(coeffs.lines().next().unwrap(), "l,m,re,im");
    assert!(rows(&coeffs).iter().all(|r| r[1] >= 0.0));
    assert!(run.sfhd(&["simulate"]).status.success());
    assert_eq!(first, run.read("field_000.csv"));
    assert_eq!(coeffs, run.read("coefficients_000.csv"));
}

#[test]
fn simulate_monopole_only_is_constant() {
    let mut cfg = repo_config("default.json");
    cfg["simulation"]["l_max"] = json!(0);
    cfg["simulation"]["times"] = json!([0.0]);
    let run = Run::new(cfg);
    let o = run.sfhd(&[
        "simulate",
        "--simulation.grid_n_theta",
        "8",
        "--simulation.grid_n_phi",
        "16",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let vals: Vec<f64> = rows(&run.read("field_000.csv"))
        .iter()
        .map(|r| r[2])
        .collect();
    assert!(vals
        .iter()
        .all(|v| (v - vals[0]).abs() <= 1e-12 * vals[0].abs()));
}

#[test]
fn simulate_smooths_in_the_wave_regime() {
    let mut cfg = repo_config("default.json");
    cfg["model"] = json!({"alpha": 1.0, "beta": 1.0, "c": 1.0, "d_coef": 2.0});
    let run = Run::new(cfg);
    let o = run.sfhd(&["simulate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let vars: Vec<f64> = stdout
        .lines()
        .map(|l| {
            l.split("variance = ")
                .nth(1)
                .unwrap()
                .split_whitespace()
                .next()
                .unwrap()
                .parse()
                .unwrap()
        })
        .collect();
    assert_eq!(vars.len(), 2);
    assert!(vars[1] < vars[0], "{vars:?}");
}

#[test]
fn simulate_requires_simulation_section() {
    let run = Run::new(repo_config("matern.json"));
    let o = run.sfhd(&["simulate"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn verify_default_passes() {
    let run = Run::new(repo_config("default.json"));
    let o = run.sfhd(&["verify", "--replicates", "50"]);
    let report = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{report}\n{}", stderr(&o));
    let n = report.lines().filter(|l| l.starts_with("[PASS]")).count();
    assert!(n >= 10, "{report}");
    assert!(!report.contains("[FAIL]"));
}

#[test]
fn verify_corrupted_tolerance_fails() {
    let run = Run::new(repo_config("default.json"));
    let o = run.sfhd(&[
        "verify",
        "--replicates",
        "20",
        "--kernel.oracle_tol",
        "1e-30",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL]"));
    assert!(stderr(&o).contains("first failing check"));
}

#[test]
fn invalid_models_are_rejected_at_startup() {
    for (field, value, needle) in [
        ("model.beta", "0.1", "alpha + beta"),
        ("model.alpha", "1.2", "alpha"),
        ("model.c", "0", "c"),
        ("model.d_coef", "-1", "d_coef"),
    ] {
        let run = Run::new(repo_config("default.json"));
        let o = run.sfhd(&["verify", &format!("--{field}"), value]);
        assert_eq!(code(&o), 64, "{field} = {value}");
        assert!(stderr(&o).contains(needle), "{field}: {}", stderr(&o));
        assert!(!String::from_utf8_lossy(&o.stdout).contains("PASS"));
    }
    let mut cfg = repo_config("default.json");
    cfg["measure"] = json!({"matern": {"sigma2": 0.0, "a": 1.0, "nu": 2.0}});
    let run = Run::new(cfg);
    let o = run.sfhd(&["spectrum"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("sigma2"), "{}", stderr(&o));
}

#[test]
fn malformed_configs_are_usage_errors() {
    let mut cfg = repo_config("default.json");
    cfg["model"]["gamma"] = json!(1.0);
    let run = Run::new(cfg);
    assert_eq!(code(&run.sfhd(&["spectrum"])), 64);

    let mut cfg = repo_config("default.json");
    cfg["measure"] = json!({"discrete": {"mu": [1.0], "weight": [1.0]}, "matern": {"sigma2": 1.0, "a": 1.0, "nu": 2.0}});
    let run = Run::new(cfg);
    assert_eq!(code(&run.sfhd(&["spectrum"])), 64);

    let run = Run::new(repo_config("default.json"));
    assert_eq!(code(&run.sfhd(&["kernel", "--mu", "1"])), 64);
    assert_eq!(code(&run.sfhd(&["spectrum", "--model.alpha"])), 64);
    assert_eq!(
        code(&run.sfhd_env(&["spectrum"], &[("SFHD_THREADS", "0")])),
        64
    );
}

#[test]
fn unwritable_output_dir_is_rejected() {
    let run = Run::new(repo_config("default.json"));
    let blocker = run.dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let mut cfg = repo_config("default.json");
    cfg["output_dir"] = json!(blocker.join("out"));
    fs::write(&run.config, cfg.to_string()).unwrap();
    let o = run.sfhd(&["spectrum"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("creating"), "{}", stderr(&o));
}

#[test]
fn repository_configs_load() {
    for name in ["default.json", "matern.json", "two_band.json"] {
        let run = Run::new(repo_config(name));
        let o = run.sfhd(&["kernel", "--mu", "1", "--t", "0.1"]);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
    }
}
