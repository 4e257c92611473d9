//! Seeded Gaussian realisations on the sphere: random measure atoms
//! `Z_lm(μ_i)`, Laplace-series coefficients `a_lm(t)` and synthesis on an
//! equal-angle grid.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{KernelConfig, ModelParams};
use crate::specfun::{spherical_bessel_seq, NormalizedLegendre};
use crate::spectra::DiscreteMeasure;

/// Largest supported degree.
pub const MAX_L: usize = 200;

const SYMMETRY_TOL: f64 = 1e-12;
const IMAG_RESIDUAL_TOL: f64 = 1e-10;

fn default_l_max() -> usize {
    100
}

fn default_n_theta() -> usize {
    128
}

fn default_n_phi() -> usize {
    256
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

/// Simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_n_theta")]
    pub grid_n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub grid_n_phi: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            l_max: default_l_max(),
            seed: 0,
            times: default_times(),
            grid_n_theta: default_n_theta(),
            grid_n_phi: default_n_phi(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_max > MAX_L {
            return Err(invalid(
                "l_max",
                format!("must be <= {MAX_L}, got {}", self.l_max),
            ));
        }
        if self.grid_n_theta < 2 {
            return Err(invalid("grid_n_theta", "must be >= 2"));
        }
        if self.grid_n_phi < 4 {
            return Err(invalid("grid_n_phi", "must be >= 4"));
        }
        for &t in &self.times {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(
                    "times",
                    format!("must be finite and >= 0, got {t}"),
                ));
            }
        }
        Ok(())
    }
}

/// Coefficients `a_lm` for `0 <= l <= l_max`, `-l <= m <= l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    pub t: f64,
    pub l_max: usize,
    coeffs: Vec<Complex64>,
}

#[inline]
fn idx(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

impl HarmonicCoefficients {
    pub fn zeros(l_max: usize, t: f64) -> Self {
        HarmonicCoefficients {
            t,
            l_max,
            coeffs: vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)],
        }
    }

    /// Builds coefficients from their `m >= 0` part, taking `a_l0` real and
    /// filling `m < 0` by `a_{l,-m} = (-1)^m conj(a_lm)`.
    pub fn from_nonnegative(
        l_max: usize,
        t: f64,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut c = Self::zeros(l_max, t);
        for l in 0..=l_max {
            for m in 0..=l {
                let mut v = f(l, m);
                if m == 0 {
                    v.im = 0.0;
                }
                c.set_symmetric(l, m, v);
            }
        }
        c
    }

    fn set_symmetric(&mut self, l: usize, m: usize, v: Complex64) {
        self.coeffs[idx(l, m as i64)] = v;
        if m > 0 {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            self.coeffs[idx(l, -(m as i64))] = sign * v.conj();
        }
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[idx(l, m)]
    }

    /// Sets a single coefficient without touching its partner.
    pub fn set(&mut self, l: usize, m: i64, v: Complex64) -> Result<()> {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return Err(Error::Index { l, m });
        }
        self.coeffs[idx(l, m)] = v;
        Ok(())
    }

    /// Largest deviation from conjugate symmetry, with its location.
    pub fn symmetry_deviation(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for l in 0..=self.l_max {
            let d0 = self.get(l, 0).im.abs();
            if d0 > worst.0 {
                worst = (d0, l, 0);
            }
            for m in 1..=l {
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                let d = (self.get(l, -(m as i64)) - sign * self.get(l, m as i64).conj()).norm();
                if d > worst.0 {
                    worst = (d, l, m);
                }
            }
        }
        worst
    }

    pub fn check_symmetry(&self) -> Result<()> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let (d, l, m) = self.symmetry_deviation();
        if d > SYMMETRY_TOL * scale {
            return Err(Error::SymmetryViolation { l, m, deviation: d });
        }
        Ok(())
    }

    /// CSV `l,m,re,im` for `m >= 0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,m,re,im\n");
        for l in 0..=self.l_max {
            for m in 0..=l {
                let c = self.get(l, m as i64);
                let _ = writeln!(s, "{l},{m},{},{}", c.re, c.im);
            }
        }
        s
    }
}

/// Equal-angle grid `θ_j = (j + 1/2)π/n_θ`, `φ_k = 2πk/n_φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row per colatitude.
    pub values: Vec<Vec<f64>>,
}

impl SphereGrid {
    pub fn sample_variance(&self) -> f64 {
        let n = (self.thetas.len() * self.phis.len()) as f64;
        let mean = self.values.iter().flatten().sum::<f64>() / n;
        self.values
            .iter()
            .flatten()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    }

    /// CSV `theta_rad,phi_rad,value`, row-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta_rad,phi_rad,value\n");
        for (th, row) in self.thetas.iter().zip(&self.values) {
            for (ph, v) in self.phis.iter().zip(row) {
                let _ = writeln!(s, "{th},{ph},{v}");
            }
        }
        s
    }
}

pub fn grid_thetas(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

pub fn grid_phis(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Fejér first-rule weights for `∫_0^π f(θ) sin θ dθ` at the grid
/// colatitudes.
pub fn fejer_weights(n: usize) -> Vec<f64> {
    grid_thetas(n)
        .into_iter()
        .map(|th| {
            let s: f64 = (1..=n / 2)
                .map(|k| (2.0 * k as f64 * th).cos() / (4.0 * (k * k) as f64 - 1.0))
                .sum();
            2.0 / n as f64 * (1.0 - 2.0 * s)
        })
        .collect()
}

/// `e^{2πi j/n}` for `j = 0..n`.
fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Generator for the variates attached to `(l, m, i)`.
fn stream(base: &ChaCha20Rng, l: usize, m: usize, i: usize) -> ChaCha20Rng {
    let mut rng = base.clone();
    rng.set_stream(((l as u64) << 56) | ((m as u64) << 48) | i as u64);
    rng
}

/// Coefficients of one realisation from kernel values `h[i] = H(μ_i, t)`.
///
/// The variates depend only on `(seed, l, m, i)`, so calls at different
/// times with the same seed describe one coherent realisation.
pub fn coefficients_from_kernel(
    measure: &DiscreteMeasure,
    h: &[f64],
    l_max: usize,
    seed: u64,
    t: f64,
) -> Result<HarmonicCoefficients> {
    if l_max > MAX_L {
        return Err(invalid("l_max", format!("must be <= {MAX_L}, got {l_max}")));
    }
    if h.len() != measure.len() {
        return Err(invalid("h", "one kernel value per atom required"));
    }
    if measure.len() >= 1 << 48 {
        return Err(invalid("measure", "too many atoms"));
    }
    let base = ChaCha20Rng::seed_from_u64(seed);
    // 2√π j_l(μ_i) H(μ_i, t) σ_i for every l, i
    let jl: Vec<Vec<f64>> = measure
        .mu()
        .iter()
        .map(|&mu| spherical_bessel_seq(l_max, mu))
        .collect();
    let amp: Vec<f64> = measure
        .sigma2()
        .iter()
        .zip(h)
        .map(|(s2, h)| 2.0 * PI.sqrt() * h * s2.sqrt())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            (0..=l)
                .map(|m| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..measure.len() {
                        let w = amp[i] * jl[i][l];
                        let mut rng = stream(&base, l, m, i);
                        let z = if m == 0 {
                            Complex64::new(rng.sample(StandardNormal), 0.0)
                        } else {
                            let re: f64 = rng.sample(StandardNormal);
                            let im: f64 = rng.sample(StandardNormal);
                            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                        };
                        acc += w * z;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(HarmonicCoefficients::from_nonnegative(l_max, t, |l, m| {
        rows[l][m]
    }))
}

/// Draws `a_lm(t) = π√2 Σ_i J_{l+1/2}(μ_i)/√μ_i H(μ_i,t) Z_lm(μ_i)`.
pub fn sample_coefficients(
    measure: &DiscreteMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    sim: &SimulationConfig,
    t: f64,
) -> Result<HarmonicCoefficients> {
    sim.validate()?;
    let h = measure.kernel_values(params, cfg, t)?;
    coefficients_from_kernel(measure, &h, sim.l_max, sim.seed, t)
}

/// Real field `Σ_l Σ_m a_lm Y_lm` on the simulation grid.
pub fn synthesize(coeffs: &HarmonicCoefficients, sim: &SimulationConfig) -> Result<SphereGrid> {
    sim.validate()?;
    coeffs.check_symmetry()?;
    let l_max = coeffs.l_max;
    let thetas = grid_thetas(sim.grid_n_theta);
    let phis = grid_phis(sim.grid_n_phi);
    let n_phi = sim.grid_n_phi;
    let roots = roots_of_unity(n_phi);
    let rows: Vec<(Vec<f64>, f64)> = thetas
        .par_iter()
        .map(|&th| {
            let lam = NormalizedLegendre::new(l_max, th);
            // F⁺_m = (-1)^m Σ_l a_lm λ_lm, F⁻_m = Σ_l a_{l,-m} λ_lm
            let mut fp = vec![Complex64::new(0.0, 0.0); l_max + 1];
            let mut fm = vec![Complex64::new(0.0, 0.0); l_max + 1];
            for m in 0..=l_max {
                let cs = if m % 2 == 0 { 1.0 } else { -1.0 };
                for l in m..=l_max {
                    let p = lam.get(l, m);
                    fp[m] += cs * p * coeffs.get(l, m as i64);
                    if m > 0 {
                        fm[m] += p * coeffs.get(l, -(m as i64));
                    }
                }
            }
            let mut max_im: f64 = 0.0;
            let row = (0..n_phi)
                .map(|k| {
                    let mut v = fp[0];
                    for m in 1..=l_max {
                        let e = roots[(m * k) % n_phi];
                        v += fp[m] * e + fm[m] * e.conj();
                    }
                    max_im = max_im.max(v.im.abs());
                    v.re
                })
                .collect();
            (row, max_im)
        })
        .collect();
    let max_re = rows
        .iter()
        .flat_map(|(r, _)| r.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let max_im = rows.iter().fold(0.0f64, |a, (_, i)| a.max(*i));
    if max_im > IMAG_RESIDUAL_TOL * max_re {
        return Err(Error::Domain(format!(
            "synthesised field has imaginary residual {max_im:e} against {max_re:e}"
        )));
    }
    Ok(SphereGrid {
        thetas,
        phis,
        values: rows.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Recovers `a_lm`, `l <= l_max`, from grid values by Fejér quadrature in
/// colatitude and the trapezoidal rule in longitude.
pub fn analyze(grid: &SphereGrid, l_max: usize) -> Result<HarmonicCoefficients> {
    let n_theta = grid.thetas.len();
    let n_phi = grid.phis.len();
    if n_phi <= 2 * l_max {
        return Err(invalid(
            "grid_n_phi",
            format!("must exceed 2 l_max = {}", 2 * l_max),
        ));
    }
    let weights = fejer_weights(n_theta);
    let roots = roots_of_unity(n_phi);
    let dphi = 2.0 * PI / n_phi as f64;
    // G_m(θ_j) = Σ_k T_jk e^{-imφ_k} Δφ
    let partial: Vec<Vec<Complex64>> = grid
        .thetas
        .par_iter()
        .enumerate()
        .map(|(j, &th)| {
            let lam = NormalizedLegendre::new(l_max, th);
            let g: Vec<Complex64> = (0..=l_max)
                .map(|m| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (k, v) in grid.values[j].iter().enumerate() {
                        s += v * roots[(m * k) % n_phi].conj();
                    }
                    s * dphi
                })
                .collect();
            let mut out = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 2) / 2];
            for m in 0..=l_max {
                let cs = if m % 2 == 0 { 1.0 } else { -1.0 };
                for l in m..=l_max {
                    out[l * (l + 1) / 2 + m] = weights[j] * cs * lam.get(l, m) * g[m];
                }
            }
            out
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 2) / 2];
    for row in &partial {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(HarmonicCoefficients::from_nonnegative(
        l_max,
        f64::NAN,
        |l, m| acc[l * (l + 1) / 2 + m],
    ))
}

/// One time slice of a simulated realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub coeffs: HarmonicCoefficients,
    pub grid: SphereGrid,
}

/// Grids of one realisation at every `sim.times`, sharing the variates.
pub fn simulate_evolution(
    measure: &DiscreteMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    sim: &SimulationConfig,
) -> Result<Vec<Snapshot>> {
    sim.validate()?;
    if sim.times.is_empty() {
        return Err(invalid("times", "must be nonempty"));
    }
    sim.times
        .iter()
        .map(|&t| {
            let coeffs = sample_coefficients(measure, params, cfg, sim, t)?;
            let grid = synthesize(&coeffs, sim)?;
            Ok(Snapshot { t, coeffs, grid })
        })
        .collect()
}
