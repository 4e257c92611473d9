//! Spectral measures of the initial-condition field and the angular
//! time-dependent power spectrum `C_l(t, t')`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{h_eval, KernelConfig, ModelParams};
use crate::quad::{integrate_to_infinity, Integral, Octaves};
use crate::specfun::{log_gamma, spherical_bessel_seq};

/// How the weights of a discrete measure are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConvention {
    /// Weights are the atom masses `σ_i²`.
    #[default]
    Variance,
    /// Weights are `σ_i`; masses are their squares.
    StdDev,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteMeasureRepr {
    mu: Vec<f64>,
    weight: Vec<f64>,
    #[serde(default)]
    weight_is: WeightConvention,
}

/// Spectral measure with finitely many atoms `(μ_i, σ_i²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteMeasureRepr", into = "DiscreteMeasureRepr")]
pub struct DiscreteMeasure {
    mu: Vec<f64>,
    sigma2: Vec<f64>,
}

impl TryFrom<DiscreteMeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(r: DiscreteMeasureRepr) -> Result<Self> {
        DiscreteMeasure::from_weights(r.mu, r.weight, r.weight_is)
    }
}

impl From<DiscreteMeasure> for DiscreteMeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        DiscreteMeasureRepr {
            mu: m.mu,
            weight: m.sigma2,
            weight_is: WeightConvention::Variance,
        }
    }
}

impl DiscreteMeasure {
    /// Measure with atoms at `mu` carrying masses `sigma2`.
    pub fn new(mu: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        Self::from_weights(mu, sigma2, WeightConvention::Variance)
    }

    pub fn from_weights(
        mu: Vec<f64>,
        weight: Vec<f64>,
        convention: WeightConvention,
    ) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("mu", "measure needs at least one atom"));
        }
        if mu.len() != weight.len() {
            return Err(invalid(
                "weight",
                format!("{} weights for {} atoms", weight.len(), mu.len()),
            ));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(invalid(
                    "mu",
                    format!("atom {i} must be finite and > 0, got {m}"),
                ));
            }
            if i > 0 && m <= mu[i - 1] {
                return Err(invalid("mu", "atoms must be strictly increasing"));
            }
        }
        let sigma2: Vec<f64> = match convention {
            WeightConvention::Variance => weight,
            WeightConvention::StdDev => weight.iter().map(|s| s * s).collect(),
        };
        for (i, &s) in sigma2.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(invalid(
                    "weight",
                    format!("atom {i} mass must be finite and > 0, got {s}"),
                ));
            }
        }
        Ok(DiscreteMeasure { mu, sigma2 })
    }

    /// Ten atoms `μ_i = 1 + 4(i-1)` with weights `100/i`, `i = 1..10`.
    pub fn ten_atom(convention: WeightConvention) -> Self {
        let mu = (1..=10).map(|i| 1.0 + 4.0 * (i - 1) as f64).collect();
        let w = (1..=10).map(|i| 100.0 / i as f64).collect();
        Self::from_weights(mu, w, convention).expect("valid preset")
    }

    /// Low band `μ = 1..20` with `σ² = 3e-5` and high band `μ = 80..90`
    /// with `σ² = 1e-4`, unit spacing.
    pub fn two_band() -> Self {
        let mut mu = Vec::new();
        let mut s2 = Vec::new();
        for m in 1..=20 {
            mu.push(m as f64);
            s2.push(3e-5);
        }
        for m in 80..=90 {
            mu.push(m as f64);
            s2.push(1e-4);
        }
        Self::new(mu, s2).expect("valid preset")
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mu.iter().copied().zip(self.sigma2.iter().copied())
    }

    pub fn total_variance(&self) -> f64 {
        self.sigma2.iter().sum()
    }

    /// `H(μ_i, t)` for every atom.
    pub fn kernel_values(
        &self,
        params: &ModelParams,
        cfg: &KernelConfig,
        t: f64,
    ) -> Result<Vec<f64>> {
        self.mu.iter().map(|&m| h_eval(params, cfg, m, t)).collect()
    }
}

/// Matérn spectral density
/// `g(μ) = σ² Γ(ν+3/2) a^{2ν} / (π^{3/2} Γ(ν)) (a² + μ²)^{-(ν+3/2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaternSpectrum {
    pub sigma2: f64,
    pub a: f64,
    pub nu: f64,
}

impl MaternSpectrum {
    pub fn new(sigma2: f64, a: f64, nu: f64) -> Result<Self> {
        let s = MaternSpectrum { sigma2, a, nu };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma2", self.sigma2), ("a", self.a), ("nu", self.nu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Matérn density `g(μ)`; the measure has density `4πμ² g(μ)`.
pub fn matern_density(spec: &MaternSpectrum, mu: f64) -> Result<f64> {
    spec.validate()?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("must be finite and >= 0, got {mu}")));
    }
    let MaternSpectrum { sigma2, a, nu } = *spec;
    let ln = log_gamma(nu + 1.5)? - log_gamma(nu)? + 2.0 * nu * a.ln()
        - 1.5 * PI.ln()
        - (nu + 1.5) * (a * a + mu * mu).ln();
    Ok(sigma2 * ln.exp())
}

/// Midpoint discretisation of a Matérn measure on `[0, mu_cut]` with masses
/// `4πμ_i² g(μ_i) Δμ`.
pub fn discretize(spec: &MaternSpectrum, n_atoms: usize, mu_cut: f64) -> Result<DiscreteMeasure> {
    if n_atoms == 0 {
        return Err(invalid("n_atoms", "must be >= 1"));
    }
    if !(mu_cut > 0.0 && mu_cut.is_finite()) {
        return Err(invalid("mu_cut", "must be finite and > 0"));
    }
    let dmu = mu_cut / n_atoms as f64;
    let mut mu = Vec::with_capacity(n_atoms);
    let mut s2 = Vec::with_capacity(n_atoms);
    for i in 0..n_atoms {
        let m = (i as f64 + 0.5) * dmu;
        mu.push(m);
        s2.push(4.0 * PI * m * m * matern_density(spec, m)? * dmu);
    }
    DiscreteMeasure::new(mu, s2)
}

/// Either kind of spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMeasure {
    Discrete(DiscreteMeasure),
    Matern(MaternSpectrum),
}

impl SpectralMeasure {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralMeasure::Discrete(_) => Ok(()),
            SpectralMeasure::Matern(m) => m.validate(),
        }
    }
}

/// Result of checking `∫ μ² |H(μ,t)|² G(dμ) < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinitenessCheck {
    pub finite_estimate: f64,
    /// Contribution of the last octave relative to the total (zero for
    /// discrete measures).
    pub tail_bound_ratio: f64,
    /// Upper limit of integration, or the largest atom.
    pub mu_cut: f64,
}

const TAIL_TOL: f64 = 1e-8;
const REFINE_TOL: f64 = 1e-7;

fn check_refinement(r: &Integral, what: &str) -> Result<()> {
    for (i, (&e, &a)) in r.err.iter().zip(&r.abs).enumerate() {
        if e > REFINE_TOL * a {
            return Err(Error::QuadratureFailure(format!(
                "{what}: component {i} refinements differ by {:.3e} relative",
                e / a
            )));
        }
    }
    Ok(())
}

/// Finiteness diagnostic for the second moment of the solution field.
pub fn check_finiteness(
    measure: &SpectralMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    t: f64,
) -> Result<FinitenessCheck> {
    match measure {
        SpectralMeasure::Discrete(m) => {
            let h = m.kernel_values(params, cfg, t)?;
            let sum = m
                .atoms()
                .zip(&h)
                .map(|((mu, s2), h)| mu * mu * h * h * s2)
                .sum();
            Ok(FinitenessCheck {
                finite_estimate: sum,
                tail_bound_ratio: 0.0,
                mu_cut: *m.mu().last().unwrap(),
            })
        }
        SpectralMeasure::Matern(spec) => {
            spec.validate()?;
            let f = |mu: f64| -> Result<Vec<f64>> {
                let h = h_eval(params, cfg, mu, t)?;
                Ok(vec![
                    mu * mu * h * h * 4.0 * PI * mu * mu * matern_density(spec, mu)?,
                ])
            };
            let max_panel = if t > 0.0 {
                PI / (params.c * t)
            } else {
                f64::INFINITY
            };
            let oct = Octaves {
                first: spec.a.min(1.0),
                max_panel,
                min_upper: 4.0 * spec.a.max(1.0),
                tail_tol: TAIL_TOL,
                max_octaves: 48,
            };
            let r = integrate_to_infinity(&f, 1, &oct)?;
            check_refinement(&r, "condition integral")?;
            Ok(FinitenessCheck {
                finite_estimate: r.value[0],
                tail_bound_ratio: r.tail_ratio,
                mu_cut: r.upper,
            })
        }
    }
}

/// `C_l(t, t')` for `l = 0..=l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub l_max: usize,
    pub values: Vec<f64>,
    pub t: f64,
    pub t_prime: f64,
}

impl AngularSpectrum {
    pub fn get(&self, l: usize) -> f64 {
        self.values[l]
    }

    /// Partial sums `Σ_{l<=L} (2l+1) C_l` for `L = 0..=l_max`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.values
            .iter()
            .enumerate()
            .map(|(l, c)| {
                acc += (2 * l + 1) as f64 * c;
                acc
            })
            .collect()
    }

    /// CSV with header `l,C_l`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,C_l\n");
        for (l, c) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{l},{c}");
        }
        s
    }
}

fn check_times(t: f64, t_prime: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if !(t_prime >= 0.0 && t_prime.is_finite()) {
        return Err(invalid(
            "t_prime",
            format!("must be finite and >= 0, got {t_prime}"),
        ));
    }
    Ok(())
}

/// `C_l(t,t') = 2π² Σ_i J²_{l+1/2}(μ_i)/μ_i H(μ_i,t) H(μ_i,t') σ_i²`,
/// computed as `4π Σ_i j_l(μ_i)² H H' σ_i²`.
pub fn angular_spectrum_discrete(
    measure: &DiscreteMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    l_max: usize,
    t: f64,
    t_prime: f64,
) -> Result<AngularSpectrum> {
    check_times(t, t_prime)?;
    let h = measure.kernel_values(params, cfg, t)?;
    let hp = if t_prime == t {
        h.clone()
    } else {
        measure.kernel_values(params, cfg, t_prime)?
    };
    Ok(spectrum_from_kernel(measure, &h, &hp, l_max, t, t_prime))
}

/// Spectrum of a discrete measure given precomputed kernel values at its
/// atoms.
pub fn spectrum_from_kernel(
    measure: &DiscreteMeasure,
    h: &[f64],
    h_prime: &[f64],
    l_max: usize,
    t: f64,
    t_prime: f64,
) -> AngularSpectrum {
    let mut values = vec![0.0; l_max + 1];
    for (i, (mu, s2)) in measure.atoms().enumerate() {
        // H H' first so that swapping t and t' is exact
        let w = 4.0 * PI * (h[i] * h_prime[i]) * s2;
        for (l, j) in spherical_bessel_seq(l_max, mu).into_iter().enumerate() {
            values[l] += j * j * w;
        }
    }
    AngularSpectrum {
        l_max,
        values,
        t,
        t_prime,
    }
}

/// `C_l(t,t') = 2π² ∫ J²_{l+1/2}(μ)/μ H(μ,t) H(μ,t') 4πμ² g(μ) dμ` by
/// panelled Gauss-Legendre quadrature; panels are at most π/2 wide.
pub fn angular_spectrum_matern(
    spec: &MaternSpectrum,
    params: &ModelParams,
    cfg: &KernelConfig,
    l_max: usize,
    t: f64,
    t_prime: f64,
) -> Result<AngularSpectrum> {
    spec.validate()?;
    check_times(t, t_prime)?;
    let f = |mu: f64| -> Result<Vec<f64>> {
        let h = h_eval(params, cfg, mu, t)?;
        let hp = if t_prime == t {
            h
        } else {
            h_eval(params, cfg, mu, t_prime)?
        };
        let w = 16.0 * PI * PI * mu * mu * matern_density(spec, mu)? * (h * hp);
        Ok(spherical_bessel_seq(l_max, mu)
            .into_iter()
            .map(|j| j * j * w)
            .collect())
    };
    let oct = Octaves {
        first: 2.0,
        max_panel: PI / 2.0,
        min_upper: (4.0 * spec.a).max(1.5 * l_max as f64 + 20.0),
        tail_tol: TAIL_TOL,
        max_octaves: 24,
    };
    let r = integrate_to_infinity(&f, l_max + 1, &oct)?;
    check_refinement(&r, "angular spectrum")?;
    Ok(AngularSpectrum {
        l_max,
        values: r.value,
        t,
        t_prime,
    })
}

/// Dispatches on the measure type.
pub fn angular_spectrum(
    measure: &SpectralMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    l_max: usize,
    t: f64,
    t_prime: f64,
) -> Result<AngularSpectrum> {
    match measure {
        SpectralMeasure::Discrete(m) => {
            angular_spectrum_discrete(m, params, cfg, l_max, t, t_prime)
        }
        SpectralMeasure::Matern(s) => angular_spectrum_matern(s, params, cfg, l_max, t, t_prime),
    }
}
