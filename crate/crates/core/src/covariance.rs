//! Space-time covariance `R(cos γ, t, t')` of the field restricted to the
//! unit sphere.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{h_eval, KernelConfig, ModelParams};
use crate::quad::{integrate_to_infinity, Octaves};
use crate::specfun::legendre_p_seq;
use crate::spectra::{
    angular_spectrum, matern_density, AngularSpectrum, DiscreteMeasure, MaternSpectrum,
    SpectralMeasure,
};

/// Angular distance and the two times of a covariance evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRequest {
    pub gamma: f64,
    pub t: f64,
    pub t_prime: f64,
}

impl CovarianceRequest {
    pub fn new(gamma: f64, t: f64, t_prime: f64) -> Result<Self> {
        let r = CovarianceRequest { gamma, t, t_prime };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.gamma) {
            return Err(invalid(
                "gamma",
                format!("must lie in [0, π], got {}", self.gamma),
            ));
        }
        for (name, v) in [("t", self.t), ("t_prime", self.t_prime)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `sin(2μ sin(γ/2)) / (2μ sin(γ/2))`, equal to 1 at `γ = 0`.
pub fn sinc_factor(mu: f64, gamma: f64) -> f64 {
    let x = 2.0 * mu * (0.5 * gamma).sin();
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Discrete-measure covariance from kernel values at the atoms.
pub fn covariance_from_kernel(
    measure: &DiscreteMeasure,
    h: &[f64],
    h_prime: &[f64],
    gamma: f64,
) -> f64 {
    measure
        .atoms()
        .enumerate()
        .map(|(i, (mu, s2))| sinc_factor(mu, gamma) * (h[i] * h_prime[i]) * s2)
        .sum()
}

fn covariance_matern(
    spec: &MaternSpectrum,
    params: &ModelParams,
    cfg: &KernelConfig,
    req: &CovarianceRequest,
) -> Result<f64> {
    let f = |mu: f64| -> Result<Vec<f64>> {
        let h = h_eval(params, cfg, mu, req.t)?;
        let hp = if req.t_prime == req.t {
            h
        } else {
            h_eval(params, cfg, mu, req.t_prime)?
        };
        Ok(vec![
            sinc_factor(mu, req.gamma) * (h * hp) * 4.0 * PI * mu * mu * matern_density(spec, mu)?,
        ])
    };
    let oct = Octaves {
        first: 2.0,
        max_panel: PI / 2.0,
        min_upper: 4.0 * spec.a.max(1.0),
        tail_tol: 1e-8,
        max_octaves: 24,
    };
    let r = integrate_to_infinity(&f, 1, &oct)?;
    if r.err[0] > 1e-7 * r.abs[0] {
        return Err(Error::QuadratureFailure(format!(
            "covariance integral refinements differ by {:.3e} relative",
            r.err[0] / r.abs[0]
        )));
    }
    Ok(r.value[0])
}

/// `R(cos γ, t, t')` by direct summation over the atoms, or by quadrature
/// against `4πμ² g(μ) dμ` for a Matérn measure.
pub fn covariance_direct(
    measure: &SpectralMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    req: &CovarianceRequest,
) -> Result<f64> {
    req.validate()?;
    match measure {
        SpectralMeasure::Discrete(m) => {
            let h = m.kernel_values(params, cfg, req.t)?;
            let hp = if req.t_prime == req.t {
                h.clone()
            } else {
                m.kernel_values(params, cfg, req.t_prime)?
            };
            Ok(covariance_from_kernel(m, &h, &hp, req.gamma))
        }
        SpectralMeasure::Matern(s) => covariance_matern(s, params, cfg, req),
    }
}

/// `R(cos γ) = (1/4π) Σ_l (2l+1) C_l P_l(cos γ)`.
pub fn covariance_from_spectrum(spectrum: &AngularSpectrum, gamma: f64) -> f64 {
    let p = legendre_p_seq(spectrum.l_max, gamma.cos());
    let s: f64 = spectrum
        .values
        .iter()
        .zip(&p)
        .enumerate()
        .map(|(l, (c, p))| (2 * l + 1) as f64 * c * p)
        .sum();
    s / (4.0 * PI)
}

/// `R(cos γ, t, t)` for every angle (rows) and time (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceGrid {
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl CovarianceGrid {
    /// CSV with header `gamma_rad,t,t_prime,R`, one row per entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma_rad,t,t_prime,R\n");
        for (g, row) in self.gammas.iter().zip(&self.values) {
            for (t, r) in self.times.iter().zip(row) {
                let _ = writeln!(s, "{g},{t},{t},{r}");
            }
        }
        s
    }
}

fn check_lists(gammas: &[f64], times: &[f64]) -> Result<()> {
    if gammas.is_empty() {
        return Err(invalid("gammas", "must be nonempty"));
    }
    if times.is_empty() {
        return Err(invalid("times", "must be nonempty"));
    }
    for &g in gammas {
        CovarianceRequest::new(g, 0.0, 0.0)?;
    }
    for &t in times {
        CovarianceRequest::new(0.0, t, t)?;
    }
    Ok(())
}

/// Covariance grid by direct summation; kernel values are computed once
/// per time.
pub fn covariance_grid(
    measure: &SpectralMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    gammas: &[f64],
    times: &[f64],
) -> Result<CovarianceGrid> {
    check_lists(gammas, times)?;
    let columns: Vec<Vec<f64>> = match measure {
        SpectralMeasure::Discrete(m) => times
            .par_iter()
            .map(|&t| {
                let h = m.kernel_values(params, cfg, t)?;
                Ok(gammas
                    .iter()
                    .map(|&g| covariance_from_kernel(m, &h, &h, g))
                    .collect())
            })
            .collect::<Result<_>>()?,
        SpectralMeasure::Matern(_) => times
            .iter()
            .map(|&t| {
                gammas
                    .iter()
                    .map(|&g| {
                        covariance_direct(measure, params, cfg, &CovarianceRequest::new(g, t, t)?)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?,
    };
    Ok(transpose(gammas, times, columns))
}

/// Covariance grid reconstructed from `C_l`, `l <= l_max`.
pub fn covariance_grid_from_spectrum(
    measure: &SpectralMeasure,
    params: &ModelParams,
    cfg: &KernelConfig,
    gammas: &[f64],
    times: &[f64],
    l_max: usize,
) -> Result<CovarianceGrid> {
    check_lists(gammas, times)?;
    let columns: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let spec = angular_spectrum(measure, params, cfg, l_max, t, t)?;
            Ok(gammas
                .iter()
                .map(|&g| covariance_from_spectrum(&spec, g))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(transpose(gammas, times, columns))
}

fn transpose(gammas: &[f64], times: &[f64], columns: Vec<Vec<f64>>) -> CovarianceGrid {
    let values = (0..gammas.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    CovarianceGrid {
        gammas: gammas.to_vec(),
        times: times.to_vec(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{angular_spectrum_discrete, WeightConvention};
    use approx::assert_relative_eq;

    fn classical() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn ten_atom() -> SpectralMeasure {
        SpectralMeasure::Discrete(DiscreteMeasure::ten_atom(WeightConvention::StdDev))
    }

    #[test]
    fn request_validation() {
        assert!(CovarianceRequest::new(-0.1, 0.0, 0.0).is_err());
        assert!(CovarianceRequest::new(3.2, 0.0, 0.0).is_err());
        assert!(CovarianceRequest::new(PI, 0.0, -1.0).is_err());
        assert!(CovarianceRequest::new(PI, 0.0, 1.0).is_ok());
    }

    #[test]
    fn zero_angle_is_variance() {
        let m = DiscreteMeasure::ten_atom(WeightConvention::StdDev);
        let r = covariance_direct(
            &ten_atom(),
            &classical(),
            &KernelConfig::default(),
            &CovarianceRequest::new(0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(r, m.total_variance(), max_relative = 1e-15);
    }

    #[test]
    fn reconstruction_from_trivial_spectra() {
        let c0 = AngularSpectrum {
            l_max: 0,
            values: vec![4.0 * PI],
            t: 0.0,
            t_prime: 0.0,
        };
        assert_relative_eq!(
            covariance_from_spectrum(&c0, 1.234),
            1.0,
            max_relative = 1e-15
        );
        let c1 = AngularSpectrum {
            l_max: 1,
            values: vec![0.0, 4.0 * PI / 3.0],
            t: 0.0,
            t_prime: 0.0,
        };
        assert!(covariance_from_spectrum(&c1, PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_matches_pointwise_calls() {
        let p = ModelParams::new(0.8, 1.0, 1.0, 1.0).unwrap();
        let cfg = KernelConfig::default();
        let g = covariance_grid(&ten_atom(), &p, &cfg, &[0.3, 2.0], &[0.0, 0.1]).unwrap();
        for (i, &gamma) in g.gammas.iter().enumerate() {
            for (j, &t) in g.times.iter().enumerate() {
                let r = covariance_direct(
                    &ten_atom(),
                    &p,
                    &cfg,
                    &CovarianceRequest::new(gamma, t, t).unwrap(),
                )
                .unwrap();
                assert_eq!(g.values[i][j], r);
            }
        }
    }

    #[test]
    fn addition_theorem_at_time_zero() {
        let m = DiscreteMeasure::ten_atom(WeightConvention::StdDev);
        let cfg = KernelConfig::default();
        let spec = angular_spectrum_discrete(&m, &classical(), &cfg, 100, 0.0, 0.0).unwrap();
        for gamma in [0.0, PI / 8.0, PI / 2.0, PI] {
            let direct = covariance_direct(
                &ten_atom(),
                &classical(),
                &cfg,
                &CovarianceRequest::new(gamma, 0.0, 0.0).unwrap(),
            )
            .unwrap();
            let rec = covariance_from_spectrum(&spec, gamma);
            assert!((direct - rec).abs() <= 1e-9 * m.total_variance());
        }
    }

    #[test]
    fn csv_rows() {
        let g = CovarianceGrid {
            gammas: vec![0.0],
            times: vec![0.0, 0.5],
            values: vec![vec![2.0, 1.5]],
        };
        assert_eq!(
            g.to_csv(),
            "gamma_rad,t,t_prime,R\n0,0,0,2\n0,0.5,0.5,1.5\n"
        );
    }
}
