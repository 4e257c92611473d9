//! Special functions: log-gamma, Mittag-Leffler and Prabhakar functions,
//! spherical Bessel functions, Legendre polynomials and spherical harmonics.

mod bessel;
mod legendre;
pub(crate) mod mp;

pub use bessel::{spherical_bessel, spherical_bessel_seq};
pub use legendre::{legendre_p, legendre_p_seq, spherical_harmonic, NormalizedLegendre};

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Maximum number of terms summed by the Mittag-Leffler family before the
/// argument is reported as out of range.
pub const SERIES_TERM_CAP: usize = 10_000;

/// Relative size of the last accepted term.
const SERIES_REL_TOL: f64 = 1e-16;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "log_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(libm::lgamma(x))
}

/// Arguments of the three-parameter (Prabhakar) Mittag-Leffler function
/// `E^zeta_{a,b}(z) = sum_k (zeta)_k z^k / (k! Γ(a k + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrabhakarArgs {
    pub a: f64,
    pub b: f64,
    pub zeta: f64,
    pub z: f64,
}

impl PrabhakarArgs {
    pub fn new(a: f64, b: f64, zeta: f64, z: f64) -> Result<Self> {
        let args = PrabhakarArgs { a, b, zeta, z };
        args.validate()?;
        Ok(args)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("zeta", self.zeta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.z.is_finite() {
            return Err(invalid("z", "must be finite"));
        }
        Ok(())
    }
}

/// Number of terms and largest log-magnitude of a series whose `k`-th term
/// has log-magnitude `log_term(k)`, found by a cheap f64 pass. Stops once
/// terms decrease and sit 40 orders below the peak.
fn plan_series(mut log_term: impl FnMut(usize) -> f64) -> Result<f64> {
    let mut peak = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for k in 0..SERIES_TERM_CAP {
        let lt = log_term(k);
        peak = peak.max(lt);
        if lt < prev && lt < peak - 40.0 * std::f64::consts::LN_10 {
            return Ok(peak);
        }
        prev = lt;
    }
    Err(Error::NonConvergence {
        terms: SERIES_TERM_CAP,
    })
}

/// Three-parameter Mittag-Leffler (Prabhakar) function.
pub fn prabhakar_ml(args: &PrabhakarArgs) -> Result<f64> {
    args.validate()?;
    let PrabhakarArgs { a, b, zeta, z } = *args;
    if z == 0.0 {
        return Ok((-log_gamma(b)?).exp());
    }

    let ln_abs_z = z.abs().ln();
    let peak = plan_series(|k| {
        let kf = k as f64;
        libm::lgamma(zeta + kf)
            - libm::lgamma(zeta)
            - libm::lgamma(kf + 1.0)
            - libm::lgamma(a * kf + b)
            + kf * ln_abs_z
    })?;

    let prec = mp::precision_for(peak);
    let a_mp = mp::float(prec, a);
    let b_mp = mp::float(prec, b);
    let zeta_mp = mp::float(prec, zeta);
    let ln_z = mp::float(prec, z.abs()).ln();
    let tol = mp::float(prec, SERIES_REL_TOL);

    // ln((zeta)_k / k!) accumulated incrementally
    let mut ln_poch_over_fact = Float::new(prec);
    let mut sum = Float::new(prec);
    let mut prev_mag = Float::with_val(prec, rug::float::Special::Infinity);
    for k in 0..SERIES_TERM_CAP {
        if k > 0 {
            let ratio = Float::with_val(prec, &zeta_mp + (k - 1) as f64) / k as f64;
            ln_poch_over_fact += ratio.ln();
        }
        let arg = Float::with_val(prec, &a_mp * k as f64) + &b_mp;
        let mut lt = Float::with_val(prec, &ln_z * k as f64);
        lt += &ln_poch_over_fact;
        lt -= mp::ln_gamma(&arg);
        let mag = lt.exp();
        if z < 0.0 && k % 2 == 1 {
            sum -= &mag;
        } else {
            sum += &mag;
        }
        let decreasing = mag < prev_mag;
        if k > 0 && decreasing && mag < Float::with_val(prec, &tol * sum.clone().abs()) {
            return Ok(sum.to_f64());
        }
        prev_mag = mag;
    }
    Err(Error::NonConvergence {
        terms: SERIES_TERM_CAP,
    })
}

/// One-parameter Mittag-Leffler function `E_alpha(z)` for complex `z`.
pub fn mittag_leffler(alpha: f64, z: Complex64) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("z", "must be finite"));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }

    let ln_abs_z = z.norm().ln();
    let peak = plan_series(|k| {
        let kf = k as f64;
        kf * ln_abs_z - libm::lgamma(alpha * kf + 1.0)
    })?;

    let prec = mp::precision_for(peak);
    let alpha_mp = mp::float(prec, alpha);
    let re_z = mp::float(prec, z.re);
    let im_z = mp::float(prec, z.im);
    let ln_abs = Float::with_val(prec, re_z.clone().hypot(&im_z)).ln();
    let phase = Float::with_val(prec, im_z.atan2(&re_z));
    let tol = mp::float(prec, SERIES_REL_TOL);

    let mut sum_re = Float::new(prec);
    let mut sum_im = Float::new(prec);
    let mut prev_mag = Float::with_val(prec, rug::float::Special::Infinity);
    for k in 0..SERIES_TERM_CAP {
        let arg = Float::with_val(prec, &alpha_mp * k as f64) + 1u32;
        let lt = Float::with_val(prec, &ln_abs * k as f64) - mp::ln_gamma(&arg);
        let mag = lt.exp();
        let (s, c) = Float::with_val(prec, &phase * k as f64).sin_cos(Float::new(prec));
        sum_re += Float::with_val(prec, &mag * &c);
        sum_im += Float::with_val(prec, &mag * &s);
        let decreasing = mag < prev_mag;
        if k > 0 && decreasing {
            let sum_abs = Float::with_val(prec, sum_re.clone().hypot(&sum_im));
            if mag < Float::with_val(prec, &tol * &sum_abs) {
                let im = if z.im == 0.0 { 0.0 } else { sum_im.to_f64() };
                return Ok(Complex64::new(sum_re.to_f64(), im));
            }
        }
        prev_mag = mag;
    }
    Err(Error::NonConvergence {
        terms: SERIES_TERM_CAP,
    })
}
