use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => *legendre_p_seq(l, x).last().unwrap(),
    }
}

/// `P_0(x), ..., P_{l_max}(x)`. `P_l(1) == 1` holds exactly.
pub fn legendre_p_seq(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max == 0 {
        return out;
    }
    out.push(x);
    for l in 1..l_max {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * out[l] - lf * out[l - 1]) / (lf + 1.0);
        out.push(next);
    }
    out
}

/// Orthonormal associated Legendre functions
/// `sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(cos θ)` without the Condon-Shortley
/// phase, for `0 <= m <= l <= l_max`, at a single colatitude.
#[derive(Debug, Clone)]
pub struct NormalizedLegendre {
    l_max: usize,
    values: Vec<f64>,
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl NormalizedLegendre {
    pub fn new(l_max: usize, theta: f64) -> Self {
        let (sin_t, cos_t) = theta.sin_cos();
        let mut values = vec![0.0; tri(l_max, l_max) + 1];
        let mut diag = (0.25 / PI).sqrt();
        for m in 0..=l_max {
            if m > 0 {
                let mf = m as f64;
                diag *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
            }
            values[tri(m, m)] = diag;
            if m == l_max {
                break;
            }
            let mut p2 = diag;
            let mut p1 = (2.0 * m as f64 + 3.0).sqrt() * cos_t * diag;
            values[tri(m + 1, m)] = p1;
            for l in (m + 2)..=l_max {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                let p = a * (cos_t * p1 - b * p2);
                values[tri(l, m)] = p;
                p2 = p1;
                p1 = p;
            }
        }
        NormalizedLegendre { l_max, values }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Value for `0 <= m <= l <= l_max`.
    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[tri(l, m)]
    }
}

/// Complex spherical harmonic
/// `Y_lm(θ, φ) = (-1)^m sqrt((2l+1)(l-m)!/(4π(l+m)!)) e^{imφ} P_l^m(cos θ)`,
/// extended to negative `m` by `Y_{l,-m} = (-1)^m conj(Y_lm)`.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::Index { l, m });
    }
    let p = NormalizedLegendre::new(l, theta).get(l, am);
    let cs = if am % 2 == 1 { -1.0 } else { 1.0 };
    let y = Complex64::from_polar(cs * p, am as f64 * phi);
    Ok(if m < 0 { cs * y.conj() } else { y })
}
