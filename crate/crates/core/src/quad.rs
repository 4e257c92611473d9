//! Composite Gauss-Legendre quadrature of vector-valued integrands on
//! `[0, ∞)`, truncated by octaves.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};

const RULE_POINTS: usize = 16;
const MAX_DEPTH: u32 = 14;
/// Local bisection tolerance relative to the running absolute integral.
const LOCAL_TOL: f64 = 1e-11;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(RULE_POINTS).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

#[derive(Debug, Clone)]
struct Sums {
    value: Vec<f64>,
    abs: Vec<f64>,
    err: Vec<f64>,
}

impl Sums {
    fn zero(dim: usize) -> Self {
        Sums {
            value: vec![0.0; dim],
            abs: vec![0.0; dim],
            err: vec![0.0; dim],
        }
    }

    fn add(&mut self, other: &Sums) {
        for i in 0..self.value.len() {
            self.value[i] += other.value[i];
            self.abs[i] += other.abs[i];
            self.err[i] += other.err[i];
        }
    }
}

fn gauss<F>(f: &F, dim: usize, a: f64, b: f64) -> Result<Sums>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = Sums::zero(dim);
    for &(x, w) in rule() {
        let v = f(mid + half * x)?;
        for ((sv, sa), vi) in s.value.iter_mut().zip(&mut s.abs).zip(&v) {
            *sv += w * half * vi;
            *sa += w * half * vi.abs();
        }
    }
    Ok(s)
}

fn adaptive<F>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    whole: Sums,
    scale: &[f64],
    depth: u32,
) -> Result<Sums>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let mid = 0.5 * (a + b);
    let left = gauss(f, dim, a, mid)?;
    let right = gauss(f, dim, mid, b)?;
    let mut fine = left.clone();
    fine.add(&right);
    let diff: Vec<f64> = (0..dim)
        .map(|i| (fine.value[i] - whole.value[i]).abs())
        .collect();
    let ok = (0..dim).all(|i| diff[i] <= LOCAL_TOL * scale[i] || diff[i] == 0.0);
    if ok || depth == MAX_DEPTH {
        fine.err = diff;
        return Ok(fine);
    }
    let mut out = adaptive(f, dim, a, mid, left, scale, depth + 1)?;
    out.add(&adaptive(f, dim, mid, b, right, scale, depth + 1)?);
    Ok(out)
}

/// Integral estimate with its bookkeeping.
#[derive(Debug, Clone)]
pub(crate) struct Integral {
    pub value: Vec<f64>,
    /// Integral of the absolute integrand.
    pub abs: Vec<f64>,
    /// Accumulated difference between successive refinements.
    pub err: Vec<f64>,
    /// Upper limit at which the integral was truncated.
    pub upper: f64,
    /// Largest relative contribution of the last octave.
    pub tail_ratio: f64,
}

/// Truncation schedule: `[0, first]`, then `[first, 2 first]`, and so on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Octaves {
    pub first: f64,
    /// Widest panel allowed inside an octave.
    pub max_panel: f64,
    /// Never truncate below this point.
    pub min_upper: f64,
    pub tail_tol: f64,
    pub max_octaves: usize,
}

fn segment<F>(f: &F, dim: usize, a: f64, b: f64, max_panel: f64, prior: &[f64]) -> Result<Sums>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let n = ((b - a) / max_panel).ceil().max(4.0) as usize;
    let h = (b - a) / n as f64;
    let edges: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            (
                a + k as f64 * h,
                if k + 1 == n {
                    b
                } else {
                    a + (k + 1) as f64 * h
                },
            )
        })
        .collect();
    let coarse: Vec<Sums> = edges
        .par_iter()
        .map(|&(lo, hi)| gauss(f, dim, lo, hi))
        .collect::<Result<_>>()?;
    let mut scale = prior.to_vec();
    for c in &coarse {
        for (sc, a) in scale.iter_mut().zip(&c.abs) {
            *sc += a;
        }
    }
    let refined: Vec<Sums> = edges
        .par_iter()
        .zip(coarse.into_par_iter())
        .map(|(&(lo, hi), c)| adaptive(f, dim, lo, hi, c, &scale, 0))
        .collect::<Result<_>>()?;
    let mut total = Sums::zero(dim);
    for r in &refined {
        total.add(r);
    }
    Ok(total)
}

/// Integrates `f` over `[0, ∞)`, extending the upper limit by octaves until
/// the last octave contributes less than `tail_tol` of the absolute integral
/// in every component.
pub(crate) fn integrate_to_infinity<F>(f: &F, dim: usize, oct: &Octaves) -> Result<Integral>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let mut total = Sums::zero(dim);
    let mut history: Vec<f64> = Vec::new();
    let (mut a, mut b) = (0.0, oct.first);
    for _ in 0..oct.max_octaves {
        let s = segment(f, dim, a, b, oct.max_panel, &total.abs)?;
        total.add(&s);
        let ratio = (0..dim)
            .map(|i| {
                if total.abs[i] > 0.0 {
                    s.abs[i] / total.abs[i]
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        let octave_sum: f64 = s.abs.iter().sum();
        history.push(octave_sum);
        if b >= oct.min_upper {
            if ratio <= oct.tail_tol {
                return Ok(Integral {
                    value: total.value,
                    abs: total.abs,
                    err: total.err,
                    upper: b,
                    tail_ratio: ratio,
                });
            }
            let n = history.len();
            if n >= 4
                && history[n - 3..]
                    .iter()
                    .zip(&history[n - 4..n - 1])
                    .all(|(c, p)| c >= p)
            {
                return Err(Error::NonConvergent(format!(
                    "octave contributions stopped decreasing by mu = {b:.3e} (last ratio {ratio:.3e})"
                )));
            }
        }
        a = b;
        b *= 2.0;
    }
    Err(Error::NonConvergent(format!(
        "tail still above {:.1e} of the total at mu = {a:.3e}",
        oct.tail_tol
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_times_decay() {
        // ∫_0^∞ x² e^{-x} dx = 2, ∫_0^∞ e^{-x} sin x dx = 1/2
        let f = |x: f64| Ok(vec![x * x * (-x).exp(), (-x).exp() * x.sin()]);
        let oct = Octaves {
            first: 1.0,
            max_panel: 1.0,
            min_upper: 8.0,
            tail_tol: 1e-14,
            max_octaves: 30,
        };
        let r = integrate_to_infinity(&f, 2, &oct).unwrap();
        assert_relative_eq!(r.value[0], 2.0, max_relative = 1e-13);
        assert_relative_eq!(r.value[1], 0.5, max_relative = 1e-13);
    }

    #[test]
    fn slow_decay_is_flagged() {
        let f = |x: f64| Ok(vec![1.0 / (1.0 + x)]);
        let oct = Octaves {
            first: 1.0,
            max_panel: f64::INFINITY,
            min_upper: 4.0,
            tail_tol: 1e-8,
            max_octaves: 40,
        };
        assert!(matches!(
            integrate_to_infinity(&f, 1, &oct),
            Err(Error::NonConvergent(_))
        ));
    }
}
