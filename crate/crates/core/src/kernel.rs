//! Fourier kernel `H(μ, t)` of the fractional hyperbolic diffusion equation
//!
//! ```text
//! c⁻² ∂^{α+β}H/∂t^{α+β} + D⁻¹ ∂^α H/∂t^α = -μ² H,   H(μ,0) = 1, ∂H/∂t(μ,0) = 0
//! ```
//!
//! evaluated by four independent routes:
//!
//! * [`h_series`]: the truncated binomial double series, summed in extended
//!   precision;
//! * [`h_alpha_eq_beta`]: the two-term Mittag-Leffler closed form valid when
//!   `α = β`;
//! * [`h_classical`]: the elementary cosh/cos closed form for `α = β = 1`;
//! * [`h_laplace_oracle`]: numerical inversion of the Laplace transform
//!   `(s^{α+β-1} + c²D⁻¹ s^{α-1}) / (s^{α+β} + c²D⁻¹ s^α + μ²c²)` along a
//!   Talbot contour.
//!
//! [`h_eval`] dispatches between them.

use std::f64::consts::{LN_10, PI};
use std::fmt;

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::{mittag_leffler, mp, prabhakar_ml, PrabhakarArgs};

/// Parameters of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    /// Propagation speed `c`.
    pub c: f64,
    /// Diffusion coefficient `D`.
    pub d_coef: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, c: f64, d_coef: f64) -> Result<Self> {
        let p = ModelParams {
            alpha,
            beta,
            c,
            d_coef,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ModelParams {
            alpha,
            beta,
            c,
            d_coef,
        } = *self;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(invalid(
                "beta",
                format!("must be finite and >= 0, got {beta}"),
            ));
        }
        let order = alpha + beta;
        if !(order > 1.0 && order <= 2.0) {
            return Err(invalid(
                "beta",
                format!("alpha + beta must lie in (1, 2], got {order}"),
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", format!("must be finite and > 0, got {c}")));
        }
        if !(d_coef > 0.0 && d_coef.is_finite()) {
            return Err(invalid(
                "d_coef",
                format!("must be finite and > 0, got {d_coef}"),
            ));
        }
        Ok(())
    }

    /// `c² / D`.
    pub fn damping(&self) -> f64 {
        self.c * self.c / self.d_coef
    }

    /// `c / (2D)`: the frequency separating the overdamped and oscillatory
    /// regimes when `α = β`.
    pub fn branch_point(&self) -> f64 {
        self.c / (2.0 * self.d_coef)
    }

    pub fn is_alpha_eq_beta(&self) -> bool {
        self.alpha == self.beta
    }

    pub fn is_classical(&self) -> bool {
        self.alpha == 1.0 && self.beta == 1.0
    }
}

fn default_tail_tol() -> f64 {
    1e-11
}

/// Truncation and tolerance settings for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Number of retained values of the inner index `n`.
    pub n_terms: usize,
    /// Number of retained values of the outer index `m`.
    pub m_terms: usize,
    /// Largest admissible natural log of a single series term.
    pub term_log_threshold: f64,
    /// Agreement tolerance of the contour self-check.
    pub oracle_tol: f64,
    /// Largest admissible magnitude of a term on the truncation boundary.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            n_terms: 80,
            m_terms: 80,
            term_log_threshold: 30.0 * LN_10,
            oracle_tol: 1e-8,
            tail_tol: default_tail_tol(),
        }
    }
}

impl KernelConfig {
    pub fn with_terms(mut self, n_terms: usize, m_terms: usize) -> Self {
        self.n_terms = n_terms;
        self.m_terms = m_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms == 0 {
            return Err(invalid("n_terms", "must be >= 1"));
        }
        if self.m_terms == 0 {
            return Err(invalid("m_terms", "must be >= 1"));
        }
        if self.term_log_threshold.is_nan() {
            return Err(invalid("term_log_threshold", "must not be NaN"));
        }
        if !(self.oracle_tol > 0.0) {
            return Err(invalid("oracle_tol", "must be > 0"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(invalid("tail_tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Evaluation route chosen by [`h_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Series,
    AlphaEqBeta,
    Classical,
    Laplace,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Series => "series",
            Route::AlphaEqBeta => "alpha_eq_beta",
            Route::Classical => "classical",
            Route::Laplace => "laplace",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_args(mu: f64, t: f64) -> Result<()> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("must be finite and >= 0, got {mu}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Double-series route:
///
/// ```text
/// H = 1 - μ²c²t^{α+β} Σ_{m<M} Σ_{n<=min(m,N-1)} C(m,n) (-c²D⁻¹t^β)^m (μ²Dt^α)^n / Γ(βm + αn + α + β + 1)
/// ```
///
/// Terms are formed in log-space. A cheap f64 pass locates the largest term;
/// the sum is then carried in MPFR with enough bits to absorb the
/// cancellation, skipping terms more than 40 decades below both the largest
/// term and unity.
pub fn h_series(params: &ModelParams, cfg: &KernelConfig, mu: f64, t: f64) -> Result<f64> {
    params.validate()?;
    cfg.validate()?;
    check_args(mu, t)?;
    if t == 0.0 || mu == 0.0 {
        return Ok(1.0);
    }

    let ModelParams {
        alpha,
        beta,
        c,
        d_coef,
    } = *params;
    let (m_terms, n_terms) = (cfg.m_terms, cfg.n_terms);
    let ln_t = t.ln();
    let ln_x = (c * c / d_coef).ln() + beta * ln_t;
    let ln_y = (mu * mu * d_coef).ln() + alpha * ln_t;
    let ln_pref = (mu * mu * c * c).ln() + (alpha + beta) * ln_t;

    let ln_fact: Vec<f64> = (0..=m_terms)
        .map(|k| libm::lgamma(k as f64 + 1.0))
        .collect();
    let mut log_terms = Vec::with_capacity(m_terms * (m_terms + 1) / 2);
    let mut peak = f64::NEG_INFINITY;
    let mut boundary = f64::NEG_INFINITY;
    for m in 0..m_terms {
        for n in 0..=m.min(n_terms - 1) {
            let (mf, nf) = (m as f64, n as f64);
            let lt = ln_fact[m] - ln_fact[n] - ln_fact[m - n] + mf * ln_x + nf * ln_y
                - libm::lgamma(beta * mf + alpha * nf + alpha + beta + 1.0)
                + ln_pref;
            peak = peak.max(lt);
            if m + 1 == m_terms || (n + 1 == n_terms && n < m) {
                boundary = boundary.max(lt);
            }
            log_terms.push((m, n, lt));
        }
    }
    if peak > cfg.term_log_threshold {
        return Err(Error::TruncationOverflow {
            mu,
            t,
            reason: format!(
                "largest term e^{peak:.2} exceeds threshold e^{:.2}",
                cfg.term_log_threshold
            ),
        });
    }
    if boundary > cfg.tail_tol.ln() {
        return Err(Error::TruncationOverflow {
            mu,
            t,
            reason: format!(
                "terms on the truncation boundary reach {:.3e} (tail tolerance {:.1e})",
                boundary.exp(),
                cfg.tail_tol
            ),
        });
    }

    let cutoff = peak.max(0.0) - 40.0 * LN_10;
    let prec = mp::precision_for(peak);
    let alpha_mp = mp::float(prec, alpha);
    let beta_mp = mp::float(prec, beta);
    let c_mp = mp::float(prec, c);
    let d_mp = mp::float(prec, d_coef);
    let mu_mp = mp::float(prec, mu);
    let ln_t_mp = mp::float(prec, t).ln();
    let c2 = Float::with_val(prec, c_mp.square_ref());
    let mu2 = Float::with_val(prec, mu_mp.square_ref());
    let ab1 = Float::with_val(prec, &alpha_mp + &beta_mp) + 1u32;
    let ln_x_mp =
        Float::with_val(prec, &c2 / &d_mp).ln() + Float::with_val(prec, &beta_mp * &ln_t_mp);
    let ln_y_mp =
        Float::with_val(prec, &mu2 * &d_mp).ln() + Float::with_val(prec, &alpha_mp * &ln_t_mp);
    let ab = Float::with_val(prec, &alpha_mp + &beta_mp);
    let ln_pref_mp = Float::with_val(prec, &mu2 * &c2).ln() + Float::with_val(prec, &ab * &ln_t_mp);
    let ln_fact_mp: Vec<Float> = (0..=m_terms)
        .map(|k| mp::float(prec, k as f64 + 1.0).ln_gamma())
        .collect();

    let mut sum = Float::new(prec);
    for &(m, n, lt) in &log_terms {
        if lt < cutoff {
            continue;
        }
        let mut arg = Float::with_val(prec, &beta_mp * m as f64);
        arg += Float::with_val(prec, &alpha_mp * n as f64);
        arg += &ab1;
        let mut l = Float::with_val(prec, &ln_fact_mp[m] - &ln_fact_mp[n]);
        l -= &ln_fact_mp[m - n];
        l += Float::with_val(prec, &ln_x_mp * m as f64);
        l += Float::with_val(prec, &ln_y_mp * n as f64);
        l += &ln_pref_mp;
        l -= mp::ln_gamma(&arg);
        let term = l.exp();
        if m % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok((Float::with_val(prec, 1u32) + sum).to_f64())
}

/// `Ω = sqrt(1 - 4μ²D²/c²)`, imaginary above the branch point.
fn omega(params: &ModelParams, mu: f64) -> Complex64 {
    let r = 2.0 * mu * params.d_coef / params.c;
    let w = 1.0 - r * r;
    if w >= 0.0 {
        Complex64::new(w.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (r * r - 1.0).sqrt())
    }
}

/// Closed form for `α = β`:
/// `H = (1+Ω)/(2Ω) E_α(-A₋t^α) - (1-Ω)/(2Ω) E_α(-A₊t^α)` with
/// `A± = c²/(2D) (1 ± Ω)`.
pub fn h_alpha_eq_beta(params: &ModelParams, mu: f64, t: f64) -> Result<f64> {
    params.validate()?;
    check_args(mu, t)?;
    if !params.is_alpha_eq_beta() {
        return Err(invalid(
            "beta",
            format!(
                "closed form requires alpha == beta, got {} and {}",
                params.alpha, params.beta
            ),
        ));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let om = omega(params, mu);
    if om.norm() < 1e-12 {
        return Err(Error::BranchPointSingularity {
            mu,
            omega_abs: om.norm(),
        });
    }
    let half_damp = params.damping() / 2.0;
    let one = Complex64::new(1.0, 0.0);
    let a_minus = half_damp * (one - om);
    let a_plus = half_damp * (one + om);
    let ta = t.powf(params.alpha);
    let e_minus = mittag_leffler(params.alpha, -a_minus * ta)?;
    let e_plus = mittag_leffler(params.alpha, -a_plus * ta)?;
    let h = (one + om) / (2.0 * om) * e_minus - (one - om) / (2.0 * om) * e_plus;
    if h.im.abs() > 1e-9 * (1.0 + h.re.abs()) {
        return Err(Error::Domain(format!(
            "closed form left imaginary residual {:e} at mu = {mu}, t = {t}",
            h.im
        )));
    }
    Ok(h.re)
}

/// Limit of [`h_alpha_eq_beta`] at the branch point `μ = c/(2D)`:
/// `H = E_α(-x) + x E²_{α,α+1}(-x)` with `x = c²t^α/(2D)`.
pub fn h_alpha_eq_beta_confluent(params: &ModelParams, t: f64) -> Result<f64> {
    params.validate()?;
    check_args(params.branch_point(), t)?;
    if !params.is_alpha_eq_beta() {
        return Err(invalid(
            "beta",
            format!(
                "closed form requires alpha == beta, got {} and {}",
                params.alpha, params.beta
            ),
        ));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let a = params.alpha;
    let x = params.damping() / 2.0 * t.powf(a);
    let e = prabhakar_ml(&PrabhakarArgs::new(a, 1.0, 1.0, -x)?)?;
    let de = prabhakar_ml(&PrabhakarArgs::new(a, a + 1.0, 2.0, -x)?)?;
    Ok(e + x * de)
}

/// Elementary closed form for `α = β = 1`:
///
/// ```text
/// H = e^{-a} [cosh(aq) + sinh(aq)/q]   μ < c/(2D),  q = sqrt(1 - μ²/(c/2D)²)
/// H = e^{-a} [cos(aq)  + sin(aq)/q ]   μ > c/(2D),  q = sqrt(μ²/(c/2D)² - 1)
/// H = e^{-a} (1 + a)                   μ = c/(2D)
/// ```
///
/// with `a = c²t/(2D)`.
pub fn h_classical(params: &ModelParams, mu: f64, t: f64) -> Result<f64> {
    params.validate()?;
    check_args(mu, t)?;
    if !params.is_classical() {
        return Err(invalid(
            "alpha",
            "classical closed form requires alpha = beta = 1",
        ));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let a = params.damping() * t / 2.0;
    let k = params.branch_point();
    let r = mu / k;
    Ok(if r < 1.0 {
        let q = ((1.0 - r) * (1.0 + r)).sqrt();
        // e^{-a} cosh(aq) and e^{-a} sinh(aq)/q rewritten around e^{-a(1-q)}
        let lead = (-a * (1.0 - q)).exp();
        let em = (-2.0 * a * q).exp();
        lead * (0.5 * (1.0 + em) + (-(-2.0 * a * q).exp_m1()) / (2.0 * q))
    } else if r > 1.0 {
        let q = ((r - 1.0) * (r + 1.0)).sqrt();
        let aq = a * q;
        let sin_over_q = if aq == 0.0 { a } else { aq.sin() / q };
        (-a).exp() * (aq.cos() + sin_over_q)
    } else {
        (-a).exp() * (1.0 + a)
    })
}

/// Laplace transform of `H(μ, ·)` at complex `s` (principal branches).
pub fn h_laplace_transform(params: &ModelParams, mu: f64, s: Complex64) -> Complex64 {
    let k = params.damping();
    let ab = params.alpha + params.beta;
    let ln_s = s.ln();
    let s_a = (params.alpha * ln_s).exp();
    let s_ab = (ab * ln_s).exp();
    let num = (s_ab + k * s_a) / s;
    let den = s_ab + k * s_a + mu * mu * params.c * params.c;
    num / den
}

/// Contour scale as a multiple of `1/t`; fixes the dynamic range
/// `e^{λt}` seen by the quadrature.
const TALBOT_BASE_NODES: usize = 32;

/// Upper bound on the modulus of any root of
/// `s^{α+β} + c²D⁻¹ s^α + μ²c² = 0`.
fn pole_radius(params: &ModelParams, mu: f64) -> f64 {
    let ab = params.alpha + params.beta;
    let k = params.damping();
    let q = mu * mu * params.c * params.c;
    let mut r = (q.powf(1.0 / ab)).max(k.powf(1.0 / params.beta)).max(1.0);
    for _ in 0..200 {
        let next = (q + k * r.powf(params.alpha)).powf(1.0 / ab);
        if (next - r).abs() <= 1e-12 * r {
            r = next;
            break;
        }
        r = next;
    }
    r
}

/// Talbot contour `s(θ) = λ(θ cot θ + iνθ)`, `θ ∈ (-π, π)`, trapezoidal
/// rule with `nodes` panels on the half contour (conjugate symmetry).
fn talbot_sum(params: &ModelParams, mu: f64, t: f64, lambda: f64, nu: f64, nodes: usize) -> f64 {
    let h = PI / nodes as f64;
    // θ = 0: s = λ, ds/dθ = iλν
    let s0 = Complex64::new(lambda, 0.0);
    let mut acc = 0.5 * ((lambda * t).exp() * h_laplace_transform(params, mu, s0)).re * lambda * nu;
    for j in 1..nodes {
        let th = j as f64 * h;
        let cot = th.cos() / th.sin();
        let s = Complex64::new(lambda * th * cot, lambda * nu * th);
        let ds = Complex64::new(lambda * (cot - th / th.sin().powi(2)), lambda * nu);
        let val = (s * t).exp() * h_laplace_transform(params, mu, s) * ds;
        // (1/2πi) ∫ over the full contour = (1/π) Re ∫_0^π (·)/i
        acc += val.im;
    }
    acc / nodes as f64
}

/// Numerical Laplace inversion of the kernel transform along a Talbot
/// contour.
///
/// The contour scale is `λ = 2·32/(5t)`; the vertical stretch `ν >= 1` is
/// chosen so that every pole of the transform lies inside the contour, and
/// the node count grows with `ν`. The result is accepted only if doubling the
/// node count at fixed contour changes it by at most `cfg.oracle_tol`.
pub fn h_laplace_oracle(params: &ModelParams, cfg: &KernelConfig, mu: f64, t: f64) -> Result<f64> {
    params.validate()?;
    cfg.validate()?;
    check_args(mu, t)?;
    if t == 0.0 {
        return Err(invalid("t", "contour inversion needs t > 0; H(mu, 0) = 1"));
    }
    let lambda = 2.0 * TALBOT_BASE_NODES as f64 / (5.0 * t);
    let radius = pole_radius(params, mu);
    let nu = (1.6 * radius / (lambda * PI / 2.0)).max(1.0);
    let nodes = (TALBOT_BASE_NODES as f64 * nu).ceil() as usize;
    let coarse = talbot_sum(params, mu, t, lambda, nu, nodes);
    let fine = talbot_sum(params, mu, t, lambda, nu, 2 * nodes);
    if !(coarse.is_finite() && fine.is_finite()) {
        return Err(Error::ContourFailure {
            mu,
            t,
            reason: "non-finite quadrature sum".into(),
        });
    }
    let diff = (coarse - fine).abs();
    if diff > cfg.oracle_tol {
        return Err(Error::ContourFailure {
            mu,
            t,
            reason: format!(
                "node doubling changed the result by {diff:.3e} > {:.1e}",
                cfg.oracle_tol
            ),
        });
    }
    Ok(fine)
}

/// Kernel value and the route that produced it.
pub fn h_eval_with_route(
    params: &ModelParams,
    cfg: &KernelConfig,
    mu: f64,
    t: f64,
) -> Result<(f64, Route)> {
    params.validate()?;
    cfg.validate()?;
    check_args(mu, t)?;
    if t == 0.0 || mu == 0.0 {
        return Ok((1.0, Route::Series));
    }
    if params.is_classical() {
        return Ok((h_classical(params, mu, t)?, Route::Classical));
    }
    if params.is_alpha_eq_beta() {
        match h_alpha_eq_beta(params, mu, t) {
            Ok(v) => return Ok((v, Route::AlphaEqBeta)),
            Err(Error::BranchPointSingularity { .. }) | Err(Error::NonConvergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    match h_series(params, cfg, mu, t) {
        Ok(v) => Ok((v, Route::Series)),
        Err(Error::TruncationOverflow { .. }) => {
            Ok((h_laplace_oracle(params, cfg, mu, t)?, Route::Laplace))
        }
        Err(e) => Err(e),
    }
}

/// Kernel value by the most direct reliable route.
pub fn h_eval(params: &ModelParams, cfg: &KernelConfig, mu: f64, t: f64) -> Result<f64> {
    h_eval_with_route(params, cfg, mu, t).map(|(v, _)| v)
}
