//! Extended-precision helpers for alternating series whose terms are many
//! orders of magnitude larger than their sum.
//!
//! Terms are formed as `sign * exp(log_magnitude)` with every input carried
//! in MPFR precision, so the only rounding of the caller's f64 parameters is
//! the one already present in the f64 values themselves.

use std::f64::consts::LN_2;

use rug::Float;

/// Guard bits kept beyond the magnitude of the largest term.
pub(crate) const GUARD_BITS: u32 = 128;

/// Working precision able to resolve a sum whose largest term is
/// `exp(max_log)` down to roughly `2^-GUARD_BITS`.
pub(crate) fn precision_for(max_log: f64) -> u32 {
    let extra = if max_log.is_finite() && max_log > 0.0 {
        (max_log / LN_2).ceil() as u32
    } else {
        0
    };
    GUARD_BITS + extra
}

#[inline]
pub(crate) fn float(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

/// `ln Γ(x)` for `x > 0` at the precision of `x`.
pub(crate) fn ln_gamma(x: &Float) -> Float {
    x.clone().ln_gamma()
}
