//! Final-size computations built on the function `f(x) = x - log(x) / rho`.
//!
//! `f` decreases strictly on `(0, 1/rho]` and increases on `[1/rho, inf)`,
//! with minimum `y0 = (1 + log rho) / rho`. The decreasing branch has an
//! inverse `g: [y0, inf) -> (0, 1/rho]`, itself strictly decreasing, and the
//! limiting susceptible share of an uncontrolled epidemic is `g` applied to
//! the vulnerability `S + I - log(S) / rho`.

use crate::error::{Error, Result};
use crate::model::{EpidemicParams, EpidemicState};

/// `f(x) = x - log(x) / rho`.
pub fn special_function(rho: f64, x: f64) -> f64 {
    x - x.ln() / rho
}

/// Minimum value `(1 + log rho) / rho` of [`special_function`], attained at `1/rho`.
pub fn special_minimum(rho: f64) -> f64 {
    (1.0 + rho.ln()) / rho
}

/// Inverse of [`special_function`] restricted to `(0, 1/rho]`.
///
/// Bisection runs until the bracket can no longer be split in floating
/// point, which is well inside an absolute tolerance of `1e-12`.
pub fn invert_special(rho: f64, y: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParams(format!("rho must be finite and > 0, got {rho}")));
    }
    if y.is_nan() {
        return Err(Error::InvalidParams("y is NaN".into()));
    }
    let y0 = special_minimum(rho);
    if y < y0 {
        return Err(Error::BelowMinimum { y, y0 });
    }
    let top = 1.0 / rho;
    if y == y0 {
        return Ok(top);
    }

    // f(e^{-rho y}) = e^{-rho y} + y > y, so the root lies in [lo, top].
    let mut lo = (-rho * y).exp();
    if lo == 0.0 {
        return Ok(f64::MIN_POSITIVE);
    }
    let mut hi = top;
    for _ in 0..2048 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if special_function(rho, mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let err_lo = (special_function(rho, lo) - y).abs();
    let err_hi = (special_function(rho, hi) - y).abs();
    Ok(if err_lo < err_hi { lo } else { hi })
}

/// Vulnerability `S + I - (gamma/beta) log S`, conserved while `u = 0`.
pub fn vulnerability(params: &EpidemicParams, state: &EpidemicState) -> Result<f64> {
    controlled_vulnerability(params, state, 0.0)
}

/// `(1 - c)(S + I) - (gamma/beta) log S`, conserved while `u = c` is held
/// constant.
pub fn controlled_vulnerability(
    params: &EpidemicParams,
    state: &EpidemicState,
    level: f64,
) -> Result<f64> {
    if !(state.s > 0.0) {
        return Err(Error::Domain("vulnerability"));
    }
    Ok((1.0 - level) * (state.s + state.i) - params.herd_immunity_threshold() * state.s.ln())
}

/// Limiting susceptible share `S(inf)` of the uncontrolled dynamics started
/// from `state`.
///
/// With `I = 0` nothing happens and `S` itself is returned.
pub fn final_size(params: &EpidemicParams, state: &EpidemicState) -> Result<f64> {
    if !(state.s > 0.0) {
        return Err(Error::InvalidState(format!(
            "final size needs S > 0, got S = {}",
            state.s
        )));
    }
    if !(state.i >= 0.0) || !state.i.is_finite() || !state.s.is_finite() {
        return Err(Error::InvalidState(format!(
            "final size needs finite S and I >= 0, got ({}, {})",
            state.s, state.i
        )));
    }
    if state.i == 0.0 {
        return Ok(state.s);
    }
    let rho = params.r0();
    // Rounding can push y a hair below y0 when S sits on the threshold.
    let y = vulnerability(params, state)?.max(special_minimum(rho));
    invert_special(rho, y)
}
