//! Frequency-modulated bang-bang quantization of controls.
//!
//! Time is cut into windows `((k-1)h, kh]`. In window `k` the output is `0`
//! for `h - tau_k` days and then `b` for `tau_k` days, with
//! `tau_k = (1/b) int_window u dt`, so every window keeps its cost.

use crate::controls::ControlStrategy;
use crate::error::{Error, Result};

/// Window integrals below this fraction of `h * b` are dropped as empty.
const EMPTY_FRACTION: f64 = 1e-12;

fn check_shape(amplitude: f64, wavelength: f64, support_end: f64) -> Result<()> {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(Error::InvalidControl(format!("amplitude = {amplitude} outside (0, 1]")));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidControl(format!("wavelength = {wavelength} must be > 0")));
    }
    if !(support_end.is_finite() && support_end >= 0.0) {
        return Err(Error::InvalidControl(format!("support end = {support_end} must be finite and >= 0")));
    }
    Ok(())
}

/// Quantizes an open-loop strategy with closed-form window integrals.
pub fn quantize(
    control: &ControlStrategy,
    amplitude: f64,
    wavelength: f64,
    support_end: f64,
) -> Result<ControlStrategy> {
    control.validate()?;
    check_shape(amplitude, wavelength, support_end)?;
    if control.open_loop_integral(0.0, 0.0).is_none() {
        return Err(Error::NotOpenLoop(control.kind_name()));
    }
    let sup = control.level_bound();
    if amplitude < sup {
        return Err(Error::AmplitudeTooSmall { amplitude, sup });
    }
    if control.support_end() > support_end {
        return Err(Error::InvalidControl(format!(
            "control support ends at {} after T = {support_end}",
            control.support_end()
        )));
    }
    let windows = window_count(wavelength, support_end);
    let integrals = (1..=windows).map(|k| {
        let (a, b) = window(wavelength, k);
        control.open_loop_integral(a, b).expect("open-loop control")
    });
    Ok(assemble(integrals, amplitude, wavelength))
}

/// Quantizes an arbitrary function `u(t)` supported in `[0, T]`, using
/// adaptive Simpson quadrature (tolerance `1e-10` per window).
pub fn quantize_fn<F>(u: F, amplitude: f64, wavelength: f64, support_end: f64) -> Result<ControlStrategy>
where
    F: Fn(f64) -> f64,
{
    check_shape(amplitude, wavelength, support_end)?;
    let mut sup = 0.0f64;
    let probe = |t: f64, sup: &mut f64| {
        let v = u(t);
        *sup = sup.max(v);
        v
    };
    let windows = window_count(wavelength, support_end);
    let mut integrals = Vec::with_capacity(windows);
    for k in 1..=windows {
        let (a, b) = window(wavelength, k);
        integrals.push(adaptive_simpson(&mut |t| probe(t, &mut sup), a, b, 1e-10));
    }
    if sup > amplitude {
        return Err(Error::AmplitudeTooSmall { amplitude, sup });
    }
    let integrals: Vec<f64> = integrals.into_iter().collect::<Result<_>>()?;
    Ok(assemble(integrals, amplitude, wavelength))
}

fn window_count(wavelength: f64, support_end: f64) -> usize {
    (support_end / wavelength - 1e-9).ceil().max(0.0) as usize
}

fn window(wavelength: f64, k: usize) -> (f64, f64) {
    ((k - 1) as f64 * wavelength, k as f64 * wavelength)
}

fn assemble<I: IntoIterator<Item = f64>>(integrals: I, amplitude: f64, wavelength: f64) -> ControlStrategy {
    let mut breakpoints = vec![0.0];
    let mut levels: Vec<f64> = Vec::new();
    let mut push = |end: f64, level: f64, bps: &mut Vec<f64>| {
        if levels.last() == Some(&level) {
            *bps.last_mut().unwrap() = end;
        } else {
            levels.push(level);
            bps.push(end);
        }
    };
    let slack = EMPTY_FRACTION * wavelength;
    for (k, integral) in integrals.into_iter().enumerate() {
        let (a, b) = window(wavelength, k + 1);
        let on = (integral / amplitude).clamp(0.0, wavelength);
        let switch_on = b - on;
        if on <= slack {
            push(b, 0.0, &mut breakpoints);
        } else if switch_on - a <= slack {
            push(b, amplitude, &mut breakpoints);
        } else {
            push(switch_on, 0.0, &mut breakpoints);
            push(b, amplitude, &mut breakpoints);
        }
    }
    while levels.last() == Some(&0.0) {
        levels.pop();
        breakpoints.pop();
    }
    if levels.is_empty() {
        breakpoints.clear();
    }
    ControlStrategy::PiecewiseConstant { breakpoints, levels }
}

fn simpson<F: FnMut(f64) -> f64>(f: &mut F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + refine(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    let value = refine(f, a, fa, b, fb, m, fm, whole, tol, 48);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidControl("control integral is not finite".into()))
    }
}
