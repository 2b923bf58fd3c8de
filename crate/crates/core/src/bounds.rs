//! Universal bounds on total incidence and on the time to herd immunity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EpidemicParams, EpidemicState};
use crate::sir::Trajectory;
use crate::special::final_size;

/// Range containing the total incidence of every finite-cost intervention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncidenceBounds {
    /// `max(0, 1 - gamma / (beta S(0)))`.
    pub lower: f64,
    /// Incidence of the uncontrolled epidemic, `1 - S_0(inf) / S(0)`.
    pub upper: f64,
}

impl IncidenceBounds {
    pub fn contains(&self, incidence: f64, slack: f64) -> bool {
        incidence >= self.lower - slack && incidence <= self.upper + slack
    }
}

pub fn incidence_bounds(params: &EpidemicParams, initial: &EpidemicState) -> Result<IncidenceBounds> {
    initial.validate()?;
    if !(initial.s > 0.0 && initial.i > 0.0) {
        return Err(Error::InvalidState(format!(
            "bounds need S(0) > 0 and I(0) > 0, got ({}, {})",
            initial.s, initial.i
        )));
    }
    let lower = (1.0 - params.herd_immunity_threshold() / initial.s).max(0.0);
    let upper = 1.0 - final_size(params, initial)? / initial.s;
    Ok(IncidenceBounds { lower, upper: upper.max(lower) })
}

/// First time with `S <= gamma / beta`, interpolated linearly between
/// samples; `None` if the threshold is not reached within the trajectory.
pub fn herd_immunity_time(trajectory: &Trajectory) -> Option<f64> {
    let threshold = trajectory.params().herd_immunity_threshold();
    let samples = trajectory.samples();
    if samples[0].state.s <= threshold {
        return Some(samples[0].t);
    }
    samples.windows(2).find(|w| w[1].state.s <= threshold).map(|w| {
        let (a, b) = (&w[0], &w[1]);
        let frac = (a.state.s - threshold) / (a.state.s - b.state.s);
        a.t + frac * (b.t - a.t)
    })
}

/// Upper bound `||u||_1 + log(beta S(0) / gamma) / (beta I(0)) * exp(gamma ||u||_1)`
/// on the herd-immunity time of any control with cost `l1`.
pub fn herd_immunity_time_bound(params: &EpidemicParams, initial: &EpidemicState, l1: f64) -> f64 {
    let log_ratio = (params.r0() * initial.s).ln().max(0.0);
    l1 + log_ratio / (params.beta() * initial.i) * (params.gamma() * l1).exp()
}

/// `int_T^inf I dt` for an epidemic that is uncontrolled from state `at_t` on.
///
/// Follows from `(S + I)' = -gamma I` and the final-size equation.
pub fn remaining_prevalence_integral(params: &EpidemicParams, at_t: &EpidemicState) -> Result<f64> {
    let s_inf = final_size(params, at_t)?;
    Ok((at_t.s + at_t.i - s_inf) / params.gamma())
}
