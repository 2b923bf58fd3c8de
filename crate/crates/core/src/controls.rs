//! Intervention strategies `u(t)` and their cost functionals.
//!
//! Active phases use left-open intervals: a lockdown starting at `t1` with
//! duration `d` has `u = level` on `(t1, t1 + d]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpidemicParams, EpidemicState};
use crate::sir::{self, SolverOptions};

fn one() -> f64 {
    1.0
}

fn infinity() -> f64 {
    f64::INFINITY
}

/// Closed family of transmission-reducing interventions.
///
/// Open-loop kinds (`Zero`, `PiecewiseConstant`, `SingleLockdown`) are plain
/// functions of time. The remaining kinds read the concurrently integrated
/// epidemic state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlStrategy {
    Zero,

    /// Level `levels[j]` on `(breakpoints[j], breakpoints[j + 1]]`, zero
    /// elsewhere.
    PiecewiseConstant { breakpoints: Vec<f64>, levels: Vec<f64> },

    /// Wait, suppress at constant `level` for `duration` days, relax.
    SingleLockdown { start: f64, duration: f64, level: f64 },

    /// Holds prevalence constant with `u = 1 - gamma / (beta S)` (clamped to
    /// `[0, cap]`) on `(start, end]`. The phase ends for good once
    /// `S <= gamma / beta` or, if a budget is given, once the accumulated
    /// cost reaches it.
    MaintainFeedback {
        start: f64,
        #[serde(default = "infinity")]
        end: f64,
        #[serde(default)]
        budget: Option<f64>,
        #[serde(default = "one")]
        cap: f64,
    },

    /// Wait on `(0, t1]`, maintain on `(t1, t2]`, suppress at
    /// `suppress_level` on `(t2, t3]`, relax afterwards.
    WaitMaintainSuppressRelax {
        t1: f64,
        t2: f64,
        t3: f64,
        #[serde(default = "one")]
        suppress_level: f64,
        #[serde(default = "one")]
        cap: f64,
    },

    /// Applies `level` on `(start, end]` as long as the uncontrolled
    /// effective reproduction number `beta S / gamma` exceeds `threshold`.
    /// Once it drops to the threshold the control is released for good.
    ReffThreshold {
        #[serde(default)]
        start: f64,
        #[serde(default = "infinity")]
        end: f64,
        level: f64,
        threshold: f64,
    },
}

/// `||u||_1`, `||u||_0` and `||u||_inf` of a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    /// Total cost in level-days.
    pub l1: f64,
    /// Total time with `u > 0`, in days.
    pub l0: f64,
    /// Maximum level.
    pub sup: f64,
}

impl CostReport {
    pub const ZERO: CostReport = CostReport { l1: 0.0, l0: 0.0, sup: 0.0 };
}

fn check_level(name: &str, value: f64, allow_zero: bool) -> Result<()> {
    let ok = value.is_finite() && value <= 1.0 && if allow_zero { value >= 0.0 } else { value > 0.0 };
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0, 1]" } else { "(0, 1]" };
        Err(Error::InvalidControl(format!("{name} = {value} outside {range}")))
    }
}

fn check_time(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidControl(format!("{name} = {value} must be finite and >= 0")))
    }
}

fn check_end(start: f64, end: f64) -> Result<()> {
    if end.is_nan() || end <= start {
        Err(Error::InvalidControl(format!("end = {end} must exceed start = {start}")))
    } else {
        Ok(())
    }
}

/// `max(0, min(cap, 1 - gamma / (beta s)))`.
pub fn maintain_level(params: &EpidemicParams, s: f64, cap: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (1.0 - params.herd_immunity_threshold() / s).clamp(0.0, cap)
}

impl ControlStrategy {
    pub fn zero() -> Self {
        ControlStrategy::Zero
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let c = ControlStrategy::PiecewiseConstant { breakpoints, levels };
        c.validate()?;
        Ok(c)
    }

    pub fn single_lockdown(start: f64, duration: f64, level: f64) -> Result<Self> {
        let c = ControlStrategy::SingleLockdown { start, duration, level };
        c.validate()?;
        Ok(c)
    }

    pub fn maintain_feedback(start: f64, end: f64, budget: Option<f64>, cap: f64) -> Result<Self> {
        let c = ControlStrategy::MaintainFeedback { start, end, budget, cap };
        c.validate()?;
        Ok(c)
    }

    pub fn wait_maintain_suppress_relax(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        let c = ControlStrategy::WaitMaintainSuppressRelax {
            t1,
            t2,
            t3,
            suppress_level: 1.0,
            cap: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn reff_threshold(start: f64, end: f64, level: f64, threshold: f64) -> Result<Self> {
        let c = ControlStrategy::ReffThreshold { start, end, level, threshold };
        c.validate()?;
        Ok(c)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ControlStrategy::Zero => "zero",
            ControlStrategy::PiecewiseConstant { .. } => "piecewise_constant",
            ControlStrategy::SingleLockdown { .. } => "single_lockdown",
            ControlStrategy::MaintainFeedback { .. } => "maintain_feedback",
            ControlStrategy::WaitMaintainSuppressRelax { .. } => "wait_maintain_suppress_relax",
            ControlStrategy::ReffThreshold { .. } => "reff_threshold",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ControlStrategy::Zero => Ok(()),
            ControlStrategy::PiecewiseConstant { ref breakpoints, ref levels } => {
                if breakpoints.is_empty() && levels.is_empty() {
                    return Ok(());
                }
                if breakpoints.len() != levels.len() + 1 {
                    return Err(Error::InvalidControl(format!(
                        "{} breakpoints for {} levels; expected one more breakpoint than levels",
                        breakpoints.len(),
                        levels.len()
                    )));
                }
                for (j, &b) in breakpoints.iter().enumerate() {
                    check_time(&format!("breakpoints[{j}]"), b)?;
                }
                if let Some(j) = breakpoints.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidControl(format!(
                        "breakpoints must be strictly increasing (index {})",
                        j + 1
                    )));
                }
                for (j, &l) in levels.iter().enumerate() {
                    check_level(&format!("levels[{j}]"), l, true)?;
                }
                Ok(())
            }
            ControlStrategy::SingleLockdown { start, duration, level } => {
                check_time("start", start)?;
                if !(duration.is_finite() && duration > 0.0) {
                    return Err(Error::InvalidControl(format!(
                        "duration = {duration} must be finite and > 0"
                    )));
                }
                check_level("level", level, false)
            }
            ControlStrategy::MaintainFeedback { start, end, budget, cap } => {
                check_time("start", start)?;
                check_end(start, end)?;
                if let Some(b) = budget {
                    if !(b.is_finite() && b >= 0.0) {
                        return Err(Error::InvalidControl(format!(
                            "budget = {b} must be finite and >= 0"
                        )));
                    }
                }
                check_level("cap", cap, false)
            }
            ControlStrategy::WaitMaintainSuppressRelax { t1, t2, t3, suppress_level, cap } => {
                check_time("t1", t1)?;
                check_time("t2", t2)?;
                check_time("t3", t3)?;
                if !(t1 < t2 && t2 < t3) {
                    return Err(Error::InvalidControl(format!(
                        "phase times must satisfy t1 < t2 < t3, got {t1}, {t2}, {t3}"
                    )));
                }
                check_level("suppress_level", suppress_level, true)?;
                check_level("cap", cap, false)
            }
            ControlStrategy::ReffThreshold { start, end, level, threshold } => {
                check_time("start", start)?;
                check_end(start, end)?;
                check_level("level", level, false)?;
                if !(threshold.is_finite() && threshold > 0.0) {
                    return Err(Error::InvalidControl(format!(
                        "threshold = {threshold} must be finite and > 0"
                    )));
                }
                Ok(())
            }
        }
    }

    /// True when evaluation depends on the epidemic state.
    pub fn is_feedback(&self) -> bool {
        matches!(
            self,
            ControlStrategy::MaintainFeedback { .. }
                | ControlStrategy::WaitMaintainSuppressRelax { .. }
                | ControlStrategy::ReffThreshold { .. }
        )
    }

    /// Time after which `u` is guaranteed to vanish (possibly infinite).
    pub fn support_end(&self) -> f64 {
        match *self {
            ControlStrategy::Zero => 0.0,
            ControlStrategy::PiecewiseConstant { ref breakpoints, .. } => {
                breakpoints.last().copied().unwrap_or(0.0)
            }
            ControlStrategy::SingleLockdown { start, duration, .. } => start + duration,
            ControlStrategy::MaintainFeedback { end, .. } => end,
            ControlStrategy::WaitMaintainSuppressRelax { t3, .. } => t3,
            ControlStrategy::ReffThreshold { end, .. } => end,
        }
    }

    /// Upper bound on every value the strategy can take.
    pub fn level_bound(&self) -> f64 {
        match *self {
            ControlStrategy::Zero => 0.0,
            ControlStrategy::PiecewiseConstant { ref levels, .. } => {
                levels.iter().copied().fold(0.0, f64::max)
            }
            ControlStrategy::SingleLockdown { level, .. } => level,
            ControlStrategy::MaintainFeedback { cap, .. } => cap,
            ControlStrategy::WaitMaintainSuppressRelax { suppress_level, cap, .. } => {
                suppress_level.max(cap)
            }
            ControlStrategy::ReffThreshold { level, .. } => level,
        }
    }

    /// Times at which the strategy may switch discontinuously, sorted.
    pub fn switch_times(&self) -> Vec<f64> {
        match *self {
            ControlStrategy::Zero => Vec::new(),
            ControlStrategy::PiecewiseConstant { ref breakpoints, .. } => breakpoints.clone(),
            ControlStrategy::SingleLockdown { start, duration, .. } => vec![start, start + duration],
            ControlStrategy::MaintainFeedback { start, end, .. }
            | ControlStrategy::ReffThreshold { start, end, .. } => {
                if end.is_finite() {
                    vec![start, end]
                } else {
                    vec![start]
                }
            }
            ControlStrategy::WaitMaintainSuppressRelax { t1, t2, t3, .. } => vec![t1, t2, t3],
        }
    }

    /// `u(t)` given the current state.
    ///
    /// A `MaintainFeedback` budget depends on the accumulated cost along the
    /// path and is therefore only enforced during integration.
    pub fn evaluate(&self, params: &EpidemicParams, t: f64, state: &EpidemicState) -> f64 {
        let inside = |a: f64, b: f64| t > a && t <= b;
        match *self {
            ControlStrategy::Zero => 0.0,
            ControlStrategy::PiecewiseConstant { ref breakpoints, ref levels } => {
                piecewise_level(breakpoints, levels, t, true)
            }
            ControlStrategy::SingleLockdown { start, duration, level } => {
                if inside(start, start + duration) {
                    level
                } else {
                    0.0
                }
            }
            ControlStrategy::MaintainFeedback { start, end, cap, .. } => {
                if inside(start, end) {
                    maintain_level(params, state.s, cap)
                } else {
                    0.0
                }
            }
            ControlStrategy::WaitMaintainSuppressRelax { t1, t2, t3, suppress_level, cap } => {
                if inside(t1, t2) {
                    maintain_level(params, state.s, cap)
                } else if inside(t2, t3) {
                    suppress_level
                } else {
                    0.0
                }
            }
            ControlStrategy::ReffThreshold { start, end, level, threshold } => {
                if inside(start, end) && params.r0() * state.s > threshold {
                    level
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_a^b u(t) dt` for open-loop strategies.
    pub fn open_loop_integral(&self, a: f64, b: f64) -> Option<f64> {
        let overlap = |lo: f64, hi: f64| (hi.min(b) - lo.max(a)).max(0.0);
        match *self {
            ControlStrategy::Zero => Some(0.0),
            ControlStrategy::PiecewiseConstant { ref breakpoints, ref levels } => Some(
                breakpoints
                    .windows(2)
                    .zip(levels)
                    .map(|(w, &l)| l * overlap(w[0], w[1]))
                    .sum(),
            ),
            ControlStrategy::SingleLockdown { start, duration, level } => {
                Some(level * overlap(start, start + duration))
            }
            _ => None,
        }
    }

    /// Closed-form costs for open-loop strategies.
    pub fn open_loop_costs(&self) -> Option<CostReport> {
        match *self {
            ControlStrategy::Zero => Some(CostReport::ZERO),
            ControlStrategy::PiecewiseConstant { ref breakpoints, ref levels } => {
                let mut report = CostReport::ZERO;
                for (w, &l) in breakpoints.windows(2).zip(levels) {
                    let len = w[1] - w[0];
                    report.l1 += l * len;
                    if l > 0.0 {
                        report.l0 += len;
                        report.sup = report.sup.max(l);
                    }
                }
                Some(report)
            }
            ControlStrategy::SingleLockdown { duration, level, .. } => Some(CostReport {
                l1: level * duration,
                l0: duration,
                sup: level,
            }),
            _ => None,
        }
    }
}

/// Level of a piecewise-constant control at `t`. With `left_open` the value
/// on a breakpoint belongs to the segment ending there.
pub(crate) fn piecewise_level(breakpoints: &[f64], levels: &[f64], t: f64, left_open: bool) -> f64 {
    let idx = if left_open {
        breakpoints.partition_point(|&b| b < t)
    } else {
        breakpoints.partition_point(|&b| b <= t)
    };
    if idx == 0 || idx > levels.len() {
        0.0
    } else {
        levels[idx - 1]
    }
}

/// Cost functionals of `control` for the given epidemic.
///
/// Open-loop strategies use closed forms. Feedback strategies are
/// integrated together with the epidemic until the control is spent.
pub fn costs(
    control: &ControlStrategy,
    params: &EpidemicParams,
    initial: &EpidemicState,
    options: &SolverOptions,
) -> Result<CostReport> {
    control.validate()?;
    if let Some(report) = control.open_loop_costs() {
        return Ok(report);
    }
    if !control.support_end().is_finite() {
        return Err(Error::UnboundedCost);
    }
    Ok(sir::integrate_through_support(params, initial, control, options)?.costs())
}

/// Control law in force on one integration sub-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Law {
    Constant(f64),
    Maintain { cap: f64 },
}

impl Law {
    pub(crate) fn level(&self, params: &EpidemicParams, s: f64) -> f64 {
        match *self {
            Law::Constant(c) => c,
            Law::Maintain { cap } => maintain_level(params, s, cap),
        }
    }
}

/// State events that end a feedback phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Event {
    /// `beta S / gamma` falls to `ratio`.
    Release { ratio: f64 },
    /// Accumulated cost reaches the budget.
    BudgetSpent { budget: f64 },
}

impl Event {
    /// Positive before the event, non-positive once it has happened.
    pub(crate) fn indicator(&self, params: &EpidemicParams, s: f64, cost: f64) -> f64 {
        match *self {
            Event::Release { ratio } => params.r0() * s - ratio,
            Event::BudgetSpent { budget } => budget - cost,
        }
    }
}

/// Per-run phase bookkeeping for a strategy.
#[derive(Debug)]
pub(crate) struct ControlRuntime<'a> {
    control: &'a ControlStrategy,
    released: bool,
    exhausted: bool,
}

impl<'a> ControlRuntime<'a> {
    pub(crate) fn new(control: &'a ControlStrategy) -> Self {
        Self { control, released: false, exhausted: false }
    }

    /// Law on the sub-interval `(a, b)`, which contains no switch time.
    pub(crate) fn law(&mut self, params: &EpidemicParams, a: f64, b: f64, s: f64, cost: f64) -> Law {
        let m = 0.5 * (a + b);
        let inside = |lo: f64, hi: f64| m > lo && m < hi;
        match *self.control {
            ControlStrategy::Zero => Law::Constant(0.0),
            ControlStrategy::PiecewiseConstant { ref breakpoints, ref levels } => {
                Law::Constant(piecewise_level(breakpoints, levels, m, true))
            }
            ControlStrategy::SingleLockdown { start, duration, level } => {
                Law::Constant(if inside(start, start + duration) { level } else { 0.0 })
            }
            ControlStrategy::MaintainFeedback { start, end, budget, cap } => {
                if !inside(start, end) || self.released || self.exhausted {
                    return Law::Constant(0.0);
                }
                if params.r0() * s <= 1.0 {
                    self.released = true;
                    return Law::Constant(0.0);
                }
                if budget.is_some_and(|b| cost >= b) {
                    self.exhausted = true;
                    return Law::Constant(0.0);
                }
                Law::Maintain { cap }
            }
            ControlStrategy::WaitMaintainSuppressRelax { t1, t2, t3, suppress_level, cap } => {
                if inside(t1, t2) {
                    if self.released || params.r0() * s <= 1.0 {
                        self.released = true;
                        Law::Constant(0.0)
                    } else {
                        Law::Maintain { cap }
                    }
                } else if inside(t2, t3) {
                    Law::Constant(suppress_level)
                } else {
                    Law::Constant(0.0)
                }
            }
            ControlStrategy::ReffThreshold { start, end, level, threshold } => {
                if !inside(start, end) || self.released {
                    return Law::Constant(0.0);
                }
                if params.r0() * s <= threshold {
                    self.released = true;
                    return Law::Constant(0.0);
                }
                Law::Constant(level)
            }
        }
    }

    /// Events that can end the current phase while `law` is in force.
    pub(crate) fn watched(&self, law: Law) -> [Option<Event>; 2] {
        match (self.control, law) {
            (ControlStrategy::MaintainFeedback { budget, .. }, Law::Maintain { .. }) => [
                Some(Event::Release { ratio: 1.0 }),
                budget.map(|budget| Event::BudgetSpent { budget }),
            ],
            (ControlStrategy::WaitMaintainSuppressRelax { .. }, Law::Maintain { .. }) => {
                [Some(Event::Release { ratio: 1.0 }), None]
            }
            (ControlStrategy::ReffThreshold { threshold, .. }, Law::Constant(c)) if c > 0.0 => {
                [Some(Event::Release { ratio: *threshold }), None]
            }
            _ => [None, None],
        }
    }

    pub(crate) fn fire(&mut self, event: Event) {
        match event {
            Event::Release { .. } => self.released = true,
            Event::BudgetSpent { .. } => self.exhausted = true,
        }
    }

    /// True once `u` is known to stay zero from `t` on.
    pub(crate) fn finished(&self, t: f64) -> bool {
        if t >= self.control.support_end() {
            return true;
        }
        match *self.control {
            ControlStrategy::MaintainFeedback { .. } | ControlStrategy::ReffThreshold { .. } => {
                self.released || self.exhausted
            }
            _ => false,
        }
    }
}
