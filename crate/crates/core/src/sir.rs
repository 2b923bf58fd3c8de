//! Controlled SIR dynamics
//!
//! ```text
//! S' = -(1 - u) beta S I
//! I' =  (1 - u) beta S I - gamma I
//! R' =  gamma I
//! ```
//!
//! integrated with the classical fixed-step RK4 scheme. Samples are taken
//! on the uniform grid `t_k = k * step`. Switch times of the control that
//! fall inside a grid step split it into sub-steps, and state events of
//! feedback controls (herd immunity reached, budget spent) are located by
//! bisection on the sub-step length, so discontinuities in `u` never sit
//! inside an RK4 stage.
//!
//! The accumulated control cost `int u dt` is integrated as a fourth
//! component alongside `(S, I, R)`.

use std::io::{self, Write};

use crate::controls::{ControlRuntime, ControlStrategy, CostReport, Law};
use crate::error::{Error, Result};
use crate::model::{EpidemicParams, EpidemicState};
use crate::special::final_size;

/// Fixed-step solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Integration step and sample spacing, in days.
    pub step: f64,
    /// Largest simulated time, in days.
    pub horizon: f64,
    /// Infectious share below which an epidemic counts as over.
    pub extinction_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { step: 0.01, horizon: 1000.0, extinction_threshold: 1e-12 }
    }
}

impl SolverOptions {
    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    pub fn with_horizon(self, horizon: f64) -> Self {
        Self { horizon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidOptions(format!("step = {} must be > 0", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidOptions(format!("horizon = {} must be > 0", self.horizon)));
        }
        if !(self.extinction_threshold > 0.0 && self.extinction_threshold < 1.0) {
            return Err(Error::InvalidOptions(format!(
                "extinction_threshold = {} must lie in (0, 1)",
                self.extinction_threshold
            )));
        }
        Ok(())
    }

    /// Number of grid steps needed to reach `t`.
    pub(crate) fn steps_to(&self, t: f64) -> usize {
        (t / self.step - 1e-9).ceil().max(0.0) as usize
    }
}

/// One grid point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: EpidemicState,
    /// Control level in force on the step ending at `t`.
    pub u: f64,
    /// `int_0^t u ds`.
    pub cost: f64,
}

/// Time-sampled solution of the controlled dynamics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: EpidemicParams,
    step: f64,
    samples: Vec<Sample>,
    active_time: f64,
    max_level: f64,
}

impl Trajectory {
    pub fn params(&self) -> &EpidemicParams {
        &self.params
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Final sampled time.
    pub fn horizon(&self) -> f64 {
        self.last().t
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// Cost functionals of the control realised along this trajectory.
    pub fn costs(&self) -> CostReport {
        CostReport { l1: self.last().cost, l0: self.active_time, sup: self.max_level }
    }

    /// Writes `t,S,I,R,u` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,S,I,R,u")?;
        for smp in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                smp.t, smp.state.s, smp.state.i, smp.state.r, smp.u
            )?;
        }
        Ok(())
    }
}

/// `(S, I, R, cost)`.
type Ext = [f64; 4];

fn ext(state: &EpidemicState) -> Ext {
    [state.s, state.i, state.r, 0.0]
}

fn to_state(x: &Ext) -> EpidemicState {
    EpidemicState { s: x[0], i: x[1], r: x[2] }
}

fn rhs(params: &EpidemicParams, law: Law, x: &Ext) -> (Ext, f64) {
    let u = law.level(params, x[0]);
    let infection = (1.0 - u) * params.beta() * x[0] * x[1];
    let recovery = params.gamma() * x[1];
    ([-infection, infection - recovery, recovery, u], u)
}

fn axpy(x: &Ext, a: f64, k: &Ext) -> Ext {
    [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2], x[3] + a * k[3]]
}

/// One classical RK4 step; also returns the largest stage control level.
fn rk4(params: &EpidemicParams, law: Law, x: &Ext, dt: f64) -> (Ext, f64) {
    let (k1, u1) = rhs(params, law, x);
    let (k2, u2) = rhs(params, law, &axpy(x, 0.5 * dt, &k1));
    let (k3, u3) = rhs(params, law, &axpy(x, 0.5 * dt, &k2));
    let (k4, u4) = rhs(params, law, &axpy(x, dt, &k3));
    let mut out = *x;
    for j in 0..4 {
        out[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    (out, u1.max(u2).max(u3).max(u4))
}

fn check_finite(x: &Ext, t: f64) -> Result<()> {
    let tol = -1e-9;
    if x.iter().all(|v| v.is_finite()) && x[0] >= tol && x[1] >= tol {
        Ok(())
    } else {
        Err(Error::IntegrationDiverged { t })
    }
}

/// Steps the extended state across the sample grid for one control.
struct Engine<'a> {
    params: &'a EpidemicParams,
    runtime: ControlRuntime<'a>,
    switches: Vec<f64>,
    next_switch: usize,
    step: f64,
    active_time: f64,
    max_level: f64,
    last_law: Law,
}

impl<'a> Engine<'a> {
    fn new(params: &'a EpidemicParams, control: &'a ControlStrategy, step: f64) -> Self {
        Self {
            params,
            runtime: ControlRuntime::new(control),
            switches: control.switch_times(),
            next_switch: 0,
            step,
            active_time: 0.0,
            max_level: 0.0,
            last_law: Law::Constant(0.0),
        }
    }

    fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Advances `x` from `t_k` to `t_{k+1}`.
    fn advance(&mut self, k: usize, x: &mut Ext) -> Result<()> {
        let a = self.time(k);
        let b = self.time(k + 1);
        // Switch times this close to a grid point are treated as on it.
        let eps = 1e-9 * self.step;
        while self.next_switch < self.switches.len() && self.switches[self.next_switch] <= a + eps {
            self.next_switch += 1;
        }
        let mut p = a;
        while self.next_switch < self.switches.len() && self.switches[self.next_switch] < b - eps {
            let q = self.switches[self.next_switch];
            self.substep(p, q, x)?;
            p = q;
            self.next_switch += 1;
        }
        self.substep(p, b, x)
    }

    /// Integrates across `[a, b]`, which holds no switch time, stopping at
    /// state events.
    fn substep(&mut self, a: f64, b: f64, x: &mut Ext) -> Result<()> {
        let params = self.params;
        let mut p = a;
        loop {
            let dt = b - p;
            if dt <= 0.0 {
                return Ok(());
            }
            let law = self.runtime.law(params, p, b, x[0], x[3]);
            self.last_law = law;
            let (trial, umax) = rk4(params, law, x, dt);
            check_finite(&trial, b)?;

            let mut hit = None;
            for event in self.runtime.watched(law).into_iter().flatten() {
                let before = event.indicator(params, x[0], x[3]);
                let after = event.indicator(params, trial[0], trial[3]);
                if before > 0.0 && after <= 0.0 {
                    let (mut lo, mut hi) = (0.0, dt);
                    for _ in 0..64 {
                        let mid = 0.5 * (lo + hi);
                        let (xm, _) = rk4(params, law, x, mid);
                        if event.indicator(params, xm[0], xm[3]) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    if hit.is_none_or(|(tau, _)| hi < tau) {
                        hit = Some((hi, event));
                    }
                }
            }

            match hit {
                None => {
                    *x = trial;
                    self.account(dt, umax);
                    return Ok(());
                }
                Some((tau, event)) => {
                    let (xe, um) = rk4(params, law, x, tau);
                    *x = xe;
                    self.account(tau, um);
                    self.runtime.fire(event);
                    p += tau;
                }
            }
        }
    }

    fn account(&mut self, dt: f64, umax: f64) {
        if umax > 0.0 {
            self.active_time += dt;
            self.max_level = self.max_level.max(umax);
        }
    }

    fn level(&self, x: &Ext) -> f64 {
        self.last_law.level(self.params, x[0])
    }
}

/// When a run may stop before its end time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Until {
    /// Run to the end time.
    EndTime,
    /// Stop once the control has been switched off for good.
    ControlDone,
    /// Stop once the control is done and prevalence is below the threshold.
    Extinction(f64),
}

pub(crate) struct Run {
    pub samples: Vec<Sample>,
    pub last: Sample,
    pub active_time: f64,
    pub max_level: f64,
    pub control_done: bool,
}

/// Integrates from grid index `k0` (state `start`) up to `t_end`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run(
    params: &EpidemicParams,
    control: &ControlStrategy,
    step: f64,
    k0: usize,
    start: &EpidemicState,
    n_end: usize,
    until: Until,
    record: bool,
) -> Result<Run> {
    let mut engine = Engine::new(params, control, step);
    let mut x = ext(start);
    let t0 = engine.time(k0);
    let mut last = Sample { t: t0, state: *start, u: control.evaluate(params, t0, start), cost: 0.0 };
    let mut samples = Vec::new();
    if record {
        samples.reserve(n_end.saturating_sub(k0) + 1);
        samples.push(last);
    }
    let mut k = k0;
    loop {
        let done = engine.runtime.finished(last.t);
        let stop = match until {
            Until::EndTime => false,
            Until::ControlDone => done,
            Until::Extinction(threshold) => done && x[1] < threshold,
        };
        if stop || k >= n_end {
            return Ok(Run {
                samples,
                last,
                active_time: engine.active_time,
                max_level: engine.max_level,
                control_done: done,
            });
        }
        engine.advance(k, &mut x)?;
        k += 1;
        last = Sample { t: engine.time(k), state: to_state(&x), u: engine.level(&x), cost: x[3] };
        if record {
            samples.push(last);
        }
    }
}

fn check_inputs(
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<()> {
    initial.validate()?;
    control.validate()?;
    options.validate()
}

fn trajectory(params: &EpidemicParams, step: f64, run: Run) -> Trajectory {
    Trajectory {
        params: *params,
        step,
        samples: run.samples,
        active_time: run.active_time,
        max_level: run.max_level,
    }
}

/// Solution on `[0, horizon]`, sampled every `step` days.
pub fn integrate(
    params: &EpidemicParams,
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<Trajectory> {
    check_inputs(initial, control, options)?;
    let n = options.steps_to(options.horizon).max(1);
    let run = run(params, control, options.step, 0, initial, n, Until::EndTime, true)?;
    Ok(trajectory(params, options.step, run))
}

/// Integrates until the control is done and `I` has fallen below the
/// extinction threshold, or until the horizon.
pub fn integrate_to_extinction(
    params: &EpidemicParams,
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<Trajectory> {
    check_inputs(initial, control, options)?;
    let n = options.steps_to(options.horizon).max(1);
    let until = Until::Extinction(options.extinction_threshold);
    let run = run(params, control, options.step, 0, initial, n, until, true)?;
    Ok(trajectory(params, options.step, run))
}

/// Integrates until the control has been switched off for good.
pub(crate) fn integrate_through_support(
    params: &EpidemicParams,
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<Trajectory> {
    check_inputs(initial, control, options)?;
    let support_end = control.support_end();
    let n = options.steps_to(support_end.min(options.horizon)).max(1);
    let run = run(params, control, options.step, 0, initial, n, Until::ControlDone, true)?;
    if !run.control_done {
        return Err(if support_end.is_finite() {
            Error::HorizonTooShort { support_end, horizon: options.horizon }
        } else {
            Error::UnboundedCost
        });
    }
    Ok(trajectory(params, options.step, run))
}

/// Limiting susceptible share `S_u(inf)` under `control`.
///
/// The dynamics are integrated only until the control is switched off; the
/// remaining uncontrolled epidemic is resolved with the final-size
/// equation.
pub fn final_susceptible(
    params: &EpidemicParams,
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<f64> {
    check_inputs(initial, control, options)?;
    if !(initial.s > 0.0) {
        return Err(Error::InvalidState("S(0) must be > 0".into()));
    }
    let support_end = control.support_end();
    let n = options.steps_to(support_end.min(options.horizon));
    let run = run(params, control, options.step, 0, initial, n, Until::ControlDone, false)?;
    if !run.control_done {
        return Err(Error::HorizonTooShort { support_end, horizon: options.horizon });
    }
    final_size(params, &run.last.state)
}

/// Total incidence `J(u) = 1 - S_u(inf) / S(0)`.
pub fn total_incidence(
    params: &EpidemicParams,
    initial: &EpidemicState,
    control: &ControlStrategy,
    options: &SolverOptions,
) -> Result<f64> {
    let s_inf = final_susceptible(params, initial, control, options)?;
    Ok(1.0 - s_inf / initial.s)
}

/// Peak prevalence `max_t I(t)` over the sampled trajectory.
pub fn peak_prevalence(trajectory: &Trajectory) -> f64 {
    trajectory.samples().iter().map(|smp| smp.state.i).fold(f64::NEG_INFINITY, f64::max)
}

/// First time the uncontrolled epidemic reaches prevalence `level`, or
/// `None` if prevalence peaks below it within the horizon.
pub fn time_to_prevalence(
    params: &EpidemicParams,
    initial: &EpidemicState,
    level: f64,
    options: &SolverOptions,
) -> Result<Option<f64>> {
    initial.validate()?;
    options.validate()?;
    if initial.i >= level {
        return Ok(Some(0.0));
    }
    let zero = ControlStrategy::Zero;
    let mut engine = Engine::new(params, &zero, options.step);
    let mut x = ext(initial);
    let n = options.steps_to(options.horizon);
    for k in 0..n {
        let prev = x;
        engine.advance(k, &mut x)?;
        if x[1] >= level {
            let (mut lo, mut hi) = (0.0, options.step);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let (xm, _) = rk4(params, Law::Constant(0.0), &prev, mid);
                if xm[1] >= level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(engine.time(k) + hi));
        }
        // Past the peak prevalence can only fall.
        if x[1] < prev[1] && x[0] <= params.herd_immunity_threshold() {
            return Ok(None);
        }
    }
    Ok(None)
}
