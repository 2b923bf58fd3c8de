//! Optimal single-lockdown timing and the comparison strategies.
//!
//! Among all controls with `||u||_1 <= c1` and `||u||_inf <= c_inf`, total
//! incidence is minimised by a single lockdown at level `c_inf` lasting
//! `c1 / c_inf` days. Only its start time is left to search for, and the
//! incidence is unimodal in the start time.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::herd_immunity_time;
use crate::controls::ControlStrategy;
use crate::error::{Error, Result};
use crate::model::{EpidemicParams, EpidemicState};
use crate::sir::{self, integrate, peak_prevalence, time_to_prevalence, SolverOptions, Until};
use crate::special::final_size;

/// Extra search range beyond herd immunity plus one lockdown duration.
const SEARCH_MARGIN_DAYS: f64 = 50.0;

/// Iteration cap for the peak-level bisection.
const CALIBRATION_ITERATIONS: usize = 60;

/// Optimal single lockdown for a budget and a maximum level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub start_time: f64,
    pub duration: f64,
    pub level: f64,
    pub incidence: f64,
    pub peak: f64,
    /// Number of incidence evaluations spent by the search.
    pub evaluations: usize,
    /// Width of the final golden-section bracket, in days.
    pub bracket: f64,
}

impl OptimizationResult {
    /// The optimal strategy; `Zero` when the budget is empty.
    pub fn strategy(&self) -> ControlStrategy {
        if self.duration > 0.0 {
            ControlStrategy::SingleLockdown {
                start: self.start_time,
                duration: self.duration,
                level: self.level,
            }
        } else {
            ControlStrategy::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub c1: f64,
    pub c_inf: f64,
    pub start: f64,
    pub incidence: f64,
}

/// Optimal incidence over a grid of budgets and maximum levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// Writes `c1,c_inf,start,incidence` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "c1,c_inf,start,incidence")?;
        for row in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                row.c1, row.c_inf, row.start, row.incidence
            )?;
        }
        Ok(())
    }
}

/// Calibrated wait-maintain-relax strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakMinCalibration {
    /// Time at which the maintain phase begins.
    pub start: f64,
    /// Length of the maintain phase.
    pub duration: f64,
    /// Prevalence held during the maintain phase.
    pub level: f64,
    pub peak: f64,
    pub incidence: f64,
    /// Realised `||u||_1`.
    pub cost: f64,
    pub strategy: ControlStrategy,
}

/// Incidence of lockdowns of fixed shape as a function of their start.
///
/// The uncontrolled prefix is integrated once; each evaluation resumes from
/// the grid sample at or just before the start time.
struct LockdownObjective<'a> {
    params: &'a EpidemicParams,
    initial: EpidemicState,
    step: f64,
    prefix: Vec<EpidemicState>,
    duration: f64,
    level: f64,
}

impl<'a> LockdownObjective<'a> {
    fn new(
        params: &'a EpidemicParams,
        initial: &EpidemicState,
        step: f64,
        duration: f64,
        level: f64,
        latest_start: f64,
    ) -> Result<Self> {
        let opts = SolverOptions::default().with_step(step);
        let n = opts.steps_to(latest_start) + 1;
        let zero = ControlStrategy::Zero;
        let run = sir::run(params, &zero, step, 0, initial, n, Until::EndTime, true)?;
        let prefix = run.samples.into_iter().map(|smp| smp.state).collect();
        Ok(Self { params, initial: *initial, step, prefix, duration, level })
    }

    fn incidence(&self, start: f64) -> Result<f64> {
        let k = ((start / self.step + 1e-9).floor().max(0.0) as usize).min(self.prefix.len() - 1);
        let control = ControlStrategy::single_lockdown(start, self.duration, self.level)?;
        let opts = SolverOptions::default().with_step(self.step);
        let n = opts.steps_to(start + self.duration).max(k);
        let run = sir::run(self.params, &control, self.step, k, &self.prefix[k], n, Until::ControlDone, false)?;
        let s_inf = final_size(self.params, &run.last.state)?;
        Ok(1.0 - s_inf / self.initial.s)
    }
}

fn check_initial(params: &EpidemicParams, initial: &EpidemicState) -> Result<()> {
    params.require_outbreak()?;
    initial.validate()?;
    if !(initial.s > 0.0 && initial.i > 0.0) {
        return Err(Error::InvalidState(format!(
            "optimization needs S(0) > 0 and I(0) > 0, got ({}, {})",
            initial.s, initial.i
        )));
    }
    Ok(())
}

/// Herd-immunity time of the uncontrolled epidemic.
fn uncontrolled_herd_immunity_time(
    params: &EpidemicParams,
    initial: &EpidemicState,
    options: &SolverOptions,
) -> Result<f64> {
    let tr = integrate(params, initial, &ControlStrategy::Zero, options)?;
    herd_immunity_time(&tr).ok_or(Error::HorizonTooShort {
        support_end: f64::INFINITY,
        horizon: options.horizon,
    })
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
/// Returns the final bracket.
fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok((lo, hi))
}

/// Best start time for a lockdown at level `c_inf` lasting `c1 / c_inf` days.
///
/// Scans start times on a one-day grid over `[0, t_H + duration + 50]`,
/// where `t_H` is the uncontrolled herd-immunity time, then refines around
/// the best grid point by golden-section search down to `tol` days.
pub fn optimal_lockdown(
    params: &EpidemicParams,
    initial: &EpidemicState,
    c1: f64,
    c_inf: f64,
    tol: f64,
    options: &SolverOptions,
) -> Result<OptimizationResult> {
    check_initial(params, initial)?;
    options.validate()?;
    if !(c1.is_finite() && c1 >= 0.0) {
        return Err(Error::InvalidControl(format!("budget c1 = {c1} must be finite and >= 0")));
    }
    if !(c_inf > 0.0 && c_inf <= 1.0) {
        return Err(Error::InvalidControl(format!("level c_inf = {c_inf} outside (0, 1]")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidOptions(format!("tolerance {tol} must be > 0")));
    }

    if c1 == 0.0 {
        let zero = ControlStrategy::Zero;
        let incidence = sir::total_incidence(params, initial, &zero, options)?;
        let peak = peak_prevalence(&integrate(params, initial, &zero, options)?);
        return Ok(OptimizationResult {
            start_time: 0.0,
            duration: 0.0,
            level: c_inf,
            incidence,
            peak,
            evaluations: 1,
            bracket: 0.0,
        });
    }

    let duration = c1 / c_inf;
    let t_h = uncontrolled_herd_immunity_time(params, initial, options)?;
    let latest = t_h + duration + SEARCH_MARGIN_DAYS;
    let objective = LockdownObjective::new(params, initial, options.step, duration, c_inf, latest)?;

    let grid_len = latest.ceil() as usize + 1;
    let mut evaluations = 0;
    let mut best = (0.0, f64::INFINITY);
    for j in 0..grid_len {
        let start = j as f64;
        let value = objective.incidence(start)?;
        evaluations += 1;
        if value < best.1 {
            best = (start, value);
        }
    }

    let lo = (best.0 - 1.0).max(0.0);
    let hi = (best.0 + 1.0).min((grid_len - 1) as f64);
    let (lo, hi) = golden_section(
        |s| {
            evaluations += 1;
            objective.incidence(s)
        },
        lo,
        hi,
        tol,
    )?;
    let mid = 0.5 * (lo + hi);
    let at_mid = objective.incidence(mid)?;
    evaluations += 1;
    let (start_time, incidence) = if at_mid <= best.1 { (mid, at_mid) } else { best };

    let strategy = ControlStrategy::single_lockdown(start_time, duration, c_inf)?;
    let peak_opts = options.with_horizon(options.horizon.max(start_time + duration + 100.0));
    let peak = peak_prevalence(&integrate(params, initial, &strategy, &peak_opts)?);

    Ok(OptimizationResult {
        start_time,
        duration,
        level: c_inf,
        incidence,
        peak,
        evaluations,
        bracket: hi - lo,
    })
}

/// Incidence of a lockdown of fixed level and duration for each start time.
pub fn start_time_sweep(
    params: &EpidemicParams,
    initial: &EpidemicState,
    level: f64,
    duration: f64,
    starts: &[f64],
    options: &SolverOptions,
) -> Result<Vec<(f64, f64)>> {
    initial.validate()?;
    options.validate()?;
    if !(initial.s > 0.0) {
        return Err(Error::InvalidState("S(0) must be > 0".into()));
    }
    ControlStrategy::single_lockdown(0.0, duration, level)?;
    if let Some(bad) = starts.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::InvalidControl(format!("start = {bad} must be finite and >= 0")));
    }
    let latest = starts.iter().copied().fold(0.0, f64::max);
    let objective = LockdownObjective::new(params, initial, options.step, duration, level, latest)?;
    starts.iter().map(|&s| Ok((s, objective.incidence(s)?))).collect()
}

/// Optimal lockdown for every `(c1, c_inf)` pair, evaluated in parallel.
/// Rows are ordered by `c1` first, then by `c_inf`.
pub fn budget_level_scan(
    params: &EpidemicParams,
    initial: &EpidemicState,
    c1_list: &[f64],
    c_inf_grid: &[f64],
    tol: f64,
    options: &SolverOptions,
) -> Result<ScanResult> {
    if c1_list.is_empty() || c_inf_grid.is_empty() {
        return Err(Error::InvalidOptions("budget and level grids must be nonempty".into()));
    }
    let points: Vec<(f64, f64)> = c1_list
        .iter()
        .flat_map(|&c1| c_inf_grid.iter().map(move |&c_inf| (c1, c_inf)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(c1, c_inf)| {
            let opt = optimal_lockdown(params, initial, c1, c_inf, tol, options)?;
            Ok(ScanRow { c1, c_inf, start: opt.start_time, incidence: opt.incidence })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { rows })
}

/// Summary of the wait-maintain-relax strategy holding prevalence at `level`.
fn maintain_at(
    params: &EpidemicParams,
    initial: &EpidemicState,
    level: f64,
    options: &SolverOptions,
) -> Result<PeakMinCalibration> {
    let start = time_to_prevalence(params, initial, level, options)?.ok_or(Error::HorizonTooShort {
        support_end: f64::INFINITY,
        horizon: options.horizon,
    })?;
    let strategy = ControlStrategy::maintain_feedback(start, options.horizon, None, 1.0)?;
    let tr = sir::integrate_through_support(params, initial, &strategy, options)?;
    let s_inf = final_size(params, &tr.last().state)?;
    let costs = tr.costs();
    Ok(PeakMinCalibration {
        start,
        duration: costs.l0,
        level,
        peak: peak_prevalence(&tr),
        incidence: 1.0 - s_inf / initial.s,
        cost: costs.l1,
        strategy,
    })
}

/// Calibrates the peak-minimising wait-maintain-relax strategy to spend
/// `c1`: wait until prevalence reaches `p`, hold it there with
/// `u = 1 - gamma / (beta S)` until `S` reaches `gamma / beta`, then relax.
///
/// The cost decreases in `p`, so `p` is bisected on `[I(0), peak]` until
/// the cost is within `tol` of `c1`. The maintain phase is cut off at the
/// solver horizon, which bounds the largest affordable cost.
pub fn calibrate_peak_min(
    params: &EpidemicParams,
    initial: &EpidemicState,
    c1: f64,
    tol: f64,
    options: &SolverOptions,
) -> Result<PeakMinCalibration> {
    check_initial(params, initial)?;
    options.validate()?;
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(Error::InvalidControl(format!("budget c1 = {c1} must be finite and > 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidOptions(format!("tolerance {tol} must be > 0")));
    }

    let most = maintain_at(params, initial, initial.i, options)?;
    if most.cost < c1 {
        return Err(Error::BudgetInfeasible { budget: c1, max_cost: most.cost });
    }
    if (most.cost - c1).abs() <= tol {
        return Ok(most);
    }
    let uncontrolled_peak = peak_prevalence(&integrate(params, initial, &ControlStrategy::Zero, options)?);

    let (mut lo, mut hi) = (initial.i, uncontrolled_peak);
    let mut best = most;
    for _ in 0..CALIBRATION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let candidate = maintain_at(params, initial, mid, options)?;
        if candidate.cost > c1 {
            lo = mid;
        } else {
            hi = mid;
        }
        let done = (candidate.cost - c1).abs() <= tol;
        if (candidate.cost - c1).abs() < (best.cost - c1).abs() {
            best = candidate;
        }
        if done {
            break;
        }
    }
    Ok(best)
}
