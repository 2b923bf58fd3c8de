//! Data and plots for the four standard figures.
//!
//! - `fig1`: minimum incidence and optimal start over budgets and levels.
//! - `fig2`: incidence of a 20-day lockdown at level 0.75 by start time.
//! - `fig3`: the optimal 20-day lockdown against the same lockdown started
//!   seven days earlier, and the best 27-day lockdown.
//! - `fig4`: optimal lockdown, peak-minimising strategy and no control.

use std::io::Write;
use std::path::{Path, PathBuf};

use lockdown_core::{
    budget_level_scan, calibrate_peak_min, incidence_bounds, integrate, optimal_lockdown, peak_prevalence,
    start_time_sweep, total_incidence, ControlStrategy, SolverOptions, Trajectory,
};
use serde_json::{json, Value};

use crate::commands::write_file;
use crate::error::Result;
use crate::plot::{render_svg, Panel, Series};
use crate::scenario::Scenario;
use crate::FigureName;

const FIG1_BUDGETS: [f64; 3] = [7.5, 15.0, 30.0];
const LEVEL: f64 = 0.75;
const BUDGET: f64 = 15.0;
/// Spacing of exported time-series rows, in days.
const SERIES_SPACING: f64 = 0.1;

pub fn render(name: FigureName, scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    match name {
        FigureName::Fig1 => fig1(scenario, out, tol),
        FigureName::Fig2 => fig2(scenario, out, tol),
        FigureName::Fig3 => fig3(scenario, out, tol),
        FigureName::Fig4 => fig4(scenario, out, tol),
    }
}

fn svg(out: &Path, name: &str, panels: &[Panel]) -> Result<PathBuf> {
    crate::commands::ensure_dir(out)?;
    let path = out.join(name);
    render_svg(&path, panels)?;
    Ok(path)
}

fn fig1(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (p, s0, opts) = (&scenario.params, &scenario.initial, &scenario.solver);
    let levels: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let scan = budget_level_scan(p, s0, &FIG1_BUDGETS, &levels, tol, opts)?;
    let bounds = incidence_bounds(p, s0)?;
    let table = write_file(out, "fig1.csv", |w| scan.write_csv(w))?;

    let per_budget = |pick: fn(&lockdown_core::ScanRow) -> f64| -> Vec<Series> {
        FIG1_BUDGETS
            .iter()
            .map(|&c1| {
                let pts = scan.rows.iter().filter(|r| r.c1 == c1).map(|r| (r.c_inf, pick(r))).collect();
                Series::new(format!("c1 = {c1}"), pts)
            })
            .collect()
    };
    let plot = svg(
        out,
        "fig1.svg",
        &[
            Panel {
                title: "Minimum total incidence".into(),
                x_label: "maximum level c_inf".into(),
                y_label: "total incidence".into(),
                series: per_budget(|r| r.incidence),
                reference: vec![bounds.lower, bounds.upper],
            },
            Panel {
                title: "Optimal start time".into(),
                x_label: "maximum level c_inf".into(),
                y_label: "start (days)".into(),
                series: per_budget(|r| r.start),
                reference: vec![],
            },
        ],
    )?;
    Ok(json!({
        "figure": "fig1",
        "rows": scan.rows.len(),
        "lower_bound": bounds.lower,
        "upper_bound": bounds.upper,
        "table": table,
        "plot": plot,
    }))
}

fn fig2(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (p, s0, opts) = (&scenario.params, &scenario.initial, &scenario.solver);
    let duration = BUDGET / LEVEL;
    let starts: Vec<f64> = (0..=600).map(|k| k as f64 / 10.0).collect();
    let curve = start_time_sweep(p, s0, LEVEL, duration, &starts, opts)?;
    let best = optimal_lockdown(p, s0, BUDGET, LEVEL, tol, opts)?;
    let bounds = incidence_bounds(p, s0)?;

    let table = write_file(out, "fig2.csv", |w| {
        writeln!(w, "start,incidence")?;
        for (s, j) in &curve {
            writeln!(w, "{s:.16e},{j:.16e}")?;
        }
        Ok(())
    })?;
    let summary = write_summary(out, "fig2_summary.csv", &[("optimal", best.strategy(), best.incidence, best.peak)])?;
    let plot = svg(
        out,
        "fig2.svg",
        &[Panel {
            title: format!("Lockdown of {duration} days at level {LEVEL}"),
            x_label: "start time (days)".into(),
            y_label: "total incidence".into(),
            series: vec![Series::new("incidence", curve)],
            reference: vec![bounds.lower, bounds.upper],
        }],
    )?;
    Ok(json!({
        "figure": "fig2",
        "optimal_start": best.start_time,
        "optimal_incidence": best.incidence,
        "table": table,
        "summary": summary,
        "plot": plot,
    }))
}

/// Every `SERIES_SPACING` days of each trajectory, side by side.
fn write_series(out: &Path, name: &str, labels: &[&str], runs: &[Trajectory], s0: f64) -> Result<PathBuf> {
    let stride = (SERIES_SPACING / runs[0].step()).round().max(1.0) as usize;
    write_file(out, name, |w| {
        write!(w, "t")?;
        for l in labels {
            write!(w, ",I_{l},cumulative_{l},u_{l}")?;
        }
        writeln!(w)?;
        for k in (0..runs[0].samples().len()).step_by(stride) {
            write!(w, "{:.16e}", runs[0].samples()[k].t)?;
            for tr in runs {
                let smp = &tr.samples()[k];
                write!(w, ",{:.16e},{:.16e},{:.16e}", smp.state.i, 1.0 - smp.state.s / s0, smp.u)?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

fn write_summary(out: &Path, name: &str, rows: &[(&str, ControlStrategy, f64, f64)]) -> Result<PathBuf> {
    write_file(out, name, |w| {
        writeln!(w, "strategy,kind,incidence,peak")?;
        for (label, strategy, incidence, peak) in rows {
            writeln!(w, "{label},{},{incidence:.16e},{peak:.16e}", strategy.kind_name())?;
        }
        Ok(())
    })
}

fn series_panels(title: &str, labels: &[&str], runs: &[Trajectory], s0: f64) -> Vec<Panel> {
    let pick = |f: &dyn Fn(&lockdown_core::Sample) -> f64| -> Vec<Series> {
        labels
            .iter()
            .zip(runs)
            .map(|(l, tr)| Series::new(*l, tr.samples().iter().step_by(10).map(|s| (s.t, f(s))).collect()))
            .collect()
    };
    vec![
        Panel {
            title: title.into(),
            x_label: "time (days)".into(),
            y_label: "prevalence I".into(),
            series: pick(&|s| s.state.i),
            reference: vec![],
        },
        Panel {
            title: "Cumulative incidence".into(),
            x_label: "time (days)".into(),
            y_label: "1 - S/S(0)".into(),
            series: pick(&|s| 1.0 - s.state.s / s0),
            reference: vec![],
        },
        Panel {
            title: "Intervention level".into(),
            x_label: "time (days)".into(),
            y_label: "u".into(),
            series: pick(&|s| s.u),
            reference: vec![],
        },
    ]
}

fn fig3(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (p, s0, opts) = (&scenario.params, &scenario.initial, &scenario.solver);
    let best20 = optimal_lockdown(p, s0, BUDGET, LEVEL, tol, opts)?;
    let long = best20.duration + 7.0;
    let early = ControlStrategy::single_lockdown(best20.start_time - 7.0, long, LEVEL)?;
    let best27 = optimal_lockdown(p, s0, LEVEL * long, LEVEL, tol, opts)?;
    let strategies = [best20.strategy(), early, best27.strategy()];
    let labels = ["optimal_20_day", "early_27_day", "optimal_27_day"];
    let series_opts = SolverOptions { horizon: 150.0, ..*opts };
    let runs = strategies.iter().map(|u| integrate(p, s0, u, &series_opts)).collect::<lockdown_core::Result<Vec<_>>>()?;
    let incidences = strategies
        .iter()
        .map(|u| total_incidence(p, s0, u, opts))
        .collect::<lockdown_core::Result<Vec<_>>>()?;

    let table = write_series(out, "fig3.csv", &labels, &runs, s0.s)?;
    let rows: Vec<_> = labels
        .iter()
        .zip(&strategies)
        .zip(incidences.iter().zip(&runs))
        .map(|((l, u), (j, tr))| (*l, u.clone(), *j, peak_prevalence(tr)))
        .collect();
    let summary = write_summary(out, "fig3_summary.csv", &rows)?;
    let plot = svg(out, "fig3.svg", &series_panels("Starting too early", &labels, &runs, s0.s))?;
    Ok(json!({
        "figure": "fig3",
        "incidence": { "optimal_20_day": incidences[0], "early_27_day": incidences[1], "optimal_27_day": incidences[2] },
        "table": table,
        "summary": summary,
        "plot": plot,
    }))
}

fn fig4(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (p, s0, opts) = (&scenario.params, &scenario.initial, &scenario.solver);
    let best = optimal_lockdown(p, s0, BUDGET, LEVEL, tol, opts)?;
    let peak_min = calibrate_peak_min(p, s0, BUDGET, 1e-6, opts)?;
    let strategies = [best.strategy(), peak_min.strategy.clone(), ControlStrategy::Zero];
    let labels = ["optimal_lockdown", "peak_minimising", "no_control"];
    let series_opts = SolverOptions { horizon: 200.0, ..*opts };
    let runs = strategies.iter().map(|u| integrate(p, s0, u, &series_opts)).collect::<lockdown_core::Result<Vec<_>>>()?;
    let incidences = [best.incidence, peak_min.incidence, total_incidence(p, s0, &ControlStrategy::Zero, opts)?];

    let table = write_series(out, "fig4.csv", &labels, &runs, s0.s)?;
    let rows: Vec<_> = labels
        .iter()
        .zip(&strategies)
        .zip(incidences.iter().zip(&runs))
        .map(|((l, u), (j, tr))| (*l, u.clone(), *j, peak_prevalence(tr)))
        .collect();
    let summary = write_summary(out, "fig4_summary.csv", &rows)?;
    let plot = svg(out, "fig4.svg", &series_panels("Three strategies", &labels, &runs, s0.s))?;
    Ok(json!({
        "figure": "fig4",
        "peak": { "optimal_lockdown": rows[0].3, "peak_minimising": rows[1].3, "no_control": rows[2].3 },
        "incidence": { "optimal_lockdown": incidences[0], "peak_minimising": incidences[1], "no_control": incidences[2] },
        "peak_minimising": { "start": peak_min.start, "duration": peak_min.duration, "cost": peak_min.cost },
        "table": table,
        "summary": summary,
        "plot": plot,
    }))
}
