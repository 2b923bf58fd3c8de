use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lockdown_core::{
    budget_level_scan, costs, herd_immunity_time, integrate, optimal_lockdown, peak_prevalence, total_incidence,
};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::scenario::Scenario;

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })
}

/// Creates `dir/name` and hands a buffered writer to `fill`.
pub(crate) fn write_file<F>(dir: &Path, name: &str, fill: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    ensure_dir(dir)?;
    let path = dir.join(name);
    let wrap = |source| CliError::Write { path: path.clone(), source };
    let mut out = BufWriter::new(File::create(&path).map_err(wrap)?);
    fill(&mut out).and_then(|_| out.flush()).map_err(wrap)?;
    Ok(path)
}

pub fn simulate(scenario: &Scenario, out: &Path) -> Result<Value> {
    let (p, s0, opts) = (&scenario.params, &scenario.initial, &scenario.solver);
    let strategy = scenario.strategy();
    let trajectory = integrate(p, s0, &strategy, opts)?;
    let incidence = total_incidence(p, s0, &strategy, opts)?;
    let cost = costs(&strategy, p, s0, opts)?;
    let path = write_file(out, "trajectory.csv", |w| trajectory.write_csv(w))?;
    Ok(json!({
        "command": "simulate",
        "strategy": strategy.kind_name(),
        "incidence": incidence,
        "peak": peak_prevalence(&trajectory),
        "l1": cost.l1,
        "l0": cost.l0,
        "sup": cost.sup,
        "herd_immunity_time": herd_immunity_time(&trajectory),
        "trajectory": path,
    }))
}

fn single_budget(scenario: &Scenario) -> Result<(f64, f64)> {
    match &scenario.budgets {
        Some((c1, c_inf)) if c1.len() == 1 && c_inf.len() == 1 => Ok((c1[0], c_inf[0])),
        Some(_) => Err(CliError::Invalid("optimize needs exactly one c1 and one c_inf; use scan for grids".into())),
        None => Err(CliError::Invalid("missing [budgets] table with c1 and c_inf".into())),
    }
}

/// Optimises the lockdown start and writes the optimal scenario to
/// `optimal.toml`.
pub fn optimize(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (c1, c_inf) = single_budget(scenario)?;
    let r = optimal_lockdown(&scenario.params, &scenario.initial, c1, c_inf, tol, &scenario.solver)?;
    let mut optimal = scenario.clone();
    optimal.strategy = Some(r.strategy());
    let text = optimal.to_toml();
    let path = write_file(out, "optimal.toml", |w| w.write_all(text.as_bytes()))?;
    Ok(json!({
        "command": "optimize",
        "c1": c1,
        "c_inf": c_inf,
        "start_time": r.start_time,
        "duration": r.duration,
        "incidence": r.incidence,
        "peak": r.peak,
        "evaluations": r.evaluations,
        "bracket": r.bracket,
        "scenario": path,
    }))
}

pub fn scan(scenario: &Scenario, out: &Path, tol: f64) -> Result<Value> {
    let (c1, c_inf) = scenario
        .budgets
        .as_ref()
        .ok_or_else(|| CliError::Invalid("missing [budgets] table with c1 and c_inf".into()))?;
    let result = budget_level_scan(&scenario.params, &scenario.initial, c1, c_inf, tol, &scenario.solver)?;
    let path = write_file(out, "scan.csv", |w| result.write_csv(w))?;
    Ok(json!({ "command": "scan", "rows": result.rows.len(), "table": path }))
}
