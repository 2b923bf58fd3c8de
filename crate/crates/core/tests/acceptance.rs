//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so every line is printed even when all pass.

mod common;

use std::process::ExitCode;

use common::{random_any, random_piecewise, rng, table1};
use lockdown_core::{
    calibrate_peak_min, costs, final_susceptible, herd_immunity_time, herd_immunity_time_bound,
    incidence_bounds, integrate, integrate_to_extinction, optimal_lockdown, peak_prevalence, quantize,
    start_time_sweep, total_incidence, ControlStrategy, SolverOptions,
};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn near(name: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    if (got - want).abs() <= tol {
        Ok(format!("{name} = {got:.4}"))
    } else {
        Err(format!("{name} = {got:.6}, expected {want} +/- {tol}"))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    for p in parts {
        ok.push(p?);
    }
    Ok(ok.join(", "))
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn uncontrolled() -> Check {
    let (p, s0) = table1();
    let j = total_incidence(&p, &s0, &ControlStrategy::Zero, &opts()).map_err(|e| e.to_string())?;
    let tr = integrate(&p, &s0, &ControlStrategy::Zero, &opts()).map_err(|e| e.to_string())?;
    all(vec![near("incidence", j, 0.940, 0.001), near("peak", peak_prevalence(&tr), 0.300, 0.002)])
}

fn sandwich() -> Check {
    let (p, s0) = table1();
    let b = incidence_bounds(&p, &s0).map_err(|e| e.to_string())?;
    let mut r = rng(2);
    let mut tested = 0;
    for k in 0..60 {
        let u = random_any(&mut r, k, 40.0);
        let j = total_incidence(&p, &s0, &u, &opts()).map_err(|e| format!("{u:?}: {e}"))?;
        if !b.contains(j, 1e-6) {
            return Err(format!("{u:?} has incidence {j} outside [{}, {}]", b.lower, b.upper));
        }
        tested += 1;
    }
    all(vec![
        near("lower", b.lower, 0.666, 0.001),
        near("upper", b.upper, 0.940, 0.001),
        Ok(format!("{tested} random strategies inside")),
    ])
}

fn optimal_20_day() -> Check {
    let (p, s0) = table1();
    let r = optimal_lockdown(&p, &s0, 15.0, 0.75, 0.01, &opts()).map_err(|e| e.to_string())?;
    all(vec![near("start", r.start_time, 23.6, 0.1), near("incidence", r.incidence, 0.758, 0.002)])
}

fn early_27_day() -> Check {
    let (p, s0) = table1();
    let early = start_time_sweep(&p, &s0, 0.75, 27.0, &[16.6], &opts()).map_err(|e| e.to_string())?[0].1;
    let r = optimal_lockdown(&p, &s0, 20.25, 0.75, 0.01, &opts()).map_err(|e| e.to_string())?;
    all(vec![
        near("incidence(16.6)", early, 0.907, 0.002),
        near("optimal start", r.start_time, 23.4, 0.1),
        near("optimal incidence", r.incidence, 0.723, 0.002),
    ])
}

fn full_lockdown_timing() -> Check {
    let (p, s0) = table1();
    let r = optimal_lockdown(&p, &s0, 30.0, 1.0, 0.01, &opts()).map_err(|e| e.to_string())?;
    let tr = integrate(&p, &s0, &ControlStrategy::Zero, &opts()).map_err(|e| e.to_string())?;
    let t_h = herd_immunity_time(&tr).ok_or("herd immunity not reached")?;
    all(vec![near("start", r.start_time, 24.94, 0.1), near("start - t_H", r.start_time - t_h, 0.0, 0.1)])
}

fn peak_min() -> Check {
    let (p, s0) = table1();
    let c = calibrate_peak_min(&p, &s0, 15.0, 1e-6, &opts()).map_err(|e| e.to_string())?;
    let opt = optimal_lockdown(&p, &s0, 15.0, 0.75, 0.01, &opts()).map_err(|e| e.to_string())?;
    all(vec![
        near("start", c.start, 17.0, 0.3),
        near("duration", c.duration, 36.6, 0.5),
        near("peak", c.peak, 0.075, 0.002),
        near("incidence", c.incidence, 0.843, 0.003),
        near("cost", c.cost, 15.0, 0.05),
        near("lockdown peak", opt.peak, 0.289, 0.002),
    ])
}

fn quantizer() -> Check {
    let (p, s0) = table1();
    let mut r = rng(7);
    for _ in 0..100 {
        let u = random_piecewise(&mut r, 0.0, 60.0, 40.0, 1.0);
        let b = r.gen_range(u.level_bound().max(0.01)..=1.0);
        let h = r.gen_range(0.05..3.0);
        let q = quantize(&u, b, h, 60.0).map_err(|e| e.to_string())?;
        let (lu, lq) = (u.open_loop_costs().unwrap().l1, q.open_loop_costs().unwrap().l1);
        if (lu - lq).abs() > 1e-9 {
            return Err(format!("cost {lq} after quantizing, {lu} before"));
        }
    }
    let t_end = 30.0;
    let o = opts().with_horizon(t_end);
    let mut worst = 0.0f64;
    for h in [1.0, 0.5, 0.1] {
        for _ in 0..10 {
            let u = random_piecewise(&mut r, 0.0, t_end, 30.0, 0.9);
            let b = r.gen_range(u.level_bound().max(0.01)..=1.0);
            let q = quantize(&u, b, h, t_end).map_err(|e| e.to_string())?;
            let a = integrate(&p, &s0, &u, &o).map_err(|e| e.to_string())?;
            let z = integrate(&p, &s0, &q, &o).map_err(|e| e.to_string())?;
            for (x, y) in a.samples().iter().zip(z.samples()) {
                let bound = 3.0 * p.beta() * b * h * ((p.beta() + p.gamma()) * x.t).exp();
                let dev = (x.state.i - y.state.i).abs();
                if dev > bound {
                    return Err(format!("h = {h}: deviation {dev} > {bound} at t = {}", x.t));
                }
                worst = worst.max(dev / bound);
            }
        }
    }
    Ok(format!("cost preserved on 100 controls, trajectory bound holds (worst ratio {worst:.3})"))
}

fn prolongation() -> Check {
    let (p, s0) = table1();
    let mut r = rng(11);
    for _ in 0..100 {
        let t_end = r.gen_range(1.0..80.0);
        let u1 = random_piecewise(&mut r, 0.0, t_end, 60.0, 1.0);
        let ControlStrategy::PiecewiseConstant { mut breakpoints, mut levels } = u1.clone() else {
            unreachable!()
        };
        let t1 = t_end + r.gen_range(0.0..60.0);
        let t2 = t1 + r.gen_range(0.01..60.0);
        let c = r.gen_range(0.01..=1.0);
        if t1 > *breakpoints.last().unwrap() {
            breakpoints.push(t1);
            levels.push(0.0);
        }
        breakpoints.push(t2);
        levels.push(c);
        let u2 = ControlStrategy::piecewise_constant(breakpoints, levels).map_err(|e| e.to_string())?;
        let s1 = final_susceptible(&p, &s0, &u1, &opts()).map_err(|e| e.to_string())?;
        let s2 = final_susceptible(&p, &s0, &u2, &opts()).map_err(|e| e.to_string())?;
        if s1 > s2 + 1e-9 {
            return Err(format!("S1 = {s1} > S2 = {s2} for {u1:?} prolonged by {c} on ({t1}, {t2}]"));
        }
    }
    Ok("100 prolongations never lowered S(inf)".into())
}

fn herd_time_bound() -> Check {
    let (p, s0) = table1();
    let mut r = rng(13);
    let mut tested = 0;
    for k in 0..80 {
        let u = random_any(&mut r, k, 30.0);
        let o = opts().with_horizon(u.support_end().min(400.0) + 200.0);
        let l1 = costs(&u, &p, &s0, &o).map_err(|e| e.to_string())?.l1;
        if l1 > 30.0 {
            continue;
        }
        let tr = integrate(&p, &s0, &u, &o).map_err(|e| e.to_string())?;
        let t_h = herd_immunity_time(&tr).ok_or(format!("{u:?} never reached herd immunity"))?;
        let bound = herd_immunity_time_bound(&p, &s0, l1);
        if t_h > bound {
            return Err(format!("{u:?}: t_H = {t_h} > {bound}"));
        }
        tested += 1;
    }
    if tested < 50 {
        return Err(format!("only {tested} controls within budget"));
    }
    Ok(format!("bound holds on {tested} controls"))
}

fn dominance() -> Check {
    let (p, s0) = table1();
    let (c1, c_inf) = (15.0, 0.75);
    let best = optimal_lockdown(&p, &s0, c1, c_inf, 0.01, &opts()).map_err(|e| e.to_string())?;
    let mut r = rng(17);
    let mut worst_gap = f64::INFINITY;
    for k in 0..24 {
        let u = match k % 4 {
            0 => random_piecewise(&mut r, 0.0, 100.0, c1, c_inf),
            1 => {
                let base = random_piecewise(&mut r, 0.0, 60.0, c1, c_inf);
                quantize(&base, c_inf, r.gen_range(0.2..3.0), 60.0).map_err(|e| e.to_string())?
            }
            2 => ControlStrategy::single_lockdown(r.gen_range(18.0..30.0), c1 / c_inf, c_inf).unwrap(),
            _ => {
                let start = r.gen_range(0.0..40.0);
                ControlStrategy::maintain_feedback(start, start + 300.0, Some(c1), c_inf).unwrap()
            }
        };
        let cr = costs(&u, &p, &s0, &opts()).map_err(|e| e.to_string())?;
        if cr.l1 > c1 + 1e-9 || cr.sup > c_inf + 1e-12 {
            return Err(format!("{u:?} is not feasible: {cr:?}"));
        }
        let j = total_incidence(&p, &s0, &u, &opts()).map_err(|e| e.to_string())?;
        if best.incidence > j + 1e-4 {
            return Err(format!("{u:?} beats the optimum: {j} < {}", best.incidence));
        }
        worst_gap = worst_gap.min(j - best.incidence);
    }
    Ok(format!("optimum {:.4} beats 24 strategies (closest margin {worst_gap:.2e})", best.incidence))
}

fn numerics() -> Check {
    let (p, s0) = table1();
    let fine = opts().with_step(0.005);
    let cal = calibrate_peak_min(&p, &s0, 15.0, 1e-10, &opts()).map_err(|e| e.to_string())?;
    let controls = vec![
        ControlStrategy::Zero,
        ControlStrategy::single_lockdown(23.6, 20.0, 0.75).unwrap(),
        ControlStrategy::single_lockdown(16.6, 27.0, 0.75).unwrap(),
        ControlStrategy::single_lockdown(24.94, 30.0, 1.0).unwrap(),
        cal.strategy.clone(),
        ControlStrategy::reff_threshold(10.0, 60.0, 0.5, 1.5).unwrap(),
    ];
    let mut worst_halving = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for u in &controls {
        let a = total_incidence(&p, &s0, u, &opts()).map_err(|e| e.to_string())?;
        let b = total_incidence(&p, &s0, u, &fine).map_err(|e| e.to_string())?;
        worst_halving = worst_halving.max((a - b).abs());

        let s_inf = final_susceptible(&p, &s0, u, &opts()).map_err(|e| e.to_string())?;
        let tr = integrate_to_extinction(&p, &s0, u, &opts().with_horizon(3000.0)).map_err(|e| e.to_string())?;
        let end = tr.last().state;
        if end.i > opts().extinction_threshold {
            return Err(format!("{u:?}: oracle run stopped at I = {}", end.i));
        }
        worst_oracle = worst_oracle.max((s_inf - end.s).abs());
    }
    for (c1, c_inf) in [(15.0, 0.75), (20.25, 0.75)] {
        let a = optimal_lockdown(&p, &s0, c1, c_inf, 1e-3, &opts()).map_err(|e| e.to_string())?;
        let b = optimal_lockdown(&p, &s0, c1, c_inf, 1e-3, &fine).map_err(|e| e.to_string())?;
        worst_halving = worst_halving.max((a.incidence - b.incidence).abs());
    }
    if worst_halving >= 1e-6 {
        return Err(format!("step halving changed an incidence by {worst_halving:.3e}"));
    }
    if worst_oracle > 1e-6 {
        return Err(format!("final size differs from the extinction run by {worst_oracle:.3e}"));
    }
    Ok(format!("step halving {worst_halving:.1e}, extinction oracle {worst_oracle:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("uncontrolled epidemic", uncontrolled),
        ("universal incidence bounds", sandwich),
        ("optimal 20-day lockdown", optimal_20_day),
        ("early 27-day lockdown", early_27_day),
        ("full-lockdown timing", full_lockdown_timing),
        ("peak-minimising comparison", peak_min),
        ("quantizer properties", quantizer),
        ("prolongation monotonicity", prolongation),
        ("herd-immunity-time bound", herd_time_bound),
        ("single-lockdown dominance", dominance),
        ("numerical convergence", numerics),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
