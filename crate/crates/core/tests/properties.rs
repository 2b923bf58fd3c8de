mod common;

use common::{random_any, random_piecewise, rng, table1};
use lockdown_core::bounds::remaining_prevalence_integral;
use lockdown_core::special::{controlled_vulnerability, special_function, special_minimum};
use lockdown_core::{
    costs, final_susceptible, herd_immunity_time, incidence_bounds, integrate, integrate_to_extinction,
    invert_special, quantize, total_incidence, ControlStrategy, EpidemicParams, EpidemicState, SolverOptions,
};
use proptest::prelude::*;
use rand::Rng;

fn piecewise_strategy(t_max: f64) -> impl Strategy<Value = ControlStrategy> {
    prop::collection::vec((0.0..t_max, 0.0..=1.0f64), 1..6).prop_map(move |mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut bps: Vec<f64> = pts.iter().map(|p| p.0).collect();
        bps.push(t_max);
        bps.dedup();
        let levels = pts.iter().map(|p| p.1).take(bps.len() - 1).collect();
        ControlStrategy::piecewise_constant(bps, levels).unwrap()
    })
}

fn params_strategy() -> impl Strategy<Value = EpidemicParams> {
    (0.05..2.0f64, 0.05..1.0f64).prop_map(|(b, g)| EpidemicParams::new(b, g).unwrap())
}

fn state_strategy() -> impl Strategy<Value = EpidemicState> {
    (0.05..0.999f64, 1e-5..0.2f64)
        .prop_filter("shares sum to at most one", |(s, i)| s + i <= 1.0)
        .prop_map(|(s, i)| EpidemicState::new(s, i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conservation_and_monotonicity(p in params_strategy(), s0 in state_strategy(), u in piecewise_strategy(40.0)) {
        let tr = integrate(&p, &s0, &u, &SolverOptions::default().with_horizon(60.0)).unwrap();
        let total = s0.s + s0.i + s0.r;
        for w in tr.samples().windows(2) {
            let (a, b) = (&w[0].state, &w[1].state);
            prop_assert!(b.s <= a.s);
            prop_assert!(b.s + b.i <= a.s + a.i + 1e-15);
            prop_assert!(b.r >= a.r);
            prop_assert!((b.s + b.i + b.r - total).abs() <= 1e-9 * w[1].t.max(1.0));
        }
    }

    #[test]
    fn vulnerability_is_conserved_under_constant_control(
        p in params_strategy(),
        s0 in state_strategy(),
        c in 0.0..=1.0f64,
    ) {
        let u = ControlStrategy::piecewise_constant(vec![0.0, 50.0], vec![c]).unwrap();
        let tr = integrate(&p, &s0, &u, &SolverOptions::default().with_horizon(50.0)).unwrap();
        let v0 = controlled_vulnerability(&p, &s0, c).unwrap();
        for smp in tr.samples() {
            let v = controlled_vulnerability(&p, &smp.state, c).unwrap();
            prop_assert!((v - v0).abs() < 1e-6, "t = {}: {} vs {}", smp.t, v, v0);
        }
    }

    #[test]
    fn special_inverse_round_trip(rho in 0.1..20.0f64, dy in 0.0..50.0f64) {
        let y = special_minimum(rho) + dy;
        let x = invert_special(rho, y).unwrap();
        prop_assert!(x > 0.0 && x <= 1.0 / rho);
        // Inputs with x near underflow have no representable neighbourhood.
        if x > 1e-300 {
            prop_assert!((special_function(rho, x) - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn special_inverse_is_decreasing(rho in 0.1..20.0f64, a in 0.0..10.0f64, gap in 1e-6..5.0f64) {
        let y0 = special_minimum(rho);
        prop_assert!(invert_special(rho, y0 + a).unwrap() > invert_special(rho, y0 + a + gap).unwrap());
    }

    #[test]
    fn quantizer_preserves_cost(u in piecewise_strategy(40.0), h in 0.01..5.0f64, slack in 0.0..1.0f64) {
        let b = u.level_bound() + slack * (1.0 - u.level_bound());
        prop_assume!(b > 0.0);
        let q = quantize(&u, b, h, 40.0).unwrap();
        let (lu, lq) = (u.open_loop_costs().unwrap(), q.open_loop_costs().unwrap());
        prop_assert!((lu.l1 - lq.l1).abs() <= 1e-9);
        prop_assert!(lq.sup <= b);
        prop_assert!(lq.l1 <= lq.l0 * lq.sup + 1e-12);
    }

    #[test]
    fn prolonging_never_lowers_final_susceptibles(
        u1 in piecewise_strategy(30.0),
        gap in 0.0..40.0f64,
        len in 0.01..40.0f64,
        c in 0.01..=1.0f64,
    ) {
        let (p, s0) = table1();
        let ControlStrategy::PiecewiseConstant { mut breakpoints, mut levels } = u1.clone() else { unreachable!() };
        if gap > 0.0 {
            breakpoints.push(30.0 + gap);
            levels.push(0.0);
        }
        breakpoints.push(30.0 + gap + len);
        levels.push(c);
        let u2 = ControlStrategy::piecewise_constant(breakpoints, levels).unwrap();
        let opts = SolverOptions::default();
        let s1 = final_susceptible(&p, &s0, &u1, &opts).unwrap();
        let s2 = final_susceptible(&p, &s0, &u2, &opts).unwrap();
        prop_assert!(s1 <= s2 + 1e-9);
    }

    #[test]
    fn incidence_stays_between_bounds(p in params_strategy(), s0 in state_strategy(), u in piecewise_strategy(60.0)) {
        let b = incidence_bounds(&p, &s0).unwrap();
        prop_assert!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0);
        let j = total_incidence(&p, &s0, &u, &SolverOptions::default()).unwrap();
        prop_assert!(b.contains(j, 1e-6), "{} not in {:?}", j, b);
    }
}

/// `S(0) + I(0) - S(inf) = gamma * int_0^inf I dt`, with the integral taken
/// by the trapezoid rule over an integration to extinction.
#[test]
fn incidence_matches_integrated_prevalence() {
    let (p, s0) = table1();
    let mut r = rng(23);
    for k in 0..12 {
        let u = random_any(&mut r, k, 30.0);
        let opts = SolverOptions::default().with_horizon(3000.0);
        let tr = integrate_to_extinction(&p, &s0, &u, &opts).unwrap();
        let h = tr.step();
        let integral: f64 = tr.samples().windows(2).map(|w| 0.5 * h * (w[0].state.i + w[1].state.i)).sum();
        let j = total_incidence(&p, &s0, &u, &opts).unwrap();
        let lhs = j * s0.s + s0.i;
        assert!((lhs - p.gamma() * integral).abs() < 1e-6, "{u:?}: {lhs} vs {}", p.gamma() * integral);
    }
}

#[test]
fn cost_bound_holds_for_every_kind() {
    let (p, s0) = table1();
    let mut r = rng(29);
    for k in 0..36 {
        let u = random_any(&mut r, k, 30.0);
        let opts = SolverOptions::default().with_horizon(u.support_end().min(400.0) + 10.0);
        let c = costs(&u, &p, &s0, &opts).unwrap();
        assert!(c.l1 >= 0.0 && c.l0 >= 0.0 && c.sup >= 0.0);
        assert!(c.l1 <= c.l0 * c.sup + 1e-9, "{u:?}: {c:?}");
    }
}

#[test]
fn tail_prevalence_decays_geometrically() {
    let (p, s0) = table1();
    let mut r = rng(31);
    for k in 0..30 {
        let u = random_any(&mut r, k, 30.0);
        let opts = SolverOptions::default().with_horizon(u.support_end().min(400.0) + 300.0);
        let l1 = costs(&u, &p, &s0, &opts).unwrap().l1;
        if l1 > 30.0 {
            continue;
        }
        let tr = integrate(&p, &s0, &u, &opts).unwrap();
        let t_h = herd_immunity_time(&tr).unwrap();
        let from = (t_h + l1 + 1.0).max(u.support_end().min(400.0));
        let tails: Vec<f64> = (0..8)
            .map(|j| {
                let t = from + 10.0 * j as f64;
                let idx = (t / tr.step()).ceil() as usize;
                remaining_prevalence_integral(&p, &tr.samples()[idx].state).unwrap()
            })
            // Smaller tails are dominated by cancellation in S + I - S(inf).
            .take_while(|tail| *tail > 1e-10)
            .collect();
        let ratios: Vec<f64> = tails.windows(2).map(|w| w[1] / w[0]).collect();
        for pair in ratios.windows(2) {
            assert!(pair[0] < 1.0 && pair[1] <= pair[0] * (1.0 + 1e-4), "{u:?}: ratios {ratios:?}");
        }
    }
}

/// Deviation of the quantized trajectory shrinks roughly linearly in `h`.
#[test]
fn quantizer_error_is_linear_in_wavelength() {
    let (p, s0) = table1();
    let mut r = rng(37);
    let t_end = 40.0;
    let opts = SolverOptions::default().with_horizon(t_end);
    for _ in 0..5 {
        let u = random_piecewise(&mut r, 0.0, t_end, 20.0, 0.8);
        let b = r.gen_range(0.8..=1.0);
        let base = integrate(&p, &s0, &u, &opts).unwrap();
        let dev = |h: f64| {
            let q = quantize(&u, b, h, t_end).unwrap();
            let tr = integrate(&p, &s0, &q, &opts).unwrap();
            base.samples().iter().zip(tr.samples()).map(|(x, y)| (x.state.i - y.state.i).abs()).fold(0.0, f64::max)
        };
        let ratio = dev(1.0) / dev(0.5);
        assert!((1.0..=4.0).contains(&ratio), "{u:?}: ratio {ratio}");
    }
}
