#![allow(dead_code)]

use lockdown_core::{ControlStrategy, EpidemicParams, EpidemicState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn table1() -> (EpidemicParams, EpidemicState) {
    (EpidemicParams::new(0.6, 0.2).unwrap(), EpidemicState::new(0.9999, 0.0001).unwrap())
}

/// Piecewise-constant control on `[lo, hi]` with `||u||_1 <= max_l1` and
/// levels in `[0, max_level]`.
pub fn random_piecewise<R: Rng>(rng: &mut R, lo: f64, hi: f64, max_l1: f64, max_level: f64) -> ControlStrategy {
    let n = rng.gen_range(1..=6);
    let mut bps: Vec<f64> = (0..=n).map(|_| rng.gen_range(lo..hi)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    if bps.len() < 2 {
        bps = vec![lo, hi];
    }
    let mut levels: Vec<f64> = (1..bps.len()).map(|_| rng.gen_range(0.0..=max_level)).collect();
    let l1: f64 = bps.windows(2).zip(&levels).map(|(w, c)| (w[1] - w[0]) * c).sum();
    if l1 > max_l1 {
        let scale = max_l1 / l1;
        levels.iter_mut().for_each(|c| *c *= scale);
    }
    ControlStrategy::piecewise_constant(bps, levels).unwrap()
}

pub fn random_lockdown<R: Rng>(rng: &mut R, max_l1: f64, max_level: f64) -> ControlStrategy {
    let level = rng.gen_range(0.05..=max_level);
    let duration = rng.gen_range(0.1..=(max_l1 / level).min(200.0));
    ControlStrategy::single_lockdown(rng.gen_range(0.0..80.0), duration, level).unwrap()
}

/// One of every strategy kind, each with finite cost of at most `max_l1`.
pub fn random_any<R: Rng>(rng: &mut R, k: usize, max_l1: f64) -> ControlStrategy {
    match k % 6 {
        0 => random_piecewise(rng, 0.0, 120.0, max_l1, 1.0),
        1 => random_lockdown(rng, max_l1, 1.0),
        2 => {
            let start = rng.gen_range(0.0..40.0);
            let end = start + rng.gen_range(1.0..200.0);
            ControlStrategy::maintain_feedback(start, end, Some(max_l1), rng.gen_range(0.2..=1.0)).unwrap()
        }
        3 => {
            let t1 = rng.gen_range(0.0..30.0);
            let t2 = t1 + rng.gen_range(0.5..40.0);
            let t3 = t2 + rng.gen_range(0.5..max_l1.max(1.0));
            ControlStrategy::WaitMaintainSuppressRelax { t1, t2, t3, suppress_level: rng.gen_range(0.0..=1.0), cap: 1.0 }
        }
        4 => {
            let start = rng.gen_range(0.0..30.0);
            let level = rng.gen_range(0.1..=1.0);
            let end = start + max_l1 / level;
            ControlStrategy::reff_threshold(start, end, level, rng.gen_range(0.5..2.5)).unwrap()
        }
        _ => ControlStrategy::Zero,
    }
}
