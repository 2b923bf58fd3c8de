//! Optimal timing of transmission-reducing interventions in SIR epidemics.
//!
//! The crate simulates the controlled SIR model, evaluates the cost
//! functionals of intervention strategies, computes universal bounds on the
//! total incidence, and finds the incidence-minimising single lockdown for
//! a given cost budget and maximum intervention level.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod controls;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod quantize;
pub mod sir;
pub mod special;

pub use bounds::{herd_immunity_time, herd_immunity_time_bound, incidence_bounds, IncidenceBounds};
pub use controls::{costs, ControlStrategy, CostReport};
pub use error::{Error, Result};
pub use model::{EpidemicParams, EpidemicState};
pub use optimizer::{
    budget_level_scan, calibrate_peak_min, optimal_lockdown, start_time_sweep, OptimizationResult,
    PeakMinCalibration, ScanResult, ScanRow,
};
pub use quantize::{quantize, quantize_fn};
pub use sir::{
    final_susceptible, integrate, integrate_to_extinction, peak_prevalence, time_to_prevalence,
    total_incidence, Sample, SolverOptions, Trajectory,
};
pub use special::{final_size, invert_special, vulnerability};
