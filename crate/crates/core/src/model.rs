//! Epidemic parameters and compartment shares.

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack allowed on `s + i + r <= 1` when validating user input.
const SHARE_TOLERANCE: f64 = 1e-12;

/// Baseline transmission and recovery rates, both per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicParams {
    beta: f64,
    gamma: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be finite and > 0, got {beta}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be finite and > 0, got {gamma}")));
        }
        Ok(Self { beta, gamma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Basic reproduction number `beta / gamma`.
    pub fn r0(&self) -> f64 {
        self.beta / self.gamma
    }

    /// Susceptible share `gamma / beta` below which prevalence cannot grow.
    pub fn herd_immunity_threshold(&self) -> f64 {
        self.gamma / self.beta
    }

    pub(crate) fn require_outbreak(&self) -> Result<()> {
        if self.r0() <= 1.0 {
            Err(Error::NoOutbreak { r0: self.r0() })
        } else {
            Ok(())
        }
    }
}

impl Default for EpidemicParams {
    /// R0 = 3 with a five day infectious period.
    fn default() -> Self {
        Self { beta: 0.6, gamma: 0.2 }
    }
}

/// Susceptible, infectious and recovered shares at one instant.
///
/// `r` is carried redundantly so that conservation of `s + i + r` can be
/// checked along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl EpidemicState {
    /// Builds a state with `r = 1 - s - i`.
    pub fn new(s: f64, i: f64) -> Result<Self> {
        Self::with_recovered(s, i, (1.0 - s - i).max(0.0))
    }

    pub fn with_recovered(s: f64, i: f64, r: f64) -> Result<Self> {
        let state = Self { s, i, r };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { s, i, r } = *self;
        if !(s.is_finite() && i.is_finite() && r.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite share in ({s}, {i}, {r})")));
        }
        if s < 0.0 || i < 0.0 || r < 0.0 {
            return Err(Error::InvalidState(format!("negative share in ({s}, {i}, {r})")));
        }
        if s + i + r > 1.0 + SHARE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "shares sum to {} > 1",
                s + i + r
            )));
        }
        Ok(())
    }
}

impl Default for EpidemicState {
    /// 1000 infectious individuals imported into a population of ten million.
    fn default() -> Self {
        Self { s: 0.9999, i: 0.0001, r: 0.0 }
    }
}
