use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("integration diverged at t = {t} (step too large?)")]
    IntegrationDiverged { t: f64 },

    #[error("control support ends at t = {support_end} but the horizon is {horizon}")]
    HorizonTooShort { support_end: f64, horizon: f64 },

    #[error("{0} is undefined for a non-positive susceptible share")]
    Domain(&'static str),

    #[error("y = {y} is below the minimum value {y0}; no solution exists")]
    BelowMinimum { y: f64, y0: f64 },

    #[error("basic reproduction number {r0} <= 1: no outbreak to control")]
    NoOutbreak { r0: f64 },

    #[error("control has unbounded support; its cost is infinite")]
    UnboundedCost,

    #[error("amplitude {amplitude} is below the control's maximum level {sup}")]
    AmplitudeTooSmall { amplitude: f64, sup: f64 },

    #[error("{0} controls depend on the epidemic state and cannot be quantized directly")]
    NotOpenLoop(&'static str),

    #[error("budget {budget} exceeds the largest attainable cost {max_cost}")]
    BudgetInfeasible { budget: f64, max_cost: f64 },
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::InvalidState(_)
                | Error::InvalidControl(_)
                | Error::InvalidOptions(_)
                | Error::Domain(_)
                | Error::AmplitudeTooSmall { .. }
                | Error::NotOpenLoop(_)
        )
    }
}
