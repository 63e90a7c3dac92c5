use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative concentration {name} = {value}")]
    NegativeConcentration { name: &'static str, value: f64 },

    #[error("point ({s1}, {s2}) lies below both thresholds")]
    BelowThreshold { s1: f64, s2: f64 },

    #[error("point ({s1}, {s2}) cannot reach the threshold locus along a batch trajectory")]
    UnreachableThreshold { s1: f64, s2: f64 },

    #[error("point ({s1}, {s2}) is not on the threshold locus")]
    NotOnThresholdLocus { s1: f64, s2: f64 },

    #[error("input concentrations cannot reach the threshold locus: no periodic operation possible")]
    InputUnreachable,

    #[error(
        "quadrature did not converge: estimate {estimate}, error {error} > requested {requested}"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        requested: f64,
    },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("biomass profile reaches zero before the chord endpoint")]
    InfeasiblePath,

    #[error("no periodic orbit: net cycle growth mu({r}) = {mu} is not positive")]
    NoPeriodicOrbit { r: f64, mu: f64 },

    #[error("no drain fraction gives positive cycle growth (mu(1) = {mu1})")]
    NoViableFraction { mu1: f64 },

    #[error("orbit biomass profile is nonpositive at s1 = {s1}: x = {x}")]
    NonpositiveProfile { s1: f64, x: f64 },

    #[error("throughput optimization failed: {0}")]
    OptimizationFailed(String),
}
