//! Simulation and analysis of a self-cycling fermentor growing one microbial
//! population on two essential resources.
//!
//! The reactor runs as a batch culture until both resource concentrations
//! fall to their thresholds, then a fraction of the medium is drained and
//! replaced with fresh input. The crate models this as an impulsive ODE
//! system with Liebig-minimum growth kinetics and provides:
//!
//! - the plane geometry that organizes the dynamics ([`model`]),
//! - batch-phase integration with event localization plus the closed-form
//!   chord quadratures that cross-check it ([`batch`]),
//! - operating-regime classification, the critical drain fraction, and the
//!   minimum-inoculum threshold ([`analysis`]),
//! - the periodic orbit, its period, and throughput optimization over the
//!   drain fraction ([`orbit`]),
//! - the full batch/impulse simulation loop ([`sim`]).

// Validation sites use negated comparisons (`!(x > 0.0)`) so NaN inputs
// fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod batch;
pub mod error;
pub mod model;
pub mod orbit;
pub mod quad;
pub mod rk;
pub mod sim;

#[cfg(test)]
pub(crate) mod testkit;

pub use analysis::{
    critical_drain, cycle_growth, entry_count, impulse_bound, min_inoculum, net_growth,
    predict_outcome, region_geometry, OutcomePrediction, PredictionReason, Verdict,
};
pub use batch::{biomass_change, integrate_batch, time_between, BatchSegment, BatchTerminal};
pub use error::{Error, Result};
pub use model::{
    break_even, classify, lift_to_refill, on_threshold_locus, project_to_threshold, BreakEven,
    Chord, CustomResponse, ModelConfig, ModelParams, ReactorState, RegionClass, RegionGeometry,
    RegionLabel, ResponseFunction,
};
pub use orbit::{optimize_throughput, period, periodic_orbit, throughput, PeriodicOrbit, ThroughputOptimum};
pub use quad::QuadratureOptions;
pub use rk::IntegratorOptions;
pub use sim::{run, ImpulseEvent, ObservedOutcome, RunOptions, Trajectory};
