//! Problem-instance definition: parameters, monotone uptake responses, the
//! Liebig growth rate, and the static geometry of the concentration plane.

mod geometry;
mod params;
mod response;

pub use geometry::{
    classify, lift_to_refill, on_threshold_locus, project_to_threshold, Chord, RegionClass,
    RegionGeometry, RegionLabel,
};
pub(crate) use geometry::require_reachable;
pub use params::{ModelConfig, ModelParams, ReactorState};
pub use response::{break_even, BreakEven, CustomResponse, ResponseFunction};
