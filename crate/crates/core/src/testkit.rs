//! Shared parameter sets for unit tests.

use crate::model::{ModelConfig, ModelParams, ResponseFunction};

/// Saturating responses (2, 1.9) / (2, 0.3); yields (4, 1.9); D = 0.5;
/// thresholds (0.6, 0.5); inputs (1, 1); r = 0.4.
pub fn instance_a() -> ModelParams {
    ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(2.0, 1.9).unwrap(),
        f2: ResponseFunction::monod(2.0, 0.3).unwrap(),
        y1: 4.0,
        y2: 1.9,
        death_rate: 0.5,
        drain_fraction: 0.4,
        s1_bar: 0.6,
        s2_bar: 0.5,
        s1_in: 1.0,
        s2_in: 1.0,
    })
    .unwrap()
}

/// Saturating responses (2, 1.4) / (2, 0.6); yields (2, 0.7); D = 0.5;
/// thresholds (0.7, 0.6); inputs (1, 1); r = 0.4. Both break-even levels sit
/// below their thresholds.
pub fn instance_b() -> ModelParams {
    ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(2.0, 1.4).unwrap(),
        f2: ResponseFunction::monod(2.0, 0.6).unwrap(),
        y1: 2.0,
        y2: 0.7,
        death_rate: 0.5,
        drain_fraction: 0.4,
        s1_bar: 0.7,
        s2_bar: 0.6,
        s1_in: 1.0,
        s2_in: 1.0,
    })
    .unwrap()
}

/// Same as [`instance_b`] but with half-saturations (1.4, 1.2): the cycle
/// growth at r = 0.4 is negative and the reactor washes out.
pub fn instance_washout() -> ModelParams {
    ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(2.0, 1.4).unwrap(),
        f2: ResponseFunction::monod(2.0, 1.2).unwrap(),
        y1: 2.0,
        y2: 0.7,
        death_rate: 0.5,
        drain_fraction: 0.4,
        s1_bar: 0.7,
        s2_bar: 0.6,
        s1_in: 1.0,
        s2_in: 1.0,
    })
    .unwrap()
}

/// [`instance_b`] with the s1 threshold raised to 0.8, which lifts the
/// invariant threshold point above both break-even levels; the critical
/// drain fraction is then zero.
pub fn instance_b_wide() -> ModelParams {
    ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(2.0, 1.4).unwrap(),
        f2: ResponseFunction::monod(2.0, 0.6).unwrap(),
        y1: 2.0,
        y2: 0.7,
        death_rate: 0.5,
        drain_fraction: 0.4,
        s1_bar: 0.8,
        s2_bar: 0.6,
        s1_in: 1.0,
        s2_in: 1.0,
    })
    .unwrap()
}
