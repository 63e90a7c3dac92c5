//! Benchmark fixtures; the benchmarks themselves live under `benches/`.

use scf_core::{ModelConfig, ModelParams, ResponseFunction};

/// The positive-cycle-growth reference instance used across the benchmarks.
pub fn reference_instance() -> ModelParams {
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
