//! Shared inputs for the benchmarks.

use sfhd_core::{DiscreteMeasure, KernelConfig, ModelParams, SimulationConfig, WeightConvention};

pub fn fractional() -> ModelParams {
    ModelParams::new(0.8, 1.0, 1.0, 1.0).unwrap()
}

pub fn equal_orders() -> ModelParams {
    ModelParams::new(0.8, 0.8, 1.0, 1.0).unwrap()
}

pub fn classical() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
}

pub fn kernel_config() -> KernelConfig {
    KernelConfig::default()
}

/// Ten atoms at `μ_i = 1 + 4(i-1)` with standard deviations `100/i`.
pub fn ten_atom() -> DiscreteMeasure {
    DiscreteMeasure::ten_atom(WeightConvention::StdDev)
}

pub fn simulation(l_max: usize) -> SimulationConfig {
    SimulationConfig {
        l_max,
        seed: 1,
        times: vec![0.05],
        grid_n_theta: 128,
        grid_n_phi: 256,
    }
}
