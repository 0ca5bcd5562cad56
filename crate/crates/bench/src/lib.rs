//! Fixtures shared by the kernel benchmarks.

use scns_core::galerkin::{GalerkinModel, GalerkinState, SimConfig};
use scns_core::harness::InitialSampler;

/// Default two-dimensional model with cutoff `cutoff` on a `m×m` grid.
pub fn model(m: usize, cutoff: usize) -> GalerkinModel {
    GalerkinModel::new(SimConfig { m, cutoff, ..SimConfig::default() }).expect("valid benchmark config")
}

pub fn state(model: &GalerkinModel) -> GalerkinState {
    let (rho, u) = InitialSampler::default().sample(model, 0, 0);
    GalerkinState::new(rho, u)
}
