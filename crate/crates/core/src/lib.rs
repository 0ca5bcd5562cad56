pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod harness;
pub mod mass;
pub mod noise;
pub mod renorm;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod transport;

pub use basis::GalerkinBasis;
pub use error::{Error, Result};
pub use galerkin::{GalerkinModel, GalerkinState, PathRecord, SimConfig, Stepper};
pub use mass::MassMatrix;
pub use noise::{NoiseFamily, NoiseModel};
pub use spectral::{ModeIndex, ScalarField, Snapshot, Spectrum, TorusGrid, VectorField};
