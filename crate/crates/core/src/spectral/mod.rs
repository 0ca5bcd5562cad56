mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod snapshot;

pub use field::{ScalarField, Spectrum, VectorField};
pub use grid::{ModeIndex, TorusGrid};
pub use snapshot::Snapshot;
