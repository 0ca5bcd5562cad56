mod config;
mod model;
mod path;
mod step;
mod truncation;

pub use config::{SimConfig, Stepper};
pub use model::{viscous_matrix, DriftParts, EventLog, GalerkinModel, GalerkinState};
pub use path::{run_path, PathRecord, PathSample, RecordOptions, SeriesRow, StepInfo};
pub use step::FixedPointOutcome;
pub use truncation::{apply_truncation, theta, TRUNCATION_LIPSCHITZ};
