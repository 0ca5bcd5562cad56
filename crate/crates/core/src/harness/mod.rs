pub mod config;
pub mod ensemble;
pub mod experiment;
pub mod oracle;
pub mod plot;
pub mod sampler;
pub mod selftest;

pub use config::{parse_config, Diagnostic, ExperimentConfig, Sweep, SweepAxis};
pub use ensemble::{run_ensemble, simulate_path};
pub use experiment::{run_experiment, ExperimentOutcome, Manifest, PointReport};
pub use plot::{emit_plot_data, PlotRow};
pub use sampler::{InitialSampler, SamplerKind};
