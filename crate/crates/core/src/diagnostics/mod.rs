pub mod energy;
pub mod flux;
pub mod ito;
pub mod martingale;
pub mod norms;
pub mod pressure;

pub use energy::{energy_mc_report, EnergyReport};
pub use flux::{effective_flux_sweep, FluxReport, TrendReport};
pub use ito::{ito_energy_residual, ItoResidual};
pub use martingale::{martingale_functionals, martingale_test, MartingaleReport, MartingaleSeries};
pub use norms::{path_space_norms, PathNorms};
pub use pressure::{pressure_integrability, PressureMode, PressureReport};
