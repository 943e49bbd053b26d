//! Scenario files, Table-I style distance sweeps, parasitic calibration and
//! exposure runs on top of `wpt-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod config;
pub mod dataset;
pub mod exposure;
pub mod scenario;
pub mod sweep;
pub mod units;

pub use calibrate::{calibrate, Calibration, CalibrationOptions, CalibrationParams, FreeParam};
pub use config::{load_scenario, ConfigError};
pub use dataset::{table_i_dataset, MeasuredRow};
pub use scenario::Scenario;
pub use sweep::{run_sweep, PointStatus, SweepReport};
