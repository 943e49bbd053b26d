//! Time-domain and phasor models of a low-frequency resonant inductive
//! power link with an autoresonant square-wave driver, plus quasi-static
//! exposure assessment for a tissue phantom.
//!
//! Every model is generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix it to `f64`, which is what the harness uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod controller;
pub mod dosimetry;
mod error;
pub mod magnetics;
mod scalar;

pub use error::{Error, FieldViolation, Result};
pub use scalar::{eps0, lit, mu0, Real};

pub use analysis::{PhasorSolution, PowerReport};
pub use circuit::{Drive, LinkCircuit, LoadModel, SimState, SimTrace};
pub use controller::{ControllerConfig, ControllerState, FaultCode, Mode};
pub use dosimetry::{ExposureLimits, FieldMap, TissuePhantom};
pub use magnetics::{CoilSpec, CouplingModel};

pub type CoilSpec64 = CoilSpec<f64>;
pub type CouplingModel64 = CouplingModel<f64>;
pub type LinkCircuit64 = LinkCircuit<f64>;
pub type LoadModel64 = LoadModel<f64>;
pub type SimState64 = SimState<f64>;
pub type SimTrace64 = SimTrace<f64>;
pub type ControllerConfig64 = ControllerConfig<f64>;
pub type ControllerState64 = ControllerState<f64>;
pub type PowerReport64 = PowerReport<f64>;
pub type PhasorSolution64 = PhasorSolution<f64>;
pub type TissuePhantom64 = TissuePhantom<f64>;
pub type ExposureLimits64 = ExposureLimits<f64>;
pub type FieldMap64 = FieldMap<f64>;

pub type LinkCircuit32 = LinkCircuit<f32>;
pub type CoilSpec32 = CoilSpec<f32>;
