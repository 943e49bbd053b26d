//! A complete simulation setup: circuit template, controller, coupling
//! model, sweep distances and the performance requirement.

use wpt_core::circuit::LoadModel;
use wpt_core::magnetics::coil_mutual;
use wpt_core::{
    ControllerConfig64, CouplingModel64, Error, ExposureLimits64, LinkCircuit64, TissuePhantom64,
};

use crate::dataset::MeasuredRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Requirement {
    pub i_min: f64,
    pub v_min: f64,
}

impl Default for Requirement {
    fn default() -> Self {
        Self { i_min: 5e-3, v_min: 7.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// Upper bound on simulated time per operating point.
    pub duration: f64,
    pub dt: f64,
    pub dt_out: f64,
    /// Relative change of the window-averaged powers accepted as settled.
    pub steady_tol: f64,
    /// Length of one averaging window.
    pub window: f64,
    /// Time after which a transmitter still searching is declared uncoupled.
    pub search_timeout: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { duration: 12e-3, dt: 5e-9, dt_out: 25e-9, steady_tol: 2e-3, window: 0.25e-3, search_timeout: 2e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub model: CouplingModel64,
    /// Multiplies the mutual inductance given by `model`.
    pub k_scale: f64,
    /// Distances outside this closed interval are reported out of range.
    pub range: Option<(f64, f64)>,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        Self { model: CouplingModel64::AnalyticFilament, k_scale: 1.0, range: None }
    }
}

/// Load resistance used at each distance.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSchedule {
    /// The circuit template's load everywhere.
    Fixed,
    /// One resistance per sweep distance.
    PerDistance(Vec<f64>),
    /// `V / I` of the measured row at the same distance.
    Measured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosimetrySettings {
    pub phantom: TissuePhantom64,
    pub limits: ExposureLimits64,
    /// Coil plane height above the top of the phantom.
    pub gap: f64,
    /// Peak coil current the map is computed at.
    pub i_ref: f64,
    /// Peak coil current in operation, checked against the compliant current.
    pub i_operating: f64,
    pub frequency: f64,
    pub spacing: f64,
    pub complex_admittivity: bool,
}

impl Default for DosimetrySettings {
    fn default() -> Self {
        Self {
            phantom: TissuePhantom64::default(),
            limits: ExposureLimits64::default(),
            gap: 6e-3,
            i_ref: 1.0,
            i_operating: 1.0,
            frequency: 127e3,
            spacing: 2e-3,
            complex_admittivity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub circuit: LinkCircuit64,
    pub controller: ControllerConfig64,
    pub coupling: CouplingSpec,
    pub distances: Vec<f64>,
    pub loads: LoadSchedule,
    pub requirement: Requirement,
    pub sim: SimSettings,
    pub dosimetry: DosimetrySettings,
    /// Detect the receiver against the unloaded transmitter's own search
    /// response rather than against a fixed amplitude.
    pub reference_detection: bool,
}

impl Scenario {
    /// Mutual inductance at coil spacing `d`.
    pub fn mutual_at(&self, d: f64) -> Result<f64, Error> {
        if let Some((lo, hi)) = self.coupling.range {
            let eps = 1e-9;
            if d < lo - eps || d > hi + eps {
                return Err(Error::OutOfRange { what: "distance", value: d, lo, hi });
            }
        }
        let m = coil_mutual(&self.circuit.tx, &self.circuit.rx, d, &self.coupling.model)? * self.coupling.k_scale;
        let k = m / (self.circuit.tx.inductance * self.circuit.rx.inductance).sqrt();
        if !(k.abs() < 1.0) {
            return Err(Error::Physical(format!("coupling coefficient {k:.3} at {d} m is not below 1")));
        }
        Ok(m)
    }

    /// Load resistance for sweep distance index `idx` (or a measured row).
    fn load_for(&self, idx: Option<usize>, row: Option<&MeasuredRow>) -> Result<LoadModel<f64>, Error> {
        match &self.loads {
            LoadSchedule::Fixed => Ok(self.circuit.load),
            LoadSchedule::PerDistance(r) => idx
                .and_then(|i| r.get(i))
                .map(|&r| LoadModel::Resistor { r })
                .ok_or_else(|| Error::Precondition("no load resistance listed for this distance".into())),
            LoadSchedule::Measured => row
                .map(|row| LoadModel::Resistor { r: row.v_rx / row.i_rx })
                .ok_or_else(|| Error::Precondition("no measured row at this distance".into())),
        }
    }

    /// Circuit at sweep distance `idx`.
    pub fn circuit_at(&self, idx: usize) -> Result<LinkCircuit64, Error> {
        let d = self.distances[idx];
        let row = crate::dataset::row_at(d);
        self.circuit_with(d, self.load_for(Some(idx), row.as_ref())?)
    }

    /// Circuit at the distance of a measured row.
    pub fn circuit_for_row(&self, row: &MeasuredRow) -> Result<LinkCircuit64, Error> {
        let idx = self.distances.iter().position(|&d| (d - row.distance).abs() < 1e-9);
        let load = match (&self.loads, idx) {
            (LoadSchedule::PerDistance(_), None) => {
                return Err(Error::Precondition(format!("no load listed for {} m", row.distance)))
            }
            _ => self.load_for(idx, Some(row))?,
        };
        self.circuit_with(row.distance, load)
    }

    fn circuit_with(&self, d: f64, load: LoadModel<f64>) -> Result<LinkCircuit64, Error> {
        let mut c = self.circuit.clone();
        c.m = self.mutual_at(d)?;
        c.load = load;
        wpt_core::circuit::validate_circuit(c)
    }
}
