//! Fits unpublished parasitics to measured efficiencies with a
//! Nelder-Mead simplex in log-parameter space.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::Serialize;
use wpt_core::CouplingModel64;

use crate::dataset::MeasuredRow;
use crate::scenario::{LoadSchedule, Scenario};
use crate::sweep::{run_circuit, PointStatus};
use crate::units::{format_quantity, Dim};

/// Relative step of the initial simplex along each parameter axis.
const INITIAL_STEP: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    TxEsr,
    RxEsr,
    DiodeVf,
    KScale,
}

impl FreeParam {
    pub fn name(self) -> &'static str {
        match self {
            FreeParam::TxEsr => "tx.esr",
            FreeParam::RxEsr => "rx.esr",
            FreeParam::DiodeVf => "diode_vf",
            FreeParam::KScale => "k_scale",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "tx.esr" | "esr1" => Some(FreeParam::TxEsr),
            "rx.esr" | "esr2" => Some(FreeParam::RxEsr),
            "diode_vf" => Some(FreeParam::DiodeVf),
            "k_scale" => Some(FreeParam::KScale),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationParams {
    pub tx_esr: f64,
    pub rx_esr: f64,
    pub diode_vf: f64,
    pub k_scale: f64,
}

impl CalibrationParams {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self { tx_esr: s.circuit.tx.esr, rx_esr: s.circuit.rx.esr, diode_vf: s.circuit.diode_vf, k_scale: s.coupling.k_scale }
    }

    pub fn get(&self, p: FreeParam) -> f64 {
        match p {
            FreeParam::TxEsr => self.tx_esr,
            FreeParam::RxEsr => self.rx_esr,
            FreeParam::DiodeVf => self.diode_vf,
            FreeParam::KScale => self.k_scale,
        }
    }

    pub fn set(&mut self, p: FreeParam, v: f64) {
        match p {
            FreeParam::TxEsr => self.tx_esr = v,
            FreeParam::RxEsr => self.rx_esr = v,
            FreeParam::DiodeVf => self.diode_vf = v,
            FreeParam::KScale => self.k_scale = v,
        }
    }

    pub fn apply(&self, s: &Scenario) -> Scenario {
        let mut out = s.clone();
        out.circuit.tx.esr = self.tx_esr;
        out.circuit.rx.esr = self.rx_esr;
        out.circuit.diode_vf = self.diode_vf;
        out.coupling.k_scale = self.k_scale;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Simplex iteration budget.
    pub max_iters: u64,
    /// Spread of simplex costs, in percentage points, treated as converged.
    pub tolerance: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { max_iters: 60, tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowResidual {
    pub distance: f64,
    pub measured_pct: f64,
    pub simulated_pct: f64,
    pub coupling: Option<f64>,
}

impl RowResidual {
    pub fn error_pp(&self) -> f64 {
        self.simulated_pct - self.measured_pct
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub initial: CalibrationParams,
    pub params: CalibrationParams,
    pub free: Vec<FreeParam>,
    pub residuals: Vec<RowResidual>,
    /// RMS efficiency error in percentage points.
    pub rms_pp: f64,
    pub converged: bool,
    pub iterations: u64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("calibration needs at least 2 measured rows, got {0}")]
    TooFewRows(usize),
    #[error("at most 4 free parameters can be fitted, got {0}")]
    TooManyParams(usize),
    #[error("parameter {0} listed twice")]
    Duplicate(&'static str),
    #[error("initial value of {0} must be > 0")]
    NonPositive(&'static str),
    #[error("optimizer failed: {0}")]
    Solver(String),
}

/// Simulated efficiency (percent) at every measured row.
pub fn evaluate(s: &Scenario, measured: &[MeasuredRow]) -> Vec<RowResidual> {
    measured
        .par_iter()
        .map(|row| {
            let point = run_circuit(s, row.distance, s.circuit_for_row(row));
            let simulated_pct = match (&point.status, point.report) {
                (PointStatus::Ok | PointStatus::NotConverged, Some(r)) => r.efficiency * 100.0,
                _ => 0.0,
            };
            RowResidual { distance: row.distance, measured_pct: row.efficiency * 100.0, simulated_pct, coupling: point.k }
        })
        .collect()
}

pub fn rms(residuals: &[RowResidual]) -> f64 {
    (residuals.iter().map(|r| r.error_pp().powi(2)).sum::<f64>() / residuals.len().max(1) as f64).sqrt()
}

struct Objective<'a> {
    scenario: &'a Scenario,
    measured: &'a [MeasuredRow],
    base: CalibrationParams,
    free: &'a [FreeParam],
}

impl Objective<'_> {
    fn params(&self, x: &[f64]) -> CalibrationParams {
        let mut p = self.base;
        for (&param, &v) in self.free.iter().zip(x) {
            p.set(param, v.exp());
        }
        p
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, argmin::core::Error> {
        let s = self.params(x).apply(self.scenario);
        Ok(rms(&evaluate(&s, self.measured)))
    }
}

/// Minimizes the RMS efficiency error over `free` starting from the
/// scenario's own values. Deterministic for identical inputs.
pub fn calibrate(
    s: &Scenario,
    measured: &[MeasuredRow],
    free: &[FreeParam],
    opts: CalibrationOptions,
) -> Result<Calibration, CalibrationError> {
    if measured.len() < 2 {
        return Err(CalibrationError::TooFewRows(measured.len()));
    }
    if free.len() > 4 {
        return Err(CalibrationError::TooManyParams(free.len()));
    }
    for (i, p) in free.iter().enumerate() {
        if free[..i].contains(p) {
            return Err(CalibrationError::Duplicate(p.name()));
        }
    }
    let mut scenario = s.clone();
    if matches!(scenario.loads, LoadSchedule::PerDistance(_)) && scenario.distances.len() != measured.len() {
        scenario.loads = LoadSchedule::Measured;
    }
    let initial = CalibrationParams::from_scenario(&scenario);
    for &p in free {
        if !(initial.get(p) > 0.0) {
            return Err(CalibrationError::NonPositive(p.name()));
        }
    }

    if free.is_empty() {
        let residuals = evaluate(&scenario, measured);
        return Ok(Calibration {
            initial,
            params: initial,
            free: Vec::new(),
            rms_pp: rms(&residuals),
            residuals,
            converged: true,
            iterations: 0,
        });
    }

    let x0: Vec<f64> = free.iter().map(|&p| initial.get(p).ln()).collect();
    let mut simplex = vec![x0.clone()];
    for i in 0..free.len() {
        let mut v = x0.clone();
        v[i] += INITIAL_STEP.ln();
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tolerance)
        .map_err(|e| CalibrationError::Solver(e.to_string()))?;
    let objective = Objective { scenario: &scenario, measured, base: initial, free };
    let result = Executor::new(objective, solver)
        .configure(|state| state.max_iters(opts.max_iters))
        .run()
        .map_err(|e| CalibrationError::Solver(e.to_string()))?;
    let state = result.state();
    let best = state.get_best_param().cloned().unwrap_or(x0);
    let converged = matches!(state.get_termination_status(), TerminationStatus::Terminated(TerminationReason::SolverConverged));
    let iterations = state.get_iter();
    let params = result.problem.problem.as_ref().map_or(initial, |o| o.params(&best));
    let residuals = evaluate(&params.apply(&scenario), measured);
    Ok(Calibration { initial, params, free: free.to_vec(), rms_pp: rms(&residuals), residuals, converged, iterations })
}

impl Calibration {
    /// Scenario with the fitted parameters and the coupling replaced by the
    /// fitted `k(d)` tabulated over the measured distances, so spacings
    /// outside that span are reported out of range.
    pub fn calibrated_scenario(&self, s: &Scenario) -> Scenario {
        let mut out = self.params.apply(s);
        let points: Vec<(f64, f64)> = self.residuals.iter().filter_map(|r| r.coupling.map(|k| (r.distance, k))).collect();
        if let Ok(model) = CouplingModel64::tabulated(points) {
            out.coupling.model = model;
            out.coupling.k_scale = 1.0;
            out.coupling.range = None;
        }
        out
    }

    /// The fitted values as a scenario fragment.
    pub fn fragment(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# efficiency RMS error {:.2} pp, converged: {}\n", self.rms_pp, self.converged));
        out.push_str("[circuit]\n");
        out.push_str(&format!("esr1 = {}\n", format_quantity(self.params.tx_esr, Dim::Resistance)));
        out.push_str(&format!("esr2 = {}\n", format_quantity(self.params.rx_esr, Dim::Resistance)));
        out.push_str(&format!("diode_vf = {}\n", format_quantity(self.params.diode_vf, Dim::Voltage)));
        out.push_str("\n[coupling]\nmodel = tabulated\n");
        let points: Vec<String> = self
            .residuals
            .iter()
            .filter_map(|r| r.coupling.map(|k| format!("{}:{k:.6}", format_quantity(r.distance, Dim::Length))))
            .collect();
        out.push_str(&format!("points = {}\n", points.join(", ")));
        out
    }
}
