//! Closed-loop runs at each coil spacing.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use wpt_core::analysis::{cycle_metrics, TABLE_CSV_HEADER};
use wpt_core::circuit::{free_tank_signature, Simulator};
use wpt_core::{ControllerConfig64, Error, LinkCircuit64, Mode, PowerReport64};

use crate::scenario::{Requirement, Scenario, SimSettings};

/// Search windows covered by the unloaded-transmitter signature.
const SIGNATURE_WINDOWS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// The transmitter never left SEARCH.
    NoCoupling,
    /// The coupling model has no value at this distance.
    OutOfRange { reason: String },
    Fault { code: String },
    NotConverged,
    Failed { reason: String },
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::NoCoupling => "no_coupling",
            PointStatus::OutOfRange { .. } => "out_of_range",
            PointStatus::Fault { .. } => "fault",
            PointStatus::NotConverged => "not_converged",
            PointStatus::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub i_tx_rms: f64,
    pub i_supply_avg: f64,
    pub p_source: f64,
    pub i_load: f64,
    pub v_load: f64,
    pub p_load: f64,
    pub efficiency: f64,
    pub f_lock: f64,
}

impl From<PowerReport64> for Metrics {
    fn from(r: PowerReport64) -> Self {
        Self {
            i_tx_rms: r.i_tx_rms,
            i_supply_avg: r.i_supply_avg,
            p_source: r.p_source,
            i_load: r.i_load,
            v_load: r.v_load,
            p_load: r.p_load,
            efficiency: r.efficiency,
            f_lock: r.f_lock,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub distance: f64,
    pub k: Option<f64>,
    pub status: PointStatus,
    /// Window-averaged performance; absent when no run was possible.
    #[serde(skip)]
    pub report: Option<PowerReport64>,
    pub metrics: Option<Metrics>,
    /// Simulated time at which the averages settled.
    pub settled_at: Option<f64>,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<PointResult>,
    /// Largest spacing that meets the requirement with every smaller one
    /// also meeting it.
    pub max_passing_distance: Option<f64>,
    pub requirement_i_min: f64,
    pub requirement_v_min: f64,
}

impl SweepReport {
    /// True when every simulated point meets the requirement.
    pub fn all_simulated_pass(&self) -> bool {
        self.points.iter().filter(|p| p.report.is_some()).all(|p| p.passes)
    }

    pub fn write_table_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TABLE_CSV_HEADER}")?;
        for p in &self.points {
            if let (PointStatus::Ok, Some(r)) = (&p.status, &p.report) {
                writeln!(w, "{}", r.csv_row(round_cm(p.distance)))?;
            }
        }
        Ok(())
    }

    pub fn write_status_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "distance_cm,status,k,f_lock_hz,pass,detail")?;
        for p in &self.points {
            let detail = match &p.status {
                PointStatus::OutOfRange { reason } | PointStatus::Failed { reason } => reason.replace(',', ";"),
                PointStatus::Fault { code } => code.clone(),
                _ => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                round_cm(p.distance),
                p.status.label(),
                p.k.map_or(String::new(), |k| format!("{k:.5}")),
                p.report.map_or(String::new(), |r| format!("{:.1}", r.f_lock)),
                p.passes,
                detail
            )?;
        }
        Ok(())
    }
}

fn round_cm(d: f64) -> f64 {
    (d * 1e2 * 1e6).round() / 1e6
}

/// Controller configuration for `circuit`, with the unloaded search
/// response as detection reference when the scenario asks for one.
pub fn controller_for(s: &Scenario, circuit: &LinkCircuit64) -> Result<ControllerConfig64, Error> {
    let mut ctrl = s.controller.clone();
    if s.reference_detection {
        ctrl.search_reference = Some(free_tank_signature(circuit, &ctrl, SIGNATURE_WINDOWS, s.sim.dt)?);
    }
    Ok(ctrl)
}

/// Runs the closed loop until consecutive averaging windows agree.
pub fn settle(
    circuit: LinkCircuit64,
    ctrl: ControllerConfig64,
    sim: &SimSettings,
) -> Result<(PointStatus, Option<PowerReport64>, Option<f64>), Error> {
    let f_search = ctrl.f_search;
    let mut run = Simulator::new(circuit, ctrl, sim.dt, sim.dt_out)?;
    let mut previous: Option<PowerReport64> = None;
    loop {
        run.advance(sim.window)?;
        let t = run.trace().end_time();
        if let Some(code) = run.fault() {
            return Ok((PointStatus::Fault { code: code.as_str().into() }, None, None));
        }
        let searching = run.controller().mode == Mode::Search;
        let period = if searching { 1.0 / f_search } else { run.controller().period_estimate };
        let cycles = (sim.window / period).floor();
        let start = (t - cycles * period).max(run.trace().start_time());
        let report = if cycles >= 1.0 && start + period <= t {
            let n = ((t - start) / period).floor();
            Some(cycle_metrics(run.trace(), t - n * period, t, period)?)
        } else {
            None
        };
        if searching && t >= sim.search_timeout {
            return Ok((PointStatus::NoCoupling, report, None));
        }
        if !searching && run.controller().periods_measured() > wpt_core::controller::LOCK_SETTLE_PERIODS {
            if let (Some(a), Some(b)) = (previous, report) {
                let close = |x: f64, y: f64| (x - y).abs() <= sim.steady_tol * x.abs().max(y.abs()).max(1e-12);
                if close(a.p_source, b.p_source) && close(a.p_load, b.p_load) {
                    return Ok((PointStatus::Ok, Some(b), Some(t)));
                }
            }
            previous = report;
        }
        if t >= sim.duration {
            return Ok((PointStatus::NotConverged, report, None));
        }
        run.discard_before(t - 1.5 * sim.window);
    }
}

fn passes(req: &Requirement, status: &PointStatus, report: Option<&PowerReport64>) -> bool {
    matches!(status, PointStatus::Ok) && report.is_some_and(|r| r.v_load >= req.v_min && r.i_load >= req.i_min)
}

/// Simulates one operating point and packages the outcome.
pub fn run_circuit(s: &Scenario, distance: f64, circuit: Result<LinkCircuit64, Error>) -> PointResult {
    let circuit = match circuit {
        Ok(c) => c,
        Err(e @ Error::OutOfRange { .. }) => return failed(distance, None, PointStatus::OutOfRange { reason: e.to_string() }),
        Err(e) => return failed(distance, None, PointStatus::Failed { reason: e.to_string() }),
    };
    let k = Some(circuit.coupling());
    let outcome = controller_for(s, &circuit).and_then(|ctrl| settle(circuit, ctrl, &s.sim));
    match outcome {
        Ok((status, report, settled_at)) => PointResult {
            distance,
            k,
            passes: passes(&s.requirement, &status, report.as_ref()),
            metrics: report.map(Metrics::from),
            report,
            settled_at,
            status,
        },
        Err(e) => failed(distance, k, PointStatus::Failed { reason: e.to_string() }),
    }
}

fn failed(distance: f64, k: Option<f64>, status: PointStatus) -> PointResult {
    PointResult { distance, k, status, report: None, metrics: None, settled_at: None, passes: false }
}

/// Runs one closed-loop simulation per scenario distance. Distances are
/// independent and run in parallel; the report keeps scenario order.
pub fn run_sweep(s: &Scenario) -> SweepReport {
    let points: Vec<PointResult> = (0..s.distances.len())
        .into_par_iter()
        .map(|i| run_circuit(s, s.distances[i], s.circuit_at(i)))
        .collect();
    let max_passing_distance = points.iter().take_while(|p| p.passes).last().map(|p| p.distance);
    SweepReport { points, max_passing_distance, requirement_i_min: s.requirement.i_min, requirement_v_min: s.requirement.v_min }
}

/// Same as [`run_sweep`] but strictly one distance after another.
pub fn run_sweep_sequential(s: &Scenario) -> SweepReport {
    let points: Vec<PointResult> = (0..s.distances.len()).map(|i| run_circuit(s, s.distances[i], s.circuit_at(i))).collect();
    let max_passing_distance = points.iter().take_while(|p| p.passes).last().map(|p| p.distance);
    SweepReport { points, max_passing_distance, requirement_i_min: s.requirement.i_min, requirement_v_min: s.requirement.v_min }
}
