use crate::controller::{controller_step, ControllerConfig, ControllerState, FaultCode, Mode, Sample};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::kernel::Kernel;
use super::{validate_circuit, Drive, LinkCircuit, SimState, SimTrace, TraceSample};

/// Minimum integration steps per period of the fastest admissible drive.
pub const MIN_STEPS_PER_CYCLE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind<T> {
    Locked { f_search: T },
    Fault(FaultCode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerEvent<T> {
    pub t: T,
    pub kind: EventKind<T>,
}

#[derive(Debug, Clone)]
pub struct TransientRun<T> {
    pub trace: SimTrace<T>,
    pub controller: ControllerState<T>,
    pub events: Vec<ControllerEvent<T>>,
    pub fault: Option<FaultCode>,
}

/// Closed-loop fixed-step simulation that can be advanced in chunks.
#[derive(Debug, Clone)]
pub struct Simulator<T: Real> {
    cfg: LinkCircuit<T>,
    ctrl_cfg: ControllerConfig<T>,
    kernel: Kernel<T>,
    state: SimState<T>,
    ctrl: ControllerState<T>,
    drive: Drive,
    dt: T,
    stride: u64,
    steps: u64,
    trace: SimTrace<T>,
    events: Vec<ControllerEvent<T>>,
}

impl<T: Real> Simulator<T> {
    pub fn new(cfg: LinkCircuit<T>, ctrl_cfg: ControllerConfig<T>, dt: T, dt_out: T) -> Result<Self> {
        let cfg = validate_circuit(cfg)?;
        ctrl_cfg.validate()?;
        if !(dt > T::zero()) {
            return Err(Error::Precondition("dt must be > 0".into()));
        }
        let max_dt = T::one() / (lit::<T>(MIN_STEPS_PER_CYCLE) * ctrl_cfg.f_hi);
        if dt > max_dt * lit(1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "dt = {:e} s gives fewer than {MIN_STEPS_PER_CYCLE} steps per cycle at f_hi (max {:e} s)",
                to_f64(dt),
                to_f64(max_dt)
            )));
        }
        let ratio = dt_out / dt;
        let stride = ratio.round();
        if !(stride >= T::one()) || (ratio - stride).abs() > lit(1e-6) {
            return Err(Error::Precondition("dt must divide dt_out".into()));
        }
        let kernel = Kernel::new(&cfg);
        let ctrl = ControllerState::new(&ctrl_cfg);
        let trace = SimTrace::new(dt * stride, cfg.v_supply);
        Ok(Self {
            cfg,
            ctrl_cfg,
            kernel,
            state: SimState::zero(),
            ctrl,
            drive: Drive::Off,
            dt,
            stride: stride.to_u64().unwrap(),
            steps: 0,
            trace,
            events: Vec::new(),
        })
    }

    /// Replaces the initial state; only allowed before the first step.
    pub fn with_initial_state(mut self, mut s: SimState<T>) -> Self {
        assert_eq!(self.steps, 0, "initial state must be set before stepping");
        s.t = T::zero();
        self.state = s;
        self
    }

    pub fn circuit(&self) -> &LinkCircuit<T> {
        &self.cfg
    }

    pub fn state(&self) -> &SimState<T> {
        &self.state
    }

    pub fn controller(&self) -> &ControllerState<T> {
        &self.ctrl
    }

    pub fn trace(&self) -> &SimTrace<T> {
        &self.trace
    }

    pub fn events(&self) -> &[ControllerEvent<T>] {
        &self.events
    }

    pub fn time(&self) -> T {
        self.state.t
    }

    pub fn fault(&self) -> Option<FaultCode> {
        self.ctrl.fault_code()
    }

    /// Drops recorded samples older than `t_keep` to bound memory.
    pub fn discard_before(&mut self, t_keep: T) {
        let idx = self.trace.samples.partition_point(|s| s.state.t < t_keep);
        self.trace.samples.drain(..idx);
    }

    fn telemetry(&self) -> Sample<T> {
        let s = &self.state;
        let d = self.drive.value::<T>();
        let r_board = self.cfg.bridge_ron + self.cfg.tx.esr;
        Sample {
            t: s.t,
            i1: s.i1,
            v_switch: d * self.cfg.v_supply - self.cfg.bridge_ron * s.i1,
            p_tx: self.cfg.v_supply * d * s.i1,
            p_loss: r_board * s.i1 * s.i1,
        }
    }

    fn record(&mut self) {
        let s = self.state;
        let d = self.drive.value::<T>();
        self.trace.samples.push(TraceSample {
            state: s,
            drive: self.drive,
            v_switch: d * self.cfg.v_supply - self.cfg.bridge_ron * s.i1,
            i_supply: d * s.i1,
        });
    }

    /// Integrates for `duration` seconds or until the controller faults.
    pub fn advance(&mut self, duration: T) -> Result<()> {
        let n = (duration / self.dt).round().to_u64().unwrap_or(0);
        for _ in 0..n {
            if self.ctrl.fault_code().is_some() {
                break;
            }
            self.single_step()?;
        }
        Ok(())
    }

    fn single_step(&mut self) -> Result<()> {
        let before = self.ctrl.mode;
        let (drive, next) = controller_step(&self.ctrl_cfg, &self.ctrl, self.telemetry());
        self.ctrl = next;
        self.drive = drive;
        match (before, self.ctrl.mode) {
            (Mode::Search, Mode::Lock) => self.events.push(ControllerEvent {
                t: self.state.t,
                kind: EventKind::Locked { f_search: self.ctrl_cfg.f_search },
            }),
            (Mode::Fault(_), _) => {}
            (_, Mode::Fault(code)) => {
                self.events.push(ControllerEvent { t: self.state.t, kind: EventKind::Fault(code) });
                self.record();
                return Ok(());
            }
            _ => {}
        }
        if self.steps.is_multiple_of(self.stride) {
            self.record();
        }
        let mut next = self.kernel.advance(&self.state, drive, self.dt)?;
        self.steps += 1;
        next.t = T::from_u64(self.steps).unwrap() * self.dt;
        self.state = next;
        Ok(())
    }

    pub fn into_run(mut self) -> TransientRun<T> {
        if self.ctrl.fault_code().is_none() && self.steps.is_multiple_of(self.stride) {
            self.record();
        }
        TransientRun { fault: self.ctrl.fault_code(), controller: self.ctrl, events: self.events, trace: self.trace }
    }
}

/// Closed-loop run from the zero state. A controller fault ends the run
/// early and is reported in [`TransientRun::fault`].
pub fn run_transient<T: Real>(
    cfg: &LinkCircuit<T>,
    ctrl: &ControllerConfig<T>,
    duration: T,
    dt: T,
    dt_out: T,
) -> Result<TransientRun<T>> {
    if !(duration > T::zero()) {
        return Err(Error::Precondition("duration must be > 0".into()));
    }
    let mut sim = Simulator::new(cfg.clone(), ctrl.clone(), dt, dt_out)?;
    sim.advance(duration)?;
    Ok(sim.into_run())
}

/// Per-window peak Tx current of the transmitter searching with no
/// receiver coupled, for use as [`ControllerConfig::search_reference`].
pub fn free_tank_signature<T: Real>(
    cfg: &LinkCircuit<T>,
    ctrl: &ControllerConfig<T>,
    windows: usize,
    dt: T,
) -> Result<Vec<T>> {
    let mut free = cfg.clone();
    free.m = T::zero();
    let search_only = ControllerConfig { detect_threshold: T::max_value(), search_reference: None, ..ctrl.clone() };
    let mut sim = Simulator::new(free, search_only, dt, dt)?;
    let window = T::from_u32(ctrl.search_window_cycles).unwrap() / ctrl.f_search;
    let mut peaks = Vec::with_capacity(windows);
    for w in 0..windows {
        let end = window * T::from_usize(w + 1).unwrap();
        let mut peak = T::zero();
        while sim.time() < end {
            sim.single_step()?;
            peak = peak.max(sim.state().i1.abs());
        }
        peaks.push(peak);
        sim.discard_before(end);
    }
    Ok(peaks)
}
