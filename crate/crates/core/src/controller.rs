//! Autoresonant driver: fixed-frequency search, zero-current-crossing lock
//! and the temperature / overpower / frequency-window monitors.
//!
//! The lock is a self-oscillation: the bridge polarity follows the sign of
//! the Tx tank current, flipped at each interpolated zero crossing, so the
//! switching node voltage stays in phase with the current every half cycle.

use crate::circuit::Drive;
use crate::error::{Error, FieldViolation, Result};
use crate::scalar::{lit, Real};

/// Same-direction periods that must be measured in LOCK before the
/// frequency-window monitor is armed.
pub const LOCK_SETTLE_PERIODS: u32 = 8;

/// Consecutive out-of-window period measurements needed before the lock
/// frequency is reported to the fault monitor as out of window.
pub const FREQ_WINDOW_PERSIST: u32 = 8;

/// Margin applied to the frequency window when clamping the toggle period.
const CLAMP_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultCode {
    Overpower,
    FreqWindow,
    Overtemp,
}

impl FaultCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultCode::Overpower => "OVERPOWER",
            FaultCode::FreqWindow => "FREQ_WINDOW",
            FaultCode::Overtemp => "OVERTEMP",
        }
    }
}

impl std::fmt::Display for FaultCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Search,
    Lock,
    Fault(FaultCode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalModel<T> {
    /// Board-to-ambient thermal resistance, °C/W.
    pub r_th: T,
    /// Board heat capacity, J/°C.
    pub c_th: T,
    pub t_ambient: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig<T> {
    pub f_search: T,
    /// Fraction of each search window during which the bridge is driven.
    pub search_duty: T,
    /// Tank-current amplitude change that flags a coupled receiver.
    pub detect_threshold: T,
    pub f_lo: T,
    pub f_hi: T,
    pub p_max: T,
    pub temp_max: T,
    pub thermal: ThermalModel<T>,
    /// Length of one search window in drive cycles.
    pub search_window_cycles: u32,
    /// Per-window peak tank current of the unloaded transmitter. When set,
    /// detection compares against it; otherwise the raw amplitude is used.
    pub search_reference: Option<Vec<T>>,
}

impl<T: Real> Default for ControllerConfig<T> {
    fn default() -> Self {
        Self {
            f_search: lit(127e3),
            search_duty: lit(0.25),
            detect_threshold: lit(0.01),
            f_lo: lit(119e3),
            f_hi: lit(135e3),
            p_max: lit(10.0),
            temp_max: lit(85.0),
            thermal: ThermalModel { r_th: lit(20.0), c_th: lit(2.0), t_ambient: lit(25.0) },
            search_window_cycles: 16,
            search_reference: None,
        }
    }
}

impl<T: Real> ControllerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let mut check = |ok: bool, field: &'static str, reason: &str| {
            if !ok {
                v.push(FieldViolation { field, reason: reason.into() });
            }
        };
        check(self.f_lo > T::zero(), "f_lo", "must be > 0");
        check(self.f_lo < self.f_search && self.f_search < self.f_hi, "f_search", "must lie strictly inside (f_lo, f_hi)");
        check(self.search_duty > T::zero() && self.search_duty <= T::one(), "search_duty", "must be in (0, 1]");
        check(self.detect_threshold.is_finite(), "detect_threshold", "must be finite");
        check(self.p_max > T::zero(), "p_max", "must be > 0");
        check(self.temp_max.is_finite(), "temp_max", "must be finite");
        check(self.thermal.r_th > T::zero(), "r_th", "must be > 0");
        check(self.thermal.c_th > T::zero(), "c_th", "must be > 0");
        check(self.search_window_cycles > 0, "search_window_cycles", "must be >= 1");
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    fn min_half_period(&self) -> T {
        lit::<T>(0.5 * (1.0 - CLAMP_MARGIN)) / self.f_hi
    }

    fn max_half_period(&self) -> T {
        lit::<T>(0.5 * (1.0 + CLAMP_MARGIN)) / self.f_lo
    }
}

/// One telemetry sample delivered to the controller every integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub i1: T,
    pub v_switch: T,
    /// Instantaneous power drawn from the supply.
    pub p_tx: T,
    /// Instantaneous conduction loss on the driver board.
    pub p_loss: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Telemetry<T> {
    pub p_tx: T,
    /// Locked switching frequency; `None` outside LOCK.
    pub f_lock: Option<T>,
    pub board_temp: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState<T> {
    pub mode: Mode,
    pub last_zc_time: T,
    pub period_estimate: T,
    pub board_temp: T,
    drive: Drive,
    prev: Option<(T, T)>,
    search_start: T,
    window_index: u64,
    window_peak: T,
    last_toggle: T,
    last_rising: Option<T>,
    last_falling: Option<T>,
    periods_measured: u32,
    out_of_window: u32,
    energy_acc: T,
    acc_start: T,
    p_avg: Option<T>,
    lock_time: Option<T>,
}

impl<T: Real> ControllerState<T> {
    pub fn new(cfg: &ControllerConfig<T>) -> Self {
        Self {
            mode: Mode::Search,
            last_zc_time: T::zero(),
            period_estimate: T::one() / cfg.f_search,
            board_temp: cfg.thermal.t_ambient,
            drive: Drive::Off,
            prev: None,
            search_start: T::zero(),
            window_index: 0,
            window_peak: T::zero(),
            last_toggle: T::zero(),
            last_rising: None,
            last_falling: None,
            periods_measured: 0,
            out_of_window: 0,
            energy_acc: T::zero(),
            acc_start: T::zero(),
            p_avg: None,
            lock_time: None,
        }
    }

    pub fn fault_code(&self) -> Option<FaultCode> {
        match self.mode {
            Mode::Fault(c) => Some(c),
            _ => None,
        }
    }

    pub fn drive(&self) -> Drive {
        self.drive
    }

    /// `1 / period_estimate` once at least one full period was measured in LOCK.
    pub fn locked_frequency(&self) -> Option<T> {
        (self.mode == Mode::Lock && self.periods_measured > 0).then(|| T::one() / self.period_estimate)
    }

    pub fn periods_measured(&self) -> u32 {
        self.periods_measured
    }

    /// Time of the SEARCH to LOCK transition.
    pub fn lock_time(&self) -> Option<T> {
        self.lock_time
    }

    /// Mean supply power over the last completed cycle or search window.
    pub fn average_power(&self) -> Option<T> {
        self.p_avg
    }

    fn enter_lock(&mut self, t: T, i1: T, f_search: T) {
        self.mode = Mode::Lock;
        self.drive = if i1 < T::zero() { Drive::Neg } else { Drive::Pos };
        self.last_toggle = t;
        self.last_zc_time = t;
        self.period_estimate = T::one() / f_search;
        self.last_rising = None;
        self.last_falling = None;
        self.periods_measured = 0;
        self.out_of_window = 0;
        self.energy_acc = T::zero();
        self.acc_start = t;
        self.lock_time = Some(t);
    }
}

/// Advances the state machine by one sample and returns the bridge polarity
/// to apply until the next sample.
pub fn controller_step<T: Real>(
    cfg: &ControllerConfig<T>,
    st: &ControllerState<T>,
    sample: Sample<T>,
) -> (Drive, ControllerState<T>) {
    let mut s = *st;
    if let Mode::Fault(_) = s.mode {
        s.drive = Drive::Off;
        s.prev = Some((sample.t, sample.i1));
        return (Drive::Off, s);
    }

    let elapsed = match s.prev {
        Some((tp, _)) => sample.t - tp,
        None => T::zero(),
    };
    if elapsed > T::zero() {
        s.board_temp = thermal_step(cfg, s.board_temp, sample.p_loss, elapsed);
        s.energy_acc += sample.p_tx * elapsed;
    }

    match s.mode {
        Mode::Search => search_update(cfg, &mut s, sample),
        Mode::Lock => lock_update(cfg, &mut s, sample),
        Mode::Fault(_) => unreachable!(),
    }

    let persistent = s.out_of_window == 0 || s.out_of_window >= FREQ_WINDOW_PERSIST;
    let f_lock =
        (s.mode == Mode::Lock && s.periods_measured >= LOCK_SETTLE_PERIODS && persistent).then(|| T::one() / s.period_estimate);
    let telemetry = Telemetry { p_tx: s.p_avg.unwrap_or_else(T::zero), f_lock, board_temp: s.board_temp };
    if let Some(code) = check_faults(cfg, telemetry) {
        s.mode = Mode::Fault(code);
        s.drive = Drive::Off;
    }
    s.prev = Some((sample.t, sample.i1));
    (s.drive, s)
}

fn search_update<T: Real>(cfg: &ControllerConfig<T>, s: &mut ControllerState<T>, sample: Sample<T>) {
    let window_len = T::from_u32(cfg.search_window_cycles).unwrap();
    let phase = (sample.t - s.search_start) * cfg.f_search;
    let window = (phase / window_len).floor().to_u64().unwrap_or(0);

    if window > s.window_index {
        let amplitude = s.window_peak;
        let span = sample.t - s.acc_start;
        if span > T::zero() {
            s.p_avg = Some(s.energy_acc / span);
        }
        s.energy_acc = T::zero();
        s.acc_start = sample.t;

        let completed = s.window_index as usize;
        s.window_index = window;
        s.window_peak = T::zero();
        if receiver_detected(cfg, completed, amplitude) {
            s.enter_lock(sample.t, sample.i1, cfg.f_search);
            return;
        }
    }
    s.window_peak = s.window_peak.max(sample.i1.abs());

    let in_window = phase - T::from_u64(window).unwrap() * window_len;
    s.drive = if in_window < cfg.search_duty * window_len {
        if phase - phase.floor() < lit(0.5) {
            Drive::Pos
        } else {
            Drive::Neg
        }
    } else {
        Drive::Off
    };
}

fn receiver_detected<T: Real>(cfg: &ControllerConfig<T>, window: usize, amplitude: T) -> bool {
    if !(amplitude > T::zero()) {
        return false;
    }
    match &cfg.search_reference {
        Some(reference) if !reference.is_empty() => {
            let r = reference[window.min(reference.len() - 1)];
            (amplitude - r).abs() > cfg.detect_threshold
        }
        _ => amplitude > cfg.detect_threshold,
    }
}

fn lock_update<T: Real>(cfg: &ControllerConfig<T>, s: &mut ControllerState<T>, sample: Sample<T>) {
    let (t, i1) = (sample.t, sample.i1);
    if let Some((tp, ip)) = s.prev {
        let crossed = (ip < T::zero() && i1 >= T::zero()) || (ip > T::zero() && i1 <= T::zero());
        if crossed {
            let t_zc = tp + (t - tp) * ip / (ip - i1);
            if t_zc - s.last_zc_time >= cfg.min_half_period() {
                let rising = i1 > ip;
                s.drive = if rising { Drive::Pos } else { Drive::Neg };
                s.last_toggle = t;
                s.last_zc_time = t_zc;
                let last_same = if rising { &mut s.last_rising } else { &mut s.last_falling };
                let prev_same = last_same.replace(t_zc);
                if let Some(prev_zc) = prev_same {
                    s.period_estimate = t_zc - prev_zc;
                    s.periods_measured = s.periods_measured.saturating_add(1);
                    let f = T::one() / s.period_estimate;
                    s.out_of_window = if f > cfg.f_lo && f < cfg.f_hi { 0 } else { s.out_of_window.saturating_add(1) };
                }
                if rising {
                    let span = t - s.acc_start;
                    if prev_same.is_some() && span > T::zero() {
                        s.p_avg = Some(s.energy_acc / span);
                    }
                    s.energy_acc = T::zero();
                    s.acc_start = t;
                }
                return;
            }
        }
    }
    if t - s.last_toggle >= cfg.max_half_period() {
        s.drive = match s.drive {
            Drive::Pos => Drive::Neg,
            _ => Drive::Pos,
        };
        s.last_toggle = t;
    }
}

/// Fault monitors with priority OVERTEMP > OVERPOWER > FREQ_WINDOW.
pub fn check_faults<T: Real>(cfg: &ControllerConfig<T>, telemetry: Telemetry<T>) -> Option<FaultCode> {
    if telemetry.board_temp > cfg.temp_max {
        return Some(FaultCode::Overtemp);
    }
    if telemetry.p_tx > cfg.p_max {
        return Some(FaultCode::Overpower);
    }
    match telemetry.f_lock {
        Some(f) if !(f > cfg.f_lo && f < cfg.f_hi) => Some(FaultCode::FreqWindow),
        _ => None,
    }
}

/// Explicit first-order board temperature update.
pub fn thermal_step<T: Real>(cfg: &ControllerConfig<T>, temp: T, p_loss: T, dt: T) -> T {
    let th = &cfg.thermal;
    temp + dt * ((th.t_ambient - temp) / (th.r_th * th.c_th) + p_loss / th.c_th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(t: f64, i1: f64) -> Sample<f64> {
        Sample { t, i1, v_switch: 0.0, p_tx: 0.0, p_loss: 0.0 }
    }

    #[test]
    fn zero_current_never_locks() {
        let cfg = ControllerConfig::<f64> { detect_threshold: 0.0, ..Default::default() };
        let mut st = ControllerState::new(&cfg);
        let dt = 1.0 / (127e3 * 400.0);
        for k in 0..400 * 200 {
            st = controller_step(&cfg, &st, sample(k as f64 * dt, 0.0)).1;
        }
        assert_eq!(st.mode, Mode::Search);
    }

    #[test]
    fn search_drive_is_duty_limited() {
        let cfg = ControllerConfig::<f64>::default();
        let mut st = ControllerState::new(&cfg);
        let dt = 1.0 / (127e3 * 100.0);
        let (mut on, mut total) = (0usize, 0usize);
        for k in 0..100 * 16 {
            let (d, s) = controller_step(&cfg, &st, sample(k as f64 * dt, 0.0));
            st = s;
            total += 1;
            if d != Drive::Off {
                on += 1;
            }
        }
        assert_relative_eq!(on as f64 / total as f64, 0.25, epsilon = 0.01);
    }

    #[test]
    fn lock_tracks_sinusoid_period() {
        let cfg = ControllerConfig::<f64> { detect_threshold: 0.0, ..Default::default() };
        let mut st = ControllerState::new(&cfg);
        let f = 125e3;
        let dt = 1.0 / (127e3 * 300.0);
        let mut k = 0u64;
        while k < 300 * 60 {
            let t = k as f64 * dt;
            st = controller_step(&cfg, &st, sample(t, (2.0 * std::f64::consts::PI * f * t + 0.3).sin())).1;
            k += 1;
        }
        assert_eq!(st.mode, Mode::Lock);
        assert_relative_eq!(1.0 / st.period_estimate, f, max_relative = 1e-5);
    }

    #[test]
    fn fault_priority_and_window() {
        let cfg = ControllerConfig::<f64> { p_max: 1e-12, ..Default::default() };
        let tel = |p, f, temp| Telemetry { p_tx: p, f_lock: f, board_temp: temp };
        assert_eq!(check_faults(&cfg, tel(1.0, None, 25.0)), Some(FaultCode::Overpower));
        assert_eq!(check_faults(&cfg, tel(1.0, Some(140e3), 200.0)), Some(FaultCode::Overtemp));
        let cfg = ControllerConfig::<f64>::default();
        assert_eq!(check_faults(&cfg, tel(1.0, Some(140e3), 25.0)), Some(FaultCode::FreqWindow));
        assert_eq!(check_faults(&cfg, tel(1.0, Some(127e3), 25.0)), None);
        assert_eq!(check_faults(&cfg, tel(1.0, None, 25.0)), None);
    }

    #[test]
    fn fault_latches_drive_off() {
        let cfg = ControllerConfig::<f64> { temp_max: 24.0, ..Default::default() };
        let mut st = ControllerState::new(&cfg);
        let (d, s) = controller_step(&cfg, &st, sample(0.0, 1.0));
        assert_eq!(d, Drive::Off);
        assert_eq!(s.mode, Mode::Fault(FaultCode::Overtemp));
        assert_eq!(s.fault_code(), Some(FaultCode::Overtemp));
        st = s;
        for k in 1..1000 {
            let (d, s) = controller_step(&cfg, &st, sample(k as f64 * 1e-8, (k as f64).sin()));
            assert_eq!(d, Drive::Off);
            st = s;
        }
    }

    #[test]
    fn thermal_equilibrium_and_asymptote() {
        let cfg = ControllerConfig::<f64> {
            thermal: ThermalModel { r_th: 10.0, c_th: 0.5, t_ambient: 25.0 },
            ..Default::default()
        };
        assert_eq!(thermal_step(&cfg, 25.0, 0.0, 1e-3), 25.0);
        let mut temp = 25.0;
        for _ in 0..200_000 {
            temp = thermal_step(&cfg, temp, 2.0, 1e-3);
        }
        assert_relative_eq!(temp, 45.0, max_relative = 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad = ControllerConfig::<f64> { f_search: 140e3, search_duty: 0.0, ..Default::default() };
        let fields = bad.validate().unwrap_err().fields();
        assert!(fields.contains(&"f_search"));
        assert!(fields.contains(&"search_duty"));
        assert!(ControllerConfig::<f64>::default().validate().is_ok());
    }
}
