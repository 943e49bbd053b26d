use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wpt_core::analysis::{fundamental_phasor, zero_phase_frequency, LinearizedLink};
use wpt_core::circuit::{free_tank_signature, run_transient, Rectifier, Simulator, TransientRun};
use wpt_core::controller::{thermal_step, ThermalModel};
use wpt_core::magnetics::resonance_capacitance;
use wpt_core::{ControllerConfig64, Drive, FaultCode, LinkCircuit64, LoadModel64, Mode};

const DT: f64 = 5e-9;

/// Series RLC Tx tank, optionally loaded by a resistively terminated Rx tank.
fn plant(l1: f64, f0: f64, q: f64, k: f64, r_load: f64) -> LinkCircuit64 {
    let mut c = LinkCircuit64::reference();
    c.tx.inductance = l1;
    c.c1 = resonance_capacitance(l1, f0).unwrap();
    c.bridge_ron = 0.05;
    c.tx.esr = std::f64::consts::TAU * f0 * l1 / q - c.bridge_ron;
    c.m = k * (c.tx.inductance * c.rx.inductance).sqrt();
    c.rectifier = Rectifier::Bypassed;
    c.load = LoadModel64::Resistor { r: r_load };
    c
}

fn absolute_detection(f_search: f64) -> ControllerConfig64 {
    ControllerConfig64 { f_search, f_lo: 115e3, p_max: 1e3, temp_max: 1e3, ..Default::default() }
}

fn oracle(c: &LinkCircuit64) -> f64 {
    let link = LinearizedLink::from_circuit(c, c.load.equivalent_resistance().unwrap());
    zero_phase_frequency(&link, 100e3, 160e3).unwrap()
}

/// Fundamental phase of `i1` relative to `v_switch` over the last `cycles` periods.
fn drive_phase_deg(run: &TransientRun<f64>, cycles: usize) -> f64 {
    let period = run.controller.period_estimate;
    let dt_out = run.trace.dt_out;
    let n = (cycles as f64 * period / dt_out).round() as usize;
    let tail = &run.trace.samples[run.trace.len() - n..];
    let f = cycles as f64 / (n as f64 * dt_out);
    let v: Vec<f64> = tail.iter().map(|s| s.v_switch).collect();
    let i: Vec<f64> = tail.iter().map(|s| s.state.i1).collect();
    let pv = fundamental_phasor(&v, dt_out, f).unwrap();
    let pi = fundamental_phasor(&i, dt_out, f).unwrap();
    (pi / pv).arg().to_degrees()
}

#[test]
fn locks_onto_tank_resonance_from_band_edge() {
    let c = plant(24e-6, 127e3, 20.0, 0.0, 100.0);
    let mut sim = Simulator::new(c.clone(), absolute_detection(119e3), DT, DT).unwrap();
    sim.advance(0.2e-3).unwrap();
    let t_lock = sim.controller().lock_time().expect("locked");
    sim.advance(t_lock + 50.0 / 127e3 - sim.time()).unwrap();
    let f = 1.0 / sim.controller().period_estimate;
    assert!((f / oracle(&c) - 1.0).abs() < 5e-3, "{f}");
}

#[test]
fn randomized_plants_lock_at_zero_phase() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let l1 = rng.gen_range(10e-6..60e-6);
        let f0 = rng.gen_range(121e3..133e3);
        let q = rng.gen_range(10.0..40.0);
        let k = rng.gen_range(0.0..0.12);
        let r_load = rng.gen_range(80.0..300.0);
        let c = plant(l1, f0, q, k, r_load);
        let run = run_transient(&c, &absolute_detection(127e3), 1.5e-3, DT, DT).unwrap();
        assert_eq!(run.controller.mode, Mode::Lock);
        let f = 1.0 / run.controller.period_estimate;
        let target = oracle(&c);
        assert!((f / target - 1.0).abs() < 5e-3, "f = {f}, zero-phase = {target}");
        let phase = drive_phase_deg(&run, 40);
        assert!(phase.abs() < 2.0, "phase {phase} deg");
    }
}

#[test]
fn locked_period_is_steady() {
    let c = plant(24e-6, 127e3, 15.0, 0.05, 150.0);
    let run = run_transient(&c, &absolute_detection(127e3), 1.5e-3, DT, DT).unwrap();
    let s = &run.trace.samples;
    let mut rising = Vec::new();
    for w in s.windows(2) {
        let (a, b) = (w[0].state, w[1].state);
        if a.t > 0.8e-3 && a.i1 < 0.0 && b.i1 >= 0.0 {
            rising.push(a.t + (b.t - a.t) * a.i1 / (a.i1 - b.i1));
        }
    }
    let periods: Vec<f64> = rising.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(periods.len() > 50);
    for w in periods.windows(2) {
        assert!(((w[1] - w[0]) / w[0]).abs() < 1e-3, "{w:?}");
    }
}

#[test]
fn out_of_window_resonance_faults() {
    let c = plant(24e-6, 145e3, 20.0, 0.0, 100.0);
    let run = run_transient(&c, &absolute_detection(127e3), 1e-3, DT, DT).unwrap();
    assert_eq!(run.fault, Some(FaultCode::FreqWindow));
    assert_eq!(run.controller.drive(), Drive::Off);
}

#[test]
fn overpower_trips_and_latches() {
    let c = plant(24e-6, 127e3, 20.0, 0.0, 100.0);
    let ctrl = ControllerConfig64 { p_max: 0.5, ..absolute_detection(127e3) };
    let mut sim = Simulator::new(c, ctrl, DT, DT).unwrap();
    sim.advance(1e-3).unwrap();
    assert_eq!(sim.fault(), Some(FaultCode::Overpower));
    let t = sim.time();
    sim.advance(0.1e-3).unwrap();
    assert_eq!(sim.time(), t);
    assert_eq!(sim.controller().drive(), Drive::Off);
}

#[test]
fn overtemperature_outranks_other_faults() {
    let c = plant(24e-6, 145e3, 20.0, 0.0, 100.0);
    let ctrl = ControllerConfig64 {
        temp_max: 25.5,
        p_max: 0.5,
        thermal: ThermalModel { r_th: 20.0, c_th: 1e-4, t_ambient: 25.0 },
        ..absolute_detection(127e3)
    };
    let run = run_transient(&c, &ctrl, 1e-3, DT, DT).unwrap();
    assert_eq!(run.fault, Some(FaultCode::Overtemp));
}

#[test]
fn board_temperature_settles_at_thermal_asymptote() {
    let cfg = ControllerConfig64 {
        thermal: ThermalModel { r_th: 10.0, c_th: 2.0, t_ambient: 25.0 },
        ..Default::default()
    };
    assert_eq!(thermal_step(&cfg, 25.0, 0.0, 1.0), 25.0);
    let mut temp = 25.0;
    for _ in 0..100_000 {
        temp = thermal_step(&cfg, temp, 2.0, 0.01);
    }
    assert!((temp - 45.0).abs() < 1e-6, "{temp}");
}

#[test]
fn raising_threshold_never_locks_earlier() {
    let mut c = LinkCircuit64::reference();
    c.tx.esr = 1.4;
    c.lcl.c_mid = 1e-6;
    let base = ControllerConfig64 { p_max: 20.0, ..Default::default() };
    let reference = free_tank_signature(&c, &base, 8, DT).unwrap();
    let mut last = 0.0;
    for threshold in [1e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.3, 1.0, 3.0] {
        let ctrl = ControllerConfig64 { detect_threshold: threshold, search_reference: Some(reference.clone()), ..base.clone() };
        let run = run_transient(&c, &ctrl, 1e-3, DT, 25e-9).unwrap();
        let t = run.controller.lock_time().unwrap_or(f64::INFINITY);
        assert!(t >= last, "threshold {threshold}: lock at {t} before {last}");
        last = t;
    }
    assert!(last.is_infinite());
}

#[test]
fn signature_matches_free_tank_without_receiver() {
    let mut c = LinkCircuit64::reference();
    c.tx.esr = 1.4;
    let base = ControllerConfig64 { p_max: 20.0, ..Default::default() };
    let reference = free_tank_signature(&c, &base, 8, DT).unwrap();
    assert_eq!(reference.len(), 8);
    c.m = 0.0;
    let ctrl = ControllerConfig64 { detect_threshold: 1e-9, search_reference: Some(reference), ..base };
    let run = run_transient(&c, &ctrl, 1e-3, DT, 25e-9).unwrap();
    assert_eq!(run.controller.mode, Mode::Search);
}
