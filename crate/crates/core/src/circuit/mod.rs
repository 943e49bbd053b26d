//! Electrical model of the coupled link and its fixed-step transient solver.
//!
//! Topology: DC supply and full bridge (series `bridge_ron`) drive the Tx
//! tank `C1-L1-esr`. The Rx tank `L2-C2-esr` feeds a full-wave diode bridge
//! into a reservoir capacitor `c_rect`, followed by the `L-C-L` stabilizer
//! and the load. With [`Rectifier::Bypassed`] the Rx tank closes directly on
//! a resistive load, which keeps the whole network linear.

mod energy;
mod kernel;
mod state;
mod transient;

pub use energy::{energy_audit, EnergyAudit};
pub use kernel::step;
pub use state::{Drive, SimState, SimTrace, TraceSample};
pub use transient::{free_tank_signature, run_transient, ControllerEvent, EventKind, Simulator, TransientRun};

use crate::error::{Error, FieldViolation, Result};
use crate::magnetics::{resonance_capacitance, CoilSpec};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadModel<T> {
    Resistor { r: T },
    /// Back-EMF plus armature resistance with a first-order mechanical pole.
    DcMotor { back_emf_const: T, armature_r: T, inertia: T, friction: T },
    ConstantCurrent { i: T },
}

impl<T: Real> LoadModel<T> {
    /// Resistance presented in steady state, if the load has one.
    pub fn equivalent_resistance(&self) -> Option<T> {
        match *self {
            LoadModel::Resistor { r } => Some(r),
            LoadModel::DcMotor { back_emf_const, armature_r, friction, .. } => {
                Some(armature_r + back_emf_const * back_emf_const / friction)
            }
            LoadModel::ConstantCurrent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LclFilter<T> {
    pub l_in: T,
    pub c_mid: T,
    pub l_out: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rectifier {
    /// Full-wave piecewise-linear diode bridge with reservoir and LCL.
    Bridge,
    /// Diodes and filter removed; the resistive load sits in the Rx mesh.
    Bypassed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkCircuit<T> {
    pub v_supply: T,
    pub bridge_ron: T,
    pub c1: T,
    pub tx: CoilSpec<T>,
    pub rx: CoilSpec<T>,
    pub m: T,
    pub c2: T,
    pub diode_vf: T,
    pub diode_ron: T,
    /// Reservoir capacitance at the bridge output.
    pub c_rect: T,
    pub lcl: LclFilter<T>,
    pub load: LoadModel<T>,
    pub rectifier: Rectifier,
}

impl<T: Real> LinkCircuit<T> {
    /// 5 V supply, 24 µH / 47 µH coils tuned to 127 kHz, `k = 0.2`.
    pub fn reference() -> Self {
        let f0 = lit::<T>(127e3);
        let tx = CoilSpec::uniform(lit(24e-6), lit(0.15), lit(0.025), 10).expect("reference Tx coil");
        let rx = CoilSpec::uniform(lit(47e-6), lit(0.30), lit(0.01315), 10).expect("reference Rx coil");
        let c1 = resonance_capacitance(tx.inductance, f0).expect("positive");
        let c2 = resonance_capacitance(rx.inductance, f0).expect("positive");
        let m = lit::<T>(0.2) * (tx.inductance * rx.inductance).sqrt();
        Self {
            v_supply: lit(5.0),
            bridge_ron: lit(0.1),
            c1,
            tx,
            rx,
            m,
            c2,
            diode_vf: lit(0.4),
            diode_ron: lit(0.05),
            c_rect: lit(1e-6),
            lcl: LclFilter { l_in: lit(10e-6), c_mid: lit(10e-6), l_out: lit(10e-6) },
            load: LoadModel::Resistor { r: lit(133.0) },
            rectifier: Rectifier::Bridge,
        }
    }

    pub fn coupling(&self) -> T {
        self.m / (self.tx.inductance * self.rx.inductance).sqrt()
    }

    /// Total series resistance of the Tx mesh (coil plus bridge).
    pub fn tx_resistance(&self) -> T {
        self.tx.esr + self.bridge_ron
    }

    /// Energy held in all reactive elements for state `s`.
    pub fn stored_energy(&self, s: &SimState<T>) -> T {
        let h = lit::<T>(0.5);
        let mut e = h * self.tx.inductance * s.i1 * s.i1
            + self.m * s.i1 * s.i2
            + h * self.rx.inductance * s.i2 * s.i2
            + h * self.c1 * s.v_c1 * s.v_c1
            + h * self.c2 * s.v_c2 * s.v_c2;
        if self.rectifier == Rectifier::Bridge {
            e += h * self.c_rect * s.v_rect * s.v_rect
                + h * self.lcl.l_in * s.i_lin * s.i_lin
                + h * self.lcl.c_mid * s.v_cmid * s.v_cmid;
            if !matches!(self.load, LoadModel::ConstantCurrent { .. }) {
                e += h * self.lcl.l_out * s.i_lout * s.i_lout;
            }
        }
        e
    }

    /// Magnetic energy of the coupled pair; positive-definite while `k < 1`.
    pub fn magnetic_energy(&self, i1: T, i2: T) -> T {
        let h = lit::<T>(0.5);
        h * self.tx.inductance * i1 * i1 + self.m * i1 * i2 + h * self.rx.inductance * i2 * i2
    }
}

/// Returns the circuit unchanged when every invariant holds, otherwise a
/// validation error naming each offending field.
pub fn validate_circuit<T: Real>(cfg: LinkCircuit<T>) -> Result<LinkCircuit<T>> {
    let mut v: Vec<FieldViolation> = Vec::new();
    let mut check = |ok: bool, field: &'static str, reason: &str| {
        if !ok {
            v.push(FieldViolation { field, reason: reason.into() });
        }
    };
    let pos = |x: T| x > T::zero() && x.is_finite();
    let nonneg = |x: T| x >= T::zero() && x.is_finite();

    check(pos(cfg.v_supply), "v_supply", "must be > 0");
    check(nonneg(cfg.bridge_ron), "bridge_ron", "must be >= 0");
    check(pos(cfg.c1), "c1", "must be > 0");
    check(pos(cfg.c2), "c2", "must be > 0");
    check(pos(cfg.tx.inductance), "tx.inductance", "must be > 0");
    check(pos(cfg.rx.inductance), "rx.inductance", "must be > 0");
    check(nonneg(cfg.tx.esr), "tx.esr", "must be >= 0");
    check(nonneg(cfg.rx.esr), "rx.esr", "must be >= 0");
    check(nonneg(cfg.m), "m", "must be >= 0");
    if pos(cfg.tx.inductance) && pos(cfg.rx.inductance) {
        check(cfg.m * cfg.m < cfg.tx.inductance * cfg.rx.inductance, "m", "coupling coefficient must be < 1");
    }
    check(nonneg(cfg.diode_vf), "diode_vf", "must be >= 0");
    check(nonneg(cfg.diode_ron), "diode_ron", "must be >= 0");
    check(pos(cfg.c_rect), "c_rect", "must be > 0");
    check(pos(cfg.lcl.l_in), "lcl.l_in", "must be > 0");
    check(pos(cfg.lcl.c_mid), "lcl.c_mid", "must be > 0");
    check(pos(cfg.lcl.l_out), "lcl.l_out", "must be > 0");
    match cfg.load {
        LoadModel::Resistor { r } => check(pos(r), "load.r", "must be > 0"),
        LoadModel::DcMotor { back_emf_const, armature_r, inertia, friction } => {
            check(pos(back_emf_const), "load.back_emf_const", "must be > 0");
            check(pos(armature_r), "load.armature_r", "must be > 0");
            check(pos(inertia), "load.inertia", "must be > 0");
            check(pos(friction), "load.friction", "must be > 0");
        }
        LoadModel::ConstantCurrent { i } => check(pos(i), "load.i", "must be > 0"),
    }
    if cfg.rectifier == Rectifier::Bypassed {
        check(
            matches!(cfg.load, LoadModel::Resistor { .. }),
            "rectifier",
            "bypassed rectifier requires a resistor load",
        );
    }
    if let Err(Error::Validation(inner)) = cfg.tx.validate() {
        v.extend(inner.into_iter().filter(|f| f.field == "filaments" || f.field == "turns_scale").map(|f| FieldViolation {
            field: if f.field == "filaments" { "tx.filaments" } else { "tx.turns_scale" },
            reason: f.reason,
        }));
    }
    if let Err(Error::Validation(inner)) = cfg.rx.validate() {
        v.extend(inner.into_iter().filter(|f| f.field == "filaments" || f.field == "turns_scale").map(|f| FieldViolation {
            field: if f.field == "filaments" { "rx.filaments" } else { "rx.turns_scale" },
            reason: f.reason,
        }));
    }

    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Validation(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_circuit_is_valid() {
        let c = validate_circuit(LinkCircuit::<f64>::reference()).unwrap();
        assert!((c.coupling() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn unit_coupling_rejected() {
        let mut c = LinkCircuit::<f64>::reference();
        c.m = (c.tx.inductance * c.rx.inductance).sqrt();
        let err = validate_circuit(c).unwrap_err();
        assert_eq!(err.fields(), vec!["m"]);
    }

    #[test]
    fn zero_capacitor_rejected() {
        let mut c = LinkCircuit::<f64>::reference();
        c.c1 = 0.0;
        c.lcl.c_mid = -1.0;
        let fields = validate_circuit(c).unwrap_err().fields();
        assert!(fields.contains(&"c1"));
        assert!(fields.contains(&"lcl.c_mid"));
    }

    #[test]
    fn bypass_needs_resistor() {
        let mut c = LinkCircuit::<f64>::reference();
        c.rectifier = Rectifier::Bypassed;
        c.load = LoadModel::ConstantCurrent { i: 0.01 };
        assert_eq!(validate_circuit(c).unwrap_err().fields(), vec!["rectifier"]);
    }

    #[test]
    fn motor_equivalent_resistance() {
        let load = LoadModel::<f64>::DcMotor { back_emf_const: 0.01, armature_r: 10.0, inertia: 1e-7, friction: 1e-6 };
        assert!((load.equivalent_resistance().unwrap() - 110.0).abs() < 1e-9);
    }
}
