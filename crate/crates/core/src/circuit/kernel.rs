//! Right-hand side of the link ODE and the RK4 step.
//!
//! The diode bridge is piecewise linear. Its conduction direction is fixed
//! for a whole step from the state at the start of the step: it follows the
//! sign of the Rx current, or, when that current is zero, whether the
//! open-circuit bridge voltage exceeds the reservoir voltage plus two diode
//! drops. A current that crosses zero inside a step is clamped to zero at
//! the end of it and the magnetic energy removed by the clamp is booked as
//! diode commutation loss.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::{Drive, LinkCircuit, LoadModel, Rectifier, SimState};

const N: usize = 12;
const I1: usize = 0;
const I2: usize = 1;
const VC1: usize = 2;
const VC2: usize = 3;
const VREC: usize = 4;
const ILIN: usize = 5;
const VMID: usize = 6;
const ILOUT: usize = 7;
const OMEGA: usize = 8;
const ESRC: usize = 9;
const ELOAD: usize = 10;
const EDISS: usize = 11;

type Vector<T> = [T; N];

#[derive(Debug, Clone)]
pub(crate) struct Kernel<T> {
    vs: T,
    r1: T,
    ron: T,
    r2: T,
    l1: T,
    l2: T,
    m: T,
    inv_det: T,
    inv_c1: T,
    inv_c2: T,
    two_vf: T,
    two_rd: T,
    inv_c_rect: T,
    inv_l_in: T,
    inv_c_mid: T,
    inv_l_out: T,
    load: LoadModel<T>,
    bridge: bool,
}

impl<T: Real> Kernel<T> {
    pub(crate) fn new(cfg: &LinkCircuit<T>) -> Self {
        let (l1, l2, m) = (cfg.tx.inductance, cfg.rx.inductance, cfg.m);
        let two = lit::<T>(2.0);
        Self {
            vs: cfg.v_supply,
            r1: cfg.tx.esr,
            ron: cfg.bridge_ron,
            r2: cfg.rx.esr,
            l1,
            l2,
            m,
            inv_det: T::one() / (l1 * l2 - m * m),
            inv_c1: T::one() / cfg.c1,
            inv_c2: T::one() / cfg.c2,
            two_vf: two * cfg.diode_vf,
            two_rd: two * cfg.diode_ron,
            inv_c_rect: T::one() / cfg.c_rect,
            inv_l_in: T::one() / cfg.lcl.l_in,
            inv_c_mid: T::one() / cfg.lcl.c_mid,
            inv_l_out: T::one() / cfg.lcl.l_out,
            load: cfg.load,
            bridge: cfg.rectifier == Rectifier::Bridge,
        }
    }

    /// Conduction direction of the bridge for the coming step.
    fn conduction(&self, x: &Vector<T>, drive: T) -> i8 {
        if !self.bridge {
            return 0;
        }
        if x[I2] > T::zero() {
            return 1;
        }
        if x[I2] < T::zero() {
            return -1;
        }
        // bridge voltage that would hold di2/dt = 0 with i2 = 0
        let v1 = drive * self.vs - (self.ron + self.r1) * x[I1] - x[VC1];
        let v_oc = -x[VC2] - self.m * v1 / self.l1;
        let threshold = x[VREC] + self.two_vf;
        if v_oc > threshold {
            1
        } else if v_oc < -threshold {
            -1
        } else {
            0
        }
    }

    /// Voltage across the load terminals and the current it draws.
    fn load_port(&self, x: &Vector<T>) -> (T, T) {
        match self.load {
            LoadModel::Resistor { r } => (r * x[ILOUT], x[ILOUT]),
            LoadModel::DcMotor { back_emf_const, armature_r, .. } => {
                (back_emf_const * x[OMEGA] + armature_r * x[ILOUT], x[ILOUT])
            }
            LoadModel::ConstantCurrent { i } => {
                let sink = if x[VMID] > T::zero() { i } else { T::zero() };
                (x[VMID], sink)
            }
        }
    }

    fn deriv(&self, x: &Vector<T>, drive: T, sigma: i8) -> Vector<T> {
        let mut dx = [T::zero(); N];
        let (i1, i2) = (x[I1], x[I2]);
        let v1 = drive * self.vs - (self.ron + self.r1) * i1 - x[VC1];
        dx[ESRC] = self.vs * drive * i1;
        dx[EDISS] = (self.ron + self.r1) * i1 * i1 + self.r2 * i2 * i2;
        dx[VC1] = i1 * self.inv_c1;
        dx[VC2] = i2 * self.inv_c2;

        if !self.bridge {
            let r_load = match self.load {
                LoadModel::Resistor { r } => r,
                _ => T::zero(),
            };
            let v2 = -(self.r2 + r_load) * i2 - x[VC2];
            dx[I1] = (self.l2 * v1 - self.m * v2) * self.inv_det;
            dx[I2] = (self.l1 * v2 - self.m * v1) * self.inv_det;
            dx[ELOAD] = r_load * i2 * i2;
            return dx;
        }

        if sigma == 0 {
            dx[I1] = v1 / self.l1;
            dx[I2] = T::zero();
        } else {
            let s = if sigma > 0 { T::one() } else { -T::one() };
            let v_ac = s * (x[VREC] + self.two_vf) + self.two_rd * i2;
            let v2 = -self.r2 * i2 - x[VC2] - v_ac;
            dx[I1] = (self.l2 * v1 - self.m * v2) * self.inv_det;
            dx[I2] = (self.l1 * v2 - self.m * v1) * self.inv_det;
            dx[VREC] = s * i2 * self.inv_c_rect;
            dx[EDISS] += s * i2 * self.two_vf + self.two_rd * i2 * i2;
        }

        let (v_load, i_load) = self.load_port(x);
        dx[VREC] -= x[ILIN] * self.inv_c_rect;
        dx[ILIN] = (x[VREC] - x[VMID]) * self.inv_l_in;
        dx[VMID] = (x[ILIN] - i_load) * self.inv_c_mid;
        match self.load {
            LoadModel::ConstantCurrent { .. } => {}
            LoadModel::DcMotor { back_emf_const, inertia, friction, .. } => {
                dx[ILOUT] = (x[VMID] - v_load) * self.inv_l_out;
                dx[OMEGA] = (back_emf_const * x[ILOUT] - friction * x[OMEGA]) / inertia;
            }
            LoadModel::Resistor { .. } => {
                dx[ILOUT] = (x[VMID] - v_load) * self.inv_l_out;
            }
        }
        dx[ELOAD] = v_load * i_load;
        dx
    }

    pub(crate) fn advance(&self, s: &SimState<T>, drive: Drive, dt: T) -> Result<SimState<T>> {
        let x = pack(s);
        let d = drive.value::<T>();
        let sigma = self.conduction(&x, d);

        let half = lit::<T>(0.5);
        let k1 = self.deriv(&x, d, sigma);
        let k2 = self.deriv(&axpy(&x, dt * half, &k1), d, sigma);
        let k3 = self.deriv(&axpy(&x, dt * half, &k2), d, sigma);
        let k4 = self.deriv(&axpy(&x, dt, &k3), d, sigma);
        let sixth = dt / lit(6.0);
        let two = lit::<T>(2.0);
        let mut y = x;
        for j in 0..N {
            y[j] += sixth * (k1[j] + two * (k2[j] + k3[j]) + k4[j]);
        }

        if self.bridge {
            if sigma == 0 {
                y[I2] = T::zero();
            } else if (sigma > 0 && y[I2] < T::zero()) || (sigma < 0 && y[I2] > T::zero()) {
                let i2 = y[I2];
                y[EDISS] += half * self.l2 * i2 * i2 + self.m * y[I1] * i2;
                y[I2] = T::zero();
            }
            if let LoadModel::ConstantCurrent { i } = self.load {
                y[ILOUT] = if y[VMID] > T::zero() { i } else { T::zero() };
            }
        }

        let mut out = unpack(&y, s.t + dt);
        if self.bridge {
            out.v_load = self.load_port(&y).0;
        } else if let LoadModel::Resistor { r } = self.load {
            // the Rx mesh current is the load current
            out.i_lout = out.i2;
            out.v_load = r * out.i2;
        }
        if !out.is_finite() {
            return Err(Error::Instability { t: to_f64(out.t) });
        }
        Ok(out)
    }
}

fn axpy<T: Real>(x: &Vector<T>, a: T, k: &Vector<T>) -> Vector<T> {
    let mut y = *x;
    for j in 0..N {
        y[j] += a * k[j];
    }
    y
}

fn pack<T: Real>(s: &SimState<T>) -> Vector<T> {
    [
        s.i1,
        s.i2,
        s.v_c1,
        s.v_c2,
        s.v_rect,
        s.i_lin,
        s.v_cmid,
        s.i_lout,
        s.motor_speed,
        s.e_source,
        s.e_load,
        s.e_diss,
    ]
}

fn unpack<T: Real>(x: &Vector<T>, t: T) -> SimState<T> {
    SimState {
        t,
        i1: x[I1],
        i2: x[I2],
        v_c1: x[VC1],
        v_c2: x[VC2],
        v_rect: x[VREC],
        i_lin: x[ILIN],
        v_cmid: x[VMID],
        i_lout: x[ILOUT],
        v_load: T::zero(),
        motor_speed: x[OMEGA],
        e_source: x[ESRC],
        e_load: x[ELOAD],
        e_diss: x[EDISS],
    }
}

/// Advances the link one fixed RK4 step of length `dt` under bridge polarity `drive`.
pub fn step<T: Real>(cfg: &LinkCircuit<T>, s: &SimState<T>, drive: Drive, dt: T) -> Result<SimState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Precondition(format!("step size must be > 0, got {}", to_f64(dt))));
    }
    Kernel::new(cfg).advance(s, drive, dt)
}
