use num_complex::Complex;

use crate::circuit::LinkCircuit;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Two-mesh small-signal model of the link with the rectifier and load
/// replaced by a resistance `r_ac` in series with the Rx tank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedLink<T> {
    /// Peak amplitude of the Tx drive voltage.
    pub v1: T,
    pub r1: T,
    pub l1: T,
    pub c1: T,
    pub r2: T,
    pub l2: T,
    pub c2: T,
    pub m: T,
    pub r_ac: T,
}

impl<T: Real> LinearizedLink<T> {
    /// Uses the fundamental of the full-bridge square wave as `v1`.
    pub fn from_circuit(cfg: &LinkCircuit<T>, r_ac: T) -> Self {
        Self {
            v1: lit::<T>(4.0) / T::PI() * cfg.v_supply,
            r1: cfg.tx_resistance(),
            l1: cfg.tx.inductance,
            c1: cfg.c1,
            r2: cfg.rx.esr,
            l2: cfg.rx.inductance,
            c2: cfg.c2,
            m: cfg.m,
            r_ac,
        }
    }

    pub fn tx_impedance(&self, f: T) -> Complex<T> {
        let w = T::TAU() * f;
        Complex::new(self.r1, w * self.l1 - T::one() / (w * self.c1))
    }

    pub fn rx_impedance(&self, f: T) -> Complex<T> {
        let w = T::TAU() * f;
        Complex::new(self.r2 + self.r_ac, w * self.l2 - T::one() / (w * self.c2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasorSolution<T> {
    pub i1: Complex<T>,
    pub i2: Complex<T>,
    pub z_in: Complex<T>,
    pub eta_ac: T,
}

/// Solves the mesh equations at frequency `f`:
/// `Z1·I1 − jωM·I2 = V1`, `−jωM·I1 + Z2·I2 = 0`.
pub fn phasor_solve<T: Real>(link: &LinearizedLink<T>, f: T) -> Result<PhasorSolution<T>> {
    if !(f > T::zero()) {
        return Err(Error::Domain(format!("frequency must be > 0, got {f}")));
    }
    if link.m * link.m >= link.l1 * link.l2 {
        return Err(Error::Domain("coupling coefficient must be < 1".into()));
    }
    let w = T::TAU() * f;
    let z1 = link.tx_impedance(f);
    let z2 = link.rx_impedance(f);
    let jwm = Complex::new(T::zero(), w * link.m);
    let det = z1 * z2 + Complex::new(w * w * link.m * link.m, T::zero());
    let v1 = Complex::new(link.v1, T::zero());
    let i1 = v1 * z2 / det;
    let i2 = jwm * v1 / det;
    let reactance = |l: T, c: T, r: T| w * l + T::one() / (w * c) + r.abs();
    let scale = reactance(link.l1, link.c1, link.r1) * reactance(link.l2, link.c2, link.r2 + link.r_ac);
    let singular = det.norm() <= lit::<T>(64.0) * T::epsilon() * scale;
    if singular || i1.norm() == T::zero() || !i1.norm().is_finite() || !i2.norm().is_finite() {
        return Err(Error::Domain(format!("mesh system is singular at {} Hz", to_f64(f))));
    }
    let p_in = (v1 * i1.conj()).re;
    let eta_ac = if p_in > T::zero() { (i2.norm_sqr() * link.r_ac / p_in).min(T::one()) } else { T::zero() };
    Ok(PhasorSolution { i1, i2, z_in: v1 / i1, eta_ac })
}

/// Frequency in `[f_lo, f_hi]` where the input impedance is purely
/// resistive, by bisection to 1e-6 relative tolerance.
pub fn zero_phase_frequency<T: Real>(link: &LinearizedLink<T>, f_lo: T, f_hi: T) -> Result<T> {
    let bracket = || Error::Bracket { lo: to_f64(f_lo), hi: to_f64(f_hi) };
    if !(f_lo > T::zero() && f_hi > f_lo) {
        return Err(bracket());
    }
    let g = |f: T| phasor_solve(link, f).map(|s| s.z_in.im);
    let (mut lo, mut hi) = (f_lo, f_hi);
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == T::zero() {
        return Ok(lo);
    }
    if g_hi == T::zero() {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(bracket());
    }
    let tol = lit::<T>(1e-6).max(T::epsilon() * lit(16.0));
    while (hi - lo) > tol * lo {
        let mid = (lo + hi) * lit(0.5);
        let g_mid = g(mid)?;
        if g_mid == T::zero() {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

/// Output filter seen by a full-wave bridge rectifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectifierFilter {
    /// Reservoir capacitor: square input voltage, sinusoidal input current.
    Capacitive,
    /// Series inductor: square input current, sinusoidal input voltage.
    Inductive,
}

/// Fundamental-frequency resistance presented by a bridge rectifier
/// feeding a DC load `r_dc`.
pub fn ac_equivalent_resistance<T: Real>(r_dc: T, filter: RectifierFilter) -> T {
    let pi2 = T::PI() * T::PI();
    match filter {
        RectifierFilter::Capacitive => lit::<T>(8.0) / pi2 * r_dc,
        RectifierFilter::Inductive => pi2 / lit(8.0) * r_dc,
    }
}
