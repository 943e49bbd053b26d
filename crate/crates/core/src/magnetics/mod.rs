//! Coil models, series-resonance design and coaxial mutual inductance.

mod coil;
pub mod elliptic;

pub use coil::{coil_mutual, match_pair_coupling, CoilSpec, CouplingModel, Filament};

use crate::error::{Error, Result};
use crate::scalar::{lit, mu0, to_f64, Real};

/// Frequency at which `L` and `C` in series resonate.
pub fn resonant_frequency<T: Real>(inductance: T, capacitance: T) -> Result<T> {
    positive("inductance", inductance)?;
    positive("capacitance", capacitance)?;
    Ok(T::one() / (lit::<T>(2.0) * T::PI() * (inductance * capacitance).sqrt()))
}

/// Series capacitance that tunes `inductance` to `frequency`.
pub fn resonance_capacitance<T: Real>(inductance: T, frequency: T) -> Result<T> {
    positive("inductance", inductance)?;
    positive("frequency", frequency)?;
    let w = lit::<T>(2.0) * T::PI() * frequency;
    Ok(T::one() / (w * w * inductance))
}

/// Mutual inductance of two coaxial circular filaments of radii `a` and `b`
/// whose planes are `d` apart (Maxwell's elliptic-integral formula).
pub fn mutual_inductance_loops<T: Real>(a: T, b: T, d: T) -> Result<T> {
    positive("a", a)?;
    positive("b", b)?;
    if !(d >= T::zero()) {
        return Err(Error::Domain(format!("axial separation must be >= 0, got {}", to_f64(d))));
    }
    let sum = a + b;
    let m = lit::<T>(4.0) * a * b / (sum * sum + d * d);
    if m >= T::one() {
        return Err(Error::Domain("coincident filaments (d = 0, a = b)".into()));
    }
    let k = m.sqrt();
    let (ek, ee) = elliptic::ellip_ke(m);
    let two = lit::<T>(2.0);
    let val = mu0::<T>() * (a * b).sqrt() * ((two / k - k) * ek - two / k * ee);
    // cancellation can leave a tiny negative residue for very distant loops
    Ok(val.max(T::zero()))
}

/// Self-inductance of a single circular turn of loop radius `a` and wire radius `wire`.
pub fn loop_self_inductance<T: Real>(a: T, wire: T) -> Result<T> {
    positive("a", a)?;
    positive("wire", wire)?;
    if wire >= a {
        return Err(Error::Domain("wire radius must be smaller than the loop radius".into()));
    }
    Ok(mu0::<T>() * a * ((lit::<T>(8.0) * a / wire).ln() - lit(1.75)))
}

/// `k = M / sqrt(L1 L2)`; fails when the result is not below one.
pub fn coupling_coefficient<T: Real>(m: T, l1: T, l2: T) -> Result<T> {
    positive("l1", l1)?;
    positive("l2", l2)?;
    if !(m >= T::zero()) {
        return Err(Error::Domain(format!("mutual inductance must be >= 0, got {}", to_f64(m))));
    }
    let k = m / (l1 * l2).sqrt();
    if k >= T::one() {
        return Err(Error::Physical(format!("coupling coefficient {} >= 1", to_f64(k))));
    }
    Ok(k)
}

pub(crate) fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {}", to_f64(v))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resonance_design_values() {
        let c = resonance_capacitance(47e-6, 127e3).unwrap();
        assert_relative_eq!(c, 33.42e-9, max_relative = 1e-3);
        let c = resonance_capacitance(24e-6, 127e3).unwrap();
        assert_relative_eq!(c, 65.44e-9, max_relative = 1e-3);
        let f = resonant_frequency(47e-6, 33.42e-9).unwrap();
        assert_relative_eq!(f, 127e3, max_relative = 1e-3);
        let f = resonant_frequency(24e-6, 65.44e-9).unwrap();
        assert_relative_eq!(f, 127e3, max_relative = 1e-3);
    }

    #[test]
    fn lc_product_invariance() {
        let a = resonant_frequency(10e-6, 100e-9).unwrap();
        let b = resonant_frequency(40e-6, 25e-9).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
    }

    #[test]
    fn resonance_rejects_non_positive() {
        assert!(matches!(resonant_frequency(0.0, 1e-9), Err(Error::Domain(_))));
        assert!(matches!(resonant_frequency(1e-6, -1e-9), Err(Error::Domain(_))));
        assert!(matches!(resonance_capacitance(1e-6, 0.0), Err(Error::Domain(_))));
        assert!(matches!(resonance_capacitance(f64::NAN, 1e3), Err(Error::Domain(_))));
    }

    #[test]
    fn resonance_in_single_precision() {
        let c = resonance_capacitance(47e-6_f32, 127e3).unwrap();
        assert_relative_eq!(resonant_frequency(47e-6_f32, c).unwrap(), 127e3, max_relative = 1e-5);
    }

    #[test]
    fn loop_mutual_far_field_and_symmetry() {
        assert!(mutual_inductance_loops(0.025, 0.01315, 1.0).unwrap() < 1e-12);
        let ab = mutual_inductance_loops(0.025, 0.01315, 0.006).unwrap();
        let ba = mutual_inductance_loops(0.01315, 0.025, 0.006).unwrap();
        assert_relative_eq!(ab, ba, max_relative = 1e-14);
    }

    #[test]
    fn loop_mutual_singular_geometry() {
        assert!(matches!(mutual_inductance_loops(0.01, 0.01, 0.0), Err(Error::Domain(_))));
        assert!(mutual_inductance_loops(0.01, 0.02, 0.0).is_ok());
        assert!(matches!(mutual_inductance_loops(0.01, 0.02, -1e-3), Err(Error::Domain(_))));
    }

    #[test]
    fn coupling_coefficient_cases() {
        assert_eq!(coupling_coefficient(0.0, 24e-6, 47e-6).unwrap(), 0.0);
        let k = coupling_coefficient(6.717_142_249_5e-6, 24e-6, 47e-6).unwrap();
        assert_relative_eq!(k, 0.20, max_relative = 1e-9);
        let m = (24e-6_f64 * 47e-6).sqrt();
        assert!(matches!(coupling_coefficient(m, 24e-6, 47e-6), Err(Error::Physical(_))));
    }
}
