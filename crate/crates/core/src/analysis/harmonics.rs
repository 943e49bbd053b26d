use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::whole_cycles;

/// Complex amplitudes (peak convention) of harmonics `1..=n` of a uniformly
/// sampled signal spanning a whole number of `f0` periods.
pub fn harmonic_phasors<T: Real>(signal: &[T], dt: T, f0: T, n: usize) -> Result<Vec<Complex<T>>> {
    if signal.is_empty() || !(dt > T::zero()) || !(f0 > T::zero()) {
        return Err(Error::Precondition("signal must be non-empty with dt, f0 > 0".into()));
    }
    let len = T::from_usize(signal.len()).unwrap();
    let span = len * dt;
    // half a sample of slack, expressed in periods
    whole_cycles(span, T::one() / f0, lit::<T>(0.5) * dt * f0)?;
    let two_pi = T::TAU();
    let scale = lit::<T>(2.0) / len;
    Ok((1..=n)
        .map(|k| {
            let w = two_pi * f0 * T::from_usize(k).unwrap() * dt;
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &x) in signal.iter().enumerate() {
                acc += Complex::from_polar(x, -w * T::from_usize(i).unwrap());
            }
            acc * scale
        })
        .collect())
}

pub fn fundamental_phasor<T: Real>(signal: &[T], dt: T, f0: T) -> Result<Complex<T>> {
    Ok(harmonic_phasors(signal, dt, f0, 1)?[0])
}

/// `|X_k / X_1|` for `k = 1..=n`; the first entry is 1 unless the
/// fundamental vanishes.
pub fn harmonic_ratios<T: Real>(signal: &[T], dt: T, f0: T, n: usize) -> Result<Vec<T>> {
    let x = harmonic_phasors(signal, dt, f0, n)?;
    let x1 = x.first().map_or(T::zero(), |c| c.norm());
    if x1 == T::zero() {
        return Err(Error::Degenerate("signal has no fundamental component".into()));
    }
    Ok(x.iter().map(|c| c.norm() / x1).collect())
}
