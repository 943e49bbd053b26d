//! Quasi-static exposure of a homogeneous tissue cylinder to the Tx coil:
//! induced electric field and current density, 10 g averaged SAR and the
//! largest coil current that keeps all three within their limits.

mod field;
mod map;
mod sar;

pub use field::{b_field_loop, vector_potential_loop};
pub use map::{induced_fields, FieldMap, FieldOptions, FIELD_CSV_HEADER};
pub use sar::sar_10g;

use crate::error::{Error, FieldViolation, Result};
use crate::scalar::{lit, Real};

/// Homogeneous cylinder with its axis along `x`, centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissuePhantom<T> {
    pub radius: T,
    pub length: T,
    /// Conductivity, S/m.
    pub sigma: T,
    pub eps_r: T,
    /// Density, kg/m³.
    pub rho: T,
}

impl<T: Real> Default for TissuePhantom<T> {
    /// Wet skin at 127 kHz on a forearm-sized cylinder.
    fn default() -> Self {
        Self { radius: lit(0.040), length: lit(0.650), sigma: lit(0.082078), eps_r: lit(12960.0), rho: lit(1100.0) }
    }
}

impl<T: Real> TissuePhantom<T> {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        for (field, value) in [("radius", self.radius), ("length", self.length), ("sigma", self.sigma), ("rho", self.rho)] {
            if !(value > T::zero() && value.is_finite()) {
                v.push(FieldViolation { field, reason: "must be > 0".into() });
            }
        }
        if !(self.eps_r >= T::one()) {
            v.push(FieldViolation { field: "eps_r", reason: "must be >= 1".into() });
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn contains(&self, p: [T; 3]) -> bool {
        p[0].abs() <= self.length * lit(0.5) && p[1] * p[1] + p[2] * p[2] <= self.radius * self.radius
    }
}

/// RMS exposure limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureLimits<T> {
    /// W/kg.
    pub sar_10g_limit: T,
    /// V/m.
    pub e_limit_rms: T,
    /// A/m².
    pub j_limit_rms: T,
}

impl<T: Real> Default for ExposureLimits<T> {
    fn default() -> Self {
        Self { sar_10g_limit: lit(2.0), e_limit_rms: lit(17.1), j_limit_rms: lit(0.254) }
    }
}

/// Peak induced quantities at a reference coil current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposurePeaks<T> {
    pub sar_10g: T,
    pub e_peak: T,
    pub j_peak: T,
    /// Peak coil current the other values were computed at.
    pub i_ref: T,
}

/// Largest peak coil current for which SAR, E and J all stay within
/// `limits`, assuming sinusoidal excitation. A zero peak does not
/// constrain the current; all zero yields `+inf`.
pub fn max_compliant_current<T: Real>(peaks: ExposurePeaks<T>, limits: ExposureLimits<T>) -> Result<T> {
    let ExposurePeaks { sar_10g, e_peak, j_peak, i_ref } = peaks;
    if !(i_ref > T::zero()) {
        return Err(Error::Precondition("i_ref must be > 0".into()));
    }
    if !(sar_10g >= T::zero() && e_peak >= T::zero() && j_peak >= T::zero()) {
        return Err(Error::Precondition("exposure peaks must be >= 0".into()));
    }
    let sqrt2 = T::SQRT_2();
    let mut best = T::infinity();
    if j_peak > T::zero() {
        best = best.min(i_ref * limits.j_limit_rms / (j_peak / sqrt2));
    }
    if e_peak > T::zero() {
        best = best.min(i_ref * limits.e_limit_rms / (e_peak / sqrt2));
    }
    if sar_10g > T::zero() {
        best = best.min(i_ref * (limits.sar_10g_limit / sar_10g).sqrt());
    }
    Ok(best)
}

/// Peak values of a map plus its SAR and the resulting current limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureSummary<T> {
    pub peaks: ExposurePeaks<T>,
    pub b_peak: T,
    pub max_compliant_current: T,
    pub excluded_points: usize,
}

pub fn exposure_summary<T: Real>(
    map: &FieldMap<T>,
    phantom: &TissuePhantom<T>,
    limits: ExposureLimits<T>,
) -> Result<ExposureSummary<T>> {
    let peaks = ExposurePeaks { sar_10g: sar_10g(map, phantom)?, e_peak: map.e_max(), j_peak: map.j_max(), i_ref: map.i_ref };
    let current = if map.i_ref > T::zero() { max_compliant_current(peaks, limits)? } else { T::infinity() };
    Ok(ExposureSummary { peaks, b_peak: map.b_max(), max_compliant_current: current, excluded_points: map.excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_peaks(scale: f64) -> ExposurePeaks<f64> {
        ExposurePeaks { sar_10g: 0.326e-3 * scale * scale, e_peak: 3.46 * scale, j_peak: 0.206 * scale, i_ref: scale }
    }

    #[test]
    fn compliance_current_from_published_peaks() {
        let i = max_compliant_current(paper_peaks(1.0), ExposureLimits::default()).unwrap();
        assert_relative_eq!(i, 1.7437390526, max_relative = 1e-9);
        let i2 = max_compliant_current(paper_peaks(2.0), ExposureLimits::default()).unwrap();
        assert_relative_eq!(i, i2, max_relative = 1e-12);
    }

    #[test]
    fn zero_peaks_are_unbounded() {
        let p = ExposurePeaks { sar_10g: 0.0, e_peak: 0.0, j_peak: 0.0, i_ref: 1.0 };
        assert_eq!(max_compliant_current(p, ExposureLimits::default()).unwrap(), f64::INFINITY);
        let p = ExposurePeaks { sar_10g: 0.0, e_peak: 3.46, j_peak: 0.0, i_ref: 1.0 };
        assert_relative_eq!(max_compliant_current(p, ExposureLimits::default()).unwrap(), 6.98932136, max_relative = 1e-8);
    }

    #[test]
    fn phantom_defaults_validate() {
        TissuePhantom::<f64>::default().validate().unwrap();
        let bad = TissuePhantom::<f64> { sigma: 0.0, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().fields(), vec!["sigma"]);
    }
}
