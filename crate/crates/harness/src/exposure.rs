//! Field map and compliance summary for the scenario's Tx coil.

use serde::Serialize;
use wpt_core::dosimetry::{exposure_summary, induced_fields, ExposureSummary, FieldOptions};
use wpt_core::{Error, FieldMap64};

use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureReport {
    pub gap_m: f64,
    pub i_ref_a: f64,
    pub frequency_hz: f64,
    pub e_peak_vpm: f64,
    pub j_peak_apm2: f64,
    pub b_peak_t: f64,
    pub sar_10g_wpkg: f64,
    pub max_compliant_current_a: f64,
    pub operating_current_a: f64,
    pub compliant: bool,
    pub excluded_points: usize,
    pub note: &'static str,
}

/// Caveat attached to every exposure summary.
pub const E_FIELD_NOTE: &str =
    "E peak is the in-tissue value compared against the RMS limit as given; the reference E peak may be an in-air value";

pub fn run_exposure(s: &Scenario) -> Result<(FieldMap64, ExposureReport), Error> {
    let d = &s.dosimetry;
    let opts = FieldOptions { spacing: d.spacing, complex_admittivity: d.complex_admittivity };
    let map = induced_fields(&d.phantom, &s.circuit.tx, d.gap, d.i_ref, d.frequency, opts)?;
    let summary: ExposureSummary<f64> = exposure_summary(&map, &d.phantom, d.limits)?;
    let report = ExposureReport {
        gap_m: d.gap,
        i_ref_a: d.i_ref,
        frequency_hz: d.frequency,
        e_peak_vpm: summary.peaks.e_peak,
        j_peak_apm2: summary.peaks.j_peak,
        b_peak_t: summary.b_peak,
        sar_10g_wpkg: summary.peaks.sar_10g,
        max_compliant_current_a: summary.max_compliant_current,
        operating_current_a: d.i_operating,
        compliant: d.i_operating <= summary.max_compliant_current,
        excluded_points: summary.excluded_points,
        note: E_FIELD_NOTE,
    };
    Ok((map, report))
}
