use approx::assert_relative_eq;
use proptest::prelude::*;

use wpt_core::dosimetry::{
    b_field_loop, exposure_summary, induced_fields, max_compliant_current, sar_10g, vector_potential_loop,
    ExposurePeaks, FieldOptions,
};
use wpt_core::{mu0, CoilSpec64, Error, ExposureLimits64, TissuePhantom64};

const F: f64 = 127e3;

fn tx_coil() -> CoilSpec64 {
    CoilSpec64::uniform(24e-6, 0.15, 0.025, 10).unwrap()
}

fn small_phantom() -> TissuePhantom64 {
    TissuePhantom64 { radius: 0.02, length: 0.08, ..Default::default() }
}

#[test]
fn loop_centre_field() {
    let b = b_field_loop(0.025, 1.0, [0.0, 0.0, 0.0]).unwrap();
    assert_relative_eq!(b[2], mu0::<f64>() / (2.0 * 0.025), max_relative = 1e-12);
    assert_relative_eq!(b[2], 2.5132741228718343e-5, max_relative = 1e-12);
    assert_eq!(b_field_loop(0.025, 0.0, [0.01, 0.0, 0.01]).unwrap(), [0.0; 3]);
}

#[test]
fn far_axis_field_is_dipolar() {
    let a = 0.025;
    let z = 10.0 * a;
    let b = b_field_loop(a, 1.0, [0.0, 0.0, z]).unwrap();
    let dipole = mu0::<f64>() * a * a / (2.0 * z * z * z);
    assert!((b[2] / dipole - 1.0).abs() < 0.015);
}

#[test]
fn off_axis_field_continuous_at_axis() {
    let on = b_field_loop(0.02, 1.0, [0.0, 0.0, 0.004]).unwrap();
    let near = b_field_loop(0.02f64, 1.0, [1e-7, 0.0, 0.004]).unwrap();
    assert_relative_eq!(on[2], near[2], max_relative = 1e-6);
    assert!(near[0].abs() < 1e-9);
}

#[test]
fn points_on_the_wire_rejected() {
    assert!(matches!(b_field_loop(0.02, 1.0, [0.02, 0.0, 0.0]), Err(Error::Domain(_))));
    assert!(matches!(vector_potential_loop(0.02, 1.0, 0.02, 0.0), Err(Error::Domain(_))));
}

#[test]
fn axial_field_decays_away_from_coil() {
    let coil = tx_coil();
    let mut last = f64::INFINITY;
    for i in 0..40 {
        let z = 1e-3 + i as f64 * 1e-3;
        let bz: f64 = coil.filaments.iter().map(|f| b_field_loop(f.radius, 1.0, [0.0, 0.0, z]).unwrap()[2]).sum();
        assert!(bz < last);
        last = bz;
    }
}

#[test]
fn zero_current_gives_empty_map() {
    let map = induced_fields(&small_phantom(), &tx_coil(), 6e-3, 0.0, F, FieldOptions::default()).unwrap();
    assert!(map.e_peak.iter().chain(&map.j_peak).chain(&map.b_peak).all(|&v| v == 0.0));
    assert_eq!(sar_10g(&map, &small_phantom()).unwrap(), 0.0);
    let s = exposure_summary(&map, &small_phantom(), ExposureLimits64::default()).unwrap();
    assert!(s.max_compliant_current.is_infinite());
}

#[test]
fn map_values_finite_and_inside() {
    let p = small_phantom();
    let map = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, FieldOptions::default()).unwrap();
    let (nx, ny, nz) = (map.dims[0], map.dims[1], map.dims[2]);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let idx = map.index(i, j, k);
                if map.inside[idx] {
                    assert!(p.contains(map.point(i, j, k)));
                    assert!(map.e_peak[idx].is_finite() && map.e_peak[idx] >= 0.0);
                    assert!(map.j_peak[idx].is_finite() && map.j_peak[idx] >= 0.0);
                } else {
                    assert_eq!(map.e_peak[idx], 0.0);
                }
            }
        }
    }
    assert!(map.e_max() > 0.0);
}

#[test]
fn uniform_field_sar_is_pointwise_value() {
    let p = small_phantom();
    let mut map = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, FieldOptions::default()).unwrap();
    let e = 3.0;
    for (v, &inside) in map.e_peak.iter_mut().zip(&map.inside) {
        *v = if inside { e } else { 0.0 };
    }
    let expected = p.sigma * (e / 2f64.sqrt()).powi(2) / p.rho;
    assert_relative_eq!(sar_10g(&map, &p).unwrap(), expected, max_relative = 1e-12);
}

#[test]
fn averaging_cube_must_fit() {
    let tiny = TissuePhantom64 { radius: 0.004, length: 0.01, ..Default::default() };
    let map = induced_fields(&tiny, &tx_coil(), 6e-3, 1.0, F, FieldOptions { spacing: 1e-3, ..Default::default() }).unwrap();
    assert!(matches!(sar_10g(&map, &tiny), Err(Error::Geometry(_))));
}

#[test]
fn fields_scale_linearly_and_sar_quadratically() {
    let p = small_phantom();
    let base = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, FieldOptions::default()).unwrap();
    let sar = sar_10g(&base, &p).unwrap();
    for c in [0.37, 2.5, 11.0] {
        let scaled = induced_fields(&p, &tx_coil(), 6e-3, c, F, FieldOptions::default()).unwrap();
        for (a, b) in base.e_peak.iter().zip(&scaled.e_peak).chain(base.j_peak.iter().zip(&scaled.j_peak)) {
            assert!((b - c * a).abs() <= 1e-12 * (c * a).abs());
        }
        assert_relative_eq!(sar_10g(&scaled, &p).unwrap(), c * c * sar, max_relative = 1e-9);
    }
}

#[test]
fn complex_admittivity_raises_current_density() {
    let p = small_phantom();
    let plain = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, FieldOptions::default()).unwrap();
    let opts = FieldOptions { complex_admittivity: true, ..Default::default() };
    let full = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, opts).unwrap();
    assert_eq!(plain.e_max(), full.e_max());
    assert!(full.j_max() > plain.j_max());
}

#[test]
fn compliance_current_from_published_peaks() {
    let peaks = ExposurePeaks { sar_10g: 0.326e-3, e_peak: 3.46, j_peak: 0.206, i_ref: 1.0 };
    let i = max_compliant_current(peaks, ExposureLimits64::default()).unwrap();
    assert_relative_eq!(i, 1.7437390526, max_relative = 1e-9);
    let none = ExposurePeaks { sar_10g: 0.0, e_peak: 0.0, j_peak: 0.0, i_ref: 1.0 };
    assert!(max_compliant_current(none, ExposureLimits64::default()).unwrap().is_infinite());
}

#[test]
fn paper_geometry_current_density() {
    let p = TissuePhantom64::default();
    let map = induced_fields(&p, &tx_coil(), 6e-3, 1.0, F, FieldOptions::default()).unwrap();
    let j = map.j_max();
    assert!(j > 0.206 / 3.0 && j < 0.206 * 3.0, "{j}");
    let sar = sar_10g(&map, &p).unwrap();
    assert!(sar > 0.326e-3 / 3.0 && sar < 0.326e-3 * 3.0, "{sar}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compliant_current_respects_every_limit(
        sar in 1e-6f64..1e-2, e in 0.1f64..50.0, j in 0.01f64..2.0, i_ref in 0.1f64..5.0,
    ) {
        let limits = ExposureLimits64::default();
        let peaks = ExposurePeaks { sar_10g: sar, e_peak: e, j_peak: j, i_ref };
        let i = max_compliant_current(peaks, limits).unwrap();
        let c = i / i_ref;
        prop_assert!(c * c * sar <= limits.sar_10g_limit * (1.0 + 1e-9));
        prop_assert!(c * e / 2f64.sqrt() <= limits.e_limit_rms * (1.0 + 1e-9));
        prop_assert!(c * j / 2f64.sqrt() <= limits.j_limit_rms * (1.0 + 1e-9));
    }

    #[test]
    fn rescaled_map_sits_at_or_below_limits(c in 0.2f64..4.0) {
        let p = small_phantom();
        let limits = ExposureLimits64::default();
        let map = induced_fields(&p, &tx_coil(), 6e-3, c, F, FieldOptions::default()).unwrap();
        let s = exposure_summary(&map, &p, limits).unwrap();
        let at_limit = map.scaled(s.max_compliant_current / map.i_ref);
        let sar = sar_10g(&at_limit, &p).unwrap();
        prop_assert!(sar <= limits.sar_10g_limit * (1.0 + 1e-9));
        prop_assert!(at_limit.e_max() / 2f64.sqrt() <= limits.e_limit_rms * (1.0 + 1e-9));
        prop_assert!(at_limit.j_max() / 2f64.sqrt() <= limits.j_limit_rms * (1.0 + 1e-9));
    }
}
