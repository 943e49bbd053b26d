use approx::assert_relative_eq;
use proptest::prelude::*;
use std::f64::consts::PI;

use wpt_core::magnetics::{
    coil_mutual, coupling_coefficient, mutual_inductance_loops, resonance_capacitance, resonant_frequency,
};
use wpt_core::{mu0, CoilSpec64, CouplingModel64, Error};

/// Neumann double line integral over two coaxial loops, midpoint rule.
fn neumann(a: f64, b: f64, d: f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let p1 = (i as f64 + 0.5) * h;
        let (x1, y1) = (a * p1.cos(), a * p1.sin());
        let (dx1, dy1) = (-a * p1.sin() * h, a * p1.cos() * h);
        for j in 0..n {
            let p2 = (j as f64 + 0.5) * h;
            let (x2, y2) = (b * p2.cos(), b * p2.sin());
            let (dx2, dy2) = (-b * p2.sin() * h, b * p2.cos() * h);
            let r = ((x1 - x2).powi(2) + (y1 - y2).powi(2) + d * d).sqrt();
            sum += (dx1 * dx2 + dy1 * dy2) / r;
        }
    }
    mu0::<f64>() / (4.0 * PI) * sum
}

#[test]
fn tuning_capacitors() {
    assert_relative_eq!(resonance_capacitance(47e-6, 127e3).unwrap(), 33.4145e-9, max_relative = 1e-5);
    assert_relative_eq!(resonance_capacitance(24e-6, 127e3).unwrap(), 65.4367e-9, max_relative = 1e-5);
    assert_relative_eq!(resonant_frequency(47e-6, 33.42e-9).unwrap(), 126_989.0, max_relative = 1e-4);
    assert_relative_eq!(resonant_frequency(24e-6, 65.44e-9).unwrap(), 126_997.0, max_relative = 1e-4);
}

#[test]
fn lc_product_sets_frequency() {
    let f = resonant_frequency(10e-6, 100e-9).unwrap();
    assert_relative_eq!(resonant_frequency(40e-6, 25e-9).unwrap(), f, max_relative = 1e-14);
}

#[test]
fn non_positive_lc_rejected() {
    assert!(matches!(resonant_frequency(0.0, 1e-9), Err(Error::Domain(_))));
    assert!(matches!(resonance_capacitance(1e-6, -1.0), Err(Error::Domain(_))));
}

#[test]
fn paper_loop_pair_matches_neumann() {
    let oracle = neumann(0.025, 0.01315, 0.006, 400);
    assert_relative_eq!(oracle, 1.3495392700974307e-8, max_relative = 1e-9);
    let m = mutual_inductance_loops(0.025, 0.01315, 0.006).unwrap();
    assert_relative_eq!(m, oracle, max_relative = 1e-9);
    assert_relative_eq!(m, 13.6e-9, max_relative = 0.02);
}

#[test]
fn far_loops_barely_couple() {
    assert!(mutual_inductance_loops(0.025, 0.01315, 1.0).unwrap() < 1e-12);
}

#[test]
fn coincident_loops_are_singular() {
    assert!(mutual_inductance_loops(0.02, 0.02, 0.0).is_err());
}

#[test]
fn tabulated_coupling_gives_mutual() {
    let tx = CoilSpec64::uniform(24e-6, 0.15, 0.025, 4).unwrap();
    let rx = CoilSpec64::uniform(47e-6, 0.3, 0.01315, 4).unwrap();
    let table = CouplingModel64::tabulated(vec![(0.004, 0.25), (0.006, 0.20), (0.010, 0.12)]).unwrap();
    let m = coil_mutual(&tx, &rx, 0.006, &table).unwrap();
    assert_relative_eq!(m, 6.7171e-6, max_relative = 1e-4);
    assert_relative_eq!(coupling_coefficient(m, 24e-6, 47e-6).unwrap(), 0.20, max_relative = 1e-12);
    assert!(matches!(coil_mutual(&tx, &rx, 0.02, &table), Err(Error::OutOfRange { .. })));

    let zero = CouplingModel64::tabulated(vec![(0.0, 0.0), (0.05, 0.0)]).unwrap();
    assert_eq!(coil_mutual(&tx, &rx, 0.01, &zero).unwrap(), 0.0);
}

#[test]
fn coupling_coefficient_bounds() {
    assert_eq!(coupling_coefficient(0.0, 24e-6, 47e-6).unwrap(), 0.0);
    let unity = (24e-6f64 * 47e-6).sqrt();
    assert!(matches!(coupling_coefficient(unity, 24e-6, 47e-6), Err(Error::Physical(_))));
}

#[test]
fn bad_tables_rejected() {
    assert!(CouplingModel64::tabulated(vec![(0.01, 0.2), (0.005, 0.3)]).is_err());
    assert!(CouplingModel64::tabulated(vec![(0.01, 1.0)]).is_err());
    assert!(CouplingModel64::tabulated(vec![]).is_err());
}

#[test]
fn analytic_coupling_decays_with_distance() {
    let tx = CoilSpec64::uniform(24e-6, 0.15, 0.025, 10).unwrap();
    let rx = CoilSpec64::uniform(47e-6, 0.3, 0.01315, 10).unwrap();
    let model = CouplingModel64::AnalyticFilament;
    let ms: Vec<f64> =
        (1..=30).map(|i| coil_mutual(&tx, &rx, i as f64 * 1e-3, &model).unwrap()).collect();
    assert!(ms.windows(2).all(|w| w[1] < w[0]));
    let k = ms[5] / (24e-6f64 * 47e-6).sqrt();
    assert!(k > 0.0 && k < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn elliptic_form_agrees_with_neumann(a in 0.005f64..0.05, b in 0.005f64..0.05, d in 0.002f64..0.05) {
        let m = mutual_inductance_loops(a, b, d).unwrap();
        let oracle = neumann(a, b, d, 240);
        prop_assert!((m - oracle).abs() <= 0.005 * oracle, "m = {m}, oracle = {oracle}");
    }

    #[test]
    fn mutual_is_symmetric(a in 0.005f64..0.05, b in 0.005f64..0.05, d in 0.001f64..0.05) {
        let ab = mutual_inductance_loops(a, b, d).unwrap();
        let ba = mutual_inductance_loops(b, a, d).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs());
    }

    #[test]
    fn capacitance_round_trip(l in 1e-6f64..1e-3, f in 1e4f64..1e6) {
        let c = resonance_capacitance(l, f).unwrap();
        let back = resonant_frequency(l, c).unwrap();
        prop_assert!((back - f).abs() <= 1e-12 * f);
    }
}
