//! Measured link performance at eight coil spacings (5 V supply, motor load).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredRow {
    /// Coil spacing, m.
    pub distance: f64,
    pub i_tx: f64,
    pub p_tx: f64,
    pub i_rx: f64,
    pub v_rx: f64,
    pub p_rx: f64,
    /// `p_rx / p_tx` as a fraction.
    pub efficiency: f64,
}

const ROWS: [[f64; 7]; 8] = [
    [0.5, 1.25, 6.25, 143.0, 19.0, 2.73, 43.5],
    [0.6, 1.27, 6.35, 124.0, 17.0, 2.11, 33.2],
    [0.7, 1.30, 6.50, 131.0, 18.0, 2.36, 36.3],
    [0.8, 1.26, 6.30, 110.0, 16.0, 1.76, 28.0],
    [0.9, 1.28, 6.40, 108.0, 17.0, 1.84, 28.7],
    [1.0, 1.19, 5.95, 100.0, 12.0, 1.20, 20.2],
    [1.5, 1.35, 6.75, 71.0, 9.0, 0.64, 9.5],
    [2.0, 1.27, 6.35, 20.0, 9.0, 0.18, 2.8],
];

/// The eight rows in SI units, ordered by distance.
pub fn table_i_dataset() -> Vec<MeasuredRow> {
    ROWS.iter()
        .map(|r| MeasuredRow {
            distance: r[0] * 1e-2,
            i_tx: r[1],
            p_tx: r[2],
            i_rx: r[3] * 1e-3,
            v_rx: r[4],
            p_rx: r[5],
            efficiency: r[6] * 1e-2,
        })
        .collect()
}

/// Measured row at spacing `d`, if there is one.
pub fn row_at(d: f64) -> Option<MeasuredRow> {
    table_i_dataset().into_iter().find(|r| (r.distance - d).abs() < 1e-9)
}

/// Resistance that best explains all measured `(V, I)` pairs in the
/// least-squares sense.
pub fn equivalent_load_resistance(rows: &[MeasuredRow]) -> f64 {
    let vi: f64 = rows.iter().map(|r| r.v_rx * r.i_rx).sum();
    let ii: f64 = rows.iter().map(|r| r.i_rx * r.i_rx).sum();
    vi / ii
}
