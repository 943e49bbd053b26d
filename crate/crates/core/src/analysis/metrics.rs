use crate::circuit::SimTrace;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::whole_cycles;

/// Column order of one performance row.
pub const TABLE_CSV_HEADER: &str = "distance_cm,i_tx_a,p_tx_w,i_rx_ma,v_rx_v,p_rx_w,efficiency_pct";

/// Cycle-averaged performance of the link over a whole number of cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport<T> {
    pub i_tx_rms: T,
    pub i_supply_avg: T,
    pub p_source: T,
    pub i_load: T,
    pub v_load: T,
    pub p_load: T,
    pub efficiency: T,
    pub f_lock: T,
}

impl<T: Real> PowerReport<T> {
    pub fn zero() -> Self {
        let z = T::zero();
        Self { i_tx_rms: z, i_supply_avg: z, p_source: z, i_load: z, v_load: z, p_load: z, efficiency: z, f_lock: z }
    }

    /// One row in [`TABLE_CSV_HEADER`] order.
    pub fn csv_row(&self, distance_cm: f64) -> String {
        format!(
            "{distance_cm},{:.6},{:.6},{:.6},{:.6},{:.6},{:.4}",
            to_f64(self.i_supply_avg),
            to_f64(self.p_source),
            to_f64(self.i_load) * 1e3,
            to_f64(self.v_load),
            to_f64(self.p_load),
            to_f64(self.efficiency) * 100.0,
        )
    }
}

/// Averages over `[start, end)`, which must span a whole number of
/// `period`s. Source and load power come from the integrated energy
/// ledger; currents and voltages from the recorded samples.
pub fn cycle_metrics<T: Real>(trace: &SimTrace<T>, start: T, end: T, period: T) -> Result<PowerReport<T>> {
    whole_cycles(end - start, period, lit::<T>(0.5) * trace.dt_out / period)?;
    let half = trace.dt_out * lit(0.5);
    if trace.len() < 2 || start < trace.start_time() - half || end > trace.end_time() + half {
        return Err(Error::Precondition("metrics window must lie inside the trace".into()));
    }
    let (end, start) = (end.min(trace.end_time()), start.max(trace.start_time()));
    let span = end - start;
    let a = trace.state_at(start);
    let b = trace.state_at(end);
    let p_source = (b.e_source - a.e_source) / span;
    let p_load = (b.e_load - a.e_load) / span;

    let window: Vec<_> = trace.samples.iter().filter(|s| s.state.t >= start - half && s.state.t < end - half).collect();
    if window.is_empty() {
        return Err(Error::Precondition("metrics window holds no samples".into()));
    }
    let n = T::from_usize(window.len()).unwrap();
    let mean = |f: &dyn Fn(&crate::circuit::SimState<T>) -> T| window.iter().map(|s| f(&s.state)).sum::<T>() / n;
    let i_tx_rms = mean(&|s| s.i1 * s.i1).sqrt();
    let efficiency = if p_source > T::zero() { p_load / p_source } else { T::zero() };
    Ok(PowerReport {
        i_tx_rms,
        i_supply_avg: p_source / trace.v_supply,
        p_source,
        i_load: mean(&|s| s.i_lout),
        v_load: mean(&|s| s.v_load),
        p_load,
        efficiency,
        f_lock: T::one() / period,
    })
}
