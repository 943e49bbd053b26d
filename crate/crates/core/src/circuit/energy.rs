use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{LinkCircuit, SimTrace};

/// Energy flows over a time window of a simulated trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit<T> {
    pub source: T,
    pub load: T,
    pub dissipated: T,
    pub stored_change: T,
    /// `(source - load - dissipated - stored_change) / source`.
    pub relative_residual: T,
}

/// Balances supply energy against load, losses and stored energy between
/// `start` and `end`.
pub fn energy_audit<T: Real>(cfg: &LinkCircuit<T>, trace: &SimTrace<T>, start: T, end: T) -> Result<EnergyAudit<T>> {
    if trace.len() < 2 || !(end > start) || start < trace.start_time() || end > trace.end_time() {
        return Err(Error::Precondition("audit window must lie inside the trace".into()));
    }
    let a = trace.state_at(start);
    let b = trace.state_at(end);
    let source = b.e_source - a.e_source;
    if !(source > T::zero()) {
        return Err(Error::Degenerate("no energy drawn from the supply in the audit window".into()));
    }
    let load = b.e_load - a.e_load;
    let dissipated = b.e_diss - a.e_diss;
    let stored_change = cfg.stored_energy(&b) - cfg.stored_energy(&a);
    Ok(EnergyAudit {
        source,
        load,
        dissipated,
        stored_change,
        relative_residual: (source - load - dissipated - stored_change) / source,
    })
}
