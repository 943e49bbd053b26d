//! Steady-state detection, power metrics, harmonics, the phasor oracle and
//! least-squares fitting.

mod harmonics;
mod metrics;
mod phasor;
mod regression;
mod steady;

pub use harmonics::{fundamental_phasor, harmonic_phasors, harmonic_ratios};
pub use metrics::{cycle_metrics, PowerReport, TABLE_CSV_HEADER};
pub use phasor::{ac_equivalent_resistance, phasor_solve, zero_phase_frequency, LinearizedLink, PhasorSolution, RectifierFilter};
pub use regression::{linear_regression, Regression};
pub use steady::detect_steady_state;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Number of whole periods in `span`, accepting up to `slack` periods of
/// rounding.
pub(crate) fn whole_cycles<T: Real>(span: T, period: T, slack: T) -> Result<usize> {
    if !(period > T::zero()) || !(span > T::zero()) {
        return Err(Error::Precondition("window and period must be > 0".into()));
    }
    let c = span / period;
    let n = c.round();
    if (c - n).abs() > slack.max(lit(1e-9)) || n < T::one() {
        return Err(Error::Precondition(format!("window spans {c} periods, not a whole number")));
    }
    Ok(n.to_usize().unwrap())
}
