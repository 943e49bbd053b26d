use crate::circuit::SimTrace;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// First cycle `n` (1-based) whose end state differs from its start state
/// by less than `tol` relative to the start state.
///
/// Cycle `n` spans `[t0 + (n-1)·period, t0 + n·period]`, with `t0` the first
/// trace sample. States at the boundaries are linearly interpolated.
pub fn detect_steady_state<T: Real>(trace: &SimTrace<T>, period: T, tol: T) -> Result<usize> {
    if !(period > T::zero()) || !(tol > T::zero()) {
        return Err(Error::Precondition("period and tol must be > 0".into()));
    }
    let t0 = trace.start_time();
    let cycles = ((trace.end_time() - t0) / period).floor().to_usize().unwrap_or(0);
    if cycles < 3 {
        return Err(Error::Precondition(format!("trace spans {cycles} periods, need at least 3")));
    }
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let mut prev = trace.state_at(t0).electrical();
    let mut residual = T::infinity();
    for n in 1..=cycles {
        let cur = trace.state_at(t0 + T::from_usize(n).unwrap() * period).electrical();
        let diff: Vec<T> = cur.iter().zip(&prev).map(|(a, b)| *a - *b).collect();
        let (d, base) = (norm(&diff), norm(&prev));
        if d == T::zero() {
            return Ok(n);
        }
        residual = d / base;
        if residual < tol {
            return Ok(n);
        }
        prev = cur;
    }
    Err(Error::NotConverged { residual: to_f64(residual) })
}
