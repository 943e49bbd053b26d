use std::io::{self, Write};

use crate::scalar::{lit, Real};

/// Bridge polarity. `Off` freewheels the tank through the low-side switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Drive {
    Neg,
    Off,
    Pos,
}

impl Drive {
    pub fn value<T: Real>(self) -> T {
        match self {
            Drive::Neg => -T::one(),
            Drive::Off => T::zero(),
            Drive::Pos => T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Drive::Neg => -1,
            Drive::Off => 0,
            Drive::Pos => 1,
        }
    }
}

/// Instantaneous state of the link plus running energy totals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState<T> {
    pub t: T,
    pub i1: T,
    pub i2: T,
    pub v_c1: T,
    pub v_c2: T,
    /// Reservoir voltage at the bridge output.
    pub v_rect: T,
    pub i_lin: T,
    pub v_cmid: T,
    pub i_lout: T,
    pub v_load: T,
    pub motor_speed: T,
    /// Energy drawn from the supply since t = 0.
    pub e_source: T,
    /// Energy delivered to the load since t = 0.
    pub e_load: T,
    /// Energy dissipated in resistances and diodes since t = 0.
    pub e_diss: T,
}

impl<T: Real> SimState<T> {
    pub fn zero() -> Self {
        Self {
            t: T::zero(),
            i1: T::zero(),
            i2: T::zero(),
            v_c1: T::zero(),
            v_c2: T::zero(),
            v_rect: T::zero(),
            i_lin: T::zero(),
            v_cmid: T::zero(),
            i_lout: T::zero(),
            v_load: T::zero(),
            motor_speed: T::zero(),
            e_source: T::zero(),
            e_load: T::zero(),
            e_diss: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.electrical().iter().all(|x| x.is_finite())
            && self.t.is_finite()
            && self.e_source.is_finite()
            && self.e_load.is_finite()
            && self.e_diss.is_finite()
    }

    /// Circuit state variables used for steady-state comparisons.
    pub fn electrical(&self) -> [T; 10] {
        [
            self.i1,
            self.i2,
            self.v_c1,
            self.v_c2,
            self.v_rect,
            self.i_lin,
            self.v_cmid,
            self.i_lout,
            self.v_load,
            self.motor_speed,
        ]
    }

    /// Component-wise linear interpolation, `w` in [0, 1].
    pub fn lerp(&self, other: &Self, w: T) -> Self {
        let f = |a: T, b: T| a + (b - a) * w;
        Self {
            t: f(self.t, other.t),
            i1: f(self.i1, other.i1),
            i2: f(self.i2, other.i2),
            v_c1: f(self.v_c1, other.v_c1),
            v_c2: f(self.v_c2, other.v_c2),
            v_rect: f(self.v_rect, other.v_rect),
            i_lin: f(self.i_lin, other.i_lin),
            v_cmid: f(self.v_cmid, other.v_cmid),
            i_lout: f(self.i_lout, other.i_lout),
            v_load: f(self.v_load, other.v_load),
            motor_speed: f(self.motor_speed, other.motor_speed),
            e_source: f(self.e_source, other.e_source),
            e_load: f(self.e_load, other.e_load),
            e_diss: f(self.e_diss, other.e_diss),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub state: SimState<T>,
    /// Polarity applied from this sample until the next integration step.
    pub drive: Drive,
    pub v_switch: T,
    pub i_supply: T,
}

impl<T: Real> TraceSample<T> {
    pub fn t(&self) -> T {
        self.state.t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T> {
    pub dt_out: T,
    pub v_supply: T,
    pub samples: Vec<TraceSample<T>>,
}

pub const TRACE_CSV_HEADER: &str = "t_s,i1_a,i2_a,v_c1_v,v_c2_v,v_load_v,i_load_a,drive,v_switch_v,i_supply_a";

impl<T: Real> SimTrace<T> {
    pub fn new(dt_out: T, v_supply: T) -> Self {
        Self { dt_out, v_supply, samples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> T {
        self.samples.first().map_or(T::zero(), |s| s.state.t)
    }

    pub fn end_time(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.state.t)
    }

    /// Index of the last sample with `t <= time`, clamped to the trace.
    pub fn index_at(&self, time: T) -> usize {
        let rel = ((time - self.start_time()) / self.dt_out).floor();
        let idx = rel.to_isize().unwrap_or(0).max(0) as usize;
        idx.min(self.samples.len().saturating_sub(1))
    }

    /// State linearly interpolated at `time`.
    pub fn state_at(&self, time: T) -> SimState<T> {
        let i = self.index_at(time);
        let a = &self.samples[i].state;
        match self.samples.get(i + 1) {
            Some(b) => {
                let w = ((time - a.t) / (b.state.t - a.t)).max(T::zero()).min(T::one());
                a.lerp(&b.state, w)
            }
            None => *a,
        }
    }

    /// Uniformly resampled channel between `start` and `end` (exclusive),
    /// taken at the stored samples.
    pub fn channel(&self, start: T, end: T, f: impl Fn(&TraceSample<T>) -> T) -> Vec<T> {
        let half = self.dt_out * lit(0.5);
        self.samples
            .iter()
            .filter(|s| s.state.t >= start - half && s.state.t < end - half)
            .map(f)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for s in &self.samples {
            let st = &s.state;
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e}",
                st.t.to_f64().unwrap(),
                st.i1.to_f64().unwrap(),
                st.i2.to_f64().unwrap(),
                st.v_c1.to_f64().unwrap(),
                st.v_c2.to_f64().unwrap(),
                st.v_load.to_f64().unwrap(),
                st.i_lout.to_f64().unwrap(),
                s.drive.as_i8(),
                s.v_switch.to_f64().unwrap(),
                s.i_supply.to_f64().unwrap(),
            )?;
        }
        Ok(())
    }
}
