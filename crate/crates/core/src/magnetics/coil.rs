use crate::error::{Error, FieldViolation, Result};
use crate::scalar::{lit, to_f64, Real};

use super::{loop_self_inductance, mutual_inductance_loops};

/// Equivalent circular filament of a winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filament<T> {
    pub radius: T,
    /// Axial position relative to the coil reference plane.
    pub axial_offset: T,
}

/// Electrical and geometric description of one coil.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSpec<T> {
    pub inductance: T,
    /// Series resistance at the operating frequency.
    pub esr: T,
    pub outer_radius: T,
    pub filaments: Vec<Filament<T>>,
    /// Effective turns carried by each filament.
    pub turns_scale: T,
}

impl<T: Real> CoilSpec<T> {
    pub fn new(inductance: T, esr: T, outer_radius: T, filaments: Vec<Filament<T>>, turns_scale: T) -> Result<Self> {
        let c = Self { inductance, esr, outer_radius, filaments, turns_scale };
        c.validate()?;
        Ok(c)
    }

    /// Distributes `count` filaments uniformly between 40 % and 100 % of the
    /// outer radius and picks `turns_scale` so the filament self/mutual sum
    /// reproduces `inductance` (see [`CoilSpec::self_consistent_turns_scale`]).
    pub fn uniform(inductance: T, esr: T, outer_radius: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Validation(vec![violation("filaments", "at least one filament required")]));
        }
        let filaments = uniform_radii(outer_radius, count)
            .into_iter()
            .map(|radius| Filament { radius, axial_offset: T::zero() })
            .collect();
        let mut coil = Self::new(inductance, esr, outer_radius, filaments, T::one())?;
        coil.turns_scale = coil.self_consistent_turns_scale()?;
        Ok(coil)
    }

    /// Turns per filament such that `s² Σ_ij M_ij = inductance`, with the
    /// diagonal terms taken as single-turn self-inductances of wire radius
    /// equal to half the radial filament pitch.
    pub fn self_consistent_turns_scale(&self) -> Result<T> {
        let wire = self.equivalent_wire_radius();
        let mut sum = T::zero();
        for (i, fi) in self.filaments.iter().enumerate() {
            for (j, fj) in self.filaments.iter().enumerate() {
                sum += if i == j {
                    loop_self_inductance(fi.radius, wire)?
                } else {
                    let sep = (fi.axial_offset - fj.axial_offset).abs();
                    if sep == T::zero() && fi.radius == fj.radius {
                        loop_self_inductance(fi.radius, wire)?
                    } else {
                        mutual_inductance_loops(fi.radius, fj.radius, sep)?
                    }
                };
            }
        }
        Ok((self.inductance / sum).sqrt())
    }

    fn equivalent_wire_radius(&self) -> T {
        let n = self.filaments.len();
        if n < 2 {
            return self.outer_radius * lit(0.05);
        }
        let (lo, hi) = self
            .filaments
            .iter()
            .fold((self.outer_radius, T::zero()), |(lo, hi), f| (lo.min(f.radius), hi.max(f.radius)));
        let pitch = (hi - lo) / T::from_usize(n - 1).unwrap();
        if pitch > T::zero() {
            pitch * lit(0.5)
        } else {
            self.outer_radius * lit(0.05)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.inductance > T::zero()) {
            v.push(violation("inductance", "must be > 0"));
        }
        if !(self.esr >= T::zero()) {
            v.push(violation("esr", "must be >= 0"));
        }
        if !(self.outer_radius > T::zero()) {
            v.push(violation("outer_radius", "must be > 0"));
        }
        if self.filaments.is_empty() {
            v.push(violation("filaments", "at least one filament required"));
        }
        if self.filaments.iter().any(|f| !(f.radius > T::zero() && f.radius <= self.outer_radius)) {
            v.push(violation("filaments", "every filament radius must lie in (0, outer_radius]"));
        }
        if !(self.turns_scale > T::zero()) {
            v.push(violation("turns_scale", "must be > 0"));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

fn uniform_radii<T: Real>(outer: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![outer];
    }
    let lo = outer * lit(0.4);
    let step = (outer - lo) / T::from_usize(count - 1).unwrap();
    (0..count).map(|i| lo + step * T::from_usize(i).unwrap()).collect()
}

fn violation(field: &'static str, reason: &str) -> FieldViolation {
    FieldViolation { field, reason: reason.to_string() }
}

/// How the mutual inductance between the two coils is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingModel<T> {
    /// Sum over coaxial filament pairs.
    AnalyticFilament,
    /// Linear interpolation of `k(d)`; no extrapolation.
    Tabulated(Vec<(T, T)>),
}

impl<T: Real> CouplingModel<T> {
    pub fn tabulated(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("coupling table is empty".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Domain("coupling table distances must be strictly increasing".into()));
            }
        }
        if let Some(&(d, k)) = points.iter().find(|(_, k)| !(*k >= T::zero() && *k < T::one())) {
            return Err(Error::Physical(format!("tabulated k = {} at d = {} outside [0, 1)", to_f64(k), to_f64(d))));
        }
        Ok(CouplingModel::Tabulated(points))
    }

    /// Interpolated coupling coefficient, or a range error outside the table.
    pub fn table_k(points: &[(T, T)], d: T) -> Result<T> {
        let (first, last) = (points[0], points[points.len() - 1]);
        if d < first.0 || d > last.0 {
            return Err(Error::OutOfRange {
                what: "distance",
                value: to_f64(d),
                lo: to_f64(first.0),
                hi: to_f64(last.0),
            });
        }
        if points.len() == 1 {
            return Ok(first.1);
        }
        let idx = points.partition_point(|p| p.0 <= d).clamp(1, points.len() - 1);
        let (d0, k0) = points[idx - 1];
        let (d1, k1) = points[idx];
        Ok(k0 + (k1 - k0) * (d - d0) / (d1 - d0))
    }
}

/// Mutual inductance between `tx` and `rx` with their reference planes `d` apart.
pub fn coil_mutual<T: Real>(tx: &CoilSpec<T>, rx: &CoilSpec<T>, d: T, model: &CouplingModel<T>) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::Domain(format!("coil distance must be > 0, got {}", to_f64(d))));
    }
    match model {
        CouplingModel::AnalyticFilament => {
            let mut sum = T::zero();
            for ft in &tx.filaments {
                for fr in &rx.filaments {
                    let sep = (d + fr.axial_offset - ft.axial_offset).abs();
                    sum += mutual_inductance_loops(ft.radius, fr.radius, sep)?;
                }
            }
            Ok(tx.turns_scale * rx.turns_scale * sum)
        }
        CouplingModel::Tabulated(points) => {
            let k = CouplingModel::table_k(points, d)?;
            Ok(k * (tx.inductance * rx.inductance).sqrt())
        }
    }
}

/// Rescales both coils' `turns_scale` by a common factor so the analytic
/// model yields coupling `k_ref` at distance `d_ref`.
pub fn match_pair_coupling<T: Real>(tx: &mut CoilSpec<T>, rx: &mut CoilSpec<T>, k_ref: T, d_ref: T) -> Result<()> {
    if !(k_ref > T::zero() && k_ref < T::one()) {
        return Err(Error::Physical(format!("reference coupling {} outside (0, 1)", to_f64(k_ref))));
    }
    let m = coil_mutual(tx, rx, d_ref, &CouplingModel::AnalyticFilament)?;
    let target = k_ref * (tx.inductance * rx.inductance).sqrt();
    let g = (target / m).sqrt();
    tx.turns_scale *= g;
    rx.turns_scale *= g;
    Ok(())
}
