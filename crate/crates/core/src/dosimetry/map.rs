use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::magnetics::CoilSpec;
use crate::scalar::{eps0, lit, to_f64, Real};

use super::field::{b_field_loop, vector_potential_loop};
use super::TissuePhantom;

pub const FIELD_CSV_HEADER: &str = "x_m,y_m,z_m,e_vpm,j_apm2,b_t";

/// Largest lattice spacing accepted by [`induced_fields`].
pub const MAX_FIELD_SPACING: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions<T> {
    pub spacing: T,
    /// Use `|σ + jωε0εr|` instead of `σ` when converting E to J.
    pub complex_admittivity: bool,
}

impl<T: Real> Default for FieldOptions<T> {
    fn default() -> Self {
        Self { spacing: lit(MAX_FIELD_SPACING), complex_admittivity: false }
    }
}

/// Peak-amplitude field magnitudes on a regular lattice. Values are stored
/// densely over the bounding box; points outside the phantom hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap<T> {
    pub spacing: T,
    /// Coordinates of lattice index `(0, 0, 0)`.
    pub origin: [T; 3],
    pub dims: [usize; 3],
    pub inside: Vec<bool>,
    pub e_peak: Vec<T>,
    pub j_peak: Vec<T>,
    pub b_peak: Vec<T>,
    pub i_ref: T,
    /// Points dropped because they sat on a filament.
    pub excluded: usize,
}

impl<T: Real> FieldMap<T> {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [T; 3] {
        let h = self.spacing;
        let c = |n: usize| T::from_usize(n).unwrap() * h;
        [self.origin[0] + c(i), self.origin[1] + c(j), self.origin[2] + c(k)]
    }

    pub fn len(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn max_of(v: &[T]) -> T {
        v.iter().fold(T::zero(), |m, &x| m.max(x))
    }

    pub fn e_max(&self) -> T {
        Self::max_of(&self.e_peak)
    }

    pub fn j_max(&self) -> T {
        Self::max_of(&self.j_peak)
    }

    pub fn b_max(&self) -> T {
        Self::max_of(&self.b_peak)
    }

    /// The same map at coil current `c·i_ref`.
    pub fn scaled(&self, c: T) -> Self {
        let s = |v: &[T]| v.iter().map(|&x| x * c.abs()).collect();
        Self { e_peak: s(&self.e_peak), j_peak: s(&self.j_peak), b_peak: s(&self.b_peak), i_ref: self.i_ref * c, ..self.clone() }
    }

    /// Writes one row per point inside the phantom.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{FIELD_CSV_HEADER}")?;
        let [nx, ny, nz] = self.dims;
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let n = self.index(i, j, k);
                    if !self.inside[n] {
                        continue;
                    }
                    let p = self.point(i, j, k);
                    writeln!(
                        w,
                        "{:.5},{:.5},{:.5},{:e},{:e},{:e}",
                        to_f64(p[0]),
                        to_f64(p[1]),
                        to_f64(p[2]),
                        to_f64(self.e_peak[n]),
                        to_f64(self.j_peak[n]),
                        to_f64(self.b_peak[n])
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Induced E, J and B inside `phantom` for the coil lying flat above it.
///
/// The coil axis is the `z` axis through the phantom centre, and the coil
/// reference plane sits `gap` above the top of the cylinder. Each filament
/// carries `i_peak · turns_scale`. The electric field is the induced part
/// `ω|A|` only.
pub fn induced_fields<T: Real>(
    phantom: &TissuePhantom<T>,
    coil: &CoilSpec<T>,
    gap: T,
    i_peak: T,
    frequency: T,
    opts: FieldOptions<T>,
) -> Result<FieldMap<T>> {
    phantom.validate()?;
    coil.validate()?;
    let h = opts.spacing;
    if !(h > T::zero() && h <= lit(MAX_FIELD_SPACING * (1.0 + 1e-9))) {
        return Err(Error::Precondition(format!("grid spacing must be in (0, {MAX_FIELD_SPACING}] m")));
    }
    if !(frequency > T::zero()) {
        return Err(Error::Precondition("frequency must be > 0".into()));
    }
    let z_coil = phantom.radius + gap;
    let filaments: Vec<(T, T)> = coil.filaments.iter().map(|f| (f.radius, z_coil + f.axial_offset)).collect();
    if filaments.iter().any(|&(_, z)| !(z > phantom.radius)) {
        return Err(Error::Geometry("coil must lie outside the phantom".into()));
    }

    let w = T::TAU() * frequency;
    let sigma = if opts.complex_admittivity {
        let eps = w * eps0::<T>() * phantom.eps_r;
        (phantom.sigma * phantom.sigma + eps * eps).sqrt()
    } else {
        phantom.sigma
    };
    let current = i_peak * coil.turns_scale;
    let half_cells = |extent: T| (extent / h + lit(1e-9)).floor().to_usize().unwrap();
    let cx = half_cells(phantom.length * lit(0.5));
    let cr = half_cells(phantom.radius);
    let dims = [2 * cx + 1, 2 * cr + 1, 2 * cr + 1];
    let origin = [-T::from_usize(cx).unwrap() * h, -T::from_usize(cr).unwrap() * h, -T::from_usize(cr).unwrap() * h];
    let coord = |o: T, n: usize| o + T::from_usize(n).unwrap() * h;

    let slab = dims[1] * dims[2];
    let slices: Vec<_> = (0..dims[0])
        .into_par_iter()
        .map(|i| {
            let x = coord(origin[0], i);
            let mut inside = vec![false; slab];
            let mut e = vec![T::zero(); slab];
            let mut j = vec![T::zero(); slab];
            let mut b = vec![T::zero(); slab];
            let mut excluded = 0usize;
            for jy in 0..dims[1] {
                let y = coord(origin[1], jy);
                for kz in 0..dims[2] {
                    let z = coord(origin[2], kz);
                    if !phantom.contains([x, y, z]) {
                        continue;
                    }
                    let n = jy * dims[2] + kz;
                    let rho = (x * x + y * y).sqrt();
                    let mut a_phi = T::zero();
                    let mut bv = [T::zero(); 3];
                    let mut ok = true;
                    for &(radius, zf) in &filaments {
                        match (
                            vector_potential_loop(radius, current, rho, z - zf),
                            b_field_loop(radius, current, [x, y, z - zf]),
                        ) {
                            (Ok(a), Ok(bf)) => {
                                a_phi += a;
                                for c in 0..3 {
                                    bv[c] += bf[c];
                                }
                            }
                            _ => ok = false,
                        }
                    }
                    if !ok {
                        excluded += 1;
                        continue;
                    }
                    inside[n] = true;
                    e[n] = w * a_phi.abs();
                    j[n] = sigma * e[n];
                    b[n] = (bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2]).sqrt();
                }
            }
            (inside, e, j, b, excluded)
        })
        .collect();

    let total = dims[0] * slab;
    let mut map = FieldMap {
        spacing: h,
        origin,
        dims,
        inside: Vec::with_capacity(total),
        e_peak: Vec::with_capacity(total),
        j_peak: Vec::with_capacity(total),
        b_peak: Vec::with_capacity(total),
        i_ref: i_peak,
        excluded: 0,
    };
    for (inside, e, j, b, excluded) in slices {
        map.inside.extend(inside);
        map.e_peak.extend(e);
        map.j_peak.extend(j);
        map.b_peak.extend(b);
        map.excluded += excluded;
    }
    Ok(map)
}
