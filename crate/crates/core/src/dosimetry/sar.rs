use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::{FieldMap, TissuePhantom};

/// Largest grid spacing for which cube averaging is meaningful.
pub const MAX_SAR_SPACING: f64 = 5e-3;

/// Averaging mass, kg.
const CUBE_MASS: f64 = 0.010;

/// Peak SAR averaged over a 10 g cube centred on each lattice point.
///
/// Point SAR is `σ·(E/√2)²/ρ`. Cubes are clipped to the phantom and the
/// average is taken over the tissue they actually contain.
pub fn sar_10g<T: Real>(map: &FieldMap<T>, phantom: &TissuePhantom<T>) -> Result<T> {
    phantom.validate()?;
    if !(map.spacing > T::zero() && map.spacing <= lit(MAX_SAR_SPACING)) {
        return Err(Error::Precondition(format!("grid spacing must be in (0, {MAX_SAR_SPACING}] m")));
    }
    let side = (lit::<T>(CUBE_MASS) / phantom.rho).cbrt();
    if side > lit::<T>(2.0) * phantom.radius || side > phantom.length {
        return Err(Error::Geometry("10 g cube does not fit inside the phantom".into()));
    }
    let half = (side * lit(0.5) / map.spacing + lit(1e-9)).floor().to_usize().unwrap();
    let [nx, ny, nz] = map.dims;
    let coef = phantom.sigma / (lit::<T>(2.0) * phantom.rho);

    // 3-D prefix sums of point SAR and of the tissue mask
    let (py, pz) = (ny + 1, nz + 1);
    let pidx = |i: usize, j: usize, k: usize| (i * py + j) * pz + k;
    let mut s = vec![T::zero(); (nx + 1) * py * pz];
    let mut c = vec![T::zero(); (nx + 1) * py * pz];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let n = map.index(i, j, k);
                let (v, m) = if map.inside[n] { (coef * map.e_peak[n] * map.e_peak[n], T::one()) } else { (T::zero(), T::zero()) };
                let q = pidx(i + 1, j + 1, k + 1);
                let box_sum = |a: &[T]| {
                    a[pidx(i, j + 1, k + 1)] + a[pidx(i + 1, j, k + 1)] + a[pidx(i + 1, j + 1, k)]
                        - a[pidx(i, j, k + 1)]
                        - a[pidx(i, j + 1, k)]
                        - a[pidx(i + 1, j, k)]
                        + a[pidx(i, j, k)]
                };
                s[q] = v + box_sum(&s);
                c[q] = m + box_sum(&c);
            }
        }
    }
    let range = |a: usize, n: usize| (a.saturating_sub(half), (a + half + 1).min(n));
    let query = |a: &[T], (x0, x1): (usize, usize), (y0, y1): (usize, usize), (z0, z1): (usize, usize)| {
        a[pidx(x1, y1, z1)] - a[pidx(x0, y1, z1)] - a[pidx(x1, y0, z1)] - a[pidx(x1, y1, z0)]
            + a[pidx(x0, y0, z1)]
            + a[pidx(x0, y1, z0)]
            + a[pidx(x1, y0, z0)]
            - a[pidx(x0, y0, z0)]
    };

    let mut best = T::zero();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                if !map.inside[map.index(i, j, k)] {
                    continue;
                }
                let (rx, ry, rz) = (range(i, nx), range(j, ny), range(k, nz));
                let count = query(&c, rx, ry, rz);
                if count > T::zero() {
                    best = best.max(query(&s, rx, ry, rz) / count);
                }
            }
        }
    }
    Ok(best)
}
