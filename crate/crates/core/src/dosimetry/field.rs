use crate::error::{Error, Result};
use crate::magnetics::elliptic::ellip_ke;
use crate::scalar::{lit, mu0, Real};

/// Below this elliptic parameter the vector potential uses its series form.
const SMALL_M: f64 = 1e-4;

fn check_point<T: Real>(a: T, rho: T, z: T) -> Result<T> {
    if !(a > T::zero()) {
        return Err(Error::Domain(format!("loop radius must be > 0, got {a}")));
    }
    let m = lit::<T>(4.0) * a * rho / ((a + rho) * (a + rho) + z * z);
    if m >= T::one() {
        return Err(Error::Domain("field point lies on the filament".into()));
    }
    Ok(m)
}

/// Flux density of a circular filament of radius `a` carrying `i`, centred
/// at the origin with its axis along `z`.
pub fn b_field_loop<T: Real>(a: T, i: T, point: [T; 3]) -> Result<[T; 3]> {
    let [x, y, z] = point;
    let rho = (x * x + y * y).sqrt();
    let m = check_point(a, rho, z)?;
    let zero = T::zero();
    if i == zero {
        return Ok([zero; 3]);
    }
    let two = lit::<T>(2.0);
    if rho == zero {
        let r2 = a * a + z * z;
        return Ok([zero, zero, mu0::<T>() * i * a * a / (two * r2 * r2.sqrt())]);
    }
    let (k, e) = ellip_ke(m);
    let alpha2 = (a - rho) * (a - rho) + z * z;
    let beta = ((a + rho) * (a + rho) + z * z).sqrt();
    let c = mu0::<T>() * i / (two * T::PI() * beta);
    let b_rho = c * z / rho * ((a * a + rho * rho + z * z) / alpha2 * e - k);
    let b_z = c * ((a * a - rho * rho - z * z) / alpha2 * e + k);
    Ok([b_rho * x / rho, b_rho * y / rho, b_z])
}

/// Azimuthal vector potential of the same filament at cylindrical
/// coordinates `(rho, z)`.
pub fn vector_potential_loop<T: Real>(a: T, i: T, rho: T, z: T) -> Result<T> {
    let m = check_point(a, rho, z)?;
    if rho == T::zero() || i == T::zero() {
        return Ok(T::zero());
    }
    let k = m.sqrt();
    let bracket = if m < lit(SMALL_M) {
        T::PI() * m * m / lit(32.0) * (T::one() + lit::<T>(0.75) * m)
    } else {
        let (ek, ee) = ellip_ke(m);
        (T::one() - m / lit(2.0)) * ek - ee
    };
    Ok(mu0::<T>() * i / (T::PI() * k) * (a / rho).sqrt() * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const MU0: f64 = 4e-7 * PI;

    /// Direct Biot-Savart sum over a polygonal loop.
    fn biot_savart(a: f64, p: [f64; 3]) -> [f64; 3] {
        let n = 20000;
        let mut b = [0.0; 3];
        for j in 0..n {
            let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let dl = [-t.sin() * 2.0 * PI * a / n as f64, t.cos() * 2.0 * PI * a / n as f64, 0.0];
            let r = [p[0] - a * t.cos(), p[1] - a * t.sin(), p[2]];
            let r3 = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).powf(1.5);
            b[0] += MU0 / (4.0 * PI) * (dl[1] * r[2] - dl[2] * r[1]) / r3;
            b[1] += MU0 / (4.0 * PI) * (dl[2] * r[0] - dl[0] * r[2]) / r3;
            b[2] += MU0 / (4.0 * PI) * (dl[0] * r[1] - dl[1] * r[0]) / r3;
        }
        b
    }

    fn potential_quadrature(a: f64, rho: f64, z: f64) -> f64 {
        let n = 20000;
        let mut s = 0.0;
        for j in 0..n {
            let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            s += t.cos() / (a * a + rho * rho + z * z - 2.0 * a * rho * t.cos()).sqrt();
        }
        MU0 * a / (4.0 * PI) * s * 2.0 * PI / n as f64
    }

    #[test]
    fn centre_field() {
        let b = b_field_loop(0.025, 1.0, [0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(b[2], 2.5132741228718343e-05, max_relative = 1e-12);
    }

    #[test]
    fn zero_current_gives_zero() {
        assert_eq!(b_field_loop(0.025, 0.0, [0.01, 0.0, 0.003]).unwrap(), [0.0; 3]);
    }

    #[test]
    fn far_axis_is_dipole() {
        let a = 0.025;
        let z = 10.0 * a;
        let b = b_field_loop(a, 1.0, [0.0, 0.0, z]).unwrap();
        assert_relative_eq!(b[2], MU0 * a * a / (2.0 * z.powi(3)), max_relative = 0.015);
    }

    #[test]
    fn off_axis_matches_biot_savart() {
        for p in [[0.01, 0.004, 0.006], [0.03, -0.02, -0.01], [0.0249, 0.0, 0.0005]] {
            let b = b_field_loop(0.025, 1.0, p).unwrap();
            let r = biot_savart(0.025, p);
            for c in 0..3 {
                assert_relative_eq!(b[c], r[c], epsilon = 1e-9 * r[2].abs().max(1e-6), max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn on_filament_is_rejected() {
        assert!(b_field_loop(0.025, 1.0, [0.025, 0.0, 0.0]).is_err());
        assert!(vector_potential_loop(0.025, 1.0, 0.025, 0.0).is_err());
    }

    #[test]
    fn potential_matches_quadrature() {
        for &(rho, z) in &[(0.001, 0.01), (0.02, 0.005), (0.05, 0.03), (0.0003, 0.002), (0.024, 0.001)] {
            let a = vector_potential_loop(0.025, 1.0, rho, z).unwrap();
            assert_relative_eq!(a, potential_quadrature(0.025, rho, z), max_relative = 1e-6);
        }
    }
}
