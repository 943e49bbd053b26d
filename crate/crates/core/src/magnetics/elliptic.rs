//! Complete elliptic integrals by the arithmetic-geometric mean.
//!
//! The parameter convention is `m = k²`.

use crate::scalar::{lit, Real};

const MAX_ITER: usize = 64;

/// Returns `(K(m), E(m))` for `0 <= m < 1`.
///
/// Iterates until the AGM difference term drops below `4·eps` relative to
/// the running mean, which is roughly 1e-15 in `f64`.
pub fn ellip_ke<T: Real>(m: T) -> (T, T) {
    debug_assert!(m >= T::zero() && m < T::one(), "m = {m} outside [0, 1)");
    let one = T::one();
    let half = lit::<T>(0.5);
    let tol = T::epsilon() * lit(4.0);

    let mut a = one;
    let mut b = (one - m).sqrt();
    let mut c = m.sqrt();
    // sum of 2^(n-1) c_n^2, starting with n = 0
    let mut sum = half * c * c;
    let mut pow = half;
    for _ in 0..MAX_ITER {
        if c.abs() <= tol * a {
            break;
        }
        let a_next = half * (a + b);
        let b_next = (a * b).sqrt();
        c = half * (a - b);
        a = a_next;
        b = b_next;
        pow = pow + pow;
        sum += pow * c * c;
    }
    let k = T::FRAC_PI_2() / a;
    (k, k * (one - sum))
}

/// Complete elliptic integral of the first kind.
pub fn ellip_k<T: Real>(m: T) -> T {
    ellip_ke(m).0
}

/// Complete elliptic integral of the second kind.
pub fn ellip_e<T: Real>(m: T) -> T {
    ellip_ke(m).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Midpoint quadrature of the defining integrals, fine enough for 1e-12.
    fn quad(m: f64) -> (f64, f64) {
        let n = 20_000;
        let h = std::f64::consts::FRAC_PI_2 / n as f64;
        let (mut k, mut e) = (0.0, 0.0);
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            let s = 1.0 - m * t.sin().powi(2);
            k += h / s.sqrt();
            e += h * s.sqrt();
        }
        (k, e)
    }

    #[test]
    fn matches_quadrature() {
        for &m in &[0.0, 0.1, 0.5, 0.9, 0.99] {
            let (k, e) = ellip_ke(m);
            let (kq, eq) = quad(m);
            assert_relative_eq!(k, kq, max_relative = 1e-10);
            assert_relative_eq!(e, eq, max_relative = 1e-10);
        }
    }

    #[test]
    fn zero_parameter() {
        let (k, e) = ellip_ke(0.0_f64);
        assert_relative_eq!(k, std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(e, std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K - K K' = pi/2
        for &m in &[0.2_f64, 0.5, 0.7] {
            let (k, e) = ellip_ke(m);
            let (kp, ep) = ellip_ke(1.0 - m);
            assert_relative_eq!(e * kp + ep * k - k * kp, std::f64::consts::FRAC_PI_2, max_relative = 1e-13);
        }
    }

    #[test]
    fn single_precision() {
        let (k, e) = ellip_ke(0.5_f32);
        assert_relative_eq!(k, 1.854_075_f32, max_relative = 1e-6);
        assert_relative_eq!(e, 1.350_644_3_f32, max_relative = 1e-6);
    }
}
