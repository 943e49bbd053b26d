use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

impl<T: Real> Regression<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares fit `y = slope·x + intercept`.
pub fn linear_regression<T: Real>(points: &[(T, T)]) -> Result<Regression<T>> {
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let n = T::from_usize(points.len()).unwrap();
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == T::zero() { T::one() } else { (sxy * sxy / (sxx * syy)).min(T::one()) };
    Ok(Regression { slope, intercept, r_squared })
}
