//! The rotating-disk field that defeats Korn's inequality in a three-dimensional pipe.
//!
//! On the cylinder `B x R` with `B` the unit disk, `w = (-xi(x3) x2, xi(x3) x1, 0)` has
//! `|grad w|^2 = 2 xi^2 + r^2 xi'^2` and `|S w|^2 = r^2 xi'^2 / 2`. The disk integrals are
//! `int_B 1 = pi` and `int_B r^2 = pi / 2`; the `x3` integrals use Gauss quadrature on the
//! pieces of the ramp cut-off `xi = clamp(R + 1 - |x3|, 0, 1)`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{lit, Real};

/// Both integrals and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Korn3dReport<T> {
    /// `int |grad w|^2`.
    pub numerator: T,
    /// `int |S w|^2`.
    pub denominator: T,
    pub ratio: T,
}

fn ramp<T: Real>(r: T, x3: T) -> (T, T) {
    let one = T::one();
    let a = x3.abs();
    if a <= r {
        (one, T::zero())
    } else if a < r + one {
        let slope = if x3 > T::zero() { -one } else { one };
        (r + one - a, slope)
    } else {
        (T::zero(), T::zero())
    }
}

/// `int |grad w|^2 / int |S w|^2` for the plateau half-length `r`.
pub fn korn3d_counterexample_ratio<T: Real>(r: T) -> Result<Korn3dReport<T>> {
    if !(r >= T::one()) {
        return Err(Error::Parameter("the plateau half-length must be at least 1".into()));
    }
    let pi = T::from_f64(std::f64::consts::PI).unwrap();
    let disk = pi;
    let disk_r2 = pi / lit(2);
    let rule = GaussLegendre::<T>::new(8);
    let one = T::one();
    let pieces = [(-r - one, -r), (-r, r), (r, r + one)];
    let (mut xi2, mut dxi2) = (T::zero(), T::zero());
    for (a, b) in pieces {
        xi2 = xi2 + rule.integrate(a, b, |x| {
            let (v, _) = ramp(r, x);
            v * v
        });
        dxi2 = dxi2 + rule.integrate(a, b, |x| {
            let (_, d) = ramp(r, x);
            d * d
        });
    }
    let numerator = lit::<T>(2) * disk * xi2 + disk_r2 * dxi2;
    let denominator = disk_r2 * dxi2 / lit(2);
    Ok(Korn3dReport { numerator, denominator, ratio: numerator / denominator })
}
