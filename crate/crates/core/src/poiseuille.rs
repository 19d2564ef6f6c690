//! Fully developed end profiles of the strip and their pressure-gradient constants.
//!
//! On a cross-section of width `c` the profile with flux `phi` and friction `alpha` is
//! `P(y) = k (alpha (c y - y^2) + c)` with `k = 6 phi / (c^2 (6 + c alpha))`, and the
//! no-slip limit is `6 phi y (c - y) / c^3`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Field, Real};

/// Which straight end of the strip a profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Friction coefficient of the Navier-slip condition; `NoSlip` is the `alpha = inf` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Friction<T> {
    Finite(T),
    NoSlip,
}

impl<T: Field> Friction<T> {
    pub fn is_no_slip(&self) -> bool {
        matches!(self, Friction::NoSlip)
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Friction::Finite(a) => Some(a),
            Friction::NoSlip => None,
        }
    }
}

impl Friction<f64> {
    /// Parses a number or the `inf` sentinel.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().trim_matches('"');
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Friction::NoSlip);
        }
        let a: f64 = t
            .parse()
            .map_err(|_| Error::Parameter(format!("friction `{text}` is not a number")))?;
        if a.is_infinite() && a > 0.0 {
            return Ok(Friction::NoSlip);
        }
        if !(a >= 0.0) {
            return Err(Error::Parameter(format!("friction must be >= 0, got {a}")));
        }
        Ok(Friction::Finite(a))
    }

    /// Numeric value with `inf` for the sentinel.
    pub fn value(&self) -> f64 {
        match self {
            Friction::Finite(a) => *a,
            Friction::NoSlip => f64::INFINITY,
        }
    }

    /// The smallness quantity `alpha phi / (1 + alpha)`.
    pub fn smallness(&self, phi: f64) -> f64 {
        match self {
            Friction::Finite(a) => a * phi / (1.0 + a),
            Friction::NoSlip => phi,
        }
    }
}

impl std::fmt::Display for Friction<f64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Friction::Finite(a) => write!(f, "{a}"),
            Friction::NoSlip => write!(f, "inf"),
        }
    }
}

/// Closed-form Poiseuille profile on one end of the strip.
#[derive(Debug, Clone, PartialEq)]
pub struct PoiseuilleProfile<T> {
    phi: T,
    alpha: Friction<T>,
    width: T,
    side: Side,
}

/// Report of the derivative bound `|P'| <= C alpha phi / (1 + alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBound<T> {
    pub max_abs_derivative: T,
    pub ratio: T,
}

impl<T: Field> PoiseuilleProfile<T> {
    pub fn new(phi: T, alpha: Friction<T>, width: T, side: Side) -> Result<Self> {
        if let Friction::Finite(a) = &alpha {
            if *a < T::zero() {
                return Err(Error::Parameter(format!("friction must be >= 0, got {a:?}")));
            }
        }
        if width <= T::zero() {
            return Err(Error::Parameter(format!("width must be > 0, got {width:?}")));
        }
        Ok(Self { phi, alpha, width, side })
    }

    /// Right-end profile on a cross-section of width 1.
    pub fn right(phi: T, alpha: Friction<T>) -> Result<Self> {
        Self::new(phi, alpha, T::one(), Side::Right)
    }

    /// Left-end profile on a cross-section of width `c0`.
    pub fn left(phi: T, alpha: Friction<T>, c0: T) -> Result<Self> {
        Self::new(phi, alpha, c0, Side::Left)
    }

    pub fn phi(&self) -> &T {
        &self.phi
    }

    pub fn alpha(&self) -> &Friction<T> {
        &self.alpha
    }

    pub fn width(&self) -> &T {
        &self.width
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Leading coefficient: `P(y) = k (alpha (c y - y^2) + c)`, or `k (c y - y^2)` without slip.
    fn amplitude(&self) -> T {
        let c = self.width.clone();
        match &self.alpha {
            Friction::Finite(a) => {
                lit::<T>(6) * self.phi.clone()
                    / (c.clone() * c.clone() * (lit::<T>(6) + c * a.clone()))
            }
            Friction::NoSlip => lit::<T>(6) * self.phi.clone() / (c.clone() * c.clone() * c),
        }
    }

    /// Profile value; `x2` is measured from the lower wall of the end section.
    pub fn eval(&self, x2: T) -> Result<T> {
        if x2 < T::zero() || x2 > self.width {
            return Err(Error::Domain(format!(
                "cross-stream coordinate {x2:?} outside [0, {:?}]",
                self.width
            )));
        }
        Ok(self.value(x2))
    }

    /// Profile value without the range check.
    pub fn value(&self, y: T) -> T {
        let c = self.width.clone();
        let k = self.amplitude();
        let bulk = c.clone() * y.clone() - y.clone() * y;
        match &self.alpha {
            Friction::Finite(a) => k * (a.clone() * bulk + c),
            Friction::NoSlip => k * bulk,
        }
    }

    /// Antiderivative `int_0^y P`.
    pub fn primitive(&self, y: T) -> T {
        let c = self.width.clone();
        let k = self.amplitude();
        let y2 = y.clone() * y.clone();
        let bulk = c.clone() * y2.clone() / lit::<T>(2) - y2 * y.clone() / lit::<T>(3);
        match &self.alpha {
            Friction::Finite(a) => k * (a.clone() * bulk + c * y),
            Friction::NoSlip => k * bulk,
        }
    }

    /// First derivative `P'(y)`.
    pub fn derivative(&self, y: T) -> T {
        let c = self.width.clone();
        let slope = c - lit::<T>(2) * y;
        match &self.alpha {
            Friction::Finite(a) => self.amplitude() * a.clone() * slope,
            Friction::NoSlip => self.amplitude() * slope,
        }
    }

    /// Second derivative, constant in `y`.
    pub fn second_derivative(&self) -> T {
        -self.pressure_constant()
    }

    /// The constant `C = -P''` balancing the axial pressure gradient.
    pub fn pressure_constant(&self) -> T {
        match &self.alpha {
            Friction::Finite(a) => lit::<T>(2) * self.amplitude() * a.clone(),
            Friction::NoSlip => lit::<T>(2) * self.amplitude(),
        }
    }

    /// Flux from the exact antiderivative.
    pub fn flux_exact(&self) -> T {
        let c = self.width.clone();
        let c2 = c.clone() * c.clone();
        let c3 = c2.clone() * c.clone();
        let bulk = c3.clone() / lit::<T>(2) - c3 / lit::<T>(3);
        match &self.alpha {
            Friction::Finite(a) => self.amplitude() * (a.clone() * bulk + c2),
            Friction::NoSlip => self.amplitude() * bulk,
        }
    }

    /// Residuals of the wall conditions at `y = 0` and `y = width`.
    ///
    /// Robin form `P'(0) - alpha P(0)`, `P'(c) + alpha P(c)` for finite friction,
    /// `P(0)`, `P(c)` in the no-slip limit.
    pub fn wall_residuals(&self) -> (T, T) {
        let c = self.width.clone();
        match &self.alpha {
            Friction::Finite(a) => (
                self.derivative(T::zero()) - a.clone() * self.value(T::zero()),
                self.derivative(c.clone()) + a.clone() * self.value(c),
            ),
            Friction::NoSlip => (self.value(T::zero()), self.value(c)),
        }
    }

    /// Largest `|P'|` on the section and its ratio to `alpha phi / (1 + alpha)`.
    ///
    /// The ratio is reported in closed form `6 (1 + alpha) / (c (6 + c alpha))`, which stays
    /// finite at `alpha = 0` and tends to `6 / c^2` without slip.
    pub fn derivative_bound_check(&self) -> DerivativeBound<T> {
        let d0 = self.derivative(T::zero());
        let max_abs_derivative = if d0 < T::zero() { -d0 } else { d0 };
        let c = self.width.clone();
        let ratio = match &self.alpha {
            Friction::Finite(a) => {
                lit::<T>(6) * (T::one() + a.clone()) / (c.clone() * (lit::<T>(6) + c * a.clone()))
            }
            Friction::NoSlip => lit::<T>(6) / (c.clone() * c),
        };
        DerivativeBound { max_abs_derivative, ratio }
    }
}

impl<T: Real> PoiseuilleProfile<T> {
    /// Flux by three-point Gauss quadrature, exact for the quadratic profile.
    pub fn flux_quadrature(&self) -> T {
        let g = crate::quadrature::GaussLegendre::<T>::new(3);
        g.integrate(T::zero(), self.width, |y| self.value(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn uniform_without_friction() {
        let p = PoiseuilleProfile::right(1.0, Friction::Finite(0.0)).unwrap();
        assert_eq!(p.eval(0.3).unwrap(), 1.0);
        assert_eq!(p.pressure_constant(), 0.0);
        let l = PoiseuilleProfile::left(1.0, Friction::Finite(0.0), 2.0).unwrap();
        assert_eq!(l.eval(1.7).unwrap(), 0.5);
    }

    #[test]
    fn exact_rational_values() {
        let p = PoiseuilleProfile::right(q(1, 1), Friction::Finite(q(6, 1))).unwrap();
        assert_eq!(p.eval(q(1, 2)).unwrap(), q(5, 4));
        assert_eq!(p.pressure_constant(), q(6, 1));
        assert_eq!(p.flux_exact(), q(1, 1));
        assert_eq!(p.wall_residuals(), (q(0, 1), q(0, 1)));
        let l = PoiseuilleProfile::left(q(3, 7), Friction::Finite(q(5, 3)), q(9, 4)).unwrap();
        assert_eq!(l.flux_exact(), q(3, 7));
        assert_eq!(l.wall_residuals(), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn no_slip_limit_is_parabola() {
        let p = PoiseuilleProfile::right(2.0, Friction::NoSlip).unwrap();
        for i in 0..=10 {
            let y = i as f64 / 10.0;
            assert!((p.value(y) - 12.0 * y * (1.0 - y)).abs() <= 1e-12);
        }
        assert_eq!(p.pressure_constant(), 24.0);
        let big = PoiseuilleProfile::right(2.0f64, Friction::Finite(1e12)).unwrap();
        assert!((big.pressure_constant() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn negative_friction_rejected() {
        assert!(PoiseuilleProfile::right(1.0, Friction::Finite(-1.0)).is_err());
        assert!(Friction::parse("-2").is_err());
        assert_eq!(Friction::parse("\"inf\"").unwrap(), Friction::NoSlip);
    }

    #[test]
    fn derivative_ratio_matches_closed_form() {
        for a in [0.01f64, 1.0, 100.0, 1e4] {
            let p = PoiseuilleProfile::right(1.0, Friction::Finite(a)).unwrap();
            let b = p.derivative_bound_check();
            assert!((b.max_abs_derivative - 6.0 * a / (6.0 + a)).abs() < 1e-12);
            let direct = b.max_abs_derivative / (a / (1.0 + a));
            assert!((b.ratio - direct).abs() < 1e-12 * direct);
            assert!(b.ratio >= 1.0 && b.ratio < 6.0);
        }
        let zero = PoiseuilleProfile::right(1.0, Friction::Finite(0.0)).unwrap();
        assert_eq!(zero.derivative_bound_check().max_abs_derivative, 0.0);
    }

    #[test]
    fn flux_doubling_doubles_slope() {
        let a = PoiseuilleProfile::right(1.0, Friction::Finite(3.0)).unwrap();
        let b = PoiseuilleProfile::right(2.0, Friction::Finite(3.0)).unwrap();
        let (da, db) = (a.derivative_bound_check(), b.derivative_bound_check());
        assert_eq!(db.max_abs_derivative, 2.0 * da.max_abs_derivative);
    }

    proptest! {
        #[test]
        fn profile_invariants(phi in 0.0f64..10.0, alpha in 0.0f64..1e4, width in 0.1f64..5.0, y in 0.0f64..1.0) {
            let p = PoiseuilleProfile::new(phi, Friction::Finite(alpha), width, Side::Left).unwrap();
            prop_assert!((p.flux_quadrature() - phi).abs() <= 1e-12 * phi.max(1.0));
            let (r0, r1) = p.wall_residuals();
            prop_assert!(r0.abs() <= 1e-10 && r1.abs() <= 1e-10);
            let yy = y * width;
            let h = 1e-3 * width;
            let lo = (yy - h).max(0.0);
            let hi = lo + 2.0 * h;
            let mid = lo + h;
            let fd = (p.value(hi) - 2.0 * p.value(mid) + p.value(lo)) / (h * h);
            prop_assert!((-fd - p.pressure_constant()).abs() <= 1e-5 * (1.0 + p.pressure_constant().abs()));
        }

        #[test]
        fn exact_flux_rational(pn in 0i64..50, an in 0i64..200, cn in 1i64..40) {
            let p = PoiseuilleProfile::left(q(pn, 7), Friction::Finite(q(an, 3)), q(cn, 5)).unwrap();
            prop_assert_eq!(p.flux_exact(), q(pn, 7));
            prop_assert_eq!(p.wall_residuals(), (q(0, 1), q(0, 1)));
            prop_assert_eq!(-p.second_derivative(), p.pressure_constant());
        }
    }
}
