//! Scalar abstractions shared by the generic parts of the crate.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num};

/// An ordered field: floats as well as exact rationals.
pub trait Field: Clone + PartialOrd + Debug + Num + Neg<Output = Self> + FromPrimitive {}

impl<T> Field for T where T: Clone + PartialOrd + Debug + Num + Neg<Output = Self> + FromPrimitive {}

/// A floating-point field.
pub trait Real: Field + Float + Copy {}

impl<T> Real for T where T: Field + Float + Copy {}

/// Converts a small integer literal into the field.
pub fn lit<T: Field>(n: i64) -> T {
    T::from_i64(n).expect("integer literal representable in the field")
}

/// Converts an f64 constant into a floating-point field.
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable")
}
