//! Arithmetic foundations: exact rationals, an extended-precision binary
//! float with per-operation correct rounding, and exact binomial
//! coefficients.

mod bigfloat;
mod binomial;
mod rational;

pub use bigfloat::BigFloat;
pub use binomial::{binomial, binomial_integer, PascalRow};
pub use rational::Rational;

/// Rounds an exact rational to a binary float with `precision` mantissa bits.
/// The result is the nearest representable value (ties to even).
pub fn to_bigfloat(r: &Rational, precision: u32) -> BigFloat {
    BigFloat::from_rational(r, precision)
}
