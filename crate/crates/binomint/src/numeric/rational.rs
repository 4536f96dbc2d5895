use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::Error;

/// Arbitrary-precision rational number.
///
/// Always held in canonical form: denominator positive, gcd(num, den) = 1.
/// Canonicalization happens on construction and after every arithmetic
/// operation, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds num/den. Fails if `den` is zero.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::MalformedRational(format!("{num}/0")));
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// num/den from machine integers; panics on den = 0 (internal use only).
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Reciprocal; panics on zero, same policy as division.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero rational");
        Rational(self.0.recip())
    }

    /// Integer power with negative exponents allowed (base must be nonzero
    /// for those).
    pub fn powi(&self, e: i32) -> Result<Self, Error> {
        if e < 0 && self.is_zero() {
            return Err(Error::Domain("negative power of zero".into()));
        }
        Ok(Rational(self.0.pow(e)))
    }

    pub fn sign(&self) -> Sign {
        self.0.numer().sign()
    }

    pub fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // BigRational prints "p/q", or just "p" when q = 1.
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts "p", "p/q", and plain decimals like "2.5" (parsed exactly).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim())
                .map_err(|_| Error::MalformedRational(s.to_string()))?;
            let d = BigInt::from_str(den.trim())
                .map_err(|_| Error::MalformedRational(s.to_string()))?;
            return Rational::new(n, d);
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::MalformedRational(s.to_string()));
            }
            let negative = int_part.starts_with('-');
            let int = if int_part == "-" || int_part.is_empty() {
                BigInt::zero()
            } else {
                BigInt::from_str(int_part).map_err(|_| Error::MalformedRational(s.to_string()))?
            };
            let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
            let frac =
                BigInt::from_str(frac_part).map_err(|_| Error::MalformedRational(s.to_string()))?;
            let num = int.abs() * &scale + frac;
            let num = if negative { -num } else { num };
            return Rational::new(num, scale);
        }
        let n = BigInt::from_str(s).map_err(|_| Error::MalformedRational(s.to_string()))?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(self.0 / rhs.0)
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<&Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(self.0 / &rhs.0)
    }
}

impl Div<Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Rational {
    pub fn cmp_abs(&self, other: &Rational) -> Ordering {
        self.abs().cmp(&other.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_after_construction() {
        let r = Rational::new(BigInt::from(4), BigInt::from(-6)).unwrap();
        assert_eq!(r.numerator(), &BigInt::from(-2));
        assert_eq!(r.denominator(), &BigInt::from(3));
        assert_eq!(r.to_string(), "-2/3");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Rational::new(BigInt::from(1), BigInt::zero()).is_err());
    }

    #[test]
    fn display_integer_without_denominator() {
        assert_eq!(Rational::ratio(6, 3).to_string(), "2");
        assert_eq!(Rational::ratio(1, 9).to_string(), "1/9");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/4".parse::<Rational>().unwrap(), Rational::ratio(3, 4));
        assert_eq!("-7".parse::<Rational>().unwrap(), Rational::from_integer(-7));
        assert_eq!("2.5".parse::<Rational>().unwrap(), Rational::ratio(5, 2));
        assert_eq!("-0.125".parse::<Rational>().unwrap(), Rational::ratio(-1, 8));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1.2e3".parse::<Rational>().is_err());
    }

    #[test]
    fn arithmetic_smoke() {
        let a = Rational::ratio(1, 6);
        let b = Rational::ratio(1, 3);
        assert_eq!(&a + &b, Rational::ratio(1, 2));
        assert_eq!(&a - &b, Rational::ratio(-1, 6));
        assert_eq!(&a * &b, Rational::ratio(1, 18));
        assert_eq!(&a / &b, Rational::ratio(1, 2));
        assert_eq!(a.recip(), Rational::from_integer(6));
        assert_eq!(b.powi(-2).unwrap(), Rational::from_integer(9));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| Rational::ratio(n, d))
    }

    proptest! {
        // Exactness round-trips: these hold with equality, not tolerance.
        #[test]
        fn add_sub_round_trip(a in arb_rational(), b in arb_rational()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn mul_div_round_trip(a in arb_rational(), b in arb_rational()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!(&(&a * &b) / &b, a);
        }

        #[test]
        fn results_stay_canonical(a in arb_rational(), b in arb_rational()) {
            let s = &a + &b;
            let g = num::Integer::gcd(s.numerator(), s.denominator());
            prop_assert_eq!(g, BigInt::from(1));
            prop_assert!(s.denominator() > &BigInt::zero());
        }

        #[test]
        fn display_parse_round_trip(a in arb_rational()) {
            let s = a.to_string();
            prop_assert_eq!(s.parse::<Rational>().unwrap(), a);
        }
    }
}
