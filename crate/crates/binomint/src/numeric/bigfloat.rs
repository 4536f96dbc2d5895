use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigUint, Integer, One, Zero};

use super::Rational;

/// Binary floating-point number with a caller-chosen mantissa width.
///
/// Value = `sign * mant * 2^exp`, where a nonzero mantissa is kept
/// normalized to exactly `prec` bits. All four arithmetic operations are
/// correctly rounded (round to nearest, ties to even) at the result
/// precision, which is the larger of the operand precisions: add, subtract
/// and multiply compute the exact result before rounding (wide alignment
/// shifts are short-circuited through a sticky bit, which preserves the
/// rounding), and divide keeps two quotient guard bits plus a sticky bit
/// from the remainder.
///
/// The exponent is unbounded, so there are no overflows, infinities or
/// subnormals. At `prec = 53` the arithmetic behaves like IEEE f64 on
/// in-range values, which the tests exploit as an oracle.
#[derive(Debug, Clone)]
pub struct BigFloat {
    sign: i8, // -1, 0, +1
    mant: BigUint,
    exp: i64,
    prec: u32,
}

pub(crate) const MIN_PREC: u32 = 2;

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { sign: 0, mant: BigUint::zero(), exp: 0, prec: prec.max(MIN_PREC) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_u64(1, prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Self::make(if v == 0 { 0 } else { 1 }, BigUint::from(v), 0, false, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        let sign = match v.cmp(&0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        Self::make(sign, BigUint::from(v.unsigned_abs()), 0, false, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        let sign = match v.sign() {
            num::bigint::Sign::Minus => -1,
            num::bigint::Sign::NoSign => 0,
            num::bigint::Sign::Plus => 1,
        };
        Self::make(sign, v.magnitude().clone(), 0, false, prec)
    }

    /// Nearest `prec`-bit value to the exact rational `r`.
    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        if r.is_zero() {
            return Self::zero(prec);
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        let num = r.numerator().magnitude();
        let den = r.denominator().magnitude();
        Self::quotient(sign, num, 0, den, 0, prec)
    }

    /// Exact conversion from a finite f64.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite(), "non-finite f64");
        if v == 0.0 {
            return Self::zero(prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074) // subnormal
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Self::make(sign, BigUint::from(mant), exp, false, prec)
    }

    /// Parses a plain decimal literal ("-3.14159", "0.5", "42") to the
    /// nearest `prec`-bit value.
    pub fn from_decimal_str(s: &str, prec: u32) -> Result<Self, crate::Error> {
        let r: Rational = s.parse()?;
        Ok(Self::from_rational(&r, prec))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        self.sign
    }

    /// Re-rounds to `prec` mantissa bits (exact when widening).
    pub fn with_precision(&self, prec: u32) -> Self {
        Self::make(self.sign, self.mant.clone(), self.exp, false, prec)
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        if r.sign != 0 {
            r.sign = 1;
        }
        r
    }

    /// Exact scaling by 2^k.
    pub fn mul_pow2(&self, k: i64) -> Self {
        let mut r = self.clone();
        if r.sign != 0 {
            r.exp += k;
        }
        r
    }

    /// Exponent of the most significant bit plus one: 2^(e-1) <= |x| < 2^e.
    /// Zero input returns i64::MIN.
    pub fn mag_exponent(&self) -> i64 {
        if self.sign == 0 {
            i64::MIN
        } else {
            self.exp + self.prec as i64
        }
    }

    // Normalizes and rounds (nearest, ties to even). `sticky` marks nonzero
    // value bits strictly below the given mantissa; callers passing
    // sticky = true must supply more than `prec` mantissa bits so the tie
    // logic sees them.
    fn make(sign: i8, mant: BigUint, exp: i64, sticky: bool, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        if sign == 0 || mant.is_zero() {
            return Self::zero(prec);
        }
        let bits = mant.bits();
        let target = prec as u64;
        if bits <= target {
            debug_assert!(!sticky, "sticky bit requires excess mantissa bits");
            let shift = target - bits;
            return BigFloat { sign, mant: mant << shift, exp: exp - shift as i64, prec };
        }
        let drop = bits - target;
        let low = &mant & ((BigUint::one() << drop) - BigUint::one());
        let mut kept = mant >> drop;
        let half = BigUint::one() << (drop - 1);
        let round_up = match low.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => sticky || kept.is_odd(),
        };
        let mut exp = exp + drop as i64;
        if round_up {
            kept += BigUint::one();
            if kept.bits() > target {
                kept >>= 1;
                exp += 1;
            }
        }
        BigFloat { sign, mant: kept, exp, prec }
    }

    // Correctly rounded (num * 2^enum_) / (den * 2^eden).
    fn quotient(sign: i8, num: &BigUint, enum_: i64, den: &BigUint, eden: i64, prec: u32) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero(prec);
        }
        let bn = num.bits() as i64;
        let bd = den.bits() as i64;
        // Shift so the integer quotient carries prec + 2 bits.
        let t = prec as i64 + 2 + bd - bn;
        let (q, r) = if t >= 0 {
            (num << t as u64).div_rem(den)
        } else {
            num.div_rem(&(den << (-t) as u64))
        };
        let exp = enum_ - eden - t;
        Self::make(sign, q, exp, !r.is_zero(), prec)
    }

    fn add_signed(&self, other: &Self, negate_other: bool) -> Self {
        let prec = self.prec.max(other.prec);
        let other_sign = if negate_other { -other.sign } else { other.sign };
        if other.sign == 0 {
            return self.with_precision(prec);
        }
        if self.sign == 0 {
            let mut r = other.with_precision(prec);
            r.sign = if r.sign == 0 { 0 } else { other_sign };
            return r;
        }
        let ea = self.mag_exponent();
        let eb = other.mag_exponent();
        let (hi, hi_sign, lo, lo_sign) = if ea >= eb {
            (self, self.sign, other, other_sign)
        } else {
            (other, other_sign, self, self.sign)
        };
        let gap = (hi.mag_exponent() - lo.mag_exponent()) as u64;
        if gap > prec as u64 + 2 {
            // The small operand is entirely below the rounding window of the
            // result; a one-bit nudge three guard positions down reproduces
            // its effect on the rounding exactly.
            let mut m = &hi.mant << 3u32;
            if hi_sign == lo_sign {
                m += BigUint::one();
            } else {
                m -= BigUint::one();
            }
            return Self::make(hi_sign, m, hi.exp - 3, true, prec);
        }
        let e_min = hi.exp.min(lo.exp);
        let sh = (hi.exp - e_min) as u64;
        let sl = (lo.exp - e_min) as u64;
        let ih = BigInt::from(hi.mant.clone() << sh);
        let il = BigInt::from(lo.mant.clone() << sl);
        let sum = if hi_sign == lo_sign { ih + il } else { ih - il };
        let sign = match sum.sign() {
            num::bigint::Sign::Minus => -hi_sign,
            num::bigint::Sign::NoSign => 0,
            num::bigint::Sign::Plus => hi_sign,
        };
        Self::make(sign, sum.magnitude().clone(), e_min, false, prec)
    }

    pub fn recip(&self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        Self::quotient(self.sign, &BigUint::one(), 0, &self.mant, self.exp, self.prec)
    }

    /// Magnitude comparison ignoring sign.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        if self.sign == 0 || other.sign == 0 {
            return (self.sign != 0).cmp(&(other.sign != 0));
        }
        match self.mag_exponent().cmp(&other.mag_exponent()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Same magnitude exponent: align mantissas on their MSB.
        let pa = self.prec as u64;
        let pb = other.prec as u64;
        if pa == pb {
            self.mant.cmp(&other.mant)
        } else if pa < pb {
            (&self.mant << (pb - pa)).cmp(&other.mant)
        } else {
            self.mant.cmp(&(&other.mant << (pa - pb)))
        }
    }

    /// True when |self - other| <= 2^-bits * max(|self|, |other|).
    /// Both zero counts as agreement.
    pub fn agrees_to_bits(&self, other: &Self, bits: u32) -> bool {
        if self.is_zero() && other.is_zero() {
            return true;
        }
        let diff = (self - other).abs();
        let scale = if self.cmp_abs(other) == Ordering::Greater { self } else { other };
        diff.cmp_abs(&scale.abs().mul_pow2(-(bits as i64))) != Ordering::Greater
    }

    /// Nearest f64 (round to nearest; saturates far outside the f64 range).
    /// Diagnostic use only.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 54 {
            let drop = bits - 54;
            let kept: BigUint = &self.mant >> drop;
            (kept, self.exp + drop as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mut m64 = {
            let digits = m.to_u64_digits();
            debug_assert!(digits.len() <= 1 || m.bits() <= 64);
            *digits.first().unwrap_or(&0)
        };
        let mut e = e;
        // Round the 54th bit.
        if m.bits() == 54 {
            m64 = (m64 >> 1) + (m64 & 1);
            e += 1;
        }
        let mut v = m64 as f64;
        while e > 300 {
            v *= 2f64.powi(300);
            e -= 300;
        }
        while e < -300 {
            v *= 2f64.powi(-300);
            e += 300;
        }
        v *= 2f64.powi(e as i32);
        self.sign as f64 * v
    }

    /// Decimal rendering with `digits` significant digits. Plain notation
    /// for moderate exponents, otherwise scientific. Deterministic.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        self.render_decimal(digits, false)
    }

    /// Always-scientific rendering ("5.00e-13").
    pub fn to_sci_string(&self, digits: usize) -> String {
        self.render_decimal(digits, true)
    }

    fn render_decimal(&self, digits: usize, force_sci: bool) -> String {
        let d = digits.max(1);
        if self.sign == 0 {
            return "0".to_string();
        }
        // Estimate the decimal magnitude from the binary one, then correct
        // by inspecting the produced digit count.
        let e2 = self.mag_exponent() - 1; // 2^e2 <= |x| < 2^(e2+1)
        let mut t = ((e2 as f64) * std::f64::consts::LOG10_2).floor() as i64 - d as i64 + 1;
        let ten = BigUint::from(10u32);
        let (scaled, e10) = loop {
            // D = round(|x| * 10^-t)
            let mut num = self.mant.clone();
            let mut den = BigUint::one();
            if self.exp >= 0 {
                num <<= self.exp as u64;
            } else {
                den <<= (-self.exp) as u64;
            }
            if t >= 0 {
                den *= ten.pow(t as u32);
            } else {
                num *= ten.pow((-t) as u32);
            }
            let rounded = (num * 2u32 + &den) / (den * 2u32);
            let s = rounded.to_string();
            if s.len() == d {
                break (s, t + d as i64 - 1);
            }
            t += s.len() as i64 - d as i64;
        };
        let sign = if self.sign < 0 { "-" } else { "" };
        let digits_str = scaled;
        if !force_sci && (-4..=(d as i64 + 2)).contains(&e10) {
            if e10 < 0 {
                let zeros = "0".repeat((-e10 - 1) as usize);
                format!("{sign}0.{zeros}{digits_str}")
            } else {
                let point = (e10 + 1) as usize;
                if point >= digits_str.len() {
                    let pad = "0".repeat(point - digits_str.len());
                    format!("{sign}{digits_str}{pad}")
                } else {
                    format!("{sign}{}.{}", &digits_str[..point], &digits_str[point..])
                }
            }
        } else if digits_str.len() == 1 {
            format!("{sign}{digits_str}e{e10}")
        } else {
            format!("{sign}{}.{}e{e10}", &digits_str[..1], &digits_str[1..])
        }
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Digit count tracks the mantissa width.
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize;
        write!(f, "{}", self.to_decimal_string(digits.clamp(6, 200)))
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigFloat {}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.cmp_abs(other),
            _ => other.cmp_abs(self),
        }
    }
}

macro_rules! bigfloat_binop {
    ($trait:ident, $method:ident, $impl_fn:expr) => {
        impl $trait<&BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                let f: fn(&BigFloat, &BigFloat) -> BigFloat = $impl_fn;
                f(self, rhs)
            }
        }
        impl $trait<BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                $trait::$method(self, &rhs)
            }
        }
    };
}

bigfloat_binop!(Add, add, |a, b| a.add_signed(b, false));
bigfloat_binop!(Sub, sub, |a, b| a.add_signed(b, true));
bigfloat_binop!(Mul, mul, |a: &BigFloat, b: &BigFloat| {
    let prec = a.prec.max(b.prec);
    if a.sign == 0 || b.sign == 0 {
        return BigFloat::zero(prec);
    }
    BigFloat::make(a.sign * b.sign, &a.mant * &b.mant, a.exp + b.exp, false, prec)
});
bigfloat_binop!(Div, div, |a: &BigFloat, b: &BigFloat| {
    assert!(b.sign != 0, "division by zero");
    let prec = a.prec.max(b.prec);
    if a.sign == 0 {
        return BigFloat::zero(prec);
    }
    BigFloat::quotient(a.sign * b.sign, &a.mant, a.exp, &b.mant, b.exp, prec)
});

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        let mut r = self.clone();
        r.sign = -r.sign;
        r
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        -&self
    }
}

impl FromStr for BigFloat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, crate::Error> {
        BigFloat::from_decimal_str(s, 128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn bf(v: f64) -> BigFloat {
        BigFloat::from_f64(v, 53)
    }

    #[test]
    fn one_ninth_multiplies_back() {
        // Independent check of rational -> float conversion. The multiply
        // and subtract run at 256 bits so they are exact for 128-bit x:
        // a correctly rounded 1/9 satisfies 0 < |9x - 1| <= 9 * 2^-132.
        let x = BigFloat::from_rational(&Rational::ratio(1, 9), 128).with_precision(256);
        let nine = BigFloat::from_u64(9, 256);
        let err = (&(&x * &nine) - &BigFloat::one(256)).abs();
        assert!(err < BigFloat::one(256).mul_pow2(-128));
        assert!(!err.is_zero(), "1/9 is not exactly representable");
    }

    #[test]
    fn dyadic_rationals_convert_exactly() {
        let x = BigFloat::from_rational(&Rational::ratio(3, 8), 53);
        assert_eq!(x, bf(0.375));
        let y = BigFloat::from_rational(&Rational::ratio(-5, 4), 24);
        assert_eq!(y, BigFloat::from_f64(-1.25, 53));
    }

    #[test]
    fn integer_arithmetic_is_exact() {
        let a = BigFloat::from_u64(123456789, 64);
        let b = BigFloat::from_u64(987654321, 64);
        assert_eq!(&a + &b, BigFloat::from_u64(1111111110, 64));
        assert_eq!(&b - &a, BigFloat::from_u64(864197532, 64));
        assert_eq!(
            &a * &b,
            BigFloat::from_bigint(&BigInt::from(123456789u64 * 987654321u64), 64)
        );
    }

    #[test]
    fn wide_gap_addition_rounds_correctly() {
        let one = BigFloat::one(53);
        let tiny = BigFloat::one(53).mul_pow2(-200);
        assert_eq!(&one + &tiny, one);
        assert_eq!(&one - &tiny, one, "nearest to 1 - 2^-200 is 1");
        let sum = &(&one + &tiny) - &one;
        assert!(sum.is_zero());
        let big = BigFloat::one(53).mul_pow2(200);
        assert_eq!(&big + &one, big);
    }

    #[test]
    fn subtraction_cancellation_is_exact() {
        // Nearby operands subtract exactly in this representation; the
        // cancellation cost shows up in earlier rounded partial results.
        let a = BigFloat::from_u64((1 << 30) + 1, 53);
        let b = BigFloat::from_u64(1 << 30, 53);
        assert_eq!(&a - &b, BigFloat::one(53));
    }

    #[test]
    fn ordering_across_precisions() {
        let vals = [
            BigFloat::from_i64(-3, 24),
            BigFloat::from_f64(-0.5, 53),
            BigFloat::zero(100),
            BigFloat::from_rational(&Rational::ratio(1, 2), 192),
            BigFloat::one(10),
            BigFloat::from_u64(7, 200),
        ];
        for w in vals.windows(2) {
            assert!(w[0] < w[1], "{} < {}", w[0], w[1]);
        }
        assert_eq!(BigFloat::one(53), BigFloat::one(250));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(BigFloat::zero(64).to_decimal_string(10), "0");
        assert_eq!(bf(0.375).to_decimal_string(3), "0.375");
        assert_eq!(bf(-12.0).to_decimal_string(2), "-12");
        assert_eq!(bf(1536.0).to_decimal_string(2), "1500");
        assert_eq!(bf(1536.0).to_sci_string(2), "1.5e3");
        assert_eq!(bf(2.0e9).to_decimal_string(3), "2.00e9");
        let x = BigFloat::from_decimal_str("2.5e0", 64);
        assert!(x.is_err(), "exponent notation is not accepted on input");
        let pi_ish = BigFloat::from_decimal_str("3.14159265358979", 64).unwrap();
        assert_eq!(pi_ish.to_decimal_string(15), "3.14159265358979");
        assert_eq!(bf(5e-13).to_sci_string(3), "5.00e-13");
        assert_eq!(bf(0.0001).to_decimal_string(4), "0.0001000");
    }

    #[test]
    fn ten_thousand_term_sum_matches_exact_rational() {
        // Positive terms, so the float condition number is 1: the p = 256
        // accumulation must agree with the exact rational sum far beyond
        // 240 bits.
        // Denominators stay below 1000 so the exact sum's common
        // denominator is bounded by lcm(1..1000) and the test stays fast.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut exact = Rational::zero();
        let mut float = BigFloat::zero(256);
        for _ in 0..10_000 {
            let num = rng.gen_range(1i64..1_000_000);
            let den = rng.gen_range(1i64..1_000);
            let r = Rational::ratio(num, den);
            float = &float + &BigFloat::from_rational(&r, 256);
            exact += &r;
        }
        let reference = BigFloat::from_rational(&exact, 320);
        assert!(float.agrees_to_bits(&reference, 240));
    }

    #[test]
    fn to_f64_round_trip() {
        for v in [0.0, 1.0, -2.5, 0.1, 1e300, -1e-300, 6.02214076e23] {
            assert_eq!(BigFloat::from_f64(v, 53).to_f64(), v);
        }
        let wide = BigFloat::from_rational(&Rational::ratio(1, 3), 200);
        assert_eq!(wide.to_f64(), 1.0 / 3.0);
    }

    fn arb_f64() -> impl Strategy<Value = f64> {
        // Exponent range chosen so products and quotients stay normal.
        (any::<i64>(), -80i32..80).prop_map(|(m, e)| {
            let m = (m >> 11) | 1; // odd 53-bit significand
            m as f64 * 2f64.powi(e)
        })
    }

    proptest! {
        // f64 hardware arithmetic is the rounding oracle at p = 53.
        #[test]
        fn matches_ieee_double(a in arb_f64(), b in arb_f64()) {
            let (fa, fb) = (bf(a), bf(b));
            prop_assert_eq!((&fa + &fb).to_f64(), a + b);
            prop_assert_eq!((&fa - &fb).to_f64(), a - b);
            prop_assert_eq!((&fa * &fb).to_f64(), a * b);
            prop_assert_eq!((&fa / &fb).to_f64(), a / b);
        }

        #[test]
        fn widening_is_exact(a in arb_f64()) {
            let x = bf(a);
            prop_assert_eq!(x.with_precision(200), x);
        }

        #[test]
        fn rational_conversion_brackets_value(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = Rational::ratio(n, d);
            let x = BigFloat::from_rational(&r, 64);
            // |x - r| <= 2^-64 |r|  (one rounding)
            let back = &x - &BigFloat::from_rational(&r, 192);
            let bound = BigFloat::from_rational(&r, 192).abs().mul_pow2(-64);
            prop_assert!(back.abs() <= bound);
        }
    }
}
