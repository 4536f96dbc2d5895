//! Logarithms, dilogarithm/trilogarithm and high-precision constants.
//!
//! Everything here computes internally with 32 guard bits and rounds to the
//! requested precision, so results carry a relative error of at most a few
//! units in 2^-prec (documented per function). Constants are memoized per
//! (constant, precision) pair.
//!
//! Functions: [`ln`], [`li2`], [`li3`]; constants [`pi`], [`ln2`],
//! [`zeta2`], [`zeta3`], [`li2_half`], [`li3_half`]; and the
//! generating-function consistency suite [`gf_check`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, Mutex};

use num::BigUint;

use crate::numeric::{BigFloat, Rational};
use crate::sequences::{harmonic, harmonic2};
use crate::{Error, Result};

const GUARD_BITS: u32 = 32;

fn wp(prec: u32) -> u32 {
    prec + GUARD_BITS
}

// ---------------------------------------------------------------------------
// logarithm

/// Natural logarithm, relative error <= 2^(4-prec). Requires x > 0.
///
/// Argument reduction x = m * 2^k with m in (2/3, 4/3], then
/// ln m = 2 atanh((m-1)/(m+1)) with |z| < 1/5, about 4.6 bits per term.
pub fn ln(x: &BigFloat, prec: u32) -> Result<BigFloat> {
    if x.signum() <= 0 {
        return Err(Error::Domain("ln requires a positive argument".into()));
    }
    let w = wp(prec);
    let e = x.mag_exponent(); // 2^(e-1) <= x < 2^e
    let mut k = e;
    let mut m = x.mul_pow2(-e).with_precision(w); // m in [1/2, 1)
    if m <= BigFloat::from_rational(&Rational::ratio(2, 3), w) {
        m = m.mul_pow2(1);
        k -= 1;
    }
    let one = BigFloat::one(w);
    let z = (&m - &one) / (&m + &one);
    let mut result = atanh_small(&z, w).mul_pow2(1);
    if k != 0 {
        result = &result + &(&BigFloat::from_i64(k, w) * &ln2(w + 8).with_precision(w));
    }
    Ok(result.with_precision(prec))
}

// atanh by series; caller guarantees |z| < 1/4 or so.
fn atanh_small(z: &BigFloat, w: u32) -> BigFloat {
    if z.is_zero() {
        return BigFloat::zero(w);
    }
    let zz = z * z;
    let mut term = z.clone();
    let mut sum = z.clone();
    let threshold = z.abs().mul_pow2(-(w as i64) - 4);
    let mut j = 3u64;
    loop {
        term = &term * &zz;
        let contrib = &term / &BigFloat::from_u64(j, w);
        sum = &sum + &contrib;
        if contrib.abs() < threshold {
            return sum;
        }
        j += 2;
    }
}

// ---------------------------------------------------------------------------
// constants

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKind {
    Pi,
    Ln2,
    Zeta2,
    Zeta3,
    Li2Half,
    Li3Half,
}

static CONSTANTS: LazyLock<Mutex<HashMap<(ConstKind, u32), BigFloat>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn cached(kind: ConstKind, prec: u32, compute: impl FnOnce(u32) -> BigFloat) -> BigFloat {
    if let Some(v) = CONSTANTS.lock().unwrap().get(&(kind, prec)) {
        return v.clone();
    }
    let v = compute(prec);
    CONSTANTS.lock().unwrap().insert((kind, prec), v.clone());
    v
}

/// pi via 16 atan(1/5) - 4 atan(1/239).
pub fn pi(prec: u32) -> BigFloat {
    cached(ConstKind::Pi, prec, |p| {
        let w = wp(p) + 8;
        let a = atan_inv_integer(5, w).mul_pow2(4);
        let b = atan_inv_integer(239, w).mul_pow2(2);
        (&a - &b).with_precision(p)
    })
}

// atan(1/m) for integer m >= 2 by the alternating power series.
fn atan_inv_integer(m: u64, w: u32) -> BigFloat {
    let msq = BigFloat::from_u64(m * m, w);
    let mut term = BigFloat::one(w) / BigFloat::from_u64(m, w);
    let mut sum = term.clone();
    let threshold = sum.abs().mul_pow2(-(w as i64) - 4);
    let mut j = 3u64;
    let mut negative = true;
    loop {
        term = &term / &msq;
        let contrib = &term / &BigFloat::from_u64(j, w);
        sum = if negative { &sum - &contrib } else { &sum + &contrib };
        if contrib < threshold {
            return sum;
        }
        j += 2;
        negative = !negative;
    }
}

/// log 2 = 2 atanh(1/3).
pub fn ln2(prec: u32) -> BigFloat {
    cached(ConstKind::Ln2, prec, |p| {
        let w = wp(p);
        let third = BigFloat::from_rational(&Rational::ratio(1, 3), w);
        atanh_small(&third, w).mul_pow2(1).with_precision(p)
    })
}

/// zeta(2) = pi^2 / 6.
pub fn zeta2(prec: u32) -> BigFloat {
    cached(ConstKind::Zeta2, prec, |p| {
        let w = wp(p);
        let pi_w = pi(w);
        (&(&pi_w * &pi_w) / &BigFloat::from_u64(6, w)).with_precision(p)
    })
}

/// zeta(3) by the accelerated central-binomial series
/// (5/2) sum_{n>=1} (-1)^(n-1) / (n^3 C(2n,n)), about 2 bits per term.
pub fn zeta3(prec: u32) -> BigFloat {
    cached(ConstKind::Zeta3, prec, |p| {
        let w = wp(p);
        let mut central = BigUint::from(2u32); // C(2n, n) at n = 1
        let mut n = 1u64;
        let mut sum = BigFloat::zero(w);
        let threshold = BigFloat::one(w).mul_pow2(-(w as i64) - 4);
        loop {
            let den = BigFloat::from_bigint(&(central.clone() * (n * n * n)).into(), w);
            let term = BigFloat::one(w) / den;
            sum = if n % 2 == 1 { &sum + &term } else { &sum - &term };
            if term < threshold {
                break;
            }
            // C(2(n+1), n+1) = C(2n, n) * 2(2n+1) / (n+1)
            central = central * (2 * (2 * n + 1)) / BigUint::from(n + 1);
            n += 1;
        }
        let five_halves = BigFloat::from_rational(&Rational::ratio(5, 2), w);
        (&sum * &five_halves).with_precision(p)
    })
}

/// Li2(1/2) by direct series (exactly the |x| <= 1/2 branch of [`li2`]).
pub fn li2_half(prec: u32) -> BigFloat {
    cached(ConstKind::Li2Half, prec, |p| {
        let w = wp(p);
        li2_series(&BigFloat::from_rational(&Rational::ratio(1, 2), w), w).with_precision(p)
    })
}

/// Li3(1/2) by direct series.
pub fn li3_half(prec: u32) -> BigFloat {
    cached(ConstKind::Li3Half, prec, |p| {
        let w = wp(p);
        li3_series(&BigFloat::from_rational(&Rational::ratio(1, 2), w), w).with_precision(p)
    })
}

// ---------------------------------------------------------------------------
// polylogarithms

/// Dilogarithm Li2(x) = sum x^n / n^2 for -1 < x <= 1, relative error
/// <= 2^(8-prec).
///
/// |x| <= 1/2 sums the series directly. x > 1/2 uses the reflection
/// Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x); x < -1/2 uses the Landen
/// form Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2. Both keep the series
/// argument at or below 1/2.
pub fn li2(x: &BigFloat, prec: u32) -> Result<BigFloat> {
    let w = wp(prec);
    check_polylog_domain(x)?;
    Ok(li2_impl(&x.with_precision(w), w).with_precision(prec))
}

fn li2_impl(x: &BigFloat, w: u32) -> BigFloat {
    let one = BigFloat::one(w);
    if x == &one {
        return zeta2(w);
    }
    let half = BigFloat::from_rational(&Rational::ratio(1, 2), w);
    if x > &half {
        let one_minus = &one - x;
        let log_product = &ln(x, w).unwrap() * &ln(&one_minus, w).unwrap();
        return &(&zeta2(w) - &log_product) - &li2_series(&one_minus, w);
    }
    if x < &(-&half) {
        // x/(x-1) lands in (0, 1/2] for x in (-1, -1/2)
        let u = x / &(x - &one);
        let l = ln(&(&one - x), w).unwrap();
        return -&li2_series(&u, w) - (&l * &l).mul_pow2(-1);
    }
    li2_series(x, w)
}

fn li2_series(x: &BigFloat, w: u32) -> BigFloat {
    polylog_series(x, w, |n| (n * n).into())
}

/// Trilogarithm Li3(x) = sum x^n / n^3 for -1 < x <= 1.
///
/// Relative error <= 2^(8-prec) for |x| <= 1/2 and x = 1 (which returns the
/// zeta(3) constant). For 1/2 < |x| < 1 the series is summed directly; the
/// term count grows like prec / -log2|x|, so accuracy is kept but the cost
/// rises near the endpoints.
pub fn li3(x: &BigFloat, prec: u32) -> Result<BigFloat> {
    let w = wp(prec);
    check_polylog_domain(x)?;
    if x == &BigFloat::one(w) {
        return Ok(zeta3(prec));
    }
    Ok(li3_series(&x.with_precision(w), w).with_precision(prec))
}

fn li3_series(x: &BigFloat, w: u32) -> BigFloat {
    polylog_series(x, w, |n| (n * n * n).into())
}

fn check_polylog_domain(x: &BigFloat) -> Result<()> {
    let one = BigFloat::one(x.precision());
    if x > &one || x <= &(-&one) {
        return Err(Error::Domain(format!(
            "polylogarithm series domain is -1 < x <= 1, got {x}"
        )));
    }
    Ok(())
}

fn polylog_series(x: &BigFloat, w: u32, weight: impl Fn(u64) -> BigUint) -> BigFloat {
    if x.is_zero() {
        return BigFloat::zero(w);
    }
    let mut pow = x.clone();
    let mut sum = &pow / &BigFloat::from_bigint(&weight(1).into(), w);
    // |sum| >= |x|/2 on the whole domain, so a threshold anchored at |x|
    // gives a clean relative stop.
    let threshold = x.abs().mul_pow2(-(w as i64) - 6);
    let mut n = 2u64;
    loop {
        pow = &pow * x;
        let term = &pow / &BigFloat::from_bigint(&weight(n).into(), w);
        sum = &sum + &term;
        if term.abs() < threshold {
            return sum;
        }
        n += 1;
    }
}

// ---------------------------------------------------------------------------
// generating-function consistency checks

/// The six verified power-series identities. Series sides use exact
/// harmonic rationals term by term; closed sides use [`ln`], [`li2`],
/// [`li3`] and the constants, so the two sides share no sub-terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GfId {
    /// sum H2_n x^n = Li2(x) / (1-x)
    G1,
    /// sum H_n x^n/(n+1) = ln^2(1-x) / (2x)
    G2,
    /// sum (H_n^2 - H2_n) t^(n+1)/(n+1) = -ln^3(1-t) / 3
    G3,
    /// sum H_n t^(n+1)/(n+1)^2 = ln(t) ln^2(1-t)/2 + ln(1-t) Li2(1-t) - Li3(1-t) + zeta(3)
    G4,
    /// sum H_n t^n = -ln(1-t) / (1-t)
    G5,
    /// sum H_n t^(n+1)/(n+1) = ln^2(1-t) / 2  (the t-weighted form of G2)
    G6,
}

impl GfId {
    pub fn all() -> [GfId; 6] {
        [GfId::G1, GfId::G2, GfId::G3, GfId::G4, GfId::G5, GfId::G6]
    }
}

impl fmt::Display for GfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone)]
pub struct GfCheck {
    pub id: GfId,
    pub x: Rational,
    pub terms: usize,
    pub series: BigFloat,
    pub closed: BigFloat,
    /// Documented truncation-plus-rounding allowance; `pass` means
    /// |series - closed| <= bound.
    pub bound: BigFloat,
    pub pass: bool,
}

/// Evaluates both sides of one identity at rational x in (0, 1), summing
/// `terms` series terms at precision `prec`.
pub fn gf_check(id: GfId, x: &Rational, terms: usize, prec: u32) -> Result<GfCheck> {
    if x.is_zero() || x.is_negative() || x >= &Rational::one() {
        return Err(Error::Domain("gf_check needs rational x in (0, 1)".into()));
    }
    let w = wp(prec);
    let n = terms;

    // Series side: exact rational term, one rounding, float accumulate.
    let mut series = BigFloat::zero(w);
    let mut xpow = Rational::one(); // x^n
    for k in 1..=n {
        xpow *= x;
        let term = match id {
            GfId::G1 => harmonic2(k)? * &xpow,
            GfId::G2 => harmonic(k)? * &xpow / Rational::from_integer(k as i64 + 1),
            GfId::G3 => {
                let h = harmonic(k)?;
                (&(&h * &h) - &harmonic2(k)?) * &xpow * x / Rational::from_integer(k as i64 + 1)
            }
            GfId::G4 => {
                let d = Rational::from_integer(k as i64 + 1);
                harmonic(k)? * &xpow * x / (&d * &d)
            }
            GfId::G5 => harmonic(k)? * &xpow,
            GfId::G6 => harmonic(k)? * &xpow * x / Rational::from_integer(k as i64 + 1),
        };
        series = &series + &BigFloat::from_rational(&term, w);
    }

    // Closed side.
    let xf = BigFloat::from_rational(x, w);
    let one_minus_f = BigFloat::from_rational(&(Rational::one() - x), w);
    let closed = match id {
        GfId::G1 => &li2(&xf, w)? / &one_minus_f,
        GfId::G2 => {
            let l = ln(&one_minus_f, w)?;
            &(&l * &l) / &xf.mul_pow2(1)
        }
        GfId::G3 => {
            let l = ln(&one_minus_f, w)?;
            -&(&(&(&l * &l) * &l) / &BigFloat::from_u64(3, w))
        }
        GfId::G4 => {
            let lt = ln(&xf, w)?;
            let lm = ln(&one_minus_f, w)?;
            let a = (&lt * &(&lm * &lm)).mul_pow2(-1);
            let b = &lm * &li2(&one_minus_f, w)?;
            &(&(&a + &b) - &li3(&one_minus_f, w)?) + &zeta3(w)
        }
        GfId::G5 => -&(&ln(&one_minus_f, w)? / &one_minus_f),
        GfId::G6 => {
            let l = ln(&one_minus_f, w)?;
            (&l * &l).mul_pow2(-1)
        }
    };

    // Truncation bound from a crude rational majorant of the dropped tail,
    // plus a rounding allowance.
    let one_minus = Rational::one() - x;
    let xn1 = x.powi(n as i32 + 1).expect("positive base");
    let tail: Rational = match id {
        // H2_n <= 2
        GfId::G1 => Rational::from_integer(2) * &xn1 / &one_minus,
        // H_n/(n+1) <= 1
        GfId::G2 => &xn1 / &one_minus,
        // (H_n^2 - H2_n)/(n+1) <= n
        GfId::G3 => {
            Rational::from_integer(n as i64 + 2) * &xn1 / (&one_minus * &one_minus)
        }
        // H_n/(n+1)^2 <= 1
        GfId::G4 => &xn1 * x / &one_minus,
        // H_n <= n
        GfId::G5 => {
            Rational::from_integer(n as i64 + 1) * &xn1 / (&one_minus * &one_minus)
        }
        GfId::G6 => &xn1 * x / &one_minus,
    };
    let allowance =
        (&closed.abs() + &BigFloat::one(w)).mul_pow2(16 - prec as i64);
    let bound = &BigFloat::from_rational(&tail, w) + &allowance;

    let pass = (&series - &closed).abs() <= bound;
    Ok(GfCheck {
        id,
        x: x.clone(),
        terms: n,
        series: series.with_precision(prec),
        closed: closed.with_precision(prec),
        bound: bound.with_precision(prec),
        pass,
    })
}
