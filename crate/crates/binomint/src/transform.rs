//! The binomial transform b_n = sum C(n,k) a_k, its inverse, the weighted
//! sums W_n = sum C(n,k) a_k/(k+1) that drive the integration series, the
//! Euler transformation cross-check, and the exact identity suite.
//!
//! Everything in this module that claims equality means exact rational
//! equality; floats appear only in [`weighted_sum_float`] (the cancellation
//! study primitive) and [`euler_transform_check`] (a high-precision
//! two-sided evaluation).

use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::{binomial, binomial_integer, BigFloat, PascalRow, Rational};
use crate::sequences::{harmonic, harmonic2, make_source, CoefficientSource, CoefficientSpec};
use crate::{Error, Result};

/// One exact row of the transform.
///
/// Invariant: w * (n+1) = s, the partial-sum identity the whole series
/// rearrangement rests on. Debug builds assert it on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRow {
    pub n: usize,
    /// b_n = sum_{k<=n} C(n,k) a_k
    pub b: Rational,
    /// s_n = b_0 + ... + b_n
    pub s: Rational,
    /// w_n = sum_{k<=n} C(n,k) a_k/(k+1), computed from its own definition
    pub w: Rational,
}

/// Streaming exact rows with a rolling Pascal row; O(n) rational ops per row.
pub struct TransformRows<'a> {
    src: &'a CoefficientSource,
    pascal: PascalRow,
    a: Vec<Rational>,
    a_over: Vec<Rational>, // a_k / (k+1)
    s: Rational,
    n: usize,
    failed: bool,
}

pub fn transform_rows(src: &CoefficientSource) -> TransformRows<'_> {
    TransformRows {
        src,
        pascal: PascalRow::new(),
        a: Vec::new(),
        a_over: Vec::new(),
        s: Rational::zero(),
        n: 0,
        failed: false,
    }
}

impl Iterator for TransformRows<'_> {
    type Item = Result<TransformRow>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let n = self.n;
        let a_n = match self.src.exact(n) {
            Ok(v) => v,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        self.a_over.push(&a_n / Rational::from_integer(n as i64 + 1));
        self.a.push(a_n);
        if n > 0 {
            self.pascal.advance();
        }
        let mut b = Rational::zero();
        let mut w = Rational::zero();
        for (k, c) in self.pascal.entries().iter().enumerate() {
            let c = Rational::from(BigInt::from(c.clone()));
            b += &(&c * &self.a[k]);
            w += &(&c * &self.a_over[k]);
        }
        self.s += &b;
        debug_assert!(&w * &Rational::from_integer(n as i64 + 1) == self.s);
        self.n += 1;
        Some(Ok(TransformRow { n, b, s: self.s.clone(), w }))
    }
}

/// Rows 0..=n_max. Fails if exact coefficients run out (harmonic cap).
pub fn binomial_transform(src: &CoefficientSource, n_max: usize) -> Result<Vec<TransformRow>> {
    transform_rows(src).take(n_max + 1).collect()
}

/// a_n = sum_{k<=n} C(n,k) (-1)^(n-k) b_k; inverse of the forward transform.
pub fn inverse_binomial_transform(b: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(b.len());
    let mut pascal = PascalRow::new();
    for n in 0..b.len() {
        if n > 0 {
            pascal.advance();
        }
        let mut a = Rational::zero();
        for (k, c) in pascal.entries().iter().enumerate() {
            let term = Rational::from(BigInt::from(c.clone())) * &b[k];
            if (n - k) % 2 == 0 {
                a += &term;
            } else {
                a -= &term;
            }
        }
        out.push(a);
    }
    out
}

/// W_n by brute force from the definition.
pub fn weighted_sum_exact(src: &CoefficientSource, n: usize) -> Result<Rational> {
    let mut w = Rational::zero();
    for k in 0..=n {
        let c = Rational::from(BigInt::from(binomial_integer(n as u64, k as u64)));
        w += &(&(&c * &src.exact(k)?) / Rational::from_integer(k as i64 + 1));
    }
    Ok(w)
}

/// W_n summed entirely in `prec`-bit floats: every binomial coefficient and
/// coefficient is rounded before the sum. At prec = 53 this is exactly what
/// an f64 implementation would do, and for alternating sources the
/// C(n,k)-sized intermediate terms cancel catastrophically; that failure is
/// the point (see the precision-policy regression tests).
pub fn weighted_sum_float(src: &CoefficientSource, n: usize, prec: u32) -> Result<BigFloat> {
    let mut w = BigFloat::zero(prec);
    for k in 0..=n {
        let c = BigFloat::from_bigint(&BigInt::from(binomial_integer(n as u64, k as u64)), prec);
        let term = &(&c * &src.float(k, prec)?) / &BigFloat::from_u64(k as u64 + 1, prec);
        w = &w + &term;
    }
    Ok(w)
}

/// Streaming float weighted sums sharing one rolling Pascal row; same
/// rounding discipline as [`weighted_sum_float`], O(n) per row.
pub struct FloatWeightedRows<'a> {
    src: &'a CoefficientSource,
    pascal: PascalRow,
    a_over: Vec<BigFloat>, // a_k/(k+1) rounded at prec
    prec: u32,
    n: usize,
    failed: bool,
}

pub fn float_weighted_rows(src: &CoefficientSource, prec: u32) -> FloatWeightedRows<'_> {
    FloatWeightedRows { src, pascal: PascalRow::new(), a_over: Vec::new(), prec, n: 0, failed: false }
}

impl Iterator for FloatWeightedRows<'_> {
    type Item = Result<BigFloat>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let n = self.n;
        let a_n = match self.src.float(n, self.prec) {
            Ok(v) => v,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        self.a_over.push(&a_n / &BigFloat::from_u64(n as u64 + 1, self.prec));
        if n > 0 {
            self.pascal.advance();
        }
        let mut w = BigFloat::zero(self.prec);
        for (k, c) in self.pascal.entries().iter().enumerate() {
            let c = BigFloat::from_bigint(&BigInt::from(c.clone()), self.prec);
            w = &w + &(&c * &self.a_over[k]);
        }
        self.n += 1;
        Some(Ok(w))
    }
}

/// Evaluates both sides of the Euler transformation
/// (1/(1-t)) f(t/(1-t)) = sum b_n t^n at rational t in [0, 1).
///
/// The left side sums the Taylor series of f directly at x = t/(1-t) (the
/// caller must keep x inside the series' radius); the right side sums exact
/// b_n against exact powers of t, rounding once per term. Returns (lhs, rhs)
/// at `prec` bits; agreement is limited by the rhs truncation at n_terms and
/// ~2^(8-prec) rounding.
pub fn euler_transform_check(
    src: &CoefficientSource,
    t: &Rational,
    n_terms: usize,
    prec: u32,
) -> Result<(BigFloat, BigFloat)> {
    if t.is_negative() || t >= &Rational::one() {
        return Err(Error::Domain("euler check needs t in [0, 1)".into()));
    }
    let w = prec + 32;
    let one_minus = Rational::one() - t;
    let x = BigFloat::from_rational(&(t / &one_minus), w);

    let mut sum = BigFloat::zero(w);
    let mut pow = BigFloat::one(w);
    let mut prev_abs = BigFloat::zero(w);
    let mut small_run = 0;
    let mut growth_run = 0;
    let mut k = 0usize;
    loop {
        let term = &BigFloat::from_rational(&src.exact(k)?, w) * &pow;
        sum = &sum + &term;
        let abs = term.abs();
        let threshold = (&sum.abs() + &BigFloat::one(w)).mul_pow2(-(w as i64) - 8);
        if abs <= threshold {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        if !abs.is_zero() && abs > prev_abs {
            growth_run += 1;
            if growth_run >= 20 {
                return Err(Error::Domain(format!(
                    "Taylor series of {} diverges at x = t/(1-t) with t = {t}",
                    src.name()
                )));
            }
        } else {
            growth_run = 0;
        }
        prev_abs = abs;
        pow = &pow * &x;
        k += 1;
    }
    let lhs = &sum / &BigFloat::from_rational(&one_minus, w);

    let mut rhs = BigFloat::zero(w);
    let mut tpow = Rational::one();
    for row in transform_rows(src).take(n_terms + 1) {
        let row = row?;
        rhs = &rhs + &BigFloat::from_rational(&(&row.b * &tpow), w);
        tpow *= t;
    }
    Ok((lhs.with_precision(prec), rhs.with_precision(prec)))
}

/// Exact verification record; pass means lhs == rhs as rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub id: String,
    pub n: usize,
    pub lhs: Rational,
    pub rhs: Rational,
    pub pass: bool,
}

fn report(id: impl Into<String>, n: usize, lhs: Rational, rhs: Rational) -> IdentityReport {
    let pass = lhs == rhs;
    IdentityReport { id: id.into(), n, lhs, rhs, pass }
}

/// Runs the whole exact identity suite for 0 <= n <= n_max.
///
/// I1: sum C(n,k)(-1)^k H_{k+1}/(k+1)            = 1/(n+1)^2
/// I2: sum C(n,k)(-1)^k H_{k+1}/((k+1)(k+2))     = 1/(n+1)^2 + (H_n-1)/((n+1)(n+2))
/// I3: sum_{k>=1} C(n,k)(-1)^(k-1) H_k/k
///       - sum C(n,k)(-1)^(k-1) H_k/(k+1)        = H2_n - H_n/(n+1)
/// I4: sum C(n,k)(-1)^(k-1) H_k/(k+1)            = H_n/(n+1)
/// I5: sum C(n,k) C(k,q) (-1)^k/(k+1)            = (-1)^q/(n+1) for n >= q, else 0   (q = 1..6)
/// I6: sum C(n,k) a_k/(k+1) = (1/(n+1)) sum b_k  on seeded random rationals
/// I7: sum_{k<=n} H_k/(k+1)                      = (H_n^2 - H2_n)/2 + H_n/(n+1)
/// I8: streamed W_n equals each worked example's registered closed form
///
/// Failures come back as reports, never panics; needs n_max + 1 within the
/// shared harmonic table cap.
pub fn run_identity_suite(n_max: usize) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();

    let mut pascal = PascalRow::new();
    let mut running_i7 = Rational::zero(); // sum_{k<=n} H_k/(k+1)
    for n in 0..=n_max {
        if n > 0 {
            pascal.advance();
        }
        let c: Vec<Rational> = pascal
            .entries()
            .iter()
            .map(|v| Rational::from(BigInt::from(v.clone())))
            .collect();
        let n1 = Rational::from_integer(n as i64 + 1);
        let n2 = Rational::from_integer(n as i64 + 2);
        let h_n = harmonic(n)?;
        let h2_n = harmonic2(n)?;

        let mut lhs1 = Rational::zero();
        let mut lhs2 = Rational::zero();
        let mut lhs3_first = Rational::zero();
        let mut lhs4 = Rational::zero();
        let mut lhs5 = vec![Rational::zero(); 6];
        for k in 0..=n {
            let k1 = Rational::from_integer(k as i64 + 1);
            let k2 = Rational::from_integer(k as i64 + 2);
            let h_k1 = harmonic(k + 1)?;
            let h_k = harmonic(k)?;
            let even = k % 2 == 0;

            // terms carrying (-1)^k
            let t1 = &(&c[k] * &h_k1) / &k1;
            let t2 = &t1 / &k2;
            if even {
                lhs1 += &t1;
                lhs2 += &t2;
            } else {
                lhs1 -= &t1;
                lhs2 -= &t2;
            }

            // terms carrying (-1)^(k-1)
            let t4 = &(&c[k] * &h_k) / &k1;
            if even {
                lhs4 -= &t4;
            } else {
                lhs4 += &t4;
            }
            if k >= 1 {
                let t3 = &(&c[k] * &h_k) / &Rational::from_integer(k as i64);
                if even {
                    lhs3_first -= &t3;
                } else {
                    lhs3_first += &t3;
                }
            }

            for (qi, lhs) in lhs5.iter_mut().enumerate() {
                let q = qi as u64 + 1;
                let t5 = &(&c[k] * &binomial(k as u64, q)) / &k1;
                if even {
                    *lhs += &t5;
                } else {
                    *lhs -= &t5;
                }
            }
        }

        out.push(report("I1", n, lhs1, (&n1 * &n1).recip()));
        out.push(report(
            "I2",
            n,
            lhs2,
            &(&n1 * &n1).recip() + &(&(&h_n - &Rational::one()) / &(&n1 * &n2)),
        ));
        out.push(report("I3", n, &lhs3_first - &lhs4, &h2_n - &(&h_n / &n1)));
        out.push(report("I4", n, lhs4, &h_n / &n1));
        for (qi, lhs) in lhs5.into_iter().enumerate() {
            let q = qi + 1;
            let rhs = if n >= q {
                let v = n1.recip();
                if q % 2 == 0 { v } else { -v }
            } else {
                Rational::zero()
            };
            out.push(report(format!("I5(q={q})"), n, lhs, rhs));
        }

        running_i7 += &(&h_n / &n1);
        let rhs7 = &(&(&h_n * &h_n) - &h2_n) / Rational::from_integer(2) + &(&h_n / &n1);
        out.push(report("I7", n, running_i7.clone(), rhs7));
    }

    // I6: the partial-sum identity on seeded random rationals.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1DE6_7175);
    let coeffs: Vec<Rational> = (0..=n_max)
        .map(|_| Rational::ratio(rng.gen_range(-999..=999), rng.gen_range(1..=40)))
        .collect();
    let random = make_source(&CoefficientSpec::Explicit {
        name: "random-i6".into(),
        coeffs,
    })?;
    for row in transform_rows(&random).take(n_max + 1) {
        let row = row?;
        let rhs = &row.s / Rational::from_integer(row.n as i64 + 1);
        out.push(report("I6", row.n, row.w, rhs));
    }

    // I8: worked examples vs their registered closed forms.
    for entry in crate::corpus::standard_entries() {
        let closed = entry
            .source
            .closed_weighted_sum()
            .expect("every corpus entry registers a closed form")
            .clone();
        let id = format!("I8({})", entry.label());
        for row in transform_rows(&entry.source).take(n_max + 1) {
            let row = row?;
            out.push(report(id.clone(), row.n, row.w, (closed.exact)(row.n)?));
        }
    }

    Ok(out)
}
