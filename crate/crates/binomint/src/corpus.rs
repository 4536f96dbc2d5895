//! The worked examples, wired end to end: coefficient sources carrying
//! closed-form weighted sums and oracle integrands, their integration
//! domains, scale factors, and symbolic reference values.

use std::fmt;
use std::sync::Arc;

use num::BigInt;

use crate::engine::Lambda;
use crate::numeric::{BigFloat, Rational};
use crate::sequences::{
    harmonic, harmonic2, make_source, ClosedWeightedSum, CoefficientSource, CoefficientSpec,
    ExactFn, GeneratorParams, HarmonicFloat, IntegrandFn, StreamFn,
};
use crate::specfun;
use crate::{Error, Result};

/// Symbolic recipe for an entry's exact value; rendered numerically on
/// demand so no decimal literal ever becomes a runtime source of truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reference {
    /// pi^2/6
    PiSquaredOverSix,
    /// pi^2/12 - log^2(2)
    PiSquaredOverTwelveMinusLogTwoSquared,
    /// zeta(3)/8
    ZetaThreeOverEighth,
    /// (-1)^q (log 2 - sum_{n=1..q} 2^(-n)/n)
    SignedLogTwoMinusDyadicTail { q: u64 },
}

impl Reference {
    pub fn eval(&self, prec: u32) -> BigFloat {
        let w = prec + 32;
        let v = match self {
            Reference::PiSquaredOverSix => specfun::zeta2(w),
            Reference::PiSquaredOverTwelveMinusLogTwoSquared => {
                let l = specfun::ln2(w);
                &specfun::zeta2(w).mul_pow2(-1) - &(&l * &l)
            }
            Reference::ZetaThreeOverEighth => specfun::zeta3(w).mul_pow2(-3),
            Reference::SignedLogTwoMinusDyadicTail { q } => {
                let mut tail = Rational::zero();
                for n in 1..=*q {
                    let den = BigInt::from(2u32).pow(n as u32) * BigInt::from(n);
                    tail += &Rational::new(BigInt::from(1), den).expect("nonzero");
                }
                let base = &specfun::ln2(w) - &BigFloat::from_rational(&tail, w);
                if q % 2 == 0 { base } else { -&base }
            }
        };
        v.with_precision(prec)
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::PiSquaredOverSix => write!(f, "pi^2/6"),
            Reference::PiSquaredOverTwelveMinusLogTwoSquared => write!(f, "pi^2/12 - log^2(2)"),
            Reference::ZetaThreeOverEighth => write!(f, "zeta(3)/8"),
            Reference::SignedLogTwoMinusDyadicTail { q } => {
                write!(f, "(-1)^{q} (log 2 - sum_{{n=1..{q}}} 2^(-n)/n)")
            }
        }
    }
}

/// A registered worked example.
#[derive(Clone)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub q: Option<u64>,
    pub source: CoefficientSource,
    pub lambda: Lambda,
    pub reference: Reference,
    /// The oracle integrand equals scale times the series' own integrand;
    /// the one doubling in the second example lives here and nowhere else.
    pub scale: Rational,
}

impl CorpusEntry {
    pub fn label(&self) -> String {
        match self.q {
            Some(q) => format!("{}(q={q})", self.id),
            None => self.id.to_string(),
        }
    }
}

fn generator(name: &str, q: Option<u64>) -> Result<CoefficientSource> {
    make_source(&CoefficientSpec::Generator {
        name: name.into(),
        params: GeneratorParams { q, ratio: None },
    })
}

// Closed weighted sums. The exact closures are ground truth for the
// identity suite; the float streams use incremental harmonic accumulators
// so million-term runs never touch the exact table.

fn ex1_closed() -> ClosedWeightedSum {
    let exact: ExactFn = Arc::new(|n| {
        let v = Rational::from_integer(n as i64 + 1);
        Ok((&v * &v).recip())
    });
    let stream: StreamFn = Arc::new(|prec| {
        let mut n: u64 = 0;
        Box::new(std::iter::from_fn(move || {
            let np1 = BigFloat::from_u64(n + 1, prec);
            n += 1;
            Some(&BigFloat::one(prec) / &(&np1 * &np1))
        }))
    });
    ClosedWeightedSum { exact, stream }
}

fn ex2_closed() -> ClosedWeightedSum {
    let exact: ExactFn = Arc::new(|n| {
        let np1 = Rational::from_integer(n as i64 + 1);
        let np2 = Rational::from_integer(n as i64 + 2);
        let h = harmonic(n)?;
        Ok(&(&np1 * &np1).recip() + &(&(&h - &Rational::one()) / &(&np1 * &np2)))
    });
    let stream: StreamFn = Arc::new(|prec| {
        let mut hf = HarmonicFloat::new(prec);
        let mut n: u64 = 0;
        Box::new(std::iter::from_fn(move || {
            let one = BigFloat::one(prec);
            let np1 = BigFloat::from_u64(n + 1, prec);
            let np2 = BigFloat::from_u64(n + 2, prec);
            let w = &(&one / &(&np1 * &np1)) + &(&(hf.h() - &one) / &(&np1 * &np2));
            hf.advance();
            n += 1;
            Some(w)
        }))
    });
    ClosedWeightedSum { exact, stream }
}

fn ex3_closed() -> ClosedWeightedSum {
    let exact: ExactFn = Arc::new(|n| {
        let np1 = Rational::from_integer(n as i64 + 1);
        Ok(&harmonic2(n)? - &(&harmonic(n)? / &np1))
    });
    let stream: StreamFn = Arc::new(|prec| {
        let mut hf = HarmonicFloat::new(prec);
        let mut n: u64 = 0;
        Box::new(std::iter::from_fn(move || {
            let np1 = BigFloat::from_u64(n + 1, prec);
            let w = hf.h2() - &(hf.h() / &np1);
            hf.advance();
            n += 1;
            Some(w)
        }))
    });
    ClosedWeightedSum { exact, stream }
}

fn ex4_closed(q: u64) -> ClosedWeightedSum {
    let exact: ExactFn = Arc::new(move |n| {
        if (n as u64) < q {
            return Ok(Rational::zero());
        }
        let v = Rational::from_integer(n as i64 + 1).recip();
        Ok(if q % 2 == 0 { v } else { -v })
    });
    let stream: StreamFn = Arc::new(move |prec| {
        let mut n: u64 = 0;
        Box::new(std::iter::from_fn(move || {
            let w = if n < q {
                BigFloat::zero(prec)
            } else {
                let v = &BigFloat::one(prec) / &BigFloat::from_u64(n + 1, prec);
                if q % 2 == 0 {
                    v
                } else {
                    -&v
                }
            };
            n += 1;
            Some(w)
        }))
    });
    ClosedWeightedSum { exact, stream }
}

fn ex5_closed() -> ClosedWeightedSum {
    let exact: ExactFn = Arc::new(|n| {
        let np1 = Rational::from_integer(n as i64 + 1);
        let h = harmonic(n)?;
        let inner = &(&(&(&h * &h) - &harmonic2(n)?) / Rational::from_integer(2)) + &(&h / &np1);
        Ok(&inner / &np1)
    });
    let stream: StreamFn = Arc::new(|prec| {
        let mut hf = HarmonicFloat::new(prec);
        let mut n: u64 = 0;
        Box::new(std::iter::from_fn(move || {
            let np1 = BigFloat::from_u64(n + 1, prec);
            let h = hf.h().clone();
            let inner = &(&(&h * &h) - hf.h2()).mul_pow2(-1) + &(&h / &np1);
            hf.advance();
            n += 1;
            Some(&inner / &np1)
        }))
    });
    ClosedWeightedSum { exact, stream }
}

// Oracle integrands. Each closure carries the analytic limit at t = 0 so
// the removable singularity there is never reached by division; elsewhere
// the logarithm and dilogarithm arguments stay strictly inside their
// domains.

fn ex1_integrand() -> IntegrandFn {
    Arc::new(|t, prec| {
        if t.is_zero() {
            return BigFloat::one(prec); // lim log(1+t)/(t(1+t)) = 1
        }
        let one = BigFloat::one(prec);
        let one_plus = &one + t;
        let l = specfun::ln(&one_plus, prec).expect("1 + t > 0");
        &l / &(t * &one_plus)
    })
}

fn ex2_integrand() -> IntegrandFn {
    Arc::new(|t, prec| {
        if t.is_zero() {
            return BigFloat::one(prec); // lim (log(1+t)/t)^2 = 1
        }
        let one_plus = &BigFloat::one(prec) + t;
        let l = specfun::ln(&one_plus, prec).expect("1 + t > 0");
        let r = &l / t;
        &r * &r
    })
}

fn ex3_integrand() -> IntegrandFn {
    Arc::new(|t, prec| {
        let arg = t / &(&BigFloat::one(prec) + t); // in [0, 1/2] for t in [0, 1]
        specfun::li2(&arg, prec).expect("argument stays inside [0, 1/2]")
    })
}

fn ex4_integrand(q: u64) -> IntegrandFn {
    Arc::new(move |x, prec| {
        let one_plus = &BigFloat::one(prec) + x;
        let mut num = BigFloat::one(prec);
        for _ in 0..q {
            num = &num * x;
        }
        let mut den = one_plus.clone();
        for _ in 0..q {
            den = &den * &one_plus;
        }
        let v = &num / &den;
        if q % 2 == 0 {
            v
        } else {
            -&v
        }
    })
}

fn ex5_integrand() -> IntegrandFn {
    Arc::new(|x, prec| {
        if x.is_zero() {
            return BigFloat::zero(prec); // lim log^2(1+x)/(2x) = 0
        }
        let one_plus = &BigFloat::one(prec) + x;
        let l = specfun::ln(&one_plus, prec).expect("1 + x > 0");
        &(&l * &l) / &x.mul_pow2(1)
    })
}

/// Builds one entry. `q` is required for ex4 (q >= 1) and rejected elsewhere.
pub fn get(id: &str, q: Option<u64>) -> Result<CorpusEntry> {
    if id != "ex4" && q.is_some() {
        return Err(Error::BadInput(format!("q applies only to ex4, not {id}")));
    }
    match id {
        "ex1" => Ok(CorpusEntry {
            id: "ex1",
            q: None,
            source: generator("ex1", None)?
                .with_closed_weighted_sum(ex1_closed())
                .with_integrand(ex1_integrand()),
            lambda: Lambda::Infinite,
            reference: Reference::PiSquaredOverSix,
            scale: Rational::one(),
        }),
        "ex2" => Ok(CorpusEntry {
            id: "ex2",
            q: None,
            source: generator("ex2", None)?
                .with_closed_weighted_sum(ex2_closed())
                .with_integrand(ex2_integrand()),
            lambda: Lambda::Infinite,
            reference: Reference::PiSquaredOverSix,
            // The series evaluates the halved integrand log^2(1+t)/(2t^2);
            // the registered oracle integrand (log(1+t)/t)^2 is twice that.
            scale: Rational::from_integer(2),
        }),
        "ex3" => Ok(CorpusEntry {
            id: "ex3",
            q: None,
            source: generator("ex3", None)?
                .with_closed_weighted_sum(ex3_closed())
                .with_integrand(ex3_integrand()),
            lambda: Lambda::finite(Rational::one())?,
            reference: Reference::PiSquaredOverTwelveMinusLogTwoSquared,
            scale: Rational::one(),
        }),
        "ex4" => {
            let q = q.ok_or_else(|| Error::BadInput("ex4 requires q (>= 1)".into()))?;
            Ok(CorpusEntry {
                id: "ex4",
                q: Some(q),
                source: generator("ex4", Some(q))?
                    .with_closed_weighted_sum(ex4_closed(q))
                    .with_integrand(ex4_integrand(q)),
                lambda: Lambda::finite(Rational::one())?,
                reference: Reference::SignedLogTwoMinusDyadicTail { q },
                scale: Rational::one(),
            })
        }
        "ex5" => Ok(CorpusEntry {
            id: "ex5",
            q: None,
            source: generator("ex5", None)?
                .with_closed_weighted_sum(ex5_closed())
                .with_integrand(ex5_integrand()),
            lambda: Lambda::finite(Rational::one())?,
            reference: Reference::ZetaThreeOverEighth,
            scale: Rational::one(),
        }),
        other => Err(Error::UnknownCorpusId(other.to_string())),
    }
}

/// The fixed roster the test suites sweep: all five examples, with the
/// parametrized fourth at q = 1, 2, 3.
pub fn standard_entries() -> Vec<CorpusEntry> {
    vec![
        get("ex1", None).unwrap(),
        get("ex2", None).unwrap(),
        get("ex3", None).unwrap(),
        get("ex4", Some(1)).unwrap(),
        get("ex4", Some(2)).unwrap(),
        get("ex4", Some(3)).unwrap(),
        get("ex5", None).unwrap(),
    ]
}

/// Exact partial sum of sum_{m<=n} (H_m - 1)/((m+1)(m+2)), which telescopes
/// to -H_{n+1}/(n+2) and therefore drifts to zero like log n / n.
pub fn check_example2_zero_sum_exact(n: usize) -> Result<Rational> {
    let mut sum = Rational::zero();
    for m in 0..=n {
        let np1 = Rational::from_integer(m as i64 + 1);
        let np2 = Rational::from_integer(m as i64 + 2);
        sum += &(&(&harmonic(m)? - &Rational::one()) / &(&np1 * &np2));
    }
    Ok(sum)
}

/// Same partial sum as a float; exact arithmetic within the harmonic table,
/// an incremental float stream beyond it.
pub fn check_example2_zero_sum(n: usize, prec: u32) -> BigFloat {
    if n <= 2000 {
        let s = check_example2_zero_sum_exact(n).expect("within the table cap");
        return BigFloat::from_rational(&s, prec);
    }
    let w = prec + 32;
    let one = BigFloat::one(w);
    let mut hf = HarmonicFloat::new(w);
    let mut sum = BigFloat::zero(w);
    for m in 0..=n {
        let np1 = BigFloat::from_u64(m as u64 + 1, w);
        let np2 = BigFloat::from_u64(m as u64 + 2, w);
        sum = &sum + &(&(hf.h() - &one) / &(&np1 * &np2));
        hf.advance();
    }
    sum.with_precision(prec)
}
