//! Coefficient sequences: exact harmonic-number tables and the
//! [`CoefficientSource`] abstraction the transform and engine consume.
//!
//! A source always knows its exact Taylor coefficients a_k as rationals.
//! Optional attachments (added by the corpus module): a closed form for the
//! weighted sums W_n, and the integrand itself for quadrature
//! cross-checks.

use std::str::FromStr;
use std::sync::{Arc, LazyLock, Mutex};

use num::bigint::BigInt;

use crate::numeric::{binomial, BigFloat, Rational};
use crate::{Error, Result};

/// Largest index the exact harmonic tables will materialize. Beyond this
/// the denominators (lcm of 1..n) make exact arithmetic impractical;
/// large-n evaluation goes through the float recurrences instead.
pub const DEFAULT_HARMONIC_CAP: usize = 5000;

/// Cached exact values of H_n = sum_{j<=n} 1/j and the second-order
/// H2_n = sum_{j<=n} 1/j^2, extended lazily up to a hard cap.
pub struct HarmonicTable {
    cap: usize,
    inner: Mutex<Tables>,
}

struct Tables {
    h: Vec<Rational>,  // h[n] = H_n, h[0] = 0
    h2: Vec<Rational>, // h2[n] = H2_n
}

impl HarmonicTable {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_HARMONIC_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        HarmonicTable {
            cap,
            inner: Mutex::new(Tables { h: vec![Rational::zero()], h2: vec![Rational::zero()] }),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn extend_to(&self, tables: &mut Tables, n: usize) {
        while tables.h.len() <= n {
            let j = tables.h.len() as i64;
            let last = tables.h.last().unwrap();
            tables.h.push(last + &Rational::ratio(1, j));
            let last2 = tables.h2.last().unwrap();
            tables.h2.push(last2 + &Rational::ratio(1, j * j));
        }
    }

    pub fn harmonic(&self, n: usize) -> Result<Rational> {
        if n > self.cap {
            return Err(Error::HarmonicCap { n, cap: self.cap });
        }
        let mut t = self.inner.lock().unwrap();
        self.extend_to(&mut t, n);
        Ok(t.h[n].clone())
    }

    pub fn harmonic2(&self, n: usize) -> Result<Rational> {
        if n > self.cap {
            return Err(Error::HarmonicCap { n, cap: self.cap });
        }
        let mut t = self.inner.lock().unwrap();
        self.extend_to(&mut t, n);
        Ok(t.h2[n].clone())
    }
}

impl Default for HarmonicTable {
    fn default() -> Self {
        Self::new()
    }
}

static SHARED_TABLE: LazyLock<Arc<HarmonicTable>> =
    LazyLock::new(|| Arc::new(HarmonicTable::new()));

/// Process-wide harmonic table with the default cap.
pub fn shared_harmonic_table() -> Arc<HarmonicTable> {
    SHARED_TABLE.clone()
}

/// H_n from the shared table.
pub fn harmonic(n: usize) -> Result<Rational> {
    SHARED_TABLE.harmonic(n)
}

/// H2_n = sum 1/j^2 from the shared table.
pub fn harmonic2(n: usize) -> Result<Rational> {
    SHARED_TABLE.harmonic2(n)
}

/// Incremental float versions of H_n and H2_n, for runs past the exact
/// table's cap. Plain positive accumulation: relative error stays within
/// a few n * 2^-prec.
pub struct HarmonicFloat {
    n: usize,
    h: BigFloat,
    h2: BigFloat,
    prec: u32,
}

impl HarmonicFloat {
    /// Starts at n = 0 with H_0 = H2_0 = 0.
    pub fn new(prec: u32) -> Self {
        HarmonicFloat { n: 0, h: BigFloat::zero(prec), h2: BigFloat::zero(prec), prec }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &BigFloat {
        &self.h
    }

    pub fn h2(&self) -> &BigFloat {
        &self.h2
    }

    /// Advances to n+1.
    pub fn advance(&mut self) {
        self.n += 1;
        let j = BigFloat::from_u64(self.n as u64, self.prec);
        self.h = &self.h + &(&BigFloat::one(self.prec) / &j);
        self.h2 = &self.h2 + &(&BigFloat::one(self.prec) / &(&j * &j));
    }
}

pub type ExactFn = Arc<dyn Fn(usize) -> Result<Rational> + Send + Sync>;
pub type IntegrandFn = Arc<dyn Fn(&BigFloat, u32) -> BigFloat + Send + Sync>;
pub type StreamFn = Arc<dyn Fn(u32) -> Box<dyn Iterator<Item = BigFloat> + Send> + Send + Sync>;

/// Closed form for the weighted sums W_n = sum_{k<=n} C(n,k) a_k / (k+1).
///
/// `exact` is the ground truth for indices the harmonic tables cover; the
/// identity suite checks it against the brute-force transform. `stream`
/// yields W_0, W_1, ... in float arithmetic with incremental accumulators
/// and has no index cap, which is what million-term runs use.
#[derive(Clone)]
pub struct ClosedWeightedSum {
    pub exact: ExactFn,
    pub stream: StreamFn,
}

/// A Taylor coefficient sequence plus optional analytic attachments.
#[derive(Clone)]
pub struct CoefficientSource {
    name: String,
    exact: ExactFn,
    closed_weighted_sum: Option<ClosedWeightedSum>,
    integrand: Option<IntegrandFn>,
    radius_note: String,
}

impl CoefficientSource {
    pub fn new(name: impl Into<String>, exact: ExactFn, radius_note: impl Into<String>) -> Self {
        CoefficientSource {
            name: name.into(),
            exact,
            closed_weighted_sum: None,
            integrand: None,
            radius_note: radius_note.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Exact Taylor coefficient a_k.
    pub fn exact(&self, k: usize) -> Result<Rational> {
        (self.exact)(k)
    }

    /// a_k rounded to `prec` bits. Always a single rounding of the exact
    /// value, so it agrees with `exact` to the last unit.
    pub fn float(&self, k: usize, prec: u32) -> Result<BigFloat> {
        Ok(BigFloat::from_rational(&self.exact(k)?, prec))
    }

    pub fn closed_weighted_sum(&self) -> Option<&ClosedWeightedSum> {
        self.closed_weighted_sum.as_ref()
    }

    /// The function f itself (same normalization as the coefficients),
    /// evaluated in float arithmetic at a given precision.
    pub fn integrand(&self) -> Option<&IntegrandFn> {
        self.integrand.as_ref()
    }

    /// Human-readable note on where the Taylor series converges.
    pub fn radius_note(&self) -> &str {
        &self.radius_note
    }

    pub fn with_closed_weighted_sum(mut self, cws: ClosedWeightedSum) -> Self {
        self.closed_weighted_sum = Some(cws);
        self
    }

    pub fn with_integrand(mut self, f: IntegrandFn) -> Self {
        self.integrand = Some(f);
        self
    }
}

/// How to build a coefficient source: an explicit finite list (zero beyond
/// the end) or a registered generator with parameters.
#[derive(Debug, Clone)]
pub enum CoefficientSpec {
    Explicit { name: String, coeffs: Vec<Rational> },
    Generator { name: String, params: GeneratorParams },
}

#[derive(Debug, Clone, Default)]
pub struct GeneratorParams {
    pub q: Option<u64>,
    pub ratio: Option<Rational>,
}

/// Builds a source from a spec. Generator names: `ex1` .. `ex5` (the
/// worked-example coefficient sequences; `ex4` takes q >= 1) and
/// `geometric` (a_k = ratio^k).
pub fn make_source(spec: &CoefficientSpec) -> Result<CoefficientSource> {
    match spec {
        CoefficientSpec::Explicit { name, coeffs } => {
            let coeffs = coeffs.clone();
            let exact: ExactFn =
                Arc::new(move |k| Ok(coeffs.get(k).cloned().unwrap_or_else(Rational::zero)));
            Ok(CoefficientSource::new(name.clone(), exact, "polynomial, converges everywhere"))
        }
        CoefficientSpec::Generator { name, params } => generator_source(name, params),
    }
}

fn generator_source(name: &str, params: &GeneratorParams) -> Result<CoefficientSource> {
    let table = shared_harmonic_table();
    let radius_log = "alternating series of harmonic type, radius 1";
    match name {
        "ex1" => {
            // a_k = (-1)^k H_{k+1}
            let exact: ExactFn = Arc::new(move |k| {
                let h = table.harmonic(k + 1)?;
                Ok(if k % 2 == 0 { h } else { -h })
            });
            Ok(CoefficientSource::new("ex1", exact, radius_log))
        }
        "ex2" => {
            // a_k = (-1)^k H_{k+1} / (k+2)
            let exact: ExactFn = Arc::new(move |k| {
                let h = table.harmonic(k + 1)?;
                let v = h / Rational::from_integer(k as i64 + 2);
                Ok(if k % 2 == 0 { v } else { -v })
            });
            Ok(CoefficientSource::new("ex2", exact, radius_log))
        }
        "ex3" => {
            // a_0 = 0, a_k = (-1)^(k-1) H_k / k
            let exact: ExactFn = Arc::new(move |k| {
                if k == 0 {
                    return Ok(Rational::zero());
                }
                let h = table.harmonic(k)?;
                let v = h / Rational::from_integer(k as i64);
                Ok(if k % 2 == 1 { v } else { -v })
            });
            Ok(CoefficientSource::new("ex3", exact, radius_log))
        }
        "ex4" => {
            let q = params.q.ok_or_else(|| {
                Error::InvalidOptions("generator `ex4` requires parameter q".into())
            })?;
            if q < 1 {
                return Err(Error::OutOfRange("ex4 requires q >= 1".into()));
            }
            // a_k = (-1)^k C(k, q)
            let exact: ExactFn = Arc::new(move |k| {
                let c = binomial(k as u64, q);
                Ok(if k % 2 == 0 { c } else { -c })
            });
            Ok(CoefficientSource::new(
                format!("ex4(q={q})"),
                exact,
                "binomial-tail series, radius 1",
            ))
        }
        "ex5" => {
            // a_0 = 0, a_k = (-1)^(k-1) H_k / (k+1)
            let exact: ExactFn = Arc::new(move |k| {
                if k == 0 {
                    return Ok(Rational::zero());
                }
                let h = table.harmonic(k)?;
                let v = h / Rational::from_integer(k as i64 + 1);
                Ok(if k % 2 == 1 { v } else { -v })
            });
            Ok(CoefficientSource::new("ex5", exact, radius_log))
        }
        "geometric" => {
            let ratio = params.ratio.clone().ok_or_else(|| {
                Error::InvalidOptions("generator `geometric` requires parameter ratio".into())
            })?;
            let exact: ExactFn = Arc::new(move |k| {
                ratio.powi(k.try_into().map_err(|_| Error::OutOfRange(format!("index {k}")))?)
            });
            Ok(CoefficientSource::new(
                "geometric",
                exact,
                "geometric series, radius 1/|ratio|",
            ))
        }
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

/// Parses the JSON coefficient-file format:
/// `{"name": "...", "coeffs": [["num","den"], ...]}` or
/// `{"generator": "ex4", "params": {"q": 2}}`.
pub fn parse_coefficient_json(text: &str) -> Result<CoefficientSpec> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::BadInput(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::BadInput("coefficient file must be a JSON object".into()))?;

    if let Some(gen) = obj.get("generator") {
        let name = gen
            .as_str()
            .ok_or_else(|| Error::BadInput("`generator` must be a string".into()))?
            .to_string();
        let mut params = GeneratorParams::default();
        if let Some(p) = obj.get("params") {
            let p = p
                .as_object()
                .ok_or_else(|| Error::BadInput("`params` must be an object".into()))?;
            if let Some(q) = p.get("q") {
                params.q =
                    Some(q.as_u64().ok_or_else(|| {
                        Error::BadInput("`q` must be a non-negative integer".into())
                    })?);
            }
            if let Some(r) = p.get("ratio") {
                let s = r
                    .as_str()
                    .map(str::to_string)
                    .or_else(|| r.as_i64().map(|v| v.to_string()))
                    .ok_or_else(|| Error::BadInput("`ratio` must be a rational string".into()))?;
                params.ratio = Some(Rational::from_str(&s)?);
            }
        }
        return Ok(CoefficientSpec::Generator { name, params });
    }

    let name = obj
        .get("name")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::BadInput("missing `name` (or `generator`) field".into()))?
        .to_string();
    let coeffs_json = obj
        .get("coeffs")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::BadInput("missing `coeffs` array".into()))?;
    let mut coeffs = Vec::with_capacity(coeffs_json.len());
    for entry in coeffs_json {
        let pair = entry
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::BadInput("each coefficient must be a [num, den] pair".into()))?;
        let part = |v: &serde_json::Value| -> Result<BigInt> {
            let s = v
                .as_str()
                .map(str::to_string)
                .or_else(|| v.as_i64().map(|n| n.to_string()))
                .ok_or_else(|| Error::BadInput("coefficient parts must be strings".into()))?;
            BigInt::from_str(&s).map_err(|_| Error::MalformedRational(s))
        };
        coeffs.push(Rational::new(part(&pair[0])?, part(&pair[1])?)?);
    }
    Ok(CoefficientSpec::Explicit { name, coeffs })
}
