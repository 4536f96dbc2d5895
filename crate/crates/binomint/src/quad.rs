//! Adaptive Gauss-Legendre quadrature, used as an independent cross-check
//! on series evaluations.
//!
//! Each panel is estimated with a 7-point Gauss rule and refined by
//! comparing against the two-half composite of the same rule; the worst
//! panel (largest |coarse - fine| discrepancy) is split first. All nodes
//! are interior, so integrands are never evaluated at panel endpoints;
//! removable endpoint singularities are handled by the limit values the
//! corpus bakes into its integrand closures.
//!
//! The final value and error estimate are summed over panels in ascending
//! order of left endpoint, so results are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::Error;
use crate::numeric::BigFloat;
use crate::Result;
use crate::sequences::IntegrandFn;

/// Default working precision for oracle runs, in bits.
pub const DEFAULT_ORACLE_PRECISION: u32 = 128;

/// Tolerances below this floor are clamped for refinement control; the
/// `converged` flag still reports against the caller's request.
pub const TOLERANCE_FLOOR: f64 = 1e-12;

const MAX_SUBDIVISIONS: usize = 20_000;
const SEED_PANELS: usize = 4;
const RULE_POINTS: u64 = 7;

#[derive(Debug)]
pub struct QuadResult {
    pub value: BigFloat,
    pub abs_error_estimate: BigFloat,
    pub subdivisions: usize,
    pub converged: bool,
}

struct GlRule {
    nodes: Vec<BigFloat>,   // ascending on (-1, 1)
    weights: Vec<BigFloat>, // matching order, sum to 2
}

static RULES: LazyLock<Mutex<HashMap<u32, Arc<GlRule>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// P_7 and P_6 at x via the three-term recurrence
/// (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
fn legendre_p7_p6(x: &BigFloat, prec: u32) -> (BigFloat, BigFloat) {
    let mut prev = BigFloat::one(prec); // P_0
    let mut cur = x.with_precision(prec); // P_1
    for k in 1..RULE_POINTS {
        let lead = &(x * &cur) * &BigFloat::from_u64(2 * k + 1, prec);
        let next =
            &(&lead - &(&prev * &BigFloat::from_u64(k, prec))) / &BigFloat::from_u64(k + 1, prec);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Newton refinement of a root of P_7 from a cosine seed. P_7' is taken
/// from the derivative identity P_n' = n (x P_n - P_{n-1}) / (x^2 - 1).
fn refine_root(seed: f64, prec: u32) -> BigFloat {
    let one = BigFloat::one(prec);
    let mut x = BigFloat::from_f64(seed, prec);
    for _ in 0..80 {
        let (p7, p6) = legendre_p7_p6(&x, prec);
        let x2m1 = &(&x * &x) - &one;
        let den = &(&(&x * &p7) - &p6) * &BigFloat::from_u64(RULE_POINTS, prec);
        let dx = &(&p7 * &x2m1) / &den;
        x = &x - &dx;
        if dx.abs() <= x.abs().mul_pow2(-(prec as i64) + 6) {
            break;
        }
    }
    x
}

fn weight_at(x: &BigFloat, prec: u32) -> BigFloat {
    let one = BigFloat::one(prec);
    let (p7, p6) = legendre_p7_p6(x, prec);
    let x2m1 = &(x * x) - &one;
    let deriv = &(&(&(x * &p7) - &p6) * &BigFloat::from_u64(RULE_POINTS, prec)) / &x2m1;
    let one_minus_x2 = -&x2m1;
    &BigFloat::from_u64(2, prec) / &(&one_minus_x2 * &(&deriv * &deriv))
}

fn build_gl7(bits: u32) -> GlRule {
    let w = bits + 8;
    // Positive roots, largest first; the fourth root is exactly zero.
    let mut pos = Vec::with_capacity(3);
    for i in 1..=3u32 {
        let seed =
            ((i as f64 - 0.25) * std::f64::consts::PI / (RULE_POINTS as f64 + 0.5)).cos();
        pos.push(refine_root(seed, w));
    }
    let zero = BigFloat::zero(w);
    let center_weight = weight_at(&zero, w);
    let mut nodes = Vec::with_capacity(7);
    let mut weights = Vec::with_capacity(7);
    for x in &pos {
        nodes.push((-x).with_precision(bits));
        weights.push(weight_at(x, w).with_precision(bits));
    }
    nodes.push(zero.with_precision(bits));
    weights.push(center_weight.with_precision(bits));
    for (x, wt) in pos.iter().zip(weights.clone()).rev() {
        nodes.push(x.with_precision(bits));
        weights.push(wt);
    }
    GlRule { nodes, weights }
}

fn gl7(bits: u32) -> Arc<GlRule> {
    let mut map = RULES.lock().unwrap();
    map.entry(bits).or_insert_with(|| Arc::new(build_gl7(bits))).clone()
}

/// One application of the 7-point rule on [a, b].
fn gl_panel(g: &IntegrandFn, rule: &GlRule, a: &BigFloat, b: &BigFloat, w: u32) -> BigFloat {
    let half = (b - a).mul_pow2(-1);
    let mid = (a + b).mul_pow2(-1);
    let mut acc = BigFloat::zero(w);
    for (x, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
        let point = &mid + &(&half * x);
        acc = &acc + &(wt * &g(&point, w));
    }
    &acc * &half
}

struct Panel {
    a: BigFloat,
    b: BigFloat,
    value: BigFloat, // two-half composite estimate
    est: BigFloat,   // |single-panel - two-half|
}

fn make_panel(g: &IntegrandFn, rule: &GlRule, a: BigFloat, b: BigFloat, w: u32) -> Panel {
    let coarse = gl_panel(g, rule, &a, &b, w);
    let mid = (&a + &b).mul_pow2(-1);
    let fine = &gl_panel(g, rule, &a, &mid, w) + &gl_panel(g, rule, &mid, &b, w);
    let est = (&coarse - &fine).abs();
    Panel { a, b, value: fine, est }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est == other.est
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // BigFloat values are always finite, so the order is total.
        self.est.partial_cmp(&other.est).unwrap()
    }
}

/// Integrates g over [a, b] by adaptive subdivision. The error estimate is
/// the summed coarse-vs-fine discrepancy over the final panels; `converged`
/// reports whether that estimate met the tolerance actually requested, even
/// when the request was below the refinement floor.
pub fn integrate_finite(
    g: &IntegrandFn,
    a: &BigFloat,
    b: &BigFloat,
    tol: &BigFloat,
    prec: u32,
) -> Result<QuadResult> {
    if a >= b {
        return Err(Error::BadInput(format!("empty or reversed interval [{a}, {b}]")));
    }
    if tol.is_zero() || tol.is_negative() {
        return Err(Error::BadInput("tolerance must be positive".into()));
    }
    if prec < 8 {
        return Err(Error::BadInput("precision must be at least 8 bits".into()));
    }
    let w = prec + 16;
    let rule = gl7(w);
    let floor = BigFloat::from_f64(TOLERANCE_FLOOR, w);
    let eff_tol = if *tol < floor { floor } else { tol.with_precision(w) };

    let a = a.with_precision(w);
    let b = b.with_precision(w);
    let width = &b - &a;
    let step = width.mul_pow2(-2);
    let mut cuts = vec![a.clone()];
    if !step.is_zero() {
        for i in 1..SEED_PANELS as u64 {
            cuts.push(&a + &(&step * &BigFloat::from_u64(i, w)));
        }
    }
    cuts.push(b.clone());

    let mut heap = BinaryHeap::new();
    let mut sum_est = BigFloat::zero(w);
    for pair in cuts.windows(2) {
        let panel = make_panel(g, &rule, pair[0].clone(), pair[1].clone(), w);
        sum_est = &sum_est + &panel.est;
        heap.push(panel);
    }

    // Panels thinner than this are at the resolution of the working
    // precision; splitting them further cannot improve the estimate.
    let width_floor = width.abs().mul_pow2(-(w as i64) + 8);
    let mut splits = 0usize;
    while sum_est > eff_tol && splits < MAX_SUBDIVISIONS {
        let worst = heap.pop().expect("heap holds at least the seed panels");
        if (&worst.b - &worst.a).abs() <= width_floor {
            heap.push(worst);
            break;
        }
        sum_est = &sum_est - &worst.est;
        let mid = (&worst.a + &worst.b).mul_pow2(-1);
        let left = make_panel(g, &rule, worst.a, mid.clone(), w);
        let right = make_panel(g, &rule, mid, worst.b, w);
        sum_est = &sum_est + &left.est;
        sum_est = &sum_est + &right.est;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let mut value = BigFloat::zero(w);
    let mut est = BigFloat::zero(w);
    for p in &panels {
        value = &value + &p.value;
        est = &est + &p.est;
    }
    let est = est.with_precision(prec.min(64));
    let converged = est <= *tol;
    Ok(QuadResult {
        value: value.with_precision(prec),
        abs_error_estimate: est,
        subdivisions: splits,
        converged,
    })
}

/// Integrates g over (0, inf) through the substitution x = u/(1-u), which
/// maps the half line onto (0, 1) with dx = du/(1-u)^2.
pub fn integrate_halfline(g: &IntegrandFn, tol: &BigFloat, prec: u32) -> Result<QuadResult> {
    let g = g.clone();
    let transformed: IntegrandFn = Arc::new(move |u: &BigFloat, w: u32| {
        let rem = &BigFloat::one(w) - u; // positive at every interior node
        let x = u / &rem;
        &g(&x, w) / &(&rem * &rem)
    });
    integrate_finite(
        &transformed,
        &BigFloat::zero(prec),
        &BigFloat::one(prec),
        tol,
        prec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::numeric::Rational;
    use crate::specfun;

    fn tol(v: f64) -> BigFloat {
        BigFloat::from_f64(v, 64)
    }

    fn unit() -> (BigFloat, BigFloat) {
        (BigFloat::zero(128), BigFloat::one(128))
    }

    #[test]
    fn gauss_rule_matches_known_nodes_and_weights() {
        let rule = gl7(160);
        assert_eq!(rule.nodes.len(), 7);
        assert_eq!(rule.weights.len(), 7);
        // ascending and symmetric
        for i in 0..6 {
            assert!(rule.nodes[i] < rule.nodes[i + 1]);
        }
        for i in 0..7 {
            let diff = (&rule.nodes[i] + &rule.nodes[6 - i]).abs();
            assert!(diff < BigFloat::one(160).mul_pow2(-150));
            let wdiff = (&rule.weights[i] - &rule.weights[6 - i]).abs();
            assert!(wdiff < BigFloat::one(160).mul_pow2(-150));
        }
        // the classical double-precision values
        let known_nodes = [0.4058451513773972, 0.7415311855993945, 0.9491079123427585];
        let known_weights = [0.3818300505051189, 0.2797053914892766, 0.1294849661688697];
        for (i, (kn, kw)) in known_nodes.iter().zip(known_weights.iter()).enumerate() {
            let nd = (&rule.nodes[4 + i] - &BigFloat::from_f64(*kn, 160)).abs();
            assert!(nd < BigFloat::from_f64(1e-15, 64), "node {i}: off by {nd}");
            let wd = (&rule.weights[4 + i] - &BigFloat::from_f64(*kw, 160)).abs();
            assert!(wd < BigFloat::from_f64(1e-15, 64), "weight {i}: off by {wd}");
        }
        // center weight is exactly 512/1225; all weights sum to 2
        let center = BigFloat::from_rational(&Rational::ratio(512, 1225), 160);
        assert!((&rule.weights[3] - &center).abs() < BigFloat::one(160).mul_pow2(-150));
        let mut total = BigFloat::zero(160);
        for w in &rule.weights {
            total = &total + w;
        }
        let two = BigFloat::from_u64(2, 160);
        assert!((&total - &two).abs() < BigFloat::one(160).mul_pow2(-148));
    }

    #[test]
    fn low_degree_polynomials_need_no_subdivision() {
        let (a, b) = unit();
        let g: IntegrandFn = Arc::new(|x, w| x.with_precision(w));
        let r = integrate_finite(&g, &a, &b, &tol(1e-12), 128).unwrap();
        assert!(r.converged);
        assert_eq!(r.subdivisions, 0);
        let half = BigFloat::one(128).mul_pow2(-1);
        assert!((&r.value - &half).abs() < BigFloat::one(128).mul_pow2(-100));

        // degree 13 is still inside the rule's exactness range
        let g13: IntegrandFn = Arc::new(|x, w| {
            let mut acc = BigFloat::one(w);
            for _ in 0..13 {
                acc = &acc * x;
            }
            acc
        });
        let r = integrate_finite(&g13, &a, &b, &tol(1e-12), 128).unwrap();
        let fourteenth = BigFloat::from_rational(&Rational::ratio(1, 14), 128);
        assert!((&r.value - &fourteenth).abs() < BigFloat::one(128).mul_pow2(-100));
        assert!(r.converged);
    }

    #[test]
    fn rational_integrand_matches_its_antiderivative() {
        // x/(1+x)^2 on [0,1] has antiderivative log(1+x) + 1/(1+x).
        let (a, b) = unit();
        let g: IntegrandFn = Arc::new(|x, w| {
            let one_plus = &BigFloat::one(w) + x;
            x / &(&one_plus * &one_plus)
        });
        let r = integrate_finite(&g, &a, &b, &tol(1e-12), 128).unwrap();
        assert!(r.converged);
        let reference = &specfun::ln2(160) - &BigFloat::one(160).mul_pow2(-1);
        let diff = (&r.value - &reference).abs();
        assert!(diff < tol(1e-12), "diff {diff}");
        // reproducible bit for bit
        let again = integrate_finite(&g, &a, &b, &tol(1e-12), 128).unwrap();
        assert_eq!(r.value, again.value);
        assert_eq!(r.abs_error_estimate, again.abs_error_estimate);
    }

    #[test]
    fn fifth_example_integrand_reaches_zeta_three_over_eight() {
        let (a, b) = unit();
        let entry = corpus::get("ex5", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let r = integrate_finite(g, &a, &b, &tol(1e-11), 128).unwrap();
        assert!(r.converged);
        let reference = specfun::zeta3(160).mul_pow2(-3);
        let diff = (&r.value - &reference).abs();
        assert!(diff < tol(1e-11), "diff {diff}");
    }

    #[test]
    fn interval_additivity_at_an_interior_cut() {
        let (a, b) = unit();
        let entry = corpus::get("ex1", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let cut = BigFloat::from_rational(&Rational::ratio(1, 3), 144);
        let whole = integrate_finite(g, &a, &b, &tol(1e-12), 128).unwrap();
        let left = integrate_finite(g, &a, &cut, &tol(1e-12), 128).unwrap();
        let right = integrate_finite(g, &cut, &b, &tol(1e-12), 128).unwrap();
        assert!(whole.converged && left.converged && right.converged);
        let stitched = &left.value + &right.value;
        let diff = (&whole.value - &stitched).abs();
        assert!(diff < tol(6e-12), "diff {diff}");
    }

    #[test]
    fn halfline_substitution_matches_hand_transformed_integrand() {
        // log(1+t)/(t(1+t)) on (0,inf) becomes -log(1-u)/u on (0,1).
        let entry = corpus::get("ex1", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let auto = integrate_halfline(g, &tol(1e-9), 128).unwrap();
        let hand: IntegrandFn = Arc::new(|u, w| {
            if u.is_zero() {
                return BigFloat::one(w);
            }
            let rem = &BigFloat::one(w) - u;
            let l = specfun::ln(&rem, w).expect("1 - u > 0 at interior nodes");
            -&(&l / u)
        });
        let (a, b) = unit();
        let manual = integrate_finite(&hand, &a, &b, &tol(1e-9), 128).unwrap();
        assert!(auto.converged && manual.converged);
        let diff = (&auto.value - &manual.value).abs();
        assert!(diff < tol(2e-9), "diff {diff}");
    }

    #[test]
    fn halfline_inverse_square_decay_integrates_to_one() {
        // 1/(1+t)^2 transforms to the constant 1 on (0,1).
        let g: IntegrandFn = Arc::new(|t, w| {
            let one_plus = &BigFloat::one(w) + t;
            (&one_plus * &one_plus).recip()
        });
        let r = integrate_halfline(&g, &tol(1e-9), 128).unwrap();
        assert!(r.converged);
        assert_eq!(r.subdivisions, 0);
        let diff = (&r.value - &BigFloat::one(128)).abs();
        assert!(diff < BigFloat::one(128).mul_pow2(-100), "diff {diff}");
    }

    #[test]
    fn first_example_halfline_reaches_pi_squared_over_six() {
        let entry = corpus::get("ex1", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let r = integrate_halfline(g, &tol(1e-9), 128).unwrap();
        assert!(r.converged);
        assert!(r.subdivisions > 0, "log growth near u = 1 needs refinement");
        let diff = (&r.value - &specfun::zeta2(160)).abs();
        assert!(diff < tol(5e-9), "diff {diff}");
    }

    #[test]
    fn second_example_halfline_reaches_pi_squared_over_three() {
        let entry = corpus::get("ex2", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let r = integrate_halfline(g, &tol(1e-9), 128).unwrap();
        assert!(r.converged);
        let reference = specfun::zeta2(160).mul_pow2(1);
        let diff = (&r.value - &reference).abs();
        assert!(diff < tol(5e-9), "diff {diff}");
    }

    #[test]
    fn tolerance_below_the_floor_is_reported_honestly() {
        let (a, b) = unit();
        let entry = corpus::get("ex1", None).unwrap();
        let g = entry.source.integrand().unwrap();
        let strict = integrate_finite(g, &a, &b, &tol(1e-30), 128).unwrap();
        let loose = integrate_finite(g, &a, &b, &tol(1e-9), 128).unwrap();
        // refinement stops at the floor, so the impossible request is not
        // falsely reported as met
        assert!(!strict.converged);
        assert!(strict.abs_error_estimate > tol(1e-30));
        let diff = (&strict.value - &loose.value).abs();
        assert!(diff < tol(1e-8), "diff {diff}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let g: IntegrandFn = Arc::new(|x, w| x.with_precision(w));
        let (a, b) = unit();
        assert!(integrate_finite(&g, &a, &a, &tol(1e-9), 128).is_err());
        assert!(integrate_finite(&g, &b, &a, &tol(1e-9), 128).is_err());
        assert!(integrate_finite(&g, &a, &b, &BigFloat::zero(64), 128).is_err());
        assert!(integrate_finite(&g, &a, &b, &tol(-1e-9), 128).is_err());
        assert!(integrate_finite(&g, &a, &b, &tol(1e-9), 4).is_err());
    }
}
