use num::bigint::BigInt;
use num::{BigUint, One, Zero};

use super::Rational;

/// Exact binomial coefficient C(n, k) via the multiplicative formula.
/// Returns zero for k > n.
pub fn binomial_integer(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    // c stays integral at every step: after multiplying by (n - k + i) the
    // product of i consecutive integers is divisible by i.
    for i in 1..=k {
        c = c * BigUint::from(n - k + i) / BigUint::from(i);
    }
    c
}

/// C(n, k) as an exact rational (integer-valued).
pub fn binomial(n: u64, k: u64) -> Rational {
    Rational::from(BigInt::from(binomial_integer(n, k)))
}

/// Rolling row of Pascal's triangle.
///
/// Holds C(n, 0..=n) for the current n and advances one row at a time in
/// O(n) big-integer additions, which is what the transform iteration needs.
#[derive(Debug, Clone)]
pub struct PascalRow {
    n: u64,
    row: Vec<BigUint>,
}

impl PascalRow {
    /// Starts at row n = 0 (the single entry 1).
    pub fn new() -> Self {
        PascalRow { n: 0, row: vec![BigUint::one()] }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.row
    }

    /// C(n, k) for the current row; zero when k > n.
    pub fn get(&self, k: usize) -> BigUint {
        self.row.get(k).cloned().unwrap_or_else(BigUint::zero)
    }

    /// Advances to row n+1 in place.
    pub fn advance(&mut self) {
        self.row.push(BigUint::one());
        // Backward sweep so each entry is updated from the previous row.
        for i in (1..self.row.len() - 1).rev() {
            let (left, right) = self.row.split_at_mut(i);
            right[0] += &left[i - 1];
        }
        self.n += 1;
    }
}

impl Default for PascalRow {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(binomial_integer(0, 0), BigUint::one());
        assert_eq!(binomial_integer(5, 2), BigUint::from(10u32));
        assert_eq!(binomial_integer(10, 10), BigUint::one());
        assert_eq!(binomial_integer(4, 7), BigUint::zero());
        assert_eq!(binomial(6, 3), Rational::from_integer(20));
    }

    #[test]
    fn central_coefficient_of_row_sixty() {
        // Frozen value, cross-checked below against the Pascal recurrence,
        // which shares no code with the multiplicative formula.
        let expected = "118264581564861424".parse::<BigUint>().unwrap();
        assert_eq!(binomial_integer(60, 30), expected);

        let mut row = PascalRow::new();
        for _ in 0..60 {
            row.advance();
        }
        assert_eq!(row.get(30), expected);
    }

    #[test]
    fn multiplicative_matches_recurrence_up_to_200() {
        let mut row = PascalRow::new();
        for n in 0u64..=200 {
            for k in 0..=n {
                assert_eq!(
                    row.get(k as usize),
                    binomial_integer(n, k),
                    "C({n},{k}) mismatch"
                );
            }
            row.advance();
        }
    }

    #[test]
    fn row_sums_are_powers_of_two() {
        let mut row = PascalRow::new();
        for n in 0u32..64 {
            let sum: BigUint = row.entries().iter().sum();
            assert_eq!(sum, BigUint::one() << n);
            row.advance();
        }
    }
}
