//! Diagonal forms: representation, evaluation, and adversarial families.
//!
//! A [`DiagonalForm`] is `a_1 x_1^k + ... + a_s x_s^k` with nonzero integer
//! coefficients and `k >= 2`. The text format used by the CLI and the run
//! store is `k=<int> a=<c1>,<c2>,...,<cs>`.
//!
//! Two constructions produce locally soluble equations whose smallest
//! nonzero solutions are provably large:
//!
//! - [`adversarial_pq`]: blocks `p^i (x^k - q y^k)` where `q` is the least
//!   k-th power non-residue mod `p`; any nonzero solution has sup-norm at
//!   least `p`.
//! - [`adversarial_ab`]: `a (x_1^k + ... + x_t^k) - b (y_1^k + ... + y_t^k)`
//!   with `k` even and `gcd(a, b) = 1`, forcing `b` to divide
//!   `x_1^k + ... + x_t^k`, so nonzero solutions have sup-norm at least
//!   `(b/s)^{1/k}`.

use crate::arith::{checked_add_i128, checked_mul_i128, checked_pow_i128, kth_power_nonresidue, sup_norm};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// A diagonal form `a_1 x_1^k + ... + a_s x_s^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalForm {
    k: u32,
    coeffs: Vec<i64>,
}

impl DiagonalForm {
    /// Build a form; requires `k >= 2` and at least one coefficient, all nonzero.
    pub fn new(k: u32, coeffs: Vec<i64>) -> Result<DiagonalForm> {
        if k < 2 {
            return Err(Error::domain(format!("exponent k must be >= 2, got {k}")));
        }
        if coeffs.is_empty() {
            return Err(Error::domain("a form needs at least one coefficient"));
        }
        if coeffs.iter().any(|&a| a == 0) {
            return Err(Error::domain("all coefficients must be nonzero"));
        }
        Ok(DiagonalForm { k, coeffs })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of variables `s`.
    pub fn s(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Height `|a| = max_j |a_j|`.
    pub fn height(&self) -> i64 {
        sup_norm(&self.coeffs)
    }

    /// Exact value of the form at `x`, or a resource error on i128 overflow.
    pub fn evaluate(&self, x: &[i64]) -> Result<i128> {
        if x.len() != self.s() {
            return Err(Error::domain(format!(
                "point has {} coordinates, form has {}",
                x.len(),
                self.s()
            )));
        }
        let mut acc: i128 = 0;
        for (&a, &xi) in self.coeffs.iter().zip(x) {
            let pow = checked_pow_i128(xi as i128, self.k)?;
            acc = checked_add_i128(acc, checked_mul_i128(a as i128, pow)?)?;
        }
        Ok(acc)
    }

    /// Are the coefficients mixed in sign?
    pub fn has_mixed_signs(&self) -> bool {
        self.coeffs.iter().any(|&a| a > 0) && self.coeffs.iter().any(|&a| a < 0)
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} a=", self.k)?;
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for DiagonalForm {
    type Err = Error;

    /// Parse `k=<int> a=<c1>,<c2>,...,<cs>`.
    fn from_str(s: &str) -> Result<DiagonalForm> {
        let mut k: Option<u32> = None;
        let mut coeffs: Option<Vec<i64>> = None;
        for part in s.split_whitespace() {
            if let Some(v) = part.strip_prefix("k=") {
                k = Some(
                    v.parse()
                        .map_err(|_| Error::domain(format!("invalid exponent: {v:?}")))?,
                );
            } else if let Some(v) = part.strip_prefix("a=") {
                let parsed: std::result::Result<Vec<i64>, _> =
                    v.split(',').map(|c| c.trim().parse()).collect();
                coeffs = Some(parsed.map_err(|_| {
                    Error::domain(format!("invalid coefficient list: {v:?}"))
                })?);
            } else {
                return Err(Error::domain(format!(
                    "unexpected token {part:?}; expected `k=<int> a=<c1>,...`"
                )));
            }
        }
        match (k, coeffs) {
            (Some(k), Some(coeffs)) => DiagonalForm::new(k, coeffs),
            _ => Err(Error::domain("form string needs both k= and a= parts")),
        }
    }
}

/// Largest even integer strictly smaller than `s`; needs `s >= 3`.
pub fn hat_s(s: u32) -> Result<u32> {
    if s < 3 {
        return Err(Error::domain(format!("hat_s needs s >= 3, got {s}")));
    }
    Ok(if s % 2 == 0 { s - 2 } else { s - 1 })
}

/// Block form `sum_i p^i (x^k - q y^k)` for `i < t`, where `q` is the least
/// k-th power non-residue mod `p`.
///
/// Requires `p` prime with `gcd(k, p-1) > 1` (otherwise no non-residue
/// exists) and `t >= 1`. Every nonzero rational solution has sup-norm at
/// least `p`, and the form is insoluble over the p-adics when `t >= 2`...
/// see the generator's verification test for the exhaustive check.
pub fn adversarial_pq(k: u32, t: u32, p: u64) -> Result<DiagonalForm> {
    if t == 0 {
        return Err(Error::domain("block count t must be >= 1"));
    }
    let q = kth_power_nonresidue(k, p)?.ok_or_else(|| {
        Error::domain(format!(
            "every unit is a k-th power mod {p} (gcd(k, p-1) = 1); no non-residue exists"
        ))
    })?;
    let mut coeffs = Vec::with_capacity(2 * t as usize);
    let mut scale: i128 = 1;
    for _ in 0..t {
        let c = i64::try_from(scale)
            .map_err(|_| Error::resource("adversarial coefficients overflow i64"))?;
        let cq = i64::try_from(scale * q as i128)
            .map_err(|_| Error::resource("adversarial coefficients overflow i64"))?;
        coeffs.push(c);
        coeffs.push(-cq);
        scale = checked_mul_i128(scale, p as i128)?;
    }
    DiagonalForm::new(k, coeffs)
}

/// Form `a (x_1^k + ... + x_t^k) - b (x_{t+1}^k + ... + x_{2t}^k)`.
///
/// Requires `k` even, `t >= 1`, and `1 <= a <= b` with `gcd(a, b) = 1`.
/// Because `k` is even, any solution makes `b` divide
/// `x_1^k + ... + x_t^k`, so nonzero solutions have sup-norm at least
/// `(b / (2t))^{1/k}`.
pub fn adversarial_ab(k: u32, t: u32, a: i64, b: i64) -> Result<DiagonalForm> {
    if k % 2 != 0 {
        return Err(Error::domain("this family needs even k"));
    }
    if t == 0 {
        return Err(Error::domain("block count t must be >= 1"));
    }
    if a < 1 || b < a {
        return Err(Error::domain("need 1 <= a <= b"));
    }
    if num_integer::gcd(a, b) != 1 {
        return Err(Error::domain("a and b must be coprime"));
    }
    let mut coeffs = vec![a; t as usize];
    coeffs.extend(std::iter::repeat_n(-b, t as usize));
    DiagonalForm::new(k, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constructor_enforces_domain() {
        assert!(DiagonalForm::new(1, vec![1]).is_err());
        assert!(DiagonalForm::new(3, vec![]).is_err());
        assert!(DiagonalForm::new(3, vec![1, 0, 2]).is_err());
        assert!(DiagonalForm::new(2, vec![-5]).is_ok());
    }

    #[test]
    fn evaluate_small_cases() {
        let f = DiagonalForm::new(3, vec![1, -2]).unwrap();
        assert_eq!(f.evaluate(&[2, 1]).unwrap(), 6);
        assert_eq!(f.evaluate(&[0, 0]).unwrap(), 0);
        assert!(f.evaluate(&[1]).is_err());
    }

    #[test]
    fn evaluate_reports_overflow() {
        let f = DiagonalForm::new(9, vec![i64::MAX]).unwrap();
        assert!(matches!(
            f.evaluate(&[i64::MAX]),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn hat_s_frozen_values() {
        assert_eq!(hat_s(11).unwrap(), 10);
        assert_eq!(hat_s(10).unwrap(), 8);
        assert_eq!(hat_s(4).unwrap(), 2);
        assert!(hat_s(2).is_err());
    }

    #[test]
    fn pq_family_frozen_value() {
        let f = adversarial_pq(3, 2, 7).unwrap();
        assert_eq!(f.coeffs(), &[1, -2, 7, -14]);
        assert_eq!(f.k(), 3);
    }

    #[test]
    fn pq_family_rejects_residue_free_primes() {
        // gcd(3, 5-1) = 1: every unit is a cube mod 5.
        assert!(adversarial_pq(3, 2, 5).is_err());
    }

    #[test]
    fn ab_family_frozen_value() {
        let f = adversarial_ab(4, 2, 1, 17).unwrap();
        assert_eq!(f.coeffs(), &[1, 1, -17, -17]);
        assert!(adversarial_ab(3, 2, 1, 17).is_err()); // odd k
        assert!(adversarial_ab(4, 2, 2, 4).is_err()); // not coprime
    }

    #[test]
    fn display_and_parse_round_trip() {
        let f = DiagonalForm::new(3, vec![1, -2, 7, -14]).unwrap();
        assert_eq!(f.to_string(), "k=3 a=1,-2,7,-14");
        let g: DiagonalForm = "k=3 a=1,-2,7,-14".parse().unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parse_rejects_malformed_strings() {
        assert!("k=3".parse::<DiagonalForm>().is_err());
        assert!("a=1,2".parse::<DiagonalForm>().is_err());
        assert!("k=3 a=1,0,2".parse::<DiagonalForm>().is_err());
        assert!("k=x a=1".parse::<DiagonalForm>().is_err());
        assert!("k=3 a=1,2 extra".parse::<DiagonalForm>().is_err());
    }

    proptest! {
        #[test]
        fn negation_scales_by_k_parity(
            k in 2u32..6,
            coeffs in prop::collection::vec(-9i64..=9, 1..5),
            x in prop::collection::vec(-9i64..=9, 5)
        ) {
            prop_assume!(coeffs.iter().all(|&a| a != 0));
            let f = DiagonalForm::new(k, coeffs.clone()).unwrap();
            let x = &x[..coeffs.len()];
            let neg: Vec<i64> = x.iter().map(|&v| -v).collect();
            let sign = if k % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(f.evaluate(&neg).unwrap(), sign * f.evaluate(x).unwrap());
        }

        #[test]
        fn round_trip_any_form(
            k in 2u32..8,
            coeffs in prop::collection::vec((-50i64..=50).prop_filter("nonzero", |&a| a != 0), 1..8)
        ) {
            let f = DiagonalForm::new(k, coeffs).unwrap();
            let g: DiagonalForm = f.to_string().parse().unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
