//! Exact rational arithmetic used by the enumeration oracle.
//!
//! Values are `BigRational`s, always kept in lowest terms. They are written
//! as `"p/q"` strings wherever they cross a serialization boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest denominator accepted when converting a float to an exact value.
pub const MAX_EXACT_DENOMINATOR: i64 = 1_000_000;

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `r` as `"p/q"`, including integers (`"1/1"`, `"0/1"`).
pub fn fmt_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, an integer, or a finite decimal literal such as `"0.125"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut numer: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    if neg {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(Rational::new(numer, denom))
}

/// Finds the simplest fraction p/q with q <= [`MAX_EXACT_DENOMINATOR`] that
/// reproduces `x` to within a few ulps. Returns `None` if there is none.
pub fn exactify(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    // Convergents of an irrational with q <= 10^6 miss it by about 1/q^2,
    // far more than this.
    let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > MAX_EXACT_DENOMINATOR as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = rest - a as f64;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Solves pi K = pi, sum(pi) = 1 exactly by Gaussian elimination.
/// Returns `None` when the system is singular (no unique solution).
pub fn exact_stationary(matrix: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = matrix.len();
    // Rows 0..n-1 of (K^T - I), last equation replaced by the normalization.
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n)
                .map(|j| {
                    let mut v = matrix[j][i].clone();
                    if i == j {
                        v -= Rational::one();
                    }
                    v
                })
                .collect();
            row.push(Rational::zero());
            row
        })
        .collect();
    a[n - 1] = vec![Rational::one(); n + 1];
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    let pi: Vec<Rational> = a.into_iter().map(|row| row[n].clone()).collect();
    if pi.iter().any(|p| p.is_negative()) {
        return None;
    }
    Some(pi)
}

/// A probability vector with exact rational weights summing to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistribution {
    weights: Vec<Rational>,
}

impl ExactDistribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::BadDistribution("negative exact weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::BadDistribution(format!("exact weights sum to {}", fmt_pq(&total))));
        }
        Ok(ExactDistribution { weights })
    }

    /// Normalizes nonnegative masses with a positive total.
    pub fn normalized(masses: Vec<Rational>) -> Option<Self> {
        let total: Rational = masses.iter().sum();
        if !total.is_positive() {
            return None;
        }
        Some(ExactDistribution { weights: masses.into_iter().map(|m| m / &total).collect() })
    }

    pub fn uniform(n: usize) -> Self {
        ExactDistribution { weights: vec![ratio(1, n as i64); n] }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl Serialize for ExactDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.weights.iter().map(fmt_pq))
    }
}

/// Serde adapter writing a [`Rational`] as a `"p/q"` string.
pub mod pq {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_pq(r))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// A probability written either as a JSON number or as a `"p/q"` string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProbEntry {
    Number(f64),
    Text(String),
}

impl ProbEntry {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            ProbEntry::Number(x) => Ok(*x),
            ProbEntry::Text(s) => parse_rational(s).map(|r| to_f64(&r)),
        }
    }

    /// Exact value, if the entry is a rational string or a decimal that
    /// [`exactify`] accepts.
    pub fn to_exact(&self) -> Result<Option<Rational>> {
        match self {
            ProbEntry::Number(x) => Ok(exactify(*x)),
            ProbEntry::Text(s) => parse_rational(s).map(Some),
        }
    }
}
