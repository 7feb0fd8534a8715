//! Exact rationals over arbitrary-precision integers.
//!
//! [`Rational`] is `num_rational::BigRational`, which keeps values in lowest
//! terms with a positive denominator. The helpers here cover construction,
//! exact summation and the `{num, den}` serialization used in documents.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(num: BigUint, den: BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `2^-k` as an exact rational.
pub fn pow2_inv(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Sums many rationals without normalising after every addition.
///
/// Terms are bucketed by denominator, so sums whose terms share a handful of
/// denominators (the common case for enumeration counts) cost one gcd per
/// bucket instead of one per term.
#[derive(Default, Debug, Clone)]
pub struct ExactSum {
    buckets: BTreeMap<BigInt, BigInt>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, r: &Rational) {
        if r.is_zero() {
            return;
        }
        *self.buckets.entry(r.denom().clone()).or_default() += r.numer();
    }

    pub fn add_scaled(&mut self, r: &Rational, times: u64) {
        if r.is_zero() || times == 0 {
            return;
        }
        *self.buckets.entry(r.denom().clone()).or_default() += r.numer() * BigInt::from(times);
    }

    pub fn total(self) -> Rational {
        let mut lcm = BigInt::one();
        for den in self.buckets.keys() {
            lcm = lcm.lcm(den);
        }
        let mut num = BigInt::zero();
        for (den, n) in self.buckets {
            num += n * (&lcm / den);
        }
        Rational::new(num, lcm)
    }
}

impl<'a> Extend<&'a Rational> for ExactSum {
    fn extend<T: IntoIterator<Item = &'a Rational>>(&mut self, iter: T) {
        for r in iter {
            self.add(r);
        }
    }
}

/// Wire form of a rational: decimal-integer numerator and denominator.
#[derive(Serialize, Deserialize)]
struct Pair {
    num: String,
    den: String,
}

pub(crate) fn parse_pair(num: &str, den: &str) -> Result<Rational, String> {
    let num: BigInt = num.parse().map_err(|_| format!("invalid numerator {num:?}"))?;
    let den: BigInt = den.parse().map_err(|_| format!("invalid denominator {den:?}"))?;
    if !den.is_positive() {
        return Err(format!("denominator must be positive, got {den}"));
    }
    Ok(Rational::new(num, den))
}

/// `#[serde(with = "fraction")]` for `Rational` fields.
pub mod fraction {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Pair { num: r.numer().to_string(), den: r.denom().to_string() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let p = Pair::deserialize(d)?;
        parse_pair(&p.num, &p.den).map_err(serde::de::Error::custom)
    }
}

/// Report form: exact pair plus a decimal value labelled approximate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExactRepr", into = "ExactRepr")]
pub struct Exact(pub Rational);

#[derive(Serialize, Deserialize)]
struct ExactRepr {
    num: String,
    den: String,
    #[serde(default, skip_deserializing)]
    approx: f64,
}

impl From<Exact> for ExactRepr {
    fn from(e: Exact) -> Self {
        ExactRepr { num: e.0.numer().to_string(), den: e.0.denom().to_string(), approx: to_f64(&e.0) }
    }
}

impl TryFrom<ExactRepr> for Exact {
    type Error = String;
    fn try_from(r: ExactRepr) -> Result<Self, String> {
        parse_pair(&r.num, &r.den).map(Exact)
    }
}

impl From<Rational> for Exact {
    fn from(r: Rational) -> Self {
        Exact(r)
    }
}

/// Accepts `"1/3"`, `"2"` or `"0.25"` (finite decimals only).
pub fn parse(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        return parse_pair(n.trim(), d.trim());
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let digits = format!("{whole}{frac}");
        let num: BigInt = digits.parse().map_err(|_| format!("invalid rational {text:?}"))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(num, den));
    }
    let num: BigInt = t.parse().map_err(|_| format!("invalid rational {text:?}"))?;
    Ok(Rational::from_integer(num))
}
