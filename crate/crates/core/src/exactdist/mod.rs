//! Exact distributions over `{0,1}^n`, slice distributions `U_S^n`, and
//! exact total-variation distance.

mod fkg;

pub use fkg::{fkg_check, FkgVerdict, FKG_UNIVERSE_LIMIT};

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{k_subsets, BitString};
use crate::error::{Error, Result};
use crate::rational::{self, ExactSum, Rational};

/// Largest support an explicit distribution may hold.
pub const MAX_SUPPORT_LOG2: u32 = 24;

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `binom(n, S) = sum_{i in S} C(n, i)`.
pub fn binomial_sum<'a>(n: usize, weights: impl IntoIterator<Item = &'a usize>) -> BigUint {
    weights.into_iter().map(|&i| binomial(n, i)).sum()
}

/// The uniform distribution over strings of length `n` whose weight lies in
/// `weights`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SliceRepr", into = "SliceRepr")]
pub struct SliceSpec {
    n: usize,
    weights: BTreeSet<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceRepr {
    n: usize,
    weights: Vec<usize>,
}

impl TryFrom<SliceRepr> for SliceSpec {
    type Error = Error;
    fn try_from(r: SliceRepr) -> Result<Self> {
        SliceSpec::new(r.n, r.weights)
    }
}

impl From<SliceSpec> for SliceRepr {
    fn from(s: SliceSpec) -> Self {
        SliceRepr { n: s.n, weights: s.weights.into_iter().collect() }
    }
}

impl SliceSpec {
    pub fn new(n: usize, weights: impl IntoIterator<Item = usize>) -> Result<Self> {
        let weights: BTreeSet<usize> = weights.into_iter().collect();
        if n == 0 {
            return Err(Error::dim("slice length must be positive"));
        }
        if weights.is_empty() {
            return Err(Error::dim("slice weight set is empty"));
        }
        if let Some(&w) = weights.iter().find(|&&w| w > n) {
            return Err(Error::dim(format!("weight {w} outside 0..={n}")));
        }
        Ok(SliceSpec { n, weights })
    }

    /// `U_k^n`.
    pub fn single(n: usize, k: usize) -> Result<Self> {
        Self::new(n, [k])
    }

    /// Uniform over even-weight strings of length `n`.
    pub fn even(n: usize) -> Result<Self> {
        Self::new(n, (0..=n).step_by(2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &BTreeSet<usize> {
        &self.weights
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.weights.contains(&x.weight())
    }

    /// Number of strings in the support.
    pub fn size(&self) -> BigUint {
        binomial_sum(self.n, &self.weights)
    }

    /// Mass of a single support string.
    pub fn point_mass(&self) -> Rational {
        rational::from_biguint(BigUint::one(), self.size())
    }

    /// `Pr[U_S^n = x]`.
    pub fn prob(&self, x: &BitString) -> Result<Rational> {
        if x.len() != self.n {
            return Err(Error::dim(format!("string of length {} against slice over length {}", x.len(), self.n)));
        }
        Ok(if self.contains(x) { self.point_mass() } else { Rational::zero() })
    }

    /// Explicit form; rejected when the support exceeds `2^limit_log2`.
    pub fn materialize(&self, limit_log2: u32) -> Result<ExactDistribution> {
        let size = self.size();
        if size > (BigUint::one() << limit_log2) {
            return Err(Error::budget("slice materialisation", size, format_args!("2^{limit_log2}")));
        }
        let mass = self.point_mass();
        let mut entries = BTreeMap::new();
        for &w in &self.weights {
            for ones in k_subsets(self.n, w) {
                let mut x = BitString::zeros(self.n);
                for i in ones {
                    x.set(i, true);
                }
                entries.insert(x, mass.clone());
            }
        }
        Ok(ExactDistribution { n: self.n, mass: entries })
    }
}

/// Sparse exact probability mass over `{0,1}^n`. Only the support is stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct ExactDistribution {
    n: usize,
    mass: BTreeMap<BitString, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistRepr {
    n: usize,
    entries: Vec<EntryRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRepr {
    x: BitString,
    num: String,
    den: String,
}

impl TryFrom<DistRepr> for ExactDistribution {
    type Error = Error;
    fn try_from(r: DistRepr) -> Result<Self> {
        let entries = r
            .entries
            .into_iter()
            .map(|e| rational::parse_pair(&e.num, &e.den).map(|p| (e.x, p)).map_err(Error::Parse))
            .collect::<Result<Vec<_>>>()?;
        ExactDistribution::new(r.n, entries)
    }
}

impl From<ExactDistribution> for DistRepr {
    fn from(d: ExactDistribution) -> Self {
        let entries = d
            .mass
            .into_iter()
            .map(|(x, p)| EntryRepr { x, num: p.numer().to_string(), den: p.denom().to_string() })
            .collect();
        DistRepr { n: d.n, entries }
    }
}

fn check_support_size(len: usize) -> Result<()> {
    if len as u64 > 1u64 << MAX_SUPPORT_LOG2 {
        return Err(Error::budget("distribution support", len, format_args!("2^{MAX_SUPPORT_LOG2}")));
    }
    Ok(())
}

impl ExactDistribution {
    /// Validates lengths, non-negativity, uniqueness and total mass 1.
    /// Zero-mass entries are dropped.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (BitString, Rational)>) -> Result<Self> {
        let mut mass = BTreeMap::new();
        let mut total = ExactSum::new();
        for (x, p) in entries {
            if x.len() != n {
                return Err(Error::dim(format!("entry {x} has length {}, expected {n}", x.len())));
            }
            if p.is_negative() {
                return Err(Error::Precondition(format!("negative mass {p} at {x}")));
            }
            total.add(&p);
            if p.is_zero() {
                continue;
            }
            if mass.insert(x.clone(), p).is_some() {
                return Err(Error::Precondition(format!("duplicate entry {x}")));
            }
            check_support_size(mass.len())?;
        }
        let total = total.total();
        if !total.is_one() {
            return Err(Error::Precondition(format!("masses sum to {total}, expected 1")));
        }
        Ok(ExactDistribution { n, mass })
    }

    /// Mass `count / total` for every counted string.
    pub fn from_counts(n: usize, counts: impl IntoIterator<Item = (BitString, u64)>, total: u64) -> Result<Self> {
        let total = BigInt::from(total);
        Self::new(n, counts.into_iter().map(|(x, c)| (x, Rational::new(BigInt::from(c), total.clone()))))
    }

    /// Like [`from_counts`](Self::from_counts) with `total = 2^log2_total`.
    pub fn from_counts_pow2(n: usize, counts: impl IntoIterator<Item = (BitString, u64)>, log2_total: usize) -> Result<Self> {
        let total = BigInt::one() << log2_total;
        Self::new(n, counts.into_iter().map(|(x, c)| (x, Rational::new(BigInt::from(c), total.clone()))))
    }

    pub fn point(x: BitString) -> Self {
        let n = x.len();
        let mut mass = BTreeMap::new();
        mass.insert(x, Rational::one());
        ExactDistribution { n, mass }
    }

    /// Uniform over a non-empty set of equal-length strings.
    pub fn uniform<I: IntoIterator<Item = BitString>>(n: usize, support: I) -> Result<Self> {
        let set: BTreeSet<BitString> = support.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Precondition("uniform distribution over an empty set".into()));
        }
        let p = Rational::new(BigInt::one(), BigInt::from(set.len()));
        Self::new(n, set.into_iter().map(|x| (x, p.clone())))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn prob(&self, x: &BitString) -> Rational {
        self.mass.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &Rational)> {
        self.mass.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &BitString> {
        self.mass.keys()
    }

    /// Pushforward through `map`; all images must share one length.
    pub fn map(&self, out_len: usize, map: impl Fn(&BitString) -> BitString) -> Result<Self> {
        let mut out: BTreeMap<BitString, ExactSum> = BTreeMap::new();
        for (x, p) in &self.mass {
            let y = map(x);
            if y.len() != out_len {
                return Err(Error::dim(format!("image {y} has length {}, expected {out_len}", y.len())));
            }
            out.entry(y).or_default().add(p);
        }
        Ok(ExactDistribution { n: out_len, mass: out.into_iter().map(|(y, s)| (y, s.total())).collect() })
    }

    /// Distribution of the first `ell` coordinates.
    pub fn marginal_prefix(&self, ell: usize) -> Result<Self> {
        if ell == 0 || ell > self.n {
            return Err(Error::dim(format!("prefix length {ell} outside 1..={}", self.n)));
        }
        self.map(ell, |x| x.prefix(ell))
    }

    /// `Pr[X_i = 1]` for every position `i`, indexed from 0.
    pub fn one_marginals(&self) -> Vec<Rational> {
        let mut sums = vec![ExactSum::new(); self.n];
        for (x, p) in &self.mass {
            for i in x.ones_positions() {
                sums[i - 1].add(p);
            }
        }
        sums.into_iter().map(ExactSum::total).collect()
    }
}

/// Either side of a distance computation.
#[derive(Debug, Clone, Copy)]
pub enum DistRef<'a> {
    Exact(&'a ExactDistribution),
    Slice(&'a SliceSpec),
}

impl<'a> DistRef<'a> {
    pub fn n(&self) -> usize {
        match self {
            DistRef::Exact(d) => d.n,
            DistRef::Slice(s) => s.n,
        }
    }
}

impl<'a> From<&'a ExactDistribution> for DistRef<'a> {
    fn from(d: &'a ExactDistribution) -> Self {
        DistRef::Exact(d)
    }
}

impl<'a> From<&'a SliceSpec> for DistRef<'a> {
    fn from(s: &'a SliceSpec) -> Self {
        DistRef::Slice(s)
    }
}

/// Combined support two slice arguments may enumerate.
pub const SLICE_PAIR_LOG2: u32 = 24;

/// Exact total-variation distance `1 - sum_x min(p(x), q(x))`.
///
/// An explicit distribution against a slice only visits the explicit
/// support; two slices are materialised, subject to [`SLICE_PAIR_LOG2`].
/// Use [`slice_union_distance`] for the closed form on nested slices.
pub fn tv_distance<'a, 'b>(a: impl Into<DistRef<'a>>, b: impl Into<DistRef<'b>>) -> Result<Rational> {
    let (a, b) = (a.into(), b.into());
    if a.n() != b.n() {
        return Err(Error::dim(format!("distributions over lengths {} and {}", a.n(), b.n())));
    }
    let overlap = match (a, b) {
        (DistRef::Exact(p), DistRef::Exact(q)) => overlap_exact(p, q),
        (DistRef::Exact(p), DistRef::Slice(s)) | (DistRef::Slice(s), DistRef::Exact(p)) => overlap_slice(p, s),
        (DistRef::Slice(s), DistRef::Slice(t)) => {
            let combined = s.size() + t.size();
            if combined > BigUint::one() << SLICE_PAIR_LOG2 {
                return Err(Error::budget(
                    "slice-vs-slice enumeration",
                    combined,
                    format_args!("2^{SLICE_PAIR_LOG2}"),
                ));
            }
            let (p, q) = (s.materialize(SLICE_PAIR_LOG2)?, t.materialize(SLICE_PAIR_LOG2)?);
            overlap_exact(&p, &q)
        }
    };
    Ok(Rational::one() - overlap)
}

fn overlap_exact(p: &ExactDistribution, q: &ExactDistribution) -> Rational {
    let (small, large) = if p.mass.len() <= q.mass.len() { (p, q) } else { (q, p) };
    let mut acc = ExactSum::new();
    for (x, px) in &small.mass {
        if let Some(qx) = large.mass.get(x) {
            acc.add(px.min(qx));
        }
    }
    acc.total()
}

fn overlap_slice(p: &ExactDistribution, s: &SliceSpec) -> Rational {
    let q = s.point_mass();
    let mut capped = 0u64;
    let mut acc = ExactSum::new();
    for (x, px) in &p.mass {
        if s.contains(x) {
            if *px >= q {
                capped += 1;
            } else {
                acc.add(px);
            }
        }
    }
    acc.add_scaled(&q, capped);
    acc.total()
}

/// `Pr[Y = y]` where `Y` is the first `ell` bits of `U_k^n`.
pub fn slice_marginal_prob(n: usize, k: usize, ell: usize, y: &BitString) -> Result<Rational> {
    if ell == 0 || ell > n {
        return Err(Error::dim(format!("prefix length {ell} outside 1..={n}")));
    }
    if k > n {
        return Err(Error::dim(format!("slice weight {k} exceeds length {n}")));
    }
    if y.len() != ell {
        return Err(Error::dim(format!("prefix string has length {}, expected {ell}", y.len())));
    }
    let w = y.weight();
    if w > k || k - w > n - ell {
        return Ok(Rational::zero());
    }
    Ok(rational::from_biguint(binomial(n - ell, k - w), binomial(n, k)))
}

/// `Delta(U_k^n, U_S^n)` for `k = max S`, via
/// `binom(n, S \ {k}) / binom(n, S)`.
pub fn slice_union_distance(n: usize, weights: &BTreeSet<usize>) -> Result<Rational> {
    let Some(&k) = weights.iter().next_back() else {
        return Err(Error::dim("weight set is empty"));
    };
    if k > n {
        return Err(Error::dim(format!("weight {k} exceeds length {n}")));
    }
    let total = binomial_sum(n, weights);
    let rest = binomial_sum(n, weights.iter().filter(|&&w| w != k));
    Ok(rational::from_biguint(rest, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn slice_prob_examples() {
        let u24 = SliceSpec::single(4, 2).unwrap();
        assert_eq!(u24.prob(&bs("0110")).unwrap(), ratio(1, 6));
        let zero = SliceSpec::single(5, 0).unwrap();
        assert_eq!(zero.prob(&BitString::zeros(5)).unwrap(), ratio(1, 1));
        let u13 = SliceSpec::single(3, 1).unwrap();
        assert_eq!(u13.prob(&bs("110")).unwrap(), ratio(0, 1));
        assert!(matches!(u13.prob(&bs("10")), Err(Error::Dimension(_))));
    }

    #[test]
    fn tv_examples() {
        let u12 = SliceSpec::single(2, 1).unwrap();
        let point = ExactDistribution::point(bs("10"));
        assert_eq!(tv_distance(&u12, &point).unwrap(), ratio(1, 2));
        assert_eq!(tv_distance(&point, &u12).unwrap(), ratio(1, 2));
        assert_eq!(tv_distance(&point, &point).unwrap(), ratio(0, 1));

        let even = ExactDistribution::uniform(3, ["000", "011", "110", "101"].map(bs)).unwrap();
        let even_slice = SliceSpec::even(3).unwrap();
        assert_eq!(tv_distance(&even, &even_slice).unwrap(), ratio(0, 1));
        assert_eq!(tv_distance(&even_slice, &even_slice).unwrap(), ratio(0, 1));
    }

    #[test]
    fn tv_rejects_length_mismatch_and_large_slice_pairs() {
        let a = SliceSpec::single(3, 1).unwrap();
        let b = ExactDistribution::point(bs("10"));
        assert!(matches!(tv_distance(&a, &b), Err(Error::Dimension(_))));
        let big = SliceSpec::single(40, 20).unwrap();
        assert!(matches!(tv_distance(&big, &big), Err(Error::Budget(_))));
    }

    #[test]
    fn distribution_validation() {
        assert!(ExactDistribution::new(2, [(bs("10"), ratio(1, 2))]).is_err());
        assert!(ExactDistribution::new(2, [(bs("10"), ratio(3, 2)), (bs("01"), ratio(-1, 2))]).is_err());
        assert!(ExactDistribution::new(2, [(bs("1"), ratio(1, 1))]).is_err());
        let d = ExactDistribution::new(2, [(bs("10"), ratio(1, 1)), (bs("01"), ratio(0, 1))]).unwrap();
        assert_eq!(d.support_len(), 1);
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(slice_marginal_prob(3, 1, 2, &bs("00")).unwrap(), ratio(1, 3));
        assert_eq!(slice_marginal_prob(3, 1, 2, &bs("10")).unwrap(), ratio(1, 3));
        assert_eq!(slice_marginal_prob(3, 1, 2, &bs("11")).unwrap(), ratio(0, 1));
        assert!(slice_marginal_prob(3, 1, 0, &BitString::zeros(0)).is_err());
        assert!(slice_marginal_prob(3, 4, 2, &bs("00")).is_err());
    }

    #[test]
    fn marginals_sum_to_one() {
        for n in 1..=12usize {
            for k in 0..=n {
                for ell in 1..=n {
                    let mut s = ExactSum::new();
                    for y in 0..(1u64 << ell) {
                        s.add(&slice_marginal_prob(n, k, ell, &BitString::from_index(ell, y)).unwrap());
                    }
                    assert!(s.total().is_one(), "n={n} k={k} ell={ell}");
                }
            }
        }
    }

    #[test]
    fn marginal_matches_materialised_prefix() {
        let u = SliceSpec::single(6, 2).unwrap().materialize(20).unwrap();
        let m = u.marginal_prefix(3).unwrap();
        for y in 0..8 {
            let y = BitString::from_index(3, y);
            assert_eq!(m.prob(&y), slice_marginal_prob(6, 2, 3, &y).unwrap());
        }
    }

    #[test]
    fn union_distance_examples() {
        let s: BTreeSet<usize> = [0, 1].into();
        assert_eq!(slice_union_distance(4, &s).unwrap(), ratio(1, 5));
        let s: BTreeSet<usize> = [3].into();
        assert_eq!(slice_union_distance(9, &s).unwrap(), ratio(0, 1));
        let s: BTreeSet<usize> = [0, 1, 2].into();
        assert_eq!(slice_union_distance(10, &s).unwrap(), ratio(11, 56));
        assert!(slice_union_distance(4, &BTreeSet::new()).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn serialization_shape() {
        let d = ExactDistribution::uniform(2, [bs("10"), bs("01")]).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["entries"][0]["x"], "01");
        assert_eq!(v["entries"][0]["num"], "1");
        assert_eq!(v["entries"][0]["den"], "2");
        let back: ExactDistribution = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }
}
