//! Fixed-length bit vectors indexed from 1.
//!
//! Position 1 is the leftmost character of the serialized form and is kept in
//! the most significant bit of the first word, so the derived ordering on
//! equal-length strings is the lexicographic order of their text.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn locate(i: usize) -> (usize, u64) {
    let z = i - 1;
    (z / 64, 1u64 << (63 - (z % 64)))
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for i in 1..=len {
            s.set(i, true);
        }
        s
    }

    /// The unit vector `e_i` of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut s = Self::zeros(len);
        s.set(i, true);
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut s = Self::zeros(bits.len());
        for (z, b) in bits.into_iter().enumerate() {
            if b {
                s.set(z + 1, true);
            }
        }
        s
    }

    /// Decodes an enumeration index: position `i` holds bit `i - 1` of `index`.
    pub fn from_index(len: usize, index: u64) -> Self {
        debug_assert!(len <= 64);
        let mut s = Self::zeros(len);
        for i in 1..=len {
            if (index >> (i - 1)) & 1 == 1 {
                s.set(i, true);
            }
        }
        s
    }

    /// Same layout as [`BitString::from_index`] for up to 128 positions.
    pub fn from_index_u128(len: usize, index: u128) -> Self {
        debug_assert!(len <= 128);
        let mut s = Self::zeros(len);
        for i in 1..=len {
            if (index >> (i - 1)) & 1 == 1 {
                s.set(i, true);
            }
        }
        s
    }

    /// Inverse of [`BitString::from_index`]; `None` beyond 64 positions.
    pub fn to_index(&self) -> Option<u64> {
        if self.len > 64 {
            return None;
        }
        Some(self.ones_positions().fold(0u64, |acc, i| acc | (1 << (i - 1))))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        let (w, m) = locate(i);
        self.words[w] & m != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        let (w, m) = locate(i);
        if value {
            self.words[w] |= m;
        } else {
            self.words[w] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        let (w, m) = locate(i);
        assert!(i >= 1 && i <= self.len);
        self.words[w] ^= m;
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.flip(i);
        s
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |i| self.get(i))
    }

    /// Positions holding a 1, ascending.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let lz = rest.leading_zeros() as usize;
                rest &= !(1u64 << (63 - lz));
                Some(w * 64 + lz + 1)
            })
        })
    }

    /// Restriction to the first `ell` positions.
    pub fn prefix(&self, ell: usize) -> Self {
        assert!(ell <= self.len);
        Self::from_bits((1..=ell).map(|i| self.get(i)))
    }

    pub fn is_unit(&self) -> Option<usize> {
        let mut it = self.ones_positions();
        match (it.next(), it.next()) {
            (Some(i), None) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All `k`-subsets of `{1..=n}`, each ascending, in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((1..=k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - (k - 1 - i) {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}
