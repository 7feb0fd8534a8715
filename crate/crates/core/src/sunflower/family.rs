use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distinct subsets of `[u]`, `u <= 64`, stored as bitmasks with element
/// `i` at bit `i - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct SetFamily {
    u: usize,
    sets: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    u: usize,
    sets: Vec<Vec<usize>>,
}

impl TryFrom<FamilyRepr> for SetFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        SetFamily::from_sets(r.u, r.sets)
    }
}

impl From<SetFamily> for FamilyRepr {
    fn from(f: SetFamily) -> Self {
        FamilyRepr { u: f.u, sets: f.sets.iter().map(|&s| SetFamily::elements(s)).collect() }
    }
}

impl SetFamily {
    pub fn new(u: usize, sets: Vec<u64>) -> Result<Self> {
        if u > 64 {
            return Err(Error::dim(format!("universe of size {u} exceeds the 64-element bitmask")));
        }
        let full = if u == 64 { u64::MAX } else { (1u64 << u) - 1 };
        for (t, &s) in sets.iter().enumerate() {
            if s & !full != 0 {
                return Err(Error::dim(format!("set {} has elements outside 1..={u}", t + 1)));
            }
            if sets[..t].contains(&s) {
                return Err(Error::Precondition(format!("set {:?} appears twice", Self::elements(s))));
            }
        }
        Ok(SetFamily { u, sets })
    }

    pub fn from_sets<I, S>(u: usize, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        let masks = sets
            .into_iter()
            .map(|s| {
                s.into_iter().try_fold(0u64, |acc, i| {
                    if i == 0 || i > u || i > 64 {
                        Err(Error::dim(format!("element {i} outside 1..={u}")))
                    } else {
                        Ok(acc | 1 << (i - 1))
                    }
                })
            })
            .collect::<Result<_>>()?;
        Self::new(u, masks)
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[u64] {
        &self.sets
    }

    /// Ascending elements of a mask.
    pub fn elements(mask: u64) -> Vec<usize> {
        (1..=64).filter(|i| mask >> (i - 1) & 1 == 1).collect()
    }

    pub fn mask(elements: &[usize]) -> u64 {
        elements.iter().fold(0, |acc, &i| acc | 1 << (i - 1))
    }

    /// `∩F`; the empty mask for an empty family.
    pub fn kernel(&self) -> u64 {
        match self.sets.split_first() {
            Some((first, rest)) => rest.iter().fold(*first, |acc, s| acc & s),
            None => 0,
        }
    }

    pub fn union(&self) -> u64 {
        self.sets.iter().fold(0, |acc, s| acc | s)
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.sets.contains(&mask)
    }

    /// The members at the given 0-based positions.
    pub fn subfamily(&self, positions: &[usize]) -> SetFamily {
        SetFamily { u: self.u, sets: positions.iter().map(|&t| self.sets[t]).collect() }
    }
}
