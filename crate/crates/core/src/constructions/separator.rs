use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sunflower::SetFamily;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparatorRun {
    /// Picked elements in pick order.
    pub picks: Vec<usize>,
    /// `max(1, ceil(log_{3/2} K))`.
    pub size_bound: usize,
    /// Whether `6 * |S| < n` held, the round budget assumed by the analysis.
    pub within_round_budget: bool,
}

/// Smallest `t` with `(3/2)^t >= k`.
pub fn ceil_log_three_halves(k: usize) -> usize {
    let (mut lhs, mut rhs) = (BigUint::from(1u8), BigUint::from(k));
    let mut t = 0;
    while lhs < rhs {
        lhs *= 3u8;
        rhs *= 2u8;
        t += 1;
    }
    t
}

/// Repeatedly picks the smallest element lying in at least a third of the
/// surviving sets and discards the sets it hits.
pub fn greedy_separator(family: &SetFamily) -> Result<SeparatorRun> {
    let n = family.u();
    if family.is_empty() {
        return Err(Error::Precondition("separator needs a non-empty family".into()));
    }
    if let Some(s) = family.sets().iter().find(|s| (3 * s.count_ones() as usize) < n) {
        return Err(Error::Precondition(format!(
            "member {:?} has fewer than n/3 = {n}/3 elements",
            SetFamily::elements(*s)
        )));
    }
    let mut surviving: Vec<u64> = family.sets().to_vec();
    let mut picks = Vec::new();
    while !surviving.is_empty() {
        let j = (1..=n)
            .find(|&j| 3 * surviving.iter().filter(|&&s| s >> (j - 1) & 1 == 1).count() >= surviving.len())
            .ok_or_else(|| Error::Invariant(format!("no element hits a third of {} surviving sets", surviving.len())))?;
        picks.push(j);
        surviving.retain(|&s| s >> (j - 1) & 1 == 0);
    }
    let size_bound = ceil_log_three_halves(family.len()).max(1);
    if picks.len() > size_bound {
        return Err(Error::Invariant(format!("separator has {} elements, bound {size_bound}", picks.len())));
    }
    Ok(SeparatorRun { within_round_budget: 6 * picks.len() < n, size_bound, picks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn triangle() {
        let f = SetFamily::from_sets(3, [vec![1, 2], vec![2, 3], vec![1, 3]]).unwrap();
        let run = greedy_separator(&f).unwrap();
        assert_eq!(run.picks, vec![1, 2]);
        assert_eq!(run.size_bound, 3);
        assert!(!run.within_round_budget);
    }

    #[test]
    fn single_set() {
        let f = SetFamily::from_sets(6, [vec![3, 4, 6]]).unwrap();
        assert_eq!(greedy_separator(&f).unwrap().picks, vec![3]);
    }

    #[test]
    fn log_values() {
        assert_eq!(ceil_log_three_halves(1), 0);
        assert_eq!(ceil_log_three_halves(2), 2);
        assert_eq!(ceil_log_three_halves(3), 3);
        assert_eq!(ceil_log_three_halves(50), 10);
    }

    #[test]
    fn random_families_hit_and_stay_small() {
        let mut r = crate::rng::stream(11, 0);
        for _ in 0..100 {
            let mut sets = std::collections::BTreeSet::new();
            while sets.len() < 50 {
                let mut s = 0u64;
                while s.count_ones() < 10 + r.random_range(0..10) {
                    s |= 1 << r.random_range(0..30);
                }
                sets.insert(s);
            }
            let f = SetFamily::new(30, sets.into_iter().collect()).unwrap();
            let run = greedy_separator(&f).unwrap();
            let mask: u64 = run.picks.iter().map(|j| 1u64 << (j - 1)).sum();
            assert!(f.sets().iter().all(|s| s & mask != 0));
            assert!(run.picks.len() <= ceil_log_three_halves(50));
        }
    }

    #[test]
    fn rejects_small_members() {
        let f = SetFamily::from_sets(9, [vec![1, 2]]).unwrap();
        assert!(matches!(greedy_separator(&f), Err(Error::Precondition(_))));
    }
}
