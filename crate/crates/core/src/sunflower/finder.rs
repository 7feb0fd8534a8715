use serde::{Deserialize, Serialize};

use crate::bits::k_subsets;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sunflower::robust::{robustness, RobustMode, RobustnessVerdict, EXACT_RELEVANT_LIMIT};
use crate::sunflower::SetFamily;

/// Largest family searched by [`Strategy::Exhaustive`].
pub const EXHAUSTIVE_FAMILY_LIMIT: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every subfamily, largest first. A miss is a proof of absence.
    Exhaustive,
    /// Kernels from `∅` and pairwise intersections. A miss proves nothing.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SunflowerWitness {
    /// 1-based positions of the chosen members in the searched family.
    pub members: Vec<usize>,
    pub family: SetFamily,
    pub verdict: RobustnessVerdict,
}

pub fn find_robust_sunflower(
    family: &SetFamily,
    alpha: &Rational,
    beta: &Rational,
    strategy: Strategy,
) -> Result<Option<SunflowerWitness>> {
    match strategy {
        Strategy::Exhaustive => exhaustive(family, alpha, beta),
        Strategy::Heuristic => {
            let mut best: Option<SunflowerWitness> = None;
            for cand in heuristic_candidates(family, alpha)? {
                if !cand.verdict.is_robust(beta) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        cand.members.len() > b.members.len()
                            || (cand.members.len() == b.members.len()
                                && cand.verdict.exact_failure() < b.verdict.exact_failure())
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
            Ok(best)
        }
    }
}

fn exhaustive(family: &SetFamily, alpha: &Rational, beta: &Rational) -> Result<Option<SunflowerWitness>> {
    if family.len() > EXHAUSTIVE_FAMILY_LIMIT {
        return Err(Error::budget("exhaustive sunflower search family size", family.len(), EXHAUSTIVE_FAMILY_LIMIT));
    }
    for size in (2..=family.len()).rev() {
        for members in k_subsets(family.len(), size) {
            let positions: Vec<usize> = members.iter().map(|t| t - 1).collect();
            let sub = family.subfamily(&positions);
            if relevant(&sub) > EXACT_RELEVANT_LIMIT as usize {
                return Err(Error::budget("relevant elements", relevant(&sub), EXACT_RELEVANT_LIMIT));
            }
            let verdict = robustness(&sub, alpha, &RobustMode::Exact)?;
            if verdict.is_robust(beta) {
                return Ok(Some(SunflowerWitness { members, family: sub, verdict }));
            }
        }
    }
    Ok(None)
}

fn relevant(f: &SetFamily) -> usize {
    (f.union() & !f.kernel()).count_ones() as usize
}

/// One candidate per distinct kernel guess `K` in `{∅} ∪ {S ∩ T}`: the
/// members strictly containing `K`, with their exact verdict at `alpha`.
/// Guesses leaving fewer than two members are dropped; duplicate
/// subfamilies are kept once, in first-seen order.
pub fn heuristic_candidates(family: &SetFamily, alpha: &Rational) -> Result<Vec<SunflowerWitness>> {
    let sets = family.sets();
    let mut guesses = vec![0u64];
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let k = sets[a] & sets[b];
            if !guesses.contains(&k) {
                guesses.push(k);
            }
        }
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for k in guesses {
        let positions: Vec<usize> = (0..sets.len()).filter(|&t| sets[t] & k == k && sets[t] != k).collect();
        if positions.len() < 2 || seen.contains(&positions) {
            continue;
        }
        seen.push(positions.clone());
        let sub = family.subfamily(&positions);
        let verdict = robustness(&sub, alpha, &RobustMode::Exact)?;
        out.push(SunflowerWitness { members: positions.iter().map(|t| t + 1).collect(), family: sub, verdict });
    }
    Ok(out)
}
