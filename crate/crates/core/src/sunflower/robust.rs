use num_traits::{One, Zero};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_log2_budget, Error, Result};
use crate::rational::{self, Exact, Rational};
use crate::rng;
use crate::sunflower::SetFamily;

/// Largest number of relevant elements enumerated in exact mode.
pub const EXACT_RELEVANT_LIMIT: u32 = 24;

/// Confidence of Monte-Carlo intervals is `1 - MC_DELTA`.
pub const MC_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobustMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Failure {
    Exact { failure: Exact },
    /// Hoeffding interval; approximate and reporting-only.
    MonteCarlo { estimate_approx: f64, lo_approx: f64, hi_approx: f64, samples: u64, confidence: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessVerdict {
    pub kernel: Vec<usize>,
    pub alpha: Exact,
    #[serde(flatten)]
    pub failure: Failure,
    /// `K ∈ F`, which the definition excludes.
    pub kernel_in_family: bool,
    /// `|(∪F) \ K|`.
    pub relevant: usize,
}

impl RobustnessVerdict {
    pub fn exact_failure(&self) -> Option<&Rational> {
        match &self.failure {
            Failure::Exact { failure } => Some(&failure.0),
            Failure::MonteCarlo { .. } => None,
        }
    }

    /// `failure <= beta` and `K ∉ F`. Monte-Carlo verdicts count only when
    /// the whole interval lies below `beta`.
    pub fn is_robust(&self, beta: &Rational) -> bool {
        !self.kernel_in_family
            && match &self.failure {
                Failure::Exact { failure } => failure.0 <= *beta,
                Failure::MonteCarlo { hi_approx, .. } => *hi_approx <= rational::to_f64(beta),
            }
    }
}

fn check_alpha(alpha: &Rational) -> Result<()> {
    if rational::in_unit_interval(alpha) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("alpha = {alpha} is not in [0, 1]")))
    }
}

pub fn robustness(family: &SetFamily, alpha: &Rational, mode: &RobustMode) -> Result<RobustnessVerdict> {
    if family.is_empty() {
        return Err(Error::Precondition("robustness of an empty family".into()));
    }
    check_alpha(alpha)?;
    let kernel = family.kernel();
    let relevant = family.union() & !kernel;
    let failure = match mode {
        RobustMode::Exact => Failure::Exact { failure: Exact(failure_over(family.sets(), kernel, relevant, alpha)?) },
        RobustMode::MonteCarlo { samples, seed } => monte_carlo(family.sets(), kernel, relevant, alpha, *samples, *seed),
    };
    Ok(RobustnessVerdict {
        kernel: SetFamily::elements(kernel),
        alpha: Exact(alpha.clone()),
        failure,
        kernel_in_family: family.contains(kernel),
        relevant: relevant.count_ones() as usize,
    })
}

/// Exact failure against a prescribed kernel `K`, which need not be `∩F`.
pub fn failure_given_kernel(family: &SetFamily, kernel: u64, alpha: &Rational) -> Result<Rational> {
    check_alpha(alpha)?;
    failure_over(family.sets(), kernel, family.union() & !kernel, alpha)
}

/// Exact failure with `R` drawn over an arbitrary element mask `universe`.
/// Elements outside `∪F` do not change the result.
pub fn failure_over_universe(family: &SetFamily, kernel: u64, alpha: &Rational, universe: u64) -> Result<Rational> {
    check_alpha(alpha)?;
    failure_over(family.sets(), kernel, universe & !kernel, alpha)
}

/// `Pr[at least k members lie inside R ∪ K]` with `R` over `(∪F) \ K` at
/// density `alpha`.
pub fn petal_count_probability(family: &SetFamily, kernel: u64, k: usize, alpha: &Rational) -> Result<Rational> {
    check_alpha(alpha)?;
    let universe = family.union() & !kernel;
    let needs = compact_needs(family.sets(), kernel, universe);
    let counts = count_by_weight(universe, |r| needs.iter().filter(|&&s| s & !r == 0).count() >= k)?;
    Ok(weigh(&counts, alpha))
}

fn failure_over(sets: &[u64], kernel: u64, universe: u64, alpha: &Rational) -> Result<Rational> {
    let needs = compact_needs(sets, kernel, universe);
    let counts = count_by_weight(universe, |r| !needs.iter().any(|&s| s & !r == 0))?;
    Ok(weigh(&counts, alpha))
}

/// Each `S \ K` inside `universe`, re-indexed onto `universe`'s bits.
/// Sets with an element outside `universe ∪ K` can never be covered and are
/// dropped.
fn compact_needs(sets: &[u64], kernel: u64, universe: u64) -> Vec<u64> {
    sets.iter()
        .map(|&s| s & !kernel)
        .filter(|&s| s & !universe == 0)
        .map(|s| compact(s, universe))
        .collect()
}

fn compact(s: u64, universe: u64) -> u64 {
    let (mut out, mut t, mut u) = (0u64, 0, universe);
    while u != 0 {
        let low = u & u.wrapping_neg();
        if s & low != 0 {
            out |= 1 << t;
        }
        t += 1;
        u &= u - 1;
    }
    out
}

/// `counts[j]`: subsets `r` of the compacted universe with `|r| = j` and
/// `pred(r)`.
fn count_by_weight(universe: u64, pred: impl Fn(u64) -> bool + Sync) -> Result<Vec<u64>> {
    let e = universe.count_ones() as usize;
    check_log2_budget("relevant elements", e, EXACT_RELEVANT_LIMIT)?;
    let block_log2 = e.min(14);
    let blocks = 1u64 << (e - block_log2);
    Ok((0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut counts = vec![0u64; e + 1];
            for r in b << block_log2..(b + 1) << block_log2 {
                if pred(r) {
                    counts[r.count_ones() as usize] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; e + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

/// `sum_j counts[j] alpha^j (1 - alpha)^(e - j)`.
fn weigh(counts: &[u64], alpha: &Rational) -> Rational {
    let e = counts.len() - 1;
    let beta = Rational::one() - alpha;
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| Rational::from_integer(c.into()) * rational::pow(alpha, j) * rational::pow(&beta, e - j))
        .fold(Rational::zero(), |acc, x| acc + x)
}

fn monte_carlo(sets: &[u64], kernel: u64, universe: u64, alpha: &Rational, samples: u64, seed: u64) -> Failure {
    let p = rational::to_f64(alpha);
    let needs: Vec<u64> = sets.iter().map(|&s| s & !kernel).collect();
    let failures: u64 = rng::chunks(samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = rng::stream(seed, c);
            (0..len)
                .filter(|_| {
                    let mut present = 0u64;
                    let mut u = universe;
                    while u != 0 {
                        let low = u & u.wrapping_neg();
                        if r.random::<f64>() < p {
                            present |= low;
                        }
                        u &= u - 1;
                    }
                    !needs.iter().any(|&s| s & !present == 0)
                })
                .count() as u64
        })
        .sum();
    let (estimate, half) = if samples == 0 {
        (0.5, 0.5)
    } else {
        (failures as f64 / samples as f64, ((2.0 / MC_DELTA).ln() / (2.0 * samples as f64)).sqrt())
    };
    Failure::MonteCarlo {
        estimate_approx: estimate,
        lo_approx: (estimate - half).max(0.0),
        hi_approx: (estimate + half).min(1.0),
        samples,
        confidence: 1.0 - MC_DELTA,
    }
}
