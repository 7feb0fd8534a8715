//! Executable walk through the `U_1` lower-bound argument for a concrete
//! forest: good outputs, their maximal terms, a common assignment and the
//! sunflower found among the agreeing terms' index sets.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::{tv_distance, SliceSpec};
use crate::localfn::{DecisionForest, Term};
use crate::rational::{self, ratio, Exact, Rational};
use crate::sunflower::finder::{heuristic_candidates, SunflowerWitness};
use crate::sunflower::SetFamily;

/// Density at which the agreeing terms' sunflower candidates are scored.
pub fn default_alpha() -> Rational {
    ratio(1, 4)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxTerm {
    pub output: usize,
    pub indices: Vec<usize>,
    /// The required bits, in index order.
    pub assignment: BitString,
    /// `Pr[X = e_i and Y_N = alpha]`.
    pub prob: Exact,
    pub dnf_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMethod {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub n: usize,
    pub m: usize,
    pub distance: Exact,
    pub eta: Exact,
    pub good: Vec<usize>,
    /// `(1 - eta) / (1/n - 1/n^2)`; absent for `n = 1`.
    pub bad_bound: Option<Exact>,
    pub bad_count: usize,
    pub bad_bound_holds: bool,
    pub max_terms: Vec<MaxTerm>,
    /// Values of the inputs read by some max term, in index order; other
    /// inputs are left free.
    pub rho_inputs: Vec<usize>,
    pub rho: BitString,
    pub rho_method: RhoMethod,
    pub agreeing: Vec<usize>,
    pub sunflower_alpha: Exact,
    /// Best candidate by failure probability, then size; absent when the
    /// agreeing index sets give no candidate with two members.
    pub sunflower: Option<SunflowerWitness>,
}

/// Variables of the common assignment enumerated exactly, as a power of two.
pub const RHO_EXACT_LOG2: u32 = 20;

pub fn u1_lower_bound_diagnostic(f: &DecisionForest, target_n: usize, alpha: &Rational, limit_log2: u32) -> Result<DiagnosticReport> {
    let n = f.n();
    if target_n != n {
        return Err(Error::dim(format!("target length {target_n} but the forest has {n} outputs")));
    }
    let m = f.m();
    check_log2_budget("input enumeration", m, limit_log2)?;
    let x = f.output_distribution_within(limit_log2)?;
    let distance = tv_distance(&x, &SliceSpec::single(n, 1)?)?;
    let eta = Rational::one() - &distance;

    let threshold = ratio(1, (n * n) as i64);
    let good: Vec<usize> = (1..=n).filter(|&i| x.prob(&BitString::unit(n, i)) >= threshold).collect();
    let bad_count = n - good.len();
    let bad_bound = (n > 1).then(|| (Rational::one() - &eta) / (ratio(1, n as i64) - &threshold));
    let bad_bound_holds = bad_bound.as_ref().is_none_or(|b| Rational::from_integer(bad_count.into()) <= *b);

    let max_terms = max_terms(f, &good)?;
    let (rho_inputs, rho, rho_method) = common_assignment(&max_terms)?;
    let agrees = |t: &MaxTerm| {
        t.indices.iter().zip(t.assignment.iter()).all(|(i, b)| {
            let at = rho_inputs.binary_search(i).expect("rho covers term inputs");
            rho.get(at + 1) == b
        })
    };
    let agreeing: Vec<usize> = max_terms.iter().filter(|t| agrees(t)).map(|t| t.output).collect();

    let sunflower = if m <= 64 {
        let mut masks: Vec<u64> = Vec::new();
        for t in max_terms.iter().filter(|t| agreeing.contains(&t.output)) {
            let mask = SetFamily::mask(&t.indices);
            if !masks.contains(&mask) {
                masks.push(mask);
            }
        }
        let family = SetFamily::new(m, masks)?;
        heuristic_candidates(&family, alpha)?.into_iter().min_by(|a, b| {
            a.verdict.exact_failure().cmp(&b.verdict.exact_failure()).then(b.members.len().cmp(&a.members.len()))
        })
    } else {
        None
    };

    Ok(DiagnosticReport {
        n,
        m,
        distance: Exact(distance),
        eta: Exact(eta),
        good,
        bad_bound: bad_bound.map(Exact),
        bad_count,
        bad_bound_holds,
        max_terms,
        rho_inputs,
        rho,
        rho_method,
        agreeing,
        sunflower_alpha: Exact(alpha.clone()),
        sunflower,
    })
}

/// For each good output, the DNF term of its tree with the largest
/// `Pr[X = e_i and term]`, ties to the smallest term.
fn max_terms(f: &DecisionForest, good: &[usize]) -> Result<Vec<MaxTerm>> {
    let m = f.m();
    let dnfs: BTreeMap<usize, Vec<Term>> = good.iter().map(|&i| (i, f.tree(i).to_dnf().terms().to_vec())).collect();
    let mut counts: BTreeMap<usize, Vec<u64>> = dnfs.iter().map(|(&i, t)| (i, vec![0; t.len()])).collect();
    let compiled = f.compile();
    for a in 0..1u64 << m {
        let y = compiled.eval_bits(a);
        let Some(i) = y.is_unit() else { continue };
        let Some(terms) = dnfs.get(&i) else { continue };
        let x = BitString::from_index(m, a);
        // Tree terms are disjoint, so exactly one is satisfied.
        let t = terms.iter().position(|t| t.satisfied_by(&x)).ok_or_else(|| {
            Error::Invariant(format!("no DNF term of output {i} satisfied although it evaluates to 1"))
        })?;
        counts.get_mut(&i).expect("same keys")[t] += 1;
    }
    good.iter()
        .map(|&i| {
            let terms = &dnfs[&i];
            let c = &counts[&i];
            let best = (0..terms.len())
                .max_by(|&a, &b| c[a].cmp(&c[b]).then_with(|| terms[b].cmp(&terms[a])))
                .ok_or_else(|| Error::Invariant(format!("good output {i} has an empty DNF")))?;
            Ok(MaxTerm {
                output: i,
                indices: terms[best].indices(),
                assignment: terms[best].assignment(),
                prob: Exact(Rational::new(c[best].into(), (num_bigint::BigInt::one() << m).into())),
                dnf_size: terms.len(),
            })
        })
        .collect()
}

/// An assignment to the union of term inputs agreeing with as many terms as
/// possible: exhaustive when small, otherwise conditional expectations
/// bit by bit.
fn common_assignment(terms: &[MaxTerm]) -> Result<(Vec<usize>, BitString, RhoMethod)> {
    let mut inputs: Vec<usize> = terms.iter().flat_map(|t| t.indices.iter().copied()).collect();
    inputs.sort_unstable();
    inputs.dedup();
    let local: Vec<Vec<(usize, bool)>> = terms
        .iter()
        .map(|t| t.indices.iter().map(|i| inputs.binary_search(i).unwrap()).zip(t.assignment.iter()).collect())
        .collect();
    let v = inputs.len();
    if v as u32 <= RHO_EXACT_LOG2 {
        let score = |a: u64| local.iter().filter(|lits| lits.iter().all(|&(p, b)| (a >> p & 1 == 1) == b)).count();
        let best = (0..1u64 << v).max_by(|&a, &b| score(a).cmp(&score(b)).then(b.cmp(&a))).unwrap_or(0);
        return Ok((inputs, BitString::from_bits((0..v).map(|p| best >> p & 1 == 1)), RhoMethod::Exact));
    }
    let mut fixed: Vec<Option<bool>> = vec![None; v];
    for p in 0..v {
        let expect = |fixed: &[Option<bool>]| -> Rational {
            local
                .iter()
                .map(|lits| {
                    let mut free = 0;
                    for &(q, b) in lits {
                        match fixed[q] {
                            Some(x) if x != b => return Rational::zero(),
                            Some(_) => {}
                            None => free += 1,
                        }
                    }
                    rational::pow2_inv(free)
                })
                .sum()
        };
        fixed[p] = Some(false);
        let e0 = expect(&fixed);
        fixed[p] = Some(true);
        let e1 = expect(&fixed);
        fixed[p] = Some(e1 > e0);
    }
    Ok((inputs, BitString::from_bits(fixed.into_iter().map(|b| b.unwrap_or(false))), RhoMethod::Greedy))
}
