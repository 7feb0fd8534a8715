//! Decision trees and forests, DNF conversion, semantic influence and exact
//! output distributions.
//!
//! A d-local output is encoded as a depth-d tree querying its dependency set
//! in ascending order (see [`to_forest`]); there is no separate local-function
//! type for that case. Structured functions that are too wide to expand into
//! trees implement [`LocalFunction`] directly.

mod dnf;
mod forest;
mod tree;

pub use dnf::{Dnf, Term};
pub use forest::DecisionForest;
pub use tree::DecisionTree;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::{ExactDistribution, SliceSpec};
use crate::rng;

/// Most variables a single output may read when it is enumerated on its own.
pub const PER_OUTPUT_LIMIT: u32 = 22;

/// A map `{0,1}^m -> {0,1}^n` whose outputs read few inputs.
pub trait LocalFunction: Sync {
    fn input_len(&self) -> usize;

    fn output_len(&self) -> usize;

    /// Output `j` (1-based), reading inputs only through `input`.
    fn output_with(&self, j: usize, input: &dyn Fn(usize) -> bool) -> bool;

    /// Ascending list of inputs output `j` may read (its syntactic support).
    fn output_support(&self, j: usize) -> Vec<usize>;

    /// Inputs that semantically affect output `j`: those whose flip changes
    /// the output on some assignment. The default enumerates the support.
    fn semantic_support(&self, j: usize) -> Result<Vec<usize>> {
        let support = self.output_support(j);
        check_log2_budget(&format!("support of output {j}"), support.len(), PER_OUTPUT_LIMIT)?;
        let table = output_table(self, j, &support);
        Ok(support
            .iter()
            .enumerate()
            .filter(|&(t, _)| (0..table.len()).any(|a| table[a] != table[a ^ (1 << t)]))
            .map(|(_, &i)| i)
            .collect())
    }

    fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.input_len() {
            return Err(Error::dim(format!("input of length {} for a function of {} inputs", x.len(), self.input_len())));
        }
        let read = |i: usize| x.get(i);
        Ok(BitString::from_bits((1..=self.output_len()).map(|j| self.output_with(j, &read))))
    }

    /// Multiplicity of every image point over all `2^m` inputs.
    fn image_counts(&self, limit_log2: u32) -> Result<BTreeMap<BitString, u64>> {
        let m = self.input_len();
        check_log2_budget("input enumeration", m, limit_log2.min(40))?;
        let mut counts = BTreeMap::new();
        for x in 0..(1u64 << m) {
            *counts.entry(self.eval(&BitString::from_index(m, x))?).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

/// Exact distribution of `f(Y)` for uniform `Y`.
pub fn output_distribution<F: LocalFunction + ?Sized>(f: &F, limit_log2: u32) -> Result<ExactDistribution> {
    let counts = f.image_counts(limit_log2)?;
    ExactDistribution::from_counts_pow2(f.output_len(), counts, f.input_len())
}

/// Empirical output frequencies. Reporting only: never used where exact
/// equality is asserted.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalDistribution {
    pub samples: u64,
    pub counts: BTreeMap<BitString, u64>,
}

impl EmpiricalDistribution {
    /// Plug-in estimate of the distance to a slice (approximate, biased
    /// upwards for large slices).
    pub fn approx_tv_to(&self, target: &SliceSpec) -> f64 {
        let q = crate::rational::to_f64(&target.point_mass());
        let s = self.samples as f64;
        let overlap: f64 = self
            .counts
            .iter()
            .filter(|(x, _)| target.contains(x))
            .map(|(_, &c)| (c as f64 / s).min(q))
            .sum();
        1.0 - overlap
    }
}

pub fn monte_carlo_distribution<F: LocalFunction + ?Sized>(f: &F, samples: u64, seed: u64) -> Result<EmpiricalDistribution> {
    let m = f.input_len();
    let mut counts = BTreeMap::new();
    for (chunk, len) in rng::chunks(samples) {
        let mut r = rng::stream(seed, chunk);
        for _ in 0..len {
            let x = BitString::from_bits((0..m).map(|_| r.random::<bool>()));
            *counts.entry(f.eval(&x)?).or_insert(0u64) += 1;
        }
    }
    Ok(EmpiricalDistribution { samples, counts })
}

/// Truth table of output `j` over its support: bit `t` of the index is the
/// value of `support[t]`.
pub(crate) fn output_table<F: LocalFunction + ?Sized>(f: &F, j: usize, support: &[usize]) -> Vec<bool> {
    let mut pos = BTreeMap::new();
    for (t, &i) in support.iter().enumerate() {
        pos.insert(i, t);
    }
    (0..1u64 << support.len())
        .map(|a| {
            let read = |i: usize| pos.get(&i).is_some_and(|&t| (a >> t) & 1 == 1);
            f.output_with(j, &read)
        })
        .collect()
}

/// Which inputs semantically affect which outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfluenceGraph {
    pub m: usize,
    pub n: usize,
    /// `affects[i - 1]`: outputs depending on input `i`, ascending.
    pub affects: Vec<Vec<usize>>,
    /// `depends[j - 1]`: inputs affecting output `j`, ascending.
    pub depends: Vec<Vec<usize>>,
}

impl InfluenceGraph {
    pub(crate) fn from_depends(m: usize, depends: Vec<Vec<usize>>) -> Self {
        let mut affects = vec![Vec::new(); m];
        for (j0, deps) in depends.iter().enumerate() {
            for &i in deps {
                affects[i - 1].push(j0 + 1);
            }
        }
        InfluenceGraph { m, n: depends.len(), affects, depends }
    }

    pub fn affects(&self, i: usize) -> &[usize] {
        &self.affects[i - 1]
    }

    pub fn depends(&self, j: usize) -> &[usize] {
        &self.depends[j - 1]
    }

    /// `c = max_j |depends(j)|`.
    pub fn max_output_locality(&self) -> usize {
        self.depends.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `max_i |affects(i)|`.
    pub fn max_input_influence(&self) -> usize {
        self.affects.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn pair_count(&self) -> usize {
        self.depends.iter().map(Vec::len).sum()
    }

    /// Inputs affecting at least `k` outputs.
    pub fn k_influential(&self, k: usize) -> usize {
        self.affects.iter().filter(|a| a.len() >= k).count()
    }

    /// Outputs sharing an input with output `j`, including `j`.
    pub fn neighborhood(&self, j: usize) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.depends(j).iter().flat_map(|&i| self.affects(i).iter().copied()).collect();
        out.insert(j);
        out
    }
}

/// Semantic influence by flip tests over each output's own support.
pub fn influence_graph<F: LocalFunction + ?Sized>(f: &F) -> Result<InfluenceGraph> {
    let depends = (1..=f.output_len()).map(|j| f.semantic_support(j)).collect::<Result<Vec<_>>>()?;
    Ok(InfluenceGraph::from_depends(f.input_len(), depends))
}

/// Encodes every output as a tree over its support, queried in ascending
/// index order, with identical branches collapsed.
pub fn to_forest<F: LocalFunction + ?Sized>(f: &F) -> Result<DecisionForest> {
    let trees = (1..=f.output_len())
        .map(|j| {
            let support = f.output_support(j);
            check_log2_budget(&format!("support of output {j}"), support.len(), PER_OUTPUT_LIMIT)?;
            let table = output_table(f, j, &support);
            Ok(DecisionTree::from_truth_table(&support, |a| table[a as usize]))
        })
        .collect::<Result<Vec<_>>>()?;
    DecisionForest::new(f.input_len(), trees)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalityReport {
    /// Largest semantic output locality.
    pub c: usize,
    pub depth: usize,
    /// `k -> number of inputs affecting at least k outputs`, for `k >= 1`.
    pub influence_histogram: BTreeMap<usize, usize>,
    pub pair_count: usize,
}

pub fn locality_report(f: &DecisionForest) -> Result<LocalityReport> {
    let g = influence_graph(f)?;
    let influence_histogram =
        (1..=g.max_input_influence()).map(|k| (k, g.k_influential(k))).collect();
    Ok(LocalityReport { c: g.max_output_locality(), depth: f.depth(), influence_histogram, pair_count: g.pair_count() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_forest() -> DecisionForest {
        DecisionForest::new(2, vec![DecisionTree::query(1, DecisionTree::leaf(false), DecisionTree::var(2))]).unwrap()
    }

    #[test]
    fn semantic_influence_examples() {
        let g = influence_graph(&and_forest()).unwrap();
        assert_eq!(g.depends(1), &[1, 2]);

        let dead = DecisionForest::new(1, vec![DecisionTree::query(1, DecisionTree::leaf(false), DecisionTree::leaf(false))]).unwrap();
        let g = influence_graph(&dead).unwrap();
        assert!(g.depends(1).is_empty());
        assert!(g.affects(1).is_empty());
    }

    #[test]
    fn constant_forest_report() {
        let r = locality_report(&DecisionForest::constant(3, &BitString::zeros(4))).unwrap();
        assert_eq!(r.c, 0);
        assert!(r.influence_histogram.is_empty());
        assert_eq!(r.pair_count, 0);
    }

    #[test]
    fn to_forest_round_trips_a_forest() {
        let f = and_forest();
        let g = to_forest(&f).unwrap();
        assert_eq!(f.output_distribution().unwrap(), g.output_distribution().unwrap());
    }

    #[test]
    fn default_enumeration_matches_compiled() {
        struct Wrap(DecisionForest);
        impl LocalFunction for Wrap {
            fn input_len(&self) -> usize { self.0.m() }
            fn output_len(&self) -> usize { self.0.n() }
            fn output_with(&self, j: usize, input: &dyn Fn(usize) -> bool) -> bool { self.0.output_with(j, input) }
            fn output_support(&self, j: usize) -> Vec<usize> { self.0.output_support(j) }
        }
        let f = DecisionForest::new(3, vec![DecisionTree::xor(1, 3), DecisionTree::var(2), and_forest().tree(1).clone()]).unwrap();
        assert_eq!(f.image_counts(26).unwrap(), Wrap(f.clone()).image_counts(26).unwrap());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let f = and_forest();
        let a = monte_carlo_distribution(&f, 5000, 3).unwrap();
        let b = monte_carlo_distribution(&f, 5000, 3).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.counts.values().sum::<u64>(), 5000);
    }
}
