use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::ExactDistribution;
use crate::localfn::{DecisionTree, LocalFunction};

/// `n` decision trees over `m` shared input bits. Output `j` is tree `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ForestRepr", into = "ForestRepr")]
pub struct DecisionForest {
    m: usize,
    trees: Vec<DecisionTree>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestRepr {
    m: usize,
    n: usize,
    trees: Vec<DecisionTree>,
}

impl TryFrom<ForestRepr> for DecisionForest {
    type Error = Error;
    fn try_from(r: ForestRepr) -> Result<Self> {
        if r.n != r.trees.len() {
            return Err(Error::dim(format!("forest declares n = {} but has {} trees", r.n, r.trees.len())));
        }
        DecisionForest::new(r.m, r.trees)
    }
}

impl From<DecisionForest> for ForestRepr {
    fn from(f: DecisionForest) -> Self {
        ForestRepr { m: f.m, n: f.trees.len(), trees: f.trees }
    }
}

impl DecisionForest {
    pub fn new(m: usize, trees: Vec<DecisionTree>) -> Result<Self> {
        for (j, t) in trees.iter().enumerate() {
            t.check(m).map_err(|e| match e {
                Error::Dimension(msg) => Error::Dimension(format!("tree {}: {msg}", j + 1)),
                Error::Precondition(msg) => Error::Precondition(format!("tree {}: {msg}", j + 1)),
                other => other,
            })?;
        }
        Ok(DecisionForest { m, trees })
    }

    /// Every output constant.
    pub fn constant(m: usize, values: &BitString) -> Self {
        DecisionForest { m, trees: values.iter().map(DecisionTree::Leaf).collect() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree(&self, j: usize) -> &DecisionTree {
        &self.trees[j - 1]
    }

    pub(crate) fn trees_mut(&mut self) -> &mut Vec<DecisionTree> {
        &mut self.trees
    }

    /// Decision depth: the largest tree depth.
    pub fn depth(&self) -> usize {
        self.trees.iter().map(DecisionTree::depth).max().unwrap_or(0)
    }

    /// Exact output distribution over uniform inputs, within the default
    /// enumeration budget.
    pub fn output_distribution(&self) -> Result<ExactDistribution> {
        self.output_distribution_within(crate::DEFAULT_ENUMERATION_LOG2)
    }

    pub fn output_distribution_within(&self, limit_log2: u32) -> Result<ExactDistribution> {
        crate::localfn::output_distribution(self, limit_log2)
    }

    pub(crate) fn compile(&self) -> CompiledForest {
        CompiledForest::new(self)
    }
}

impl LocalFunction for DecisionForest {
    fn input_len(&self) -> usize {
        self.m
    }

    fn output_len(&self) -> usize {
        self.trees.len()
    }

    fn output_with(&self, j: usize, input: &dyn Fn(usize) -> bool) -> bool {
        self.trees[j - 1].eval(input)
    }

    fn output_support(&self, j: usize) -> Vec<usize> {
        self.trees[j - 1].vars().into_iter().collect()
    }

    fn image_counts(&self, limit_log2: u32) -> Result<BTreeMap<BitString, u64>> {
        check_log2_budget("input enumeration", self.m, limit_log2.min(40))?;
        Ok(self.compile().image_counts())
    }
}

const LEAF: u32 = u32::MAX;

/// Flattened trees evaluated against an enumeration index.
pub(crate) struct CompiledForest {
    m: usize,
    n: usize,
    // (var - 1 or LEAF, on0 or leaf value, on1)
    nodes: Vec<(u32, u32, u32)>,
    roots: Vec<u32>,
}

impl CompiledForest {
    fn new(f: &DecisionForest) -> Self {
        fn push(t: &DecisionTree, nodes: &mut Vec<(u32, u32, u32)>) -> u32 {
            let at = nodes.len() as u32;
            match t {
                DecisionTree::Leaf(v) => nodes.push((LEAF, *v as u32, 0)),
                DecisionTree::Query { var, on0, on1 } => {
                    nodes.push((0, 0, 0));
                    let a = push(on0, nodes);
                    let b = push(on1, nodes);
                    nodes[at as usize] = ((*var - 1) as u32, a, b);
                }
            }
            at
        }
        let mut nodes = Vec::new();
        let roots = f.trees.iter().map(|t| push(t, &mut nodes)).collect();
        CompiledForest { m: f.m, n: f.trees.len(), nodes, roots }
    }

    #[inline]
    fn output(&self, j0: usize, x: u64) -> bool {
        let mut at = self.roots[j0] as usize;
        loop {
            let (var, a, b) = self.nodes[at];
            if var == LEAF {
                return a == 1;
            }
            at = if (x >> var) & 1 == 1 { b as usize } else { a as usize };
        }
    }

    #[inline]
    pub(crate) fn eval_u128(&self, x: u64) -> u128 {
        let mut out = 0u128;
        for j0 in 0..self.n {
            if self.output(j0, x) {
                out |= 1 << j0;
            }
        }
        out
    }

    pub(crate) fn eval_bits(&self, x: u64) -> BitString {
        let mut out = BitString::zeros(self.n);
        for j0 in 0..self.n {
            if self.output(j0, x) {
                out.set(j0 + 1, true);
            }
        }
        out
    }

    /// Image multiplicities over all `2^m` inputs. Inputs are split into
    /// fixed blocks whose partial counts are merged, so the result does not
    /// depend on scheduling.
    pub(crate) fn image_counts(&self) -> BTreeMap<BitString, u64> {
        let total = 1u64 << self.m;
        let block = 1u64 << 16.min(self.m);
        let blocks = total / block;
        if self.n <= 128 {
            let merged = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut counts: HashMap<u128, u64> = HashMap::new();
                    for x in b * block..(b + 1) * block {
                        *counts.entry(self.eval_u128(x)).or_insert(0) += 1;
                    }
                    counts
                })
                .reduce(HashMap::new, merge_counts);
            merged.into_iter().map(|(k, c)| (BitString::from_index_u128(self.n, k), c)).collect()
        } else {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut counts: HashMap<BitString, u64> = HashMap::new();
                    for x in b * block..(b + 1) * block {
                        *counts.entry(self.eval_bits(x)).or_insert(0) += 1;
                    }
                    counts
                })
                .reduce(HashMap::new, merge_counts)
                .into_iter()
                .collect()
        }
    }
}

fn merge_counts<K: std::hash::Hash + Eq>(mut a: HashMap<K, u64>, b: HashMap<K, u64>) -> HashMap<K, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, c) in b {
        *a.entry(k).or_insert(0) += c;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::{tv_distance, SliceSpec};
    use crate::rational::ratio;

    #[test]
    fn eval_constant_and_identity() {
        let f = DecisionForest::constant(3, &BitString::zeros(4));
        assert_eq!(f.eval(&"101".parse().unwrap()).unwrap().to_string(), "0000");
        let id = DecisionForest::new(1, vec![DecisionTree::var(1)]).unwrap();
        assert_eq!(id.eval(&"1".parse().unwrap()).unwrap().to_string(), "1");
        assert!(matches!(id.eval(&"10".parse().unwrap()), Err(Error::Dimension(_))));
    }

    #[test]
    fn complementary_pair_samples_u1() {
        let f = DecisionForest::new(1, vec![DecisionTree::var(1), DecisionTree::not_var(1)]).unwrap();
        let d = f.output_distribution().unwrap();
        assert_eq!(d.support_len(), 2);
        assert_eq!(d.prob(&"10".parse().unwrap()), ratio(1, 2));
        let u = SliceSpec::single(2, 1).unwrap();
        assert_eq!(tv_distance(&d, &u).unwrap(), ratio(0, 1));
    }

    #[test]
    fn constant_forest_is_a_point_mass() {
        let v: BitString = "0110".parse().unwrap();
        let d = DecisionForest::constant(2, &v).output_distribution().unwrap();
        assert_eq!(d, ExactDistribution::point(v));
    }

    #[test]
    fn wide_outputs_use_bitstring_keys() {
        let trees = (0..200).map(|j| if j % 2 == 0 { DecisionTree::var(1) } else { DecisionTree::not_var(1) });
        let f = DecisionForest::new(1, trees.collect()).unwrap();
        let d = f.output_distribution().unwrap();
        assert_eq!(d.support_len(), 2);
        assert!(d.support().all(|x| x.weight() == 100));
    }

    #[test]
    fn budget_is_enforced() {
        let f = DecisionForest::new(30, vec![DecisionTree::var(30)]).unwrap();
        assert!(matches!(f.output_distribution(), Err(Error::Budget(_))));
    }

    #[test]
    fn serialization_shape_and_validation() {
        let f = DecisionForest::new(2, vec![DecisionTree::var(1), DecisionTree::leaf(true)]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"m":2,"n":2,"trees":[{"query":1,"on0":{"leaf":0},"on1":{"leaf":1}},{"leaf":1}]}"#
        );
        let back: DecisionForest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<DecisionForest>(r#"{"m":1,"n":2,"trees":[{"leaf":1}]}"#).is_err());
        assert!(serde_json::from_str::<DecisionForest>(
            r#"{"m":1,"n":1,"trees":[{"query":2,"on0":{"leaf":0},"on1":{"leaf":1}}]}"#
        )
        .is_err());
    }
}
