use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::localfn::dnf::{Dnf, Term};

/// A decision tree over input indices `1..=m` with single-bit leaves.
///
/// Well-formed trees never query an index twice on one root-to-leaf path;
/// [`DecisionTree::check`] enforces this together with the index range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DecisionTree {
    Leaf(bool),
    Query { var: usize, on0: Box<DecisionTree>, on1: Box<DecisionTree> },
}

impl DecisionTree {
    pub fn leaf(value: bool) -> Self {
        DecisionTree::Leaf(value)
    }

    pub fn query(var: usize, on0: DecisionTree, on1: DecisionTree) -> Self {
        DecisionTree::Query { var, on0: Box::new(on0), on1: Box::new(on1) }
    }

    /// The tree returning input `var` itself.
    pub fn var(var: usize) -> Self {
        Self::query(var, Self::leaf(false), Self::leaf(true))
    }

    pub fn not_var(var: usize) -> Self {
        Self::query(var, Self::leaf(true), Self::leaf(false))
    }

    pub fn xor(a: usize, b: usize) -> Self {
        Self::query(a, Self::var(b), Self::not_var(b))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecisionTree::Leaf(_))
    }

    /// Number of internal nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Query { on0, on1, .. } => 1 + on0.depth().max(on1.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Query { on0, on1, .. } => 1 + on0.node_count() + on1.node_count(),
        }
    }

    pub fn eval(&self, input: impl Fn(usize) -> bool) -> bool {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf(v) => return *v,
                DecisionTree::Query { var, on0, on1 } => node = if input(*var) { on1 } else { on0 },
            }
        }
    }

    pub fn eval_bits(&self, x: &BitString) -> bool {
        self.eval(|i| x.get(i))
    }

    /// Indices queried anywhere in the tree.
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        if let DecisionTree::Query { var, on0, on1 } = self {
            out.insert(*var);
            on0.collect_vars(out);
            on1.collect_vars(out);
        }
    }

    /// Checks the index range `1..=m` and the no-repeat-on-path rule.
    pub fn check(&self, m: usize) -> Result<()> {
        fn walk(t: &DecisionTree, m: usize, path: &mut Vec<usize>) -> Result<()> {
            if let DecisionTree::Query { var, on0, on1 } = t {
                if *var == 0 || *var > m {
                    return Err(Error::dim(format!("query index {var} outside 1..={m}")));
                }
                if path.contains(var) {
                    return Err(Error::Precondition(format!("index {var} queried twice on one path")));
                }
                path.push(*var);
                walk(on0, m, path)?;
                walk(on1, m, path)?;
                path.pop();
            }
            Ok(())
        }
        walk(self, m, &mut Vec::new())
    }

    /// The tree with input `var` fixed to `value`.
    pub fn restrict(&self, var: usize, value: bool) -> Self {
        match self {
            DecisionTree::Leaf(v) => DecisionTree::Leaf(*v),
            DecisionTree::Query { var: q, on0, on1 } if *q == var => {
                if value { on1.restrict(var, value) } else { on0.restrict(var, value) }
            }
            DecisionTree::Query { var: q, on0, on1 } => {
                Self::query(*q, on0.restrict(var, value), on1.restrict(var, value))
            }
        }
    }

    /// Collapses every query whose two branches are identical.
    pub fn simplify(&self) -> Self {
        match self {
            DecisionTree::Leaf(v) => DecisionTree::Leaf(*v),
            DecisionTree::Query { var, on0, on1 } => {
                let (a, b) = (on0.simplify(), on1.simplify());
                if a == b { a } else { Self::query(*var, a, b) }
            }
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            DecisionTree::Leaf(v) => DecisionTree::Leaf(!v),
            DecisionTree::Query { var, on0, on1 } => Self::query(*var, on0.negate(), on1.negate()),
        }
    }

    /// Conjunction by query substitution: `other` is grafted onto every
    /// 1-leaf, restricted by the assignment along that leaf's path.
    /// The depth is at most `self.depth() + other.depth()`.
    pub fn and(&self, other: &DecisionTree) -> Self {
        fn graft(t: &DecisionTree, other: &DecisionTree, path: &mut Vec<(usize, bool)>) -> DecisionTree {
            match t {
                DecisionTree::Leaf(false) => DecisionTree::Leaf(false),
                DecisionTree::Leaf(true) => {
                    let mut g = other.clone();
                    for &(v, b) in path.iter() {
                        g = g.restrict(v, b);
                    }
                    g
                }
                DecisionTree::Query { var, on0, on1 } => {
                    path.push((*var, false));
                    let a = graft(on0, other, path);
                    path.pop();
                    path.push((*var, true));
                    let b = graft(on1, other, path);
                    path.pop();
                    DecisionTree::query(*var, a, b)
                }
            }
        }
        graft(self, other, &mut Vec::new())
    }

    /// One term per 1-leaf: the partial assignment along its path.
    pub fn to_dnf(&self) -> Dnf {
        fn walk(t: &DecisionTree, path: &mut Vec<(usize, bool)>, out: &mut Vec<Term>) {
            match t {
                DecisionTree::Leaf(false) => {}
                DecisionTree::Leaf(true) => out.push(Term::new(path.iter().copied())),
                DecisionTree::Query { var, on0, on1 } => {
                    path.push((*var, false));
                    walk(on0, path, out);
                    path.pop();
                    path.push((*var, true));
                    walk(on1, path, out);
                    path.pop();
                }
            }
        }
        let mut terms = Vec::new();
        walk(self, &mut Vec::new(), &mut terms);
        Dnf::from_terms(self.depth(), terms)
    }

    /// Full tree over `vars` (queried in the given order) computing
    /// `table(a)`, where bit `t` of `a` is the value of `vars[t]`; identical
    /// sibling subtrees are collapsed.
    pub fn from_truth_table(vars: &[usize], table: impl Fn(u64) -> bool) -> Self {
        fn build(vars: &[usize], depth: usize, prefix: u64, table: &dyn Fn(u64) -> bool) -> DecisionTree {
            if depth == vars.len() {
                return DecisionTree::Leaf(table(prefix));
            }
            let a = build(vars, depth + 1, prefix, table);
            let b = build(vars, depth + 1, prefix | (1 << depth), table);
            if a == b { a } else { DecisionTree::query(vars[depth], a, b) }
        }
        build(vars, 0, 0, &table)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRepr {
    Query { query: usize, on0: Box<NodeRepr>, on1: Box<NodeRepr> },
    Leaf { leaf: u8 },
}

impl From<&DecisionTree> for NodeRepr {
    fn from(t: &DecisionTree) -> Self {
        match t {
            DecisionTree::Leaf(v) => NodeRepr::Leaf { leaf: *v as u8 },
            DecisionTree::Query { var, on0, on1 } => NodeRepr::Query {
                query: *var,
                on0: Box::new(on0.as_ref().into()),
                on1: Box::new(on1.as_ref().into()),
            },
        }
    }
}

impl TryFrom<NodeRepr> for DecisionTree {
    type Error = String;
    fn try_from(r: NodeRepr) -> std::result::Result<Self, String> {
        Ok(match r {
            NodeRepr::Leaf { leaf: 0 } => DecisionTree::Leaf(false),
            NodeRepr::Leaf { leaf: 1 } => DecisionTree::Leaf(true),
            NodeRepr::Leaf { leaf } => return Err(format!("leaf value {leaf} is not 0 or 1")),
            NodeRepr::Query { query, on0, on1 } => {
                DecisionTree::query(query, (*on0).try_into()?, (*on1).try_into()?)
            }
        })
    }
}

impl Serialize for DecisionTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NodeRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        NodeRepr::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and12() -> DecisionTree {
        DecisionTree::query(1, DecisionTree::leaf(false), DecisionTree::var(2))
    }

    #[test]
    fn eval_and_depth() {
        let t = DecisionTree::xor(1, 2);
        assert_eq!(t.depth(), 2);
        for a in 0..4u64 {
            let x = BitString::from_index(2, a);
            assert_eq!(t.eval_bits(&x), x.get(1) ^ x.get(2));
        }
        assert_eq!(DecisionTree::var(1).eval_bits(&"1".parse().unwrap()), true);
    }

    #[test]
    fn check_rejects_repeats_and_range() {
        let rep = DecisionTree::query(1, DecisionTree::var(1), DecisionTree::leaf(true));
        assert!(rep.check(3).is_err());
        assert!(DecisionTree::var(4).check(3).is_err());
        assert!(DecisionTree::xor(1, 3).check(3).is_ok());
    }

    #[test]
    fn conjunction_respects_paths() {
        let t = and12().and(&DecisionTree::xor(2, 3));
        t.check(3).unwrap();
        assert!(t.depth() <= 4);
        for a in 0..8u64 {
            let x = BitString::from_index(3, a);
            let want = (x.get(1) && x.get(2)) && (x.get(2) ^ x.get(3));
            assert_eq!(t.eval_bits(&x), want);
        }
    }

    #[test]
    fn truth_table_tree_collapses_constants() {
        let t = DecisionTree::from_truth_table(&[2, 5], |_| true);
        assert_eq!(t, DecisionTree::leaf(true));
        let t = DecisionTree::from_truth_table(&[2, 5], |a| a & 1 == 1);
        assert_eq!(t, DecisionTree::var(2));
    }

    #[test]
    fn serialization_shape() {
        let json = serde_json::to_string(&DecisionTree::var(1)).unwrap();
        assert_eq!(json, r#"{"query":1,"on0":{"leaf":0},"on1":{"leaf":1}}"#);
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, DecisionTree::var(1));
        assert!(serde_json::from_str::<DecisionTree>(r#"{"leaf":2}"#).is_err());
    }
}
