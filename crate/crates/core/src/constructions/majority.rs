//! Interval-tree proof system for `Maj_n^{-1}(1)`.
//!
//! Every node `[l, r]` of a balanced interval tree carries a label claiming
//! `x_l + ... + x_r`, stored big-endian in `ceil(log2(r - l + 2))` input
//! bits. Labels are laid out contiguously in preorder. A decoded label above
//! `r - l + 1` makes its node invalid; an internal node is consistent when it
//! and both children are valid and the label is the sum of the children's,
//! and the root must additionally claim at least `(n + 1) / 2`. Output `i` is
//! leaf `i`'s label when all of its non-leaf ancestors are consistent, and 1
//! otherwise.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::localfn::LocalFunction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalNode {
    pub l: usize,
    pub r: usize,
    /// Label width `ceil(log2(r - l + 2))`.
    pub bits: usize,
    /// First input index of the label (1-based).
    pub offset: usize,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
    pub level: usize,
}

impl IntervalNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn len(&self) -> usize {
        self.r - self.l + 1
    }

    pub fn inputs(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.bits
    }
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalTree {
    n: usize,
    m: usize,
    nodes: Vec<IntervalNode>,
    leaf_of: Vec<usize>,
}

impl IntervalTree {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("interval tree over an empty range".into()));
        }
        let mut tree = IntervalTree { n, m: 0, nodes: Vec::new(), leaf_of: vec![0; n] };
        tree.build(1, n, None, 0);
        Ok(tree)
    }

    fn build(&mut self, l: usize, r: usize, parent: Option<usize>, level: usize) -> usize {
        let at = self.nodes.len();
        let bits = ceil_log2(r - l + 2);
        self.nodes.push(IntervalNode { l, r, bits, offset: self.m + 1, parent, children: None, level });
        self.m += bits;
        if l == r {
            self.leaf_of[l - 1] = at;
        } else {
            let c = (l + r) / 2;
            let a = self.build(l, c, Some(at), level + 1);
            let b = self.build(c + 1, r, Some(at), level + 1);
            self.nodes[at].children = Some((a, b));
        }
        at
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total label bits, `sum bits(l, r)`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[IntervalNode] {
        &self.nodes
    }

    pub fn leaf(&self, i: usize) -> usize {
        self.leaf_of[i - 1]
    }

    /// Number of levels (a single leaf has depth 1).
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|v| v.level).max().unwrap_or(0) + 1
    }

    /// Non-leaf ancestors of leaf `i`, nearest first.
    pub fn ancestors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[self.leaf(i)].parent, move |&a| self.nodes[a].parent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MajorityRepr", into = "MajorityRepr")]
pub struct MajoritySystem {
    tree: IntervalTree,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MajorityRepr {
    n: usize,
}

impl TryFrom<MajorityRepr> for MajoritySystem {
    type Error = Error;
    fn try_from(r: MajorityRepr) -> Result<Self> {
        MajoritySystem::new(r.n)
    }
}

impl From<MajoritySystem> for MajorityRepr {
    fn from(s: MajoritySystem) -> Self {
        MajorityRepr { n: s.tree.n }
    }
}

/// `3 * ceil(log2(n + 1)) * ceil(log2 n) + 1`.
pub fn majority_locality_bound(n: usize) -> usize {
    3 * ceil_log2(n + 1) * ceil_log2(n) + 1
}

impl MajoritySystem {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::Precondition(format!("majority proof system needs odd n >= 3, got {n}")));
        }
        Ok(MajoritySystem { tree: IntervalTree::new(n)? })
    }

    pub fn tree(&self) -> &IntervalTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    pub fn threshold(&self) -> usize {
        self.tree.n.div_ceil(2)
    }

    fn label(&self, v: usize, read: &dyn Fn(usize) -> bool) -> usize {
        self.tree.nodes[v].inputs().fold(0, |acc, i| (acc << 1) | read(i) as usize)
    }

    fn valid(&self, v: usize, label: usize) -> bool {
        label <= self.tree.nodes[v].len()
    }

    fn consistent(&self, v: usize, read: &dyn Fn(usize) -> bool) -> bool {
        let (a, b) = self.tree.nodes[v].children.expect("consistency is defined on internal nodes");
        let (w, wa, wb) = (self.label(v, read), self.label(a, read), self.label(b, read));
        let ok = self.valid(v, w) && self.valid(a, wa) && self.valid(b, wb) && w == wa + wb;
        ok && (v != 0 || w >= self.threshold())
    }

    /// Truthful labelling `w(l, r) = y_l + ... + y_r`.
    pub fn certificate(&self, y: &BitString) -> Result<BitString> {
        if y.len() != self.n() {
            return Err(Error::dim(format!("target of length {} for n = {}", y.len(), self.n())));
        }
        let mut prefix = vec![0usize; y.len() + 1];
        for i in 1..=y.len() {
            prefix[i] = prefix[i - 1] + y.get(i) as usize;
        }
        let mut x = BitString::zeros(self.tree.m);
        for v in &self.tree.nodes {
            let w = prefix[v.r] - prefix[v.l - 1];
            for (t, i) in v.inputs().enumerate() {
                x.set(i, (w >> (v.bits - 1 - t)) & 1 == 1);
            }
        }
        Ok(x)
    }

    /// Inputs read by output `j`, counted without duplicates.
    pub fn support_size(&self, j: usize) -> usize {
        self.output_support(j).len()
    }

    /// Inputs of output `j` whose influence is confirmed by an evaluated
    /// witness pair.
    ///
    /// The base input is the truthful labelling of `1^n` with position `j`
    /// cleared, on which output `j` is 0. Flipping any label bit of an
    /// ancestor of leaf `j`, or of a child of one, breaks that ancestor's
    /// consistency and turns output `j` into 1; both values are computed by
    /// actually evaluating the output.
    pub fn certified_support(&self, j: usize) -> Vec<usize> {
        let mut y = BitString::ones(self.n());
        y.set(j, false);
        let mut x = self.certificate(&y).expect("length matches");
        let base = self.output_with(j, &|i| x.get(i));
        self.output_support(j)
            .into_iter()
            .filter(|&i| {
                x.flip(i);
                let flipped = self.output_with(j, &|k| x.get(k));
                x.flip(i);
                flipped != base
            })
            .collect()
    }
}

impl LocalFunction for MajoritySystem {
    fn input_len(&self) -> usize {
        self.tree.m
    }

    fn output_len(&self) -> usize {
        self.tree.n
    }

    fn output_with(&self, j: usize, input: &dyn Fn(usize) -> bool) -> bool {
        if self.tree.ancestors(j).all(|a| self.consistent(a, input)) {
            self.label(self.tree.leaf(j), input) == 1
        } else {
            true
        }
    }

    fn semantic_support(&self, j: usize) -> Result<Vec<usize>> {
        Ok(self.certified_support(j))
    }

    fn output_support(&self, j: usize) -> Vec<usize> {
        let mut nodes = vec![self.tree.leaf(j)];
        for a in self.tree.ancestors(j) {
            let (l, r) = self.tree.nodes[a].children.expect("ancestors are internal");
            nodes.extend([a, l, r]);
        }
        let mut out: Vec<usize> = nodes.into_iter().flat_map(|v| self.tree.nodes[v].inputs()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// One pass over the labels instead of one walk per output.
    fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.tree.m {
            return Err(Error::dim(format!("input of length {} for m = {}", x.len(), self.tree.m)));
        }
        let read = |i: usize| x.get(i);
        let nodes = &self.tree.nodes;
        let labels: Vec<usize> = (0..nodes.len()).map(|v| self.label(v, &read)).collect();
        let valid: Vec<bool> = (0..nodes.len()).map(|v| self.valid(v, labels[v])).collect();
        // Preorder puts every parent before its children.
        let mut good = vec![true; nodes.len()];
        let mut out = BitString::zeros(self.tree.n);
        for (v, node) in nodes.iter().enumerate() {
            let inherited = node.parent.is_none_or(|p| good[p]);
            match node.children {
                Some((a, b)) => {
                    let mut ok = valid[v] && valid[a] && valid[b] && labels[v] == labels[a] + labels[b];
                    if v == 0 {
                        ok &= labels[v] >= self.threshold();
                    }
                    good[v] = inherited && ok;
                }
                None => out.set(node.l, if inherited { labels[v] == 1 } else { true }),
            }
        }
        Ok(out)
    }
}
