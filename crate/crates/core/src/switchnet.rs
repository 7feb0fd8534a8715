//! Layered swap networks over a slice.
//!
//! A network starts from `1^ell 0^(n-ell)` and, layer by layer, swaps each
//! matched pair when its coin is 1. Coins are numbered by layer and then by
//! pair, pairs being sorted by their smaller endpoint.

use std::collections::BTreeSet;

use num_traits::One;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::{binomial, tv_distance, ExactDistribution, SliceSpec};
use crate::localfn::{DecisionForest, DecisionTree};
use crate::rational::{from_biguint, Exact, Rational};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr", into = "NetworkRepr")]
pub struct SwitchingNetwork {
    n: usize,
    ell: usize,
    layers: Vec<Vec<(usize, usize)>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRepr {
    n: usize,
    ell: usize,
    layers: Vec<Vec<[usize; 2]>>,
}

impl TryFrom<NetworkRepr> for SwitchingNetwork {
    type Error = Error;
    fn try_from(r: NetworkRepr) -> Result<Self> {
        SwitchingNetwork::new(r.n, r.ell, r.layers.into_iter().map(|l| l.into_iter().map(|[a, b]| (a, b)).collect()).collect())
    }
}

impl From<SwitchingNetwork> for NetworkRepr {
    fn from(s: SwitchingNetwork) -> Self {
        NetworkRepr {
            n: s.n,
            ell: s.ell,
            layers: s.layers.into_iter().map(|l| l.into_iter().map(|(a, b)| [a, b]).collect()).collect(),
        }
    }
}

impl SwitchingNetwork {
    /// Pairs are normalised to `a < b` and sorted within their layer.
    pub fn new(n: usize, ell: usize, layers: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if n == 0 || ell > n {
            return Err(Error::dim(format!("start weight {ell} for {n} positions")));
        }
        let mut normalised = Vec::with_capacity(layers.len());
        for (t, layer) in layers.into_iter().enumerate() {
            let mut used = BTreeSet::new();
            let mut pairs = Vec::with_capacity(layer.len());
            for (a, b) in layer {
                if a == 0 || b == 0 || a > n || b > n {
                    return Err(Error::dim(format!("layer {}: pair ({a}, {b}) outside 1..={n}", t + 1)));
                }
                if a == b || !used.insert(a) || !used.insert(b) {
                    return Err(Error::Precondition(format!("layer {}: pairs are not disjoint at ({a}, {b})", t + 1)));
                }
                pairs.push((a.min(b), a.max(b)));
            }
            pairs.sort_unstable();
            normalised.push(pairs);
        }
        Ok(SwitchingNetwork { n, ell, layers: normalised })
    }

    /// Each layer a uniformly random maximal matching.
    pub fn random(n: usize, ell: usize, depth: usize, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, 0);
        let layers = (0..depth)
            .map(|_| {
                let mut p: Vec<usize> = (1..=n).collect();
                p.shuffle(&mut r);
                p.chunks_exact(2).map(|c| (c[0], c[1])).collect()
            })
            .collect();
        Self::new(n, ell, layers)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<(usize, usize)>] {
        &self.layers
    }

    pub fn coin_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Whether every layer matches all `n` positions.
    pub fn is_perfect(&self) -> bool {
        self.layers.iter().all(|l| 2 * l.len() == self.n)
    }

    pub fn start(&self) -> BitString {
        BitString::from_bits((1..=self.n).map(|i| i <= self.ell))
    }

    pub fn run(&self, coins: &BitString) -> Result<BitString> {
        if coins.len() != self.coin_count() {
            return Err(Error::dim(format!("{} coins for a network with {}", coins.len(), self.coin_count())));
        }
        let mut x = self.start();
        let mut c = 0;
        for layer in &self.layers {
            for &(a, b) in layer {
                c += 1;
                if coins.get(c) {
                    let (u, v) = (x.get(a), x.get(b));
                    x.set(a, v);
                    x.set(b, u);
                }
            }
        }
        Ok(x)
    }

    pub fn distribution(&self, limit_log2: u32) -> Result<ExactDistribution> {
        let k = self.coin_count();
        check_log2_budget("coin vectors", k, limit_log2.min(26))?;
        let mut counts = std::collections::BTreeMap::new();
        for a in 0..1u64 << k {
            *counts.entry(self.run(&BitString::from_index(k, a))?).or_insert(0u64) += 1;
        }
        ExactDistribution::from_counts_pow2(self.n, counts, k)
    }

    /// Output `j` traces its position back from the last layer to the
    /// first, querying the coin of every pair it meets, and outputs whether
    /// it started among the first `ell` positions.
    pub fn to_forest(&self) -> DecisionForest {
        let mut coin_of = Vec::with_capacity(self.layers.len());
        let mut c = 0;
        for layer in &self.layers {
            let mut at = vec![None; self.n + 1];
            for &(a, b) in layer {
                c += 1;
                at[a] = Some((c, b));
                at[b] = Some((c, a));
            }
            coin_of.push(at);
        }
        fn trace(pos: usize, t: usize, coin_of: &[Vec<Option<(usize, usize)>>], ell: usize) -> DecisionTree {
            if t == 0 {
                return DecisionTree::leaf(pos <= ell);
            }
            match coin_of[t - 1][pos] {
                None => trace(pos, t - 1, coin_of, ell),
                Some((c, partner)) => DecisionTree::query(
                    c,
                    trace(pos, t - 1, coin_of, ell),
                    trace(partner, t - 1, coin_of, ell),
                ),
            }
        }
        let trees = (1..=self.n).map(|j| trace(j, self.layers.len(), &coin_of, self.ell)).collect();
        DecisionForest::new(self.coin_count(), trees).expect("trace trees query each layer once")
    }

    /// Positions that hold a 1 with positive probability.
    pub fn reachable_positions(&self) -> BTreeSet<usize> {
        let mut live: Vec<bool> = (1..=self.n).map(|i| i <= self.ell).collect();
        for layer in &self.layers {
            for &(a, b) in layer {
                let either = live[a - 1] || live[b - 1];
                live[a - 1] = either;
                live[b - 1] = either;
            }
        }
        (1..=self.n).filter(|&i| live[i - 1]).collect()
    }

    /// `1 - C(|R|, ell) / C(n, ell)` for the reachable set `R`: the slice mass
    /// outside the support's possible strings.
    pub fn distance_lower_bound(&self) -> Rational {
        let r = self.reachable_positions().len();
        Rational::one() - from_biguint(binomial(r, self.ell), binomial(self.n, self.ell))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub ell: usize,
    pub depth: usize,
    pub seed: u64,
    /// `true` for the exact distance, `false` for the structural lower bound.
    pub exact: bool,
    pub distance: Exact,
}

/// Distance to `U_ell^n` of random networks for every `(depth, seed)` pair.
pub fn depth_sweep(n: usize, ell: usize, depths: &[usize], seeds: &[u64], limit_log2: u32) -> Result<Vec<SweepRow>> {
    let target = SliceSpec::single(n, ell)?;
    let mut rows = Vec::new();
    for &depth in depths {
        for &seed in seeds {
            let net = SwitchingNetwork::random(n, ell, depth, rng::derive(seed, depth as u64))?;
            let enumerable = net.coin_count() <= limit_log2.min(26) as usize;
            let distance = if enumerable {
                tv_distance(&net.distribution(limit_log2)?, &target)?
            } else {
                net.distance_lower_bound()
            };
            rows.push(SweepRow { n, ell, depth, seed, exact: enumerable, distance: Exact(distance) });
        }
    }
    Ok(rows)
}
