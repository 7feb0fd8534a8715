//! Searching for depth-`d` forests close to a slice distribution.
//!
//! Distances found by hill climbing are upper bounds on the best achievable
//! distance within the class. Exhaustive search over tiny classes gives the
//! exact optimum of that class.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::{tv_distance, SliceSpec};
use crate::localfn::{DecisionForest, DecisionTree};
use crate::rational::{Exact, Rational};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub m: usize,
    pub d: usize,
    pub target: SliceSpec,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_restarts() -> usize {
    20
}

fn default_steps() -> usize {
    200
}

impl SearchConfig {
    pub fn n(&self) -> usize {
        self.target.n()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    Hillclimb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub restart: usize,
    pub step: usize,
    pub distance: Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub mode: SearchMode,
    pub best_forest: DecisionForest,
    pub best_distance: Exact,
    /// Restart that produced the best forest (hill climbing only).
    pub best_restart: Option<usize>,
    /// Forests scored.
    pub evaluated: u64,
    pub trace: Vec<TraceRow>,
}

/// Largest number of forests scored by exhaustive search, as a power of two.
pub const EXHAUSTIVE_LOG2: u32 = 24;
/// Largest `n` and `m` admitted by exhaustive search.
pub const EXHAUSTIVE_MAX: usize = 3;
/// Largest `m` admitted by hill climbing, whose objective enumerates inputs.
pub const HILLCLIMB_MAX_M: usize = 20;

pub fn search_best_sampler(cfg: &SearchConfig, mode: SearchMode) -> Result<SearchResult> {
    let result = match mode {
        SearchMode::Exhaustive => exhaustive(cfg)?,
        SearchMode::Hillclimb => hillclimb(cfg)?,
    };
    // Recompute independently of the integer objective.
    let check = tv_distance(&result.best_forest.output_distribution()?, &cfg.target)?;
    if check != result.best_distance.0 {
        return Err(Error::Invariant(format!("search scored {} but the forest is at distance {check}", result.best_distance.0)));
    }
    Ok(result)
}

/// Integer objective `sum_{x in slice} min(c_x * N, 2^m)`, with `c_x` the
/// number of inputs mapped to `x` and `N` the slice size. Larger is closer:
/// the distance is `1 - score / (2^m N)`.
struct Objective {
    m: usize,
    slice_size: u128,
    weights: Vec<bool>,
}

impl Objective {
    fn new(cfg: &SearchConfig) -> Result<Self> {
        let n = cfg.n();
        if n > 64 {
            return Err(Error::budget("search output length", n, 64));
        }
        let size: u128 = cfg.target.size().try_into().map_err(|_| Error::budget("slice size", "over 2^128", "2^128"))?;
        let mut weights = vec![false; n + 1];
        for &w in cfg.target.weights() {
            weights[w] = true;
        }
        Ok(Objective { m: cfg.m, slice_size: size, weights })
    }

    fn score_counts(&self, counts: impl IntoIterator<Item = (u128, u64)>) -> u128 {
        let cap = 1u128 << self.m;
        counts
            .into_iter()
            .filter(|(x, _)| self.weights[x.count_ones() as usize])
            .map(|(_, c)| (c as u128 * self.slice_size).min(cap))
            .sum()
    }

    fn score(&self, f: &DecisionForest) -> u128 {
        let compiled = f.compile();
        let mut counts: HashMap<u128, u64> = HashMap::new();
        for a in 0..1u64 << self.m {
            *counts.entry(compiled.eval_u128(a)).or_insert(0) += 1;
        }
        self.score_counts(counts)
    }

    fn distance(&self, score: u128) -> Rational {
        let total = (1u128 << self.m) * self.slice_size;
        Rational::new((total - score).into(), total.into())
    }
}

/// Truth tables over `m <= 3` inputs (bit `a` is the value at input index
/// `a`) computable with depth `<= d`, each with a representative tree.
fn depth_classes(m: usize, d: usize) -> Vec<(u8, DecisionTree)> {
    let points = 1usize << m;
    let full: u8 = if points == 8 { u8::MAX } else { (1u8 << points) - 1 };
    let mut class: BTreeMap<u8, DecisionTree> = BTreeMap::new();
    class.insert(0, DecisionTree::leaf(false));
    class.insert(full, DecisionTree::leaf(true));
    for _ in 0..d.min(m) {
        let prev: Vec<(u8, DecisionTree)> = class.iter().map(|(k, t)| (*k, t.clone())).collect();
        for i in 1..=m {
            let on_one: u8 = (0..points).filter(|a| a >> (i - 1) & 1 == 1).fold(0, |acc, a| acc | 1 << a);
            for (g0, t0) in &prev {
                for (g1, t1) in &prev {
                    let table = (g0 & !on_one) | (g1 & on_one);
                    class.entry(table).or_insert_with(|| {
                        DecisionTree::query(i, t0.restrict(i, false), t1.restrict(i, true)).simplify()
                    });
                }
            }
        }
    }
    class.into_iter().collect()
}

fn exhaustive(cfg: &SearchConfig) -> Result<SearchResult> {
    let (n, m) = (cfg.n(), cfg.m);
    if n > EXHAUSTIVE_MAX || m > EXHAUSTIVE_MAX {
        return Err(Error::Precondition(format!(
            "exhaustive search covers n, m <= {EXHAUSTIVE_MAX}; got n = {n}, m = {m}"
        )));
    }
    let objective = Objective::new(cfg)?;
    let class = depth_classes(m, cfg.d);
    let combos = (class.len() as u64).pow(n as u32);
    check_log2_budget("forests in the class", 64 - combos.leading_zeros() as usize - 1, EXHAUSTIVE_LOG2)?;

    let points = 1u64 << m;
    let mut best: Option<(u128, Vec<usize>)> = None;
    let mut choice = vec![0usize; n];
    for _ in 0..combos {
        let counts = (0..points).fold(HashMap::<u128, u64>::new(), |mut acc, a| {
            let x = choice.iter().enumerate().fold(0u128, |x, (j, &c)| x | ((class[c].0 >> a & 1) as u128) << j);
            *acc.entry(x).or_insert(0) += 1;
            acc
        });
        let s = objective.score_counts(counts);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, choice.clone()));
        }
        // Odometer over class indices, output 1 fastest.
        for c in choice.iter_mut() {
            *c += 1;
            if *c < class.len() {
                break;
            }
            *c = 0;
        }
    }
    let (score, choice) = best.expect("the class is non-empty");
    let trees = choice.iter().map(|&c| class[c].1.clone()).collect();
    Ok(SearchResult {
        mode: SearchMode::Exhaustive,
        best_forest: DecisionForest::new(m, trees)?,
        best_distance: Exact(objective.distance(score)),
        best_restart: None,
        evaluated: combos,
        trace: Vec::new(),
    })
}

fn random_tree(r: &mut rng::Rng, m: usize, depth: usize, path: &mut Vec<usize>) -> DecisionTree {
    if depth == 0 || path.len() == m {
        return DecisionTree::leaf(r.random());
    }
    let free: Vec<usize> = (1..=m).filter(|v| !path.contains(v)).collect();
    let var = free[r.random_range(0..free.len())];
    path.push(var);
    let a = random_tree(r, m, depth - 1, path);
    let b = random_tree(r, m, depth - 1, path);
    path.pop();
    DecisionTree::query(var, a, b)
}

#[derive(Debug, Clone, Copy)]
enum Move {
    FlipLeaf,
    SetVar(usize),
}

/// Moves at every node in preorder; a new query index must not occur on
/// the node's ancestors or in its subtrees.
fn moves(t: &DecisionTree, m: usize) -> Vec<(usize, Move)> {
    fn walk(t: &DecisionTree, m: usize, path: &mut Vec<usize>, at: &mut usize, out: &mut Vec<(usize, Move)>) {
        let here = *at;
        *at += 1;
        match t {
            DecisionTree::Leaf(_) => out.push((here, Move::FlipLeaf)),
            DecisionTree::Query { var, on0, on1 } => {
                let below = t.vars();
                for v in 1..=m {
                    if v != *var && !path.contains(&v) && !below.contains(&v) {
                        out.push((here, Move::SetVar(v)));
                    }
                }
                path.push(*var);
                walk(on0, m, path, at, out);
                walk(on1, m, path, at, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(t, m, &mut Vec::new(), &mut 0, &mut out);
    out
}

fn apply(t: &DecisionTree, target: usize, mv: Move) -> DecisionTree {
    fn walk(t: &DecisionTree, target: usize, mv: Move, at: &mut usize) -> DecisionTree {
        let here = *at;
        *at += 1;
        match t {
            DecisionTree::Leaf(v) => DecisionTree::Leaf(if here == target { !v } else { *v }),
            DecisionTree::Query { var, on0, on1 } => {
                let var = match mv {
                    Move::SetVar(v) if here == target => v,
                    _ => *var,
                };
                let a = walk(on0, target, mv, at);
                let b = walk(on1, target, mv, at);
                DecisionTree::query(var, a, b)
            }
        }
    }
    walk(t, target, mv, &mut 0)
}

fn hillclimb(cfg: &SearchConfig) -> Result<SearchResult> {
    let m = cfg.m;
    if m > HILLCLIMB_MAX_M {
        return Err(Error::budget("hill-climbing input count", m, HILLCLIMB_MAX_M));
    }
    if cfg.restarts == 0 {
        return Err(Error::Precondition("hill climbing needs at least one restart".into()));
    }
    let objective = Objective::new(cfg)?;
    let n = cfg.n();
    let runs: Vec<(u128, DecisionForest, u64, Vec<TraceRow>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut r = rng::stream(rng::derive(cfg.seed, restart as u64), 0);
            let trees = (0..n).map(|_| random_tree(&mut r, m, cfg.d, &mut Vec::new())).collect();
            let mut f = DecisionForest::new(m, trees)?;
            let mut score = objective.score(&f);
            let mut evaluated = 1;
            let mut trace = vec![TraceRow { restart, step: 0, distance: Exact(objective.distance(score)) }];
            for step in 1..=cfg.steps {
                let mut best: Option<(u128, DecisionForest)> = None;
                for j in 1..=n {
                    for (node, mv) in moves(f.tree(j), m) {
                        let mut g = f.clone();
                        g.trees_mut()[j - 1] = apply(f.tree(j), node, mv);
                        let s = objective.score(&g);
                        evaluated += 1;
                        if s > best.as_ref().map_or(score, |b| b.0) {
                            best = Some((s, g));
                        }
                    }
                }
                let Some((s, g)) = best else { break };
                score = s;
                f = g;
                trace.push(TraceRow { restart, step, distance: Exact(objective.distance(score)) });
            }
            Ok((score, f, evaluated, trace))
        })
        .collect::<Result<_>>()?;

    let evaluated = runs.iter().map(|r| r.2).sum();
    let (best_restart, _) = runs
        .iter()
        .enumerate()
        .max_by(|(a, x), (b, y)| x.0.cmp(&y.0).then(b.cmp(a)))
        .expect("at least one restart");
    let mut trace = Vec::new();
    let mut best = None;
    for (i, (score, f, _, t)) in runs.into_iter().enumerate() {
        trace.extend(t);
        if i == best_restart {
            best = Some((score, f));
        }
    }
    let (score, f) = best.expect("index is in range");
    Ok(SearchResult {
        mode: SearchMode::Hillclimb,
        best_forest: f,
        best_distance: Exact(objective.distance(score)),
        best_restart: Some(best_restart),
        evaluated,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cfg(n: usize, m: usize, d: usize) -> SearchConfig {
        SearchConfig { m, d, target: SliceSpec::single(n, 1).unwrap(), restarts: 20, steps: 50, seed: 3 }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(depth_classes(1, 1).len(), 4);
        assert_eq!(depth_classes(2, 1).len(), 6);
        assert_eq!(depth_classes(2, 2).len(), 16);
        assert_eq!(depth_classes(3, 3).len(), 256);
        for (table, t) in depth_classes(3, 2) {
            assert!(t.depth() <= 2);
            for a in 0..8u64 {
                assert_eq!(t.eval(|i| a >> (i - 1) & 1 == 1), table >> a & 1 == 1);
            }
        }
    }

    #[test]
    fn exhaustive_examples() {
        let r = search_best_sampler(&cfg(2, 1, 1), SearchMode::Exhaustive).unwrap();
        assert_eq!(r.best_distance.0, ratio(0, 1));
        let r = search_best_sampler(&cfg(3, 3, 1), SearchMode::Exhaustive).unwrap();
        assert_eq!(r.best_distance.0, ratio(1, 3));
    }

    #[test]
    fn point_mass_target_is_hit() {
        let c = SearchConfig { target: SliceSpec::single(3, 0).unwrap(), ..cfg(3, 2, 1) };
        assert_eq!(search_best_sampler(&c, SearchMode::Exhaustive).unwrap().best_distance.0, ratio(0, 1));
        assert_eq!(search_best_sampler(&c, SearchMode::Hillclimb).unwrap().best_distance.0, ratio(0, 1));
    }

    #[test]
    fn hillclimb_matches_small_optima() {
        let r = search_best_sampler(&cfg(2, 1, 1), SearchMode::Hillclimb).unwrap();
        assert_eq!(r.best_distance.0, ratio(0, 1));
        let r = search_best_sampler(&cfg(3, 3, 1), SearchMode::Hillclimb).unwrap();
        assert_eq!(r.best_distance.0, ratio(1, 3));
    }

    #[test]
    fn hillclimb_is_deterministic() {
        let a = search_best_sampler(&cfg(3, 4, 2), SearchMode::Hillclimb).unwrap();
        let b = search_best_sampler(&cfg(3, 4, 2), SearchMode::Hillclimb).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exhaustive_rejects_large_classes() {
        assert!(matches!(search_best_sampler(&cfg(4, 2, 1), SearchMode::Exhaustive), Err(Error::Precondition(_))));
    }
}
