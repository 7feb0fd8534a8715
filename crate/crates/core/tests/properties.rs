//! Randomised checks of the exact machinery against brute-force oracles
//! written here, independent of the library's fast paths.

use std::collections::BTreeMap;

use cubesample::constructions::reduce_slice_to_u1;
use cubesample::exactdist::{binomial, slice_marginal_prob};
use cubesample::localfn::{influence_graph, to_forest};
use cubesample::rational::{ratio, Rational};
use cubesample::{tv_distance, BitString, DecisionForest, DecisionTree, ExactDistribution, LocalFunction, SliceSpec};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Trees never query a variable twice on one path.
fn tree_over(free: Vec<usize>, depth: u32) -> BoxedStrategy<DecisionTree> {
    let leaf = any::<bool>().prop_map(DecisionTree::leaf);
    if depth == 0 || free.is_empty() {
        return leaf.boxed();
    }
    let node = prop::sample::select(free.clone()).prop_flat_map(move |v| {
        let rest: Vec<usize> = free.iter().copied().filter(|&u| u != v).collect();
        (tree_over(rest.clone(), depth - 1), tree_over(rest, depth - 1))
            .prop_map(move |(a, b)| DecisionTree::query(v, a, b))
    });
    prop_oneof![1 => leaf, 3 => node].boxed()
}

fn tree(m: usize, depth: u32) -> BoxedStrategy<DecisionTree> {
    tree_over((1..=m).collect(), depth)
}

fn forest_with(max_m: usize, n: usize, depth: u32) -> impl Strategy<Value = DecisionForest> {
    (1..=max_m).prop_flat_map(move |m| {
        prop::collection::vec(tree(m, depth), n).prop_map(move |t| DecisionForest::new(m, t).unwrap())
    })
}

fn forest(max_m: usize, max_n: usize, depth: u32) -> impl Strategy<Value = DecisionForest> {
    (1..=max_n).prop_flat_map(move |n| forest_with(max_m, n, depth))
}

fn three_forests(max_m: usize, max_n: usize, depth: u32) -> impl Strategy<Value = (DecisionForest, DecisionForest, DecisionForest)> {
    (1..=max_n).prop_flat_map(move |n| (forest_with(max_m, n, depth), forest_with(max_m, n, depth), forest_with(max_m, n, depth)))
}

/// Output distribution by evaluating every tree on every input.
fn brute_distribution(f: &DecisionForest) -> BTreeMap<BitString, u64> {
    let mut counts = BTreeMap::new();
    for a in 0..1u64 << f.m() {
        let x = BitString::from_index(f.m(), a);
        let y = BitString::from_bits(f.trees().iter().map(|t| t.eval_bits(&x)));
        *counts.entry(y).or_insert(0) += 1;
    }
    counts
}

/// Half the L1 distance, summed term by term.
fn brute_tv(n: usize, p: &BTreeMap<BitString, Rational>, q: impl Fn(&BitString) -> Rational) -> Rational {
    let mut total = Rational::zero();
    for a in 0..1u64 << n {
        let x = BitString::from_index(n, a);
        let px = p.get(&x).cloned().unwrap_or_else(Rational::zero);
        total += (px - q(&x)).abs();
    }
    total / ratio(2, 1)
}

fn uniform_slice(n: usize, k: usize) -> impl Fn(&BitString) -> Rational {
    let size: i64 = binomial(n, k).to_string().parse().unwrap();
    move |x: &BitString| if x.weight() == k { ratio(1, size) } else { Rational::zero() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn forest_distribution_matches_enumeration(f in forest(8, 5, 3)) {
        let got = f.output_distribution().unwrap();
        let total = 1u64 << f.m();
        let want = brute_distribution(&f);
        prop_assert_eq!(got.support_len(), want.len());
        for (y, c) in want {
            prop_assert_eq!(got.prob(&y), ratio(c as i64, total as i64));
        }
    }

    #[test]
    fn tv_to_slices_matches_term_sum(f in forest(7, 4, 2), k in 0usize..=4) {
        let n = f.n();
        let k = k.min(n);
        let d = f.output_distribution().unwrap();
        let p: BTreeMap<BitString, Rational> = d.iter().map(|(x, q)| (x.clone(), q.clone())).collect();
        let fast = tv_distance(&d, &SliceSpec::single(n, k).unwrap()).unwrap();
        prop_assert_eq!(fast, brute_tv(n, &p, uniform_slice(n, k)));
    }

    #[test]
    fn tv_is_a_metric((a, b, c) in three_forests(5, 3, 2)) {
        let (da, db, dc) = (a.output_distribution().unwrap(), b.output_distribution().unwrap(), c.output_distribution().unwrap());
        let ab = tv_distance(&da, &db).unwrap();
        prop_assert_eq!(&ab, &tv_distance(&db, &da).unwrap());
        prop_assert!(tv_distance(&da, &da).unwrap().is_zero());
        prop_assert!(tv_distance(&da, &dc).unwrap() <= &ab + tv_distance(&db, &dc).unwrap());
    }

    #[test]
    fn semantic_support_is_inside_syntactic(f in forest(6, 4, 3)) {
        let g = influence_graph(&f).unwrap();
        for j in 1..=f.n() {
            let syntactic = f.output_support(j);
            for i in g.depends(j) {
                prop_assert!(syntactic.contains(i));
            }
            // Brute force: i matters iff flipping it changes output j somewhere.
            let tree = f.tree(j);
            for &i in &syntactic {
                let matters = (0..1u64 << f.m()).any(|a| {
                    let x = BitString::from_index(f.m(), a);
                    tree.eval_bits(&x) != tree.eval_bits(&x.with_flipped(i))
                });
                prop_assert_eq!(matters, g.depends(j).contains(&i));
            }
        }
    }

    #[test]
    fn compiling_to_a_forest_preserves_the_function(f in forest(6, 4, 3)) {
        let g = to_forest(&f).unwrap();
        prop_assert_eq!(g.output_distribution().unwrap(), f.output_distribution().unwrap());
        for a in 0..1u64 << f.m() {
            let x = BitString::from_index(f.m(), a);
            prop_assert_eq!(g.eval(&x).unwrap(), f.eval(&x).unwrap());
        }
    }

    #[test]
    fn reduction_preserves_distance(f in forest(6, 5, 2), k in 1usize..=3) {
        let n = f.n();
        prop_assume!(k <= n);
        let g = reduce_slice_to_u1(&f, k).unwrap();
        let before = tv_distance(&f.output_distribution().unwrap(), &SliceSpec::single(n, k).unwrap()).unwrap();
        let after = tv_distance(&g.output_distribution().unwrap(), &SliceSpec::single(g.n(), 1).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn slice_marginals_match_materialised_slices(n in 1usize..=10, k in 0usize..=10, ell in 1usize..=10) {
        prop_assume!(k <= n && ell <= n);
        let full = SliceSpec::single(n, k).unwrap().materialize(20).unwrap();
        let prefix = full.marginal_prefix(ell).unwrap();
        for a in 0..1u64 << ell {
            let y = BitString::from_index(ell, a);
            prop_assert_eq!(slice_marginal_prob(n, k, ell, &y).unwrap(), prefix.prob(&y));
        }
    }
}

#[test]
fn uniform_distribution_over_even_strings_equals_even_slice() {
    let even: Vec<BitString> = ["000", "011", "110", "101"].iter().map(|s| s.parse().unwrap()).collect();
    let d = ExactDistribution::uniform(3, even).unwrap();
    assert!(tv_distance(&d, &SliceSpec::even(3).unwrap()).unwrap().is_zero());
    let point = ExactDistribution::point("10".parse().unwrap());
    assert_eq!(tv_distance(&SliceSpec::single(2, 1).unwrap(), &point).unwrap(), ratio(1, 2));
}
