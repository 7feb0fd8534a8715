use crate::bits::k_subsets;
use crate::error::{Error, Result};
use crate::exactdist::binomial;
use crate::localfn::{DecisionForest, DecisionTree};

/// Most outputs the reduction may produce, as a power of two.
pub const REDUCTION_OUTPUT_LOG2: u32 = 20;

/// Largest `k` accepted, bounding the depth blow-up `k * depth(f)`.
pub const REDUCTION_MAX_K: usize = 16;

/// One output per `k`-subset `A` of `[n]` in lexicographic order, equal to
/// the AND of `f`'s outputs in `A`. A sampler for `U_k^n` with error `e`
/// becomes a sampler for `U_1^{C(n,k)}` with the same error.
pub fn reduce_slice_to_u1(f: &DecisionForest, k: usize) -> Result<DecisionForest> {
    let n = f.n();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("reduction needs 1 <= k <= n = {n}, got k = {k}")));
    }
    if k > REDUCTION_MAX_K {
        return Err(Error::budget("reduction subset size", k, REDUCTION_MAX_K));
    }
    let outputs = binomial(n, k);
    if outputs > (1u64 << REDUCTION_OUTPUT_LOG2).into() {
        return Err(Error::budget("reduction output count", &outputs, format_args!("2^{REDUCTION_OUTPUT_LOG2}")));
    }
    let trees = k_subsets(n, k)
        .map(|a| a.iter().fold(DecisionTree::leaf(true), |acc, &j| acc.and(f.tree(j))).simplify())
        .collect();
    DecisionForest::new(f.m(), trees)
}
