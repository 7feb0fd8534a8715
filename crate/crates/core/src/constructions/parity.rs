use crate::error::{Error, Result};
use crate::localfn::{DecisionForest, DecisionTree};

/// `(x_1, x_1 ^ x_2, ..., x_{n-1} ^ x_n, x_n)`: `n` inputs, `n + 1` outputs,
/// every output reading at most two inputs.
pub fn build_parity_sampler(n: usize) -> Result<DecisionForest> {
    if n == 0 {
        return Err(Error::Precondition("parity sampler needs n >= 1".into()));
    }
    let mut trees = Vec::with_capacity(n + 1);
    trees.push(DecisionTree::var(1));
    trees.extend((2..=n).map(|i| DecisionTree::xor(i - 1, i)));
    trees.push(DecisionTree::var(n));
    DecisionForest::new(n, trees)
}
