//! Audits of two locality lower bounds: the `cd <= (n+1)/2` obstruction for
//! majority images and the counting bound for good codes.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::constructions::proof::{first_preimages, Counterexample, Language};
use crate::error::{check_log2_budget, Error, Result};
use crate::localfn::{influence_graph, InfluenceGraph, LocalFunction};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalityClaim {
    Majority,
    Code,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditOptions {
    pub limit_log2: u32,
    /// Random inputs scanned for a witness when the image is too large.
    pub samples: u64,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { limit_log2: crate::DEFAULT_ENUMERATION_LOG2, samples: 100_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "finding")]
pub enum MajorityFinding {
    /// `cd > (n+1)/2`, so the obstruction says nothing.
    BoundNotApplicable,
    /// The enumerated image differs from the majority language.
    ImageMismatch { counterexample: Counterexample },
    /// A member `y` with `y_{N(i)} = 1`, an input `x` producing it, and a
    /// resetting of output `i`'s inputs giving `z` below the threshold.
    Witness {
        output: usize,
        neighborhood: Vec<usize>,
        y: BitString,
        x: BitString,
        modified_input: BitString,
        z: BitString,
    },
    /// Sampling found neither an unsound output nor a witness.
    Inconclusive { samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MajorityAudit {
    pub n: usize,
    pub c: usize,
    pub d: usize,
    pub cd: usize,
    pub threshold: usize,
    pub bound_applies: bool,
    #[serde(flatten)]
    pub finding: MajorityFinding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeAudit {
    pub n: usize,
    pub code_size: usize,
    /// Absent for a single-word code.
    pub min_distance: Option<usize>,
    pub locality: usize,
    pub rate_approx: f64,
    pub relative_distance_approx: f64,
    /// `alpha * beta * n`.
    pub required_locality_approx: f64,
    /// `locality >= alpha * beta * n`, decided as `2^(c n) >= |C|^dist`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "claim")]
pub enum AuditReport {
    Majority(MajorityAudit),
    Code(CodeAudit),
}

pub fn audit_locality_bounds<F: LocalFunction + ?Sized>(f: &F, claim: LocalityClaim, opts: &AuditOptions) -> Result<AuditReport> {
    let g = influence_graph(f)?;
    match claim {
        LocalityClaim::Majority => audit_majority(f, &g, opts).map(AuditReport::Majority),
        LocalityClaim::Code => audit_code(f, &g, opts).map(AuditReport::Code),
    }
}

fn audit_majority<F: LocalFunction + ?Sized>(f: &F, g: &InfluenceGraph, opts: &AuditOptions) -> Result<MajorityAudit> {
    let n = f.output_len();
    let (c, d) = (g.max_output_locality(), g.max_input_influence());
    let threshold = n.div_ceil(2) + usize::from(n % 2 == 0);
    let bound_applies = 2 * c * d <= n + 1;
    let mut audit = MajorityAudit { n, c, d, cd: c * d, threshold, bound_applies, finding: MajorityFinding::BoundNotApplicable };
    if !bound_applies {
        return Ok(audit);
    }
    let language = Language::Majority { n };
    audit.finding = if f.input_len() <= opts.limit_log2 as usize {
        image_mismatch(f, &language, opts.limit_log2)?
            .ok_or_else(|| Error::Invariant("image equals the majority language although cd <= (n+1)/2".into()))?
    } else {
        sample_witness(f, g, &language, opts)?
    };
    Ok(audit)
}

fn image_mismatch<F: LocalFunction + ?Sized>(f: &F, language: &Language, limit_log2: u32) -> Result<Option<MajorityFinding>> {
    let image = f.image_counts(limit_log2)?;
    if let Some(y) = image.keys().find(|y| !language.contains(y)) {
        let wanted = BTreeSet::from([y]);
        let input = first_preimages(f, &wanted)?.remove(y).expect("y is in the image");
        return Ok(Some(MajorityFinding::ImageMismatch { counterexample: Counterexample::Unsound { output: y.clone(), input } }));
    }
    let missing = language.members(limit_log2)?.into_iter().find(|y| !image.contains_key(y));
    Ok(missing.map(|output| MajorityFinding::ImageMismatch { counterexample: Counterexample::Unreached { output } }))
}

fn sample_witness<F: LocalFunction + ?Sized>(
    f: &F,
    g: &InfluenceGraph,
    language: &Language,
    opts: &AuditOptions,
) -> Result<MajorityFinding> {
    let n = f.output_len();
    let i = (1..=n).min_by_key(|&j| (g.neighborhood(j).len(), j)).expect("n >= 1");
    let neighborhood: Vec<usize> = g.neighborhood(i).into_iter().collect();
    let deps = g.depends(i);
    check_log2_budget("inputs of the chosen output", deps.len(), crate::localfn::PER_OUTPUT_LIMIT)?;

    // An assignment to output i's inputs switching it off, if any.
    let zeroing = (0..1u64 << deps.len()).find(|&a| {
        let read = |k: usize| deps.iter().position(|&v| v == k).is_some_and(|t| a >> t & 1 == 1);
        !f.output_with(i, &read)
    });
    let Some(zeroing) = zeroing else {
        let mut y = BitString::ones(n);
        y.set(i, false);
        return Ok(MajorityFinding::ImageMismatch { counterexample: Counterexample::Unreached { output: y } });
    };

    for (chunk, len) in rng::chunks(opts.samples) {
        let mut r = rng::stream(opts.seed, chunk);
        for _ in 0..len {
            let x = rng::bits(&mut r, f.input_len());
            let y = f.eval(&x)?;
            if !language.contains(&y) {
                return Ok(MajorityFinding::ImageMismatch { counterexample: Counterexample::Unsound { output: y, input: x } });
            }
            if neighborhood.iter().all(|&j| y.get(j)) {
                let mut modified = x.clone();
                for (t, &v) in deps.iter().enumerate() {
                    modified.set(v, zeroing >> t & 1 == 1);
                }
                let z = f.eval(&modified)?;
                if !language.contains(&z) {
                    return Ok(MajorityFinding::Witness { output: i, neighborhood, y, x, modified_input: modified, z });
                }
            }
        }
    }
    Ok(MajorityFinding::Inconclusive { samples: opts.samples })
}

/// Largest code whose pairwise distances are computed.
pub const CODE_PAIR_LIMIT: usize = 1 << 13;

fn audit_code<F: LocalFunction + ?Sized>(f: &F, g: &InfluenceGraph, opts: &AuditOptions) -> Result<CodeAudit> {
    let n = f.output_len();
    let code: Vec<BitString> = f.image_counts(opts.limit_log2)?.into_keys().collect();
    if code.len() > CODE_PAIR_LIMIT {
        return Err(Error::budget("code words for pairwise distance", code.len(), CODE_PAIR_LIMIT));
    }
    let min_distance = (0..code.len())
        .flat_map(|a| (a + 1..code.len()).map(move |b| (a, b)))
        .map(|(a, b)| code[a].iter().zip(code[b].iter()).filter(|(u, v)| u != v).count())
        .min();
    let locality = g.max_output_locality();
    let size = BigUint::from(code.len());
    let holds = match min_distance {
        None => true,
        Some(dist) => BigUint::one() << (locality * n) >= size.pow(dist as u32),
    };
    let rate = (code.len() as f64).log2() / n as f64;
    let beta = min_distance.map_or(0.0, |d| d as f64 / n as f64);
    Ok(CodeAudit {
        n,
        code_size: code.len(),
        min_distance,
        locality,
        rate_approx: rate,
        relative_distance_approx: beta,
        required_locality_approx: rate * beta * n as f64,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::MajoritySystem;
    use crate::localfn::{DecisionForest, DecisionTree};

    #[test]
    fn identity_fails_the_majority_claim() {
        let id = DecisionForest::new(3, (1..=3).map(DecisionTree::var).collect()).unwrap();
        let AuditReport::Majority(a) = audit_locality_bounds(&id, LocalityClaim::Majority, &AuditOptions::default()).unwrap() else {
            panic!()
        };
        assert_eq!((a.c, a.d, a.cd), (1, 1, 1));
        assert!(a.bound_applies);
        let MajorityFinding::ImageMismatch { counterexample: Counterexample::Unsound { output, .. } } = a.finding else {
            panic!("{:?}", a.finding)
        };
        assert_eq!(output.to_string(), "000");
    }

    #[test]
    fn interval_tree_system_is_out_of_range() {
        let s = MajoritySystem::new(7).unwrap();
        let AuditReport::Majority(a) = audit_locality_bounds(&s, LocalityClaim::Majority, &AuditOptions::default()).unwrap() else {
            panic!()
        };
        assert!(a.cd > 4);
        assert_eq!(a.finding, MajorityFinding::BoundNotApplicable);
    }

    #[test]
    fn sampled_witness_for_a_wide_identity() {
        // Inputs 1..=30 are unused; the image is the full cube.
        let trees = (31..=35).map(DecisionTree::var).collect();
        let f = DecisionForest::new(35, trees).unwrap();
        let opts = AuditOptions { samples: 1000, ..AuditOptions::default() };
        let AuditReport::Majority(a) = audit_locality_bounds(&f, LocalityClaim::Majority, &opts).unwrap() else { panic!() };
        assert!(matches!(a.finding, MajorityFinding::ImageMismatch { .. } | MajorityFinding::Witness { .. }));
    }

    #[test]
    fn constant_one_output_is_unreachable_zero() {
        let mut trees = vec![DecisionTree::leaf(true)];
        trees.extend((31..=34).map(DecisionTree::var));
        let f = DecisionForest::new(34, trees).unwrap();
        let opts = AuditOptions { samples: 0, ..AuditOptions::default() };
        let AuditReport::Majority(a) = audit_locality_bounds(&f, LocalityClaim::Majority, &opts).unwrap() else { panic!() };
        assert_eq!(
            a.finding,
            MajorityFinding::ImageMismatch { counterexample: Counterexample::Unreached { output: "01111".parse().unwrap() } }
        );
    }

    #[test]
    fn repetition_code() {
        let f = DecisionForest::new(1, vec![DecisionTree::var(1); 8]).unwrap();
        let AuditReport::Code(a) = audit_locality_bounds(&f, LocalityClaim::Code, &AuditOptions::default()).unwrap() else { panic!() };
        assert_eq!((a.code_size, a.min_distance, a.locality), (2, Some(8), 1));
        assert!(a.holds);
        assert!((a.required_locality_approx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity_code_meets_the_bound() {
        // Even-weight code: |C| = 2^(n-1), distance 2, locality 2.
        let f = crate::constructions::build_parity_sampler(5).unwrap();
        let AuditReport::Code(a) = audit_locality_bounds(&f, LocalityClaim::Code, &AuditOptions::default()).unwrap() else { panic!() };
        assert_eq!(a.min_distance, Some(2));
        assert!(a.holds);
    }
}
