use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::constructions::majority::MajoritySystem;
use crate::error::{check_log2_budget, Error, Result};
use crate::exactdist::binomial;
use crate::localfn::{DecisionForest, LocalFunction};
use crate::rng;

/// The claimed set `L ∩ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Language {
    /// Strings of weight at least `(n + 1) / 2`.
    Majority { n: usize },
    EvenParity { n: usize },
    Explicit { n: usize, members: BTreeSet<BitString> },
}

impl Language {
    pub fn n(&self) -> usize {
        match self {
            Language::Majority { n } | Language::EvenParity { n } | Language::Explicit { n, .. } => *n,
        }
    }

    pub fn contains(&self, y: &BitString) -> bool {
        if y.len() != self.n() {
            return false;
        }
        match self {
            Language::Majority { n } => 2 * y.weight() > *n,
            Language::EvenParity { .. } => y.weight() % 2 == 0,
            Language::Explicit { members, .. } => members.contains(y),
        }
    }

    fn check(&self) -> Result<()> {
        if let Language::Explicit { n, members } = self {
            if let Some(y) = members.iter().find(|y| y.len() != *n) {
                return Err(Error::dim(format!("language member {y} has length {} instead of {n}", y.len())));
            }
        }
        Ok(())
    }

    /// Every member, in lexicographic order.
    pub fn members(&self, limit_log2: u32) -> Result<BTreeSet<BitString>> {
        match self {
            Language::Explicit { members, .. } => Ok(members.clone()),
            _ => {
                let n = self.n();
                check_log2_budget("language enumeration", n, limit_log2)?;
                Ok((0..1u64 << n).map(|a| BitString::from_index(n, a)).filter(|y| self.contains(y)).collect())
            }
        }
    }
}

/// The function half of a proof system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofFunction {
    Forest(DecisionForest),
    /// The interval-tree system, kept structural since its trees are too
    /// wide to expand for large `n`.
    Majority(MajoritySystem),
}

impl LocalFunction for ProofFunction {
    fn input_len(&self) -> usize {
        match self {
            ProofFunction::Forest(f) => f.input_len(),
            ProofFunction::Majority(s) => s.input_len(),
        }
    }

    fn output_len(&self) -> usize {
        match self {
            ProofFunction::Forest(f) => f.output_len(),
            ProofFunction::Majority(s) => s.output_len(),
        }
    }

    fn output_with(&self, j: usize, input: &dyn Fn(usize) -> bool) -> bool {
        match self {
            ProofFunction::Forest(f) => f.output_with(j, input),
            ProofFunction::Majority(s) => s.output_with(j, input),
        }
    }

    fn output_support(&self, j: usize) -> Vec<usize> {
        match self {
            ProofFunction::Forest(f) => f.output_support(j),
            ProofFunction::Majority(s) => s.output_support(j),
        }
    }

    fn semantic_support(&self, j: usize) -> Result<Vec<usize>> {
        match self {
            ProofFunction::Forest(f) => f.semantic_support(j),
            ProofFunction::Majority(s) => s.semantic_support(j),
        }
    }

    fn eval(&self, x: &BitString) -> Result<BitString> {
        match self {
            ProofFunction::Forest(f) => f.eval(x),
            ProofFunction::Majority(s) => s.eval(x),
        }
    }

    fn image_counts(&self, limit_log2: u32) -> Result<BTreeMap<BitString, u64>> {
        match self {
            ProofFunction::Forest(f) => f.image_counts(limit_log2),
            ProofFunction::Majority(s) => s.image_counts(limit_log2),
        }
    }
}

/// A function together with the language whose members it claims to output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct ProofSystem {
    function: ProofFunction,
    language: Language,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRepr {
    function: ProofFunction,
    language: Language,
}

impl TryFrom<SystemRepr> for ProofSystem {
    type Error = Error;
    fn try_from(r: SystemRepr) -> Result<Self> {
        ProofSystem::new(r.function, r.language)
    }
}

impl From<ProofSystem> for SystemRepr {
    fn from(p: ProofSystem) -> Self {
        SystemRepr { function: p.function, language: p.language }
    }
}

impl ProofSystem {
    pub fn new(function: ProofFunction, language: Language) -> Result<Self> {
        language.check()?;
        if function.output_len() != language.n() {
            return Err(Error::dim(format!(
                "function has {} outputs but the language is over length {}",
                function.output_len(),
                language.n()
            )));
        }
        Ok(ProofSystem { function, language })
    }

    pub fn function(&self) -> &ProofFunction {
        &self.function
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    /// Canonical certificate for `y`: truthful sums for the interval-tree
    /// system, prefix XORs for an even-parity claim with `m = n - 1`.
    pub fn certificate(&self, y: &BitString) -> Result<BitString> {
        if y.len() != self.language.n() {
            return Err(Error::dim(format!("target of length {} for n = {}", y.len(), self.language.n())));
        }
        match (&self.function, &self.language) {
            (ProofFunction::Majority(s), Language::Majority { .. }) => s.certificate(y),
            (f, Language::EvenParity { n }) if f.input_len() + 1 == *n => {
                let mut acc = false;
                Ok(BitString::from_bits((1..*n).map(|i| {
                    acc ^= y.get(i);
                    acc
                })))
            }
            _ => Err(Error::Capability("no canonical certificate builder for this function and language".into())),
        }
    }
}

pub fn build_majority_proof_system(n: usize) -> Result<ProofSystem> {
    ProofSystem::new(ProofFunction::Majority(MajoritySystem::new(n)?), Language::Majority { n })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum VerifyMode {
    Exhaustive,
    TwoSided {
        samples: u64,
        seed: u64,
        /// Completeness targets; the default set is used when absent.
        #[serde(default)]
        targets: Option<Vec<BitString>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// The whole input space was enumerated.
    Proof,
    /// Sampled soundness plus constructive completeness only.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Counterexample {
    /// An output outside the language.
    Unsound { output: BitString, input: BitString },
    /// A member that no input produces.
    Unreached { output: BitString },
    /// A certificate that does not reproduce its target.
    BadCertificate { target: BitString, input: BitString, output: BitString },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageVerdict {
    pub evidence: Evidence,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub language_size: Option<usize>,
    pub soundness_samples: u64,
    pub completeness_targets: u64,
    pub counterexamples: Vec<Counterexample>,
    /// Counterexamples beyond those listed.
    pub truncated: u64,
}

/// Counterexamples kept in a verdict.
pub const MAX_COUNTEREXAMPLES: usize = 16;

/// Targets tried when none are supplied.
pub const FULL_TARGET_LIMIT: u64 = 100_000;
pub const SAMPLED_TARGETS: usize = 10_000;

pub fn verify_image(ps: &ProofSystem, mode: &VerifyMode) -> Result<ImageVerdict> {
    verify_image_within(ps, mode, crate::DEFAULT_ENUMERATION_LOG2)
}

pub fn verify_image_within(ps: &ProofSystem, mode: &VerifyMode, limit_log2: u32) -> Result<ImageVerdict> {
    match mode {
        VerifyMode::Exhaustive => exhaustive(ps, limit_log2),
        VerifyMode::TwoSided { samples, seed, targets } => {
            let targets = match targets {
                Some(t) => t.clone(),
                None => default_targets(&ps.language, *seed)?,
            };
            two_sided(ps, *samples, *seed, &targets)
        }
    }
}

fn exhaustive(ps: &ProofSystem, limit_log2: u32) -> Result<ImageVerdict> {
    let f = &ps.function;
    let image = f.image_counts(limit_log2)?;
    let members = ps.language.members(limit_log2)?;
    let unsound: Vec<&BitString> = image.keys().filter(|y| !members.contains(*y)).collect();
    let unreached = members.iter().filter(|y| !image.contains_key(*y));

    let shown: BTreeSet<&BitString> = unsound.iter().take(MAX_COUNTEREXAMPLES).copied().collect();
    let preimages = first_preimages(f, &shown)?;
    let mut counterexamples: Vec<Counterexample> = shown
        .iter()
        .map(|y| Counterexample::Unsound { output: (*y).clone(), input: preimages[*y].clone() })
        .collect();
    let mut total = unsound.len() as u64;
    for y in unreached {
        total += 1;
        if counterexamples.len() < MAX_COUNTEREXAMPLES {
            counterexamples.push(Counterexample::Unreached { output: y.clone() });
        }
    }
    Ok(ImageVerdict {
        evidence: Evidence::Proof,
        passed: total == 0,
        image_size: Some(image.len()),
        language_size: Some(members.len()),
        soundness_samples: 0,
        completeness_targets: 0,
        truncated: total - counterexamples.len() as u64,
        counterexamples,
    })
}

/// Lexicographically first input producing each wanted output.
pub(crate) fn first_preimages<F: LocalFunction + ?Sized>(
    f: &F,
    wanted: &BTreeSet<&BitString>,
) -> Result<BTreeMap<BitString, BitString>> {
    let m = f.input_len();
    let mut found = BTreeMap::new();
    if wanted.is_empty() {
        return Ok(found);
    }
    // Index order differs from text order, so scan everything.
    for a in 0..1u64 << m {
        let x = BitString::from_index(m, a);
        let y = f.eval(&x)?;
        if wanted.contains(&y) {
            let slot = found.entry(y).or_insert_with(|| x.clone());
            if x < *slot {
                *slot = x;
            }
        }
    }
    Ok(found)
}

fn two_sided(ps: &ProofSystem, samples: u64, seed: u64, targets: &[BitString]) -> Result<ImageVerdict> {
    let f = &ps.function;
    let n = ps.language.n();
    // Fail early rather than after sampling.
    if let Some(y) = targets.first() {
        ps.certificate(y)?;
    }
    if let Some(y) = targets.iter().find(|y| y.len() != n) {
        return Err(Error::dim(format!("completeness target {y} has length {}", y.len())));
    }

    let chunks: Vec<(u64, u64)> = rng::chunks(samples).collect();
    let per_chunk: Vec<(u64, Vec<Counterexample>)> = chunks
        .par_iter()
        .map(|&(c, len)| {
            let mut r = rng::stream(seed, c);
            let mut bad = Vec::new();
            let mut count = 0;
            for _ in 0..len {
                let x = rng::bits(&mut r, f.input_len());
                let y = f.eval(&x)?;
                if !ps.language.contains(&y) {
                    count += 1;
                    if bad.len() < MAX_COUNTEREXAMPLES {
                        bad.push(Counterexample::Unsound { output: y, input: x });
                    }
                }
            }
            Ok((count, bad))
        })
        .collect::<Result<_>>()?;

    let per_target: Vec<Option<Counterexample>> = targets
        .par_iter()
        .map(|y| {
            let x = ps.certificate(y)?;
            let got = f.eval(&x)?;
            Ok((got != *y).then(|| Counterexample::BadCertificate { target: y.clone(), input: x, output: got }))
        })
        .collect::<Result<_>>()?;

    let mut total = 0;
    let mut counterexamples = Vec::new();
    let found = per_chunk.into_iter().flat_map(|(c, bad)| {
        total += c;
        bad
    });
    counterexamples.extend(found);
    for bad in per_target.into_iter().flatten() {
        total += 1;
        counterexamples.push(bad);
    }
    counterexamples.truncate(MAX_COUNTEREXAMPLES);
    Ok(ImageVerdict {
        evidence: Evidence::Partial,
        passed: total == 0,
        image_size: None,
        language_size: None,
        soundness_samples: samples,
        completeness_targets: targets.len() as u64,
        truncated: total - counterexamples.len() as u64,
        counterexamples,
    })
}

/// Minimum-weight members for a majority claim, all even strings for a
/// parity claim, and every member of an explicit language; sampled
/// uniformly from that set when it has more than [`FULL_TARGET_LIMIT`]
/// elements.
pub fn default_targets(language: &Language, seed: u64) -> Result<Vec<BitString>> {
    let n = language.n();
    let mut r = rng::stream(rng::derive(seed, 0x7461_7267), 0);
    match language {
        Language::Majority { n } => {
            let k = n.div_ceil(2);
            let total = binomial(*n, k);
            if total <= FULL_TARGET_LIMIT.into() {
                Ok(crate::bits::k_subsets(*n, k).map(|s| ones_at(*n, &s)).collect())
            } else {
                Ok((0..SAMPLED_TARGETS)
                    .map(|_| {
                        let s: Vec<usize> = sample(&mut r, *n, k).into_iter().map(|i| i + 1).collect();
                        ones_at(*n, &s)
                    })
                    .collect())
            }
        }
        Language::EvenParity { .. } => {
            if n <= 1 + FULL_TARGET_LIMIT.ilog2() as usize {
                Ok((0..1u64 << n).map(|a| BitString::from_index(n, a)).filter(|y| y.weight() % 2 == 0).collect())
            } else {
                Ok((0..SAMPLED_TARGETS)
                    .map(|_| {
                        let mut y = rng::bits(&mut r, n);
                        if y.weight() % 2 == 1 {
                            y.flip(n);
                        }
                        y
                    })
                    .collect())
            }
        }
        Language::Explicit { members, .. } => {
            if members.len() as u64 <= FULL_TARGET_LIMIT {
                Ok(members.iter().cloned().collect())
            } else {
                let all: Vec<_> = members.iter().collect();
                Ok(sample(&mut r, all.len(), SAMPLED_TARGETS).into_iter().map(|i| all[i].clone()).collect())
            }
        }
    }
}

fn ones_at(n: usize, positions: &[usize]) -> BitString {
    let mut y = BitString::zeros(n);
    for &i in positions {
        y.set(i, true);
    }
    y
}
