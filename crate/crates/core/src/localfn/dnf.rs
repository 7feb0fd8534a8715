use std::cmp::Ordering;

use serde::Serialize;

use crate::bits::BitString;

/// A conjunction of literals `y_i = b`, kept sorted by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    literals: Vec<(usize, bool)>,
}

impl Term {
    pub fn new(literals: impl IntoIterator<Item = (usize, bool)>) -> Self {
        let mut literals: Vec<_> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        Term { literals }
    }

    pub fn literals(&self) -> &[(usize, bool)] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    /// The index set `N` of the term.
    pub fn indices(&self) -> Vec<usize> {
        self.literals.iter().map(|l| l.0).collect()
    }

    pub fn satisfied(&self, input: impl Fn(usize) -> bool) -> bool {
        self.literals.iter().all(|&(i, b)| input(i) == b)
    }

    pub fn satisfied_by(&self, x: &BitString) -> bool {
        self.satisfied(|i| x.get(i))
    }

    /// Required bits in index order, as written in reports (`"1", "0"`).
    pub fn assignment(&self) -> BitString {
        BitString::from_bits(self.literals.iter().map(|l| l.1))
    }
}

/// Orders by sorted index set first, then by the assignment bits.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices()
            .cmp(&other.indices())
            .then_with(|| self.literals.iter().map(|l| l.1).cmp(other.literals.iter().map(|l| l.1)))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Disjunction of terms with a declared width bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dnf {
    width: usize,
    terms: Vec<Term>,
}

impl Dnf {
    pub(crate) fn from_terms(width: usize, terms: Vec<Term>) -> Self {
        debug_assert!(terms.iter().all(|t| t.width() <= width));
        Dnf { width, terms }
    }

    pub fn width_bound(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn size(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, input: impl Fn(usize) -> bool) -> bool {
        self.terms.iter().any(|t| t.satisfied(&input))
    }
}
