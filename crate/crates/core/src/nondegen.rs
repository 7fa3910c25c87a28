//! Lattice conditions on a support set `R` and enumeration of failing sets.
//!
//! For `J ⊆ I` the conditions read
//!
//! * (C1a) some `α ∈ R` has support inside `J`;
//! * (C1b) at least `|J|` indices `k ∉ J` have some `α ∈ R_k` supported
//!   inside `J`, where `R_k = {α : α + e_k ∈ R}`;
//! * (C2) at least `|J|` indices `k ∈ I` have that property.
//!
//! The existential quantifier over `K` in (C1b) and (C2) only asks for
//! `|J|` independent witnesses, so it is evaluated as a count.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::WeightSystem;
use crate::poly::{Exponent, Polynomial};

/// Subset of `{0, ..., 63}`, ordered by size and then lexicographically.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const MAX_ARITY: usize = 64;

    pub fn empty() -> Self {
        IndexSet(0)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1 << i)
    }

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// From 1-based indices as they appear in text.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        let mut s = IndexSet::empty();
        for &i in indices {
            if i == 0 || i > Self::MAX_ARITY {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    arity: Self::MAX_ARITY,
                });
            }
            s.insert(i - 1);
        }
        Ok(s)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> IndexSet {
        IndexSet::full(n).difference(self)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |&i| bits >> i & 1 == 1)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// Support of an exponent vector.
    pub fn of_exponent(e: &Exponent) -> IndexSet {
        let mut s = IndexSet::empty();
        for i in e.support() {
            s.insert(i);
        }
        s
    }

    /// All subsets of `universe` with `size` elements, lexicographic.
    pub fn subsets_of_size(universe: IndexSet, size: usize) -> Vec<IndexSet> {
        fn rec(items: &[usize], size: usize, start: usize, cur: IndexSet, out: &mut Vec<IndexSet>) {
            if cur.len() == size {
                out.push(cur);
                return;
            }
            let need = size - cur.len();
            for pos in start..items.len() {
                if items.len() - pos < need {
                    break;
                }
                let mut next = cur;
                next.insert(items[pos]);
                rec(items, size, pos + 1, next, out);
            }
        }
        let items = universe.to_vec();
        let mut out = Vec::new();
        if size <= items.len() {
            rec(&items, size, 0, IndexSet::empty(), &mut out);
        }
        out
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.to_vec().cmp(&other.to_vec()))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = IndexSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

/// Exponents of degree `d` under a weight system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    weights: WeightSystem,
    elements: BTreeSet<Exponent>,
}

impl SupportSet {
    pub fn new(
        weights: WeightSystem,
        elements: impl IntoIterator<Item = Exponent>,
    ) -> Result<Self> {
        if weights.arity() > IndexSet::MAX_ARITY {
            return Err(Error::ResourceLimit(format!(
                "arity {} exceeds {}",
                weights.arity(),
                IndexSet::MAX_ARITY
            )));
        }
        let elements: BTreeSet<Exponent> = elements.into_iter().collect();
        for e in &elements {
            if e.arity() != weights.arity() {
                return Err(Error::ArityMismatch {
                    left: weights.arity(),
                    right: e.arity(),
                });
            }
            let found = weights.degree_of(e);
            if found != weights.degree() {
                return Err(Error::NotQuasihomogeneous {
                    exponent: e.to_string(),
                    found,
                    expected: weights.degree(),
                });
            }
        }
        Ok(SupportSet { weights, elements })
    }

    pub fn arity(&self) -> usize {
        self.weights.arity()
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn elements(&self) -> &BTreeSet<Exponent> {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.elements.contains(e)
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Exponent>) -> Result<SupportSet> {
        SupportSet::new(
            self.weights.clone(),
            self.elements.iter().cloned().chain(extra),
        )
    }

    fn masks(&self) -> Masks {
        let n = self.arity();
        let mut element = Vec::new();
        let mut shifted = vec![Vec::new(); n];
        for e in &self.elements {
            let s = IndexSet::of_exponent(e);
            element.push(s.bits());
            for k in s.iter() {
                let mut m = s;
                if e.get(k) == 1 {
                    m.remove(k);
                }
                shifted[k].push(m.bits());
            }
        }
        for list in shifted.iter_mut().chain(std::iter::once(&mut element)) {
            list.sort_unstable();
            list.dedup();
        }
        Masks { element, shifted }
    }
}

/// Support masks of `R` and of every `R_k`.
struct Masks {
    element: Vec<u64>,
    shifted: Vec<Vec<u64>>,
}

impl Masks {
    fn c1a(&self, j: u64) -> bool {
        self.element.iter().any(|&m| m & !j == 0)
    }

    fn witness(&self, k: usize, j: u64) -> bool {
        self.shifted[k].iter().any(|&m| m & !j == 0)
    }

    fn witnesses(&self, j: u64, outside_only: bool) -> usize {
        (0..self.shifted.len())
            .filter(|&k| !(outside_only && j >> k & 1 == 1))
            .filter(|&k| self.witness(k, j))
            .count()
    }

    fn satisfies_c1(&self, j: IndexSet) -> bool {
        self.c1a(j.bits()) || self.witnesses(j.bits(), true) >= j.len()
    }
}

/// `supp(f)`, checking quasihomogeneity against `w`.
pub fn support(f: &Polynomial, w: &WeightSystem) -> Result<SupportSet> {
    w.check(f)?;
    SupportSet::new(w.clone(), f.exponents().cloned())
}

/// `R_k = {α : α + e_k ∈ R}`.
pub fn r_k(r: &SupportSet, k: usize) -> Result<Vec<Exponent>> {
    if k >= r.arity() {
        return Err(Error::IndexOutOfRange {
            index: k,
            arity: r.arity(),
        });
    }
    Ok(r.elements
        .iter()
        .filter(|e| e.get(k) > 0)
        .map(|e| {
            let mut a = e.clone();
            a.set(k, e.get(k) - 1);
            a
        })
        .collect())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    C1,
    C1Primed,
    C2,
    C2Primed,
}

/// Largest `|J|` covered by the primed conditions, `⌊(N+1)/2⌋`.
pub fn primed_bound(n: usize) -> usize {
    (n + 1) / 2
}

/// Literal evaluation of one condition at one `J`.
pub fn check_condition(r: &SupportSet, j: IndexSet, which: Condition) -> Result<bool> {
    if j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if !j.is_subset(IndexSet::full(r.arity())) {
        return Err(Error::IndexOutOfRange {
            index: j.iter().last().unwrap_or(0),
            arity: r.arity(),
        });
    }
    let primed = matches!(which, Condition::C1Primed | Condition::C2Primed);
    if primed && j.len() > primed_bound(r.arity()) {
        return Err(Error::PrimedBound {
            set: j.to_string(),
            bound: primed_bound(r.arity()),
        });
    }
    let m = r.masks();
    Ok(match which {
        Condition::C1 | Condition::C1Primed => m.satisfies_c1(j),
        Condition::C2 | Condition::C2Primed => m.witnesses(j.bits(), false) >= j.len(),
    })
}

fn failing_up_to(r: &SupportSet, max_size: usize) -> Vec<IndexSet> {
    let n = r.arity();
    let m = r.masks();
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        for j in IndexSet::subsets_of_size(IndexSet::full(n), size) {
            if !m.satisfies_c1(j) {
                out.push(j);
            }
        }
    }
    out
}

/// All failing `J` with `|J| ≤ ⌊(N+1)/2⌋`, by size then lexicographically.
pub fn failing_sets(r: &SupportSet) -> Vec<IndexSet> {
    failing_up_to(r, primed_bound(r.arity()))
}

/// All failing `J ⊆ I` without the size bound.
pub fn failing_sets_unpruned(r: &SupportSet) -> Vec<IndexSet> {
    failing_up_to(r, r.arity())
}

pub fn is_failing(r: &SupportSet, j: IndexSet) -> bool {
    !j.is_empty() && !r.masks().satisfies_c1(j)
}

pub fn predicts_nondegenerate(r: &SupportSet) -> bool {
    failing_sets(r).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailingSetReport {
    pub failing_sets: Vec<Vec<usize>>,
    pub checked_bound: usize,
    pub predicts_nondegenerate: bool,
}

pub fn report(r: &SupportSet) -> FailingSetReport {
    let sets = failing_sets(r);
    FailingSetReport {
        predicts_nondegenerate: sets.is_empty(),
        failing_sets: sets.into_iter().map(IndexSet::to_one_based).collect(),
        checked_bound: primed_bound(r.arity()),
    }
}
