//! Admissible collections of failing sets and the completion
//! `f = f_kappa + f_add` of a loop-with-branches polynomial.
//!
//! For a loop vertex `m` let `S_m` be the set of vertices with an edge into
//! `m`. The collection used here is the union over loop vertices of all
//! subsets of `S_m` with at least two elements. Each member `J` receives one
//! monomial `ε_J x^{b_J}` with `b_s ≥ 1` on `J` and weighted degree `d`.

use std::collections::BTreeMap;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{build_f_kappa, solve_weights, ChoiceGraph, PowerAssignment, WeightSystem};
use crate::groebner::{milnor_number, Milnor};
use crate::nondegen::{
    failing_sets, failing_sets_unpruned, is_failing, support, IndexSet, SupportSet,
};
use crate::poly::{rat, Exponent, Polynomial, Rational};

/// Largest `|S_m|` accepted; the collection has `2^|S_m|` members.
pub const MAX_PREIMAGE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Subset of `S_m` for the given (0-based) loop vertex.
    Loop(usize),
    /// Subset of the preimage of an off-loop vertex.
    Branch(usize),
    User,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AdmissibleCollection {
    pub sets: Vec<IndexSet>,
    pub provenance: Vec<Provenance>,
}

impl AdmissibleCollection {
    pub fn from_sets(sets: Vec<IndexSet>) -> Self {
        let provenance = vec![Provenance::User; sets.len()];
        AdmissibleCollection { sets, provenance }
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }
}

/// The collection built from the preimages of the loop vertices.
pub fn loop_admissible(g: &ChoiceGraph, r: &SupportSet) -> Result<AdmissibleCollection> {
    check_arity(g, r)?;
    let structure = g.loop_structure()?;
    collect_preimage_subsets(
        g,
        structure
            .component
            .cycle
            .iter()
            .map(|&m| (m, Provenance::Loop(m))),
    )
}

/// Like [`loop_admissible`], but every vertex contributes the subsets of its
/// preimage. This also covers siblings hanging off a branch vertex, which
/// the loop-only collection leaves failing.
pub fn vertex_admissible(g: &ChoiceGraph, r: &SupportSet) -> Result<AdmissibleCollection> {
    check_arity(g, r)?;
    let structure = g.loop_structure()?;
    let on_loop = |m: usize| structure.component.cycle.contains(&m);
    collect_preimage_subsets(
        g,
        (0..g.n_vertices()).map(|m| {
            let p = if on_loop(m) {
                Provenance::Loop(m)
            } else {
                Provenance::Branch(m)
            };
            (m, p)
        }),
    )
}

fn check_arity(g: &ChoiceGraph, r: &SupportSet) -> Result<()> {
    if r.arity() != g.n_vertices() {
        return Err(Error::ArityMismatch {
            left: g.n_vertices(),
            right: r.arity(),
        });
    }
    Ok(())
}

fn collect_preimage_subsets(
    g: &ChoiceGraph,
    vertices: impl Iterator<Item = (usize, Provenance)>,
) -> Result<AdmissibleCollection> {
    let mut tagged: Vec<(IndexSet, Provenance)> = Vec::new();
    for (m, prov) in vertices {
        let s_m: IndexSet = g.preimage(m).into_iter().collect();
        if s_m.len() > MAX_PREIMAGE {
            return Err(Error::ResourceLimit(format!(
                "vertex {} has {} incoming edges (limit {MAX_PREIMAGE})",
                m + 1,
                s_m.len()
            )));
        }
        for size in 2..=s_m.len() {
            for j in IndexSet::subsets_of_size(s_m, size) {
                tagged.push((j, prov));
            }
        }
    }
    tagged.sort_by(|a, b| a.0.cmp(&b.0));
    tagged.dedup_by(|a, b| a.0 == b.0);
    Ok(AdmissibleCollection {
        sets: tagged.iter().map(|t| t.0).collect(),
        provenance: tagged.iter().map(|t| t.1).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    /// Every member is a failing set.
    pub members_failing: bool,
    /// Every failing set contains some member.
    pub covering_subset: bool,
    /// Every failing `J` has a member `J_k` with `J \ J_k` not failing.
    pub covering_literal: bool,
    pub admissible: bool,
    pub uncovered: Vec<Vec<usize>>,
}

pub fn verify_admissible(a: &AdmissibleCollection, r: &SupportSet) -> AdmissibilityReport {
    let failing = failing_sets_unpruned(r);
    let members_failing = a.sets.iter().all(|&j| is_failing(r, j));
    let uncovered: Vec<IndexSet> = failing
        .iter()
        .copied()
        .filter(|&j| !a.sets.iter().any(|&k| k.is_subset(j)))
        .collect();
    let covering_literal = failing
        .iter()
        .all(|&j| a.sets.iter().any(|&k| !is_failing(r, j.difference(k))));
    AdmissibilityReport {
        members_failing,
        covering_subset: uncovered.is_empty(),
        covering_literal,
        admissible: members_failing && uncovered.is_empty(),
        uncovered: uncovered.into_iter().map(IndexSet::to_one_based).collect(),
    }
}

/// Exponent vector supported exactly on `support` with weighted degree `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multipower {
    pub support: IndexSet,
    pub exponent: Exponent,
}

impl Multipower {
    pub fn new(support: IndexSet, exponent: Exponent) -> Result<Self> {
        let actual = IndexSet::of_exponent(&exponent);
        if actual != support {
            return Err(Error::Config(format!(
                "multipower {exponent} is not supported exactly on {support}"
            )));
        }
        Ok(Multipower { support, exponent })
    }

    /// The exponents `b_s` in increasing order of `s`.
    pub fn values(&self) -> Vec<u32> {
        self.support.iter().map(|s| self.exponent.get(s)).collect()
    }
}

/// All `b` with `b_s ≥ 1` on `J` and `Σ b_s v_s = d`, lexicographically
/// ascending in `(b_s)_{s∈J}`.
pub fn solve_multipower(j: IndexSet, w: &WeightSystem) -> Result<Vec<Multipower>> {
    if j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let idx = j.to_vec();
    if idx.iter().any(|&s| s >= w.arity()) {
        return Err(Error::IndexOutOfRange {
            index: *idx.last().expect("nonempty"),
            arity: w.arity(),
        });
    }
    fn rec(
        idx: &[usize],
        pos: usize,
        remaining: u64,
        w: &WeightSystem,
        cur: &mut Exponent,
        out: &mut Vec<Exponent>,
    ) {
        let s = idx[pos];
        let v = w.weight(s);
        if pos + 1 == idx.len() {
            if remaining % v == 0 && remaining / v >= 1 {
                cur.set(s, (remaining / v) as u32);
                out.push(cur.clone());
                cur.set(s, 0);
            }
            return;
        }
        let rest: u64 = idx[pos + 1..].iter().map(|&t| w.weight(t)).sum();
        let mut b = 1;
        while b * v + rest <= remaining {
            cur.set(s, b as u32);
            rec(idx, pos + 1, remaining - b * v, w, cur, out);
            b += 1;
        }
        cur.set(s, 0);
    }
    let mut out = Vec::new();
    rec(
        &idx,
        0,
        w.degree(),
        w,
        &mut Exponent::zeros(w.arity()),
        &mut out,
    );
    Ok(out
        .into_iter()
        .map(|exponent| Multipower {
            support: j,
            exponent,
        })
        .collect())
}

/// Picks the solution minimising `max_s b_s v_s`, ties going to the
/// lexicographically largest exponent. Exponents of variables in `even`
/// must be even.
pub fn select_multipower(
    j: IndexSet,
    w: &WeightSystem,
    even: IndexSet,
) -> Result<Option<Multipower>> {
    let candidates = solve_multipower(j, w)?;
    Ok(candidates
        .into_iter()
        .filter(|m| even.iter().all(|s| m.exponent.get(s) % 2 == 0))
        .min_by(|a, b| {
            let peak = |m: &Multipower| {
                m.support
                    .iter()
                    .map(|s| m.exponent.get(s) as u64 * w.weight(s))
                    .max()
                    .unwrap_or(0)
            };
            peak(a)
                .cmp(&peak(b))
                .then_with(|| b.values().cmp(&a.values()))
        }))
}

/// How the coefficients `ε_J` are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonPolicy {
    pub seed: u64,
    /// Total attempts including the initial all-ones choice.
    pub max_attempts: usize,
}

impl Default for EpsilonPolicy {
    fn default() -> Self {
        EpsilonPolicy {
            seed: 0,
            max_attempts: 16,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompletionOptions {
    /// Variables whose exponents in `f_add` must be even.
    pub even: IndexSet,
    /// Explicit multipower choices, overriding the selection rule.
    pub pinned: BTreeMap<IndexSet, Exponent>,
    /// Use [`vertex_admissible`] instead of [`loop_admissible`].
    pub all_vertices: bool,
}

#[derive(Clone, Debug)]
pub struct Completion {
    pub f: Polynomial,
    pub f_kappa: Polynomial,
    pub weights: WeightSystem,
    pub collection: AdmissibleCollection,
    pub admissibility: AdmissibilityReport,
    pub multipowers: Vec<Multipower>,
    pub epsilon: Vec<Rational>,
    pub attempts: usize,
    pub seed: u64,
    pub milnor: u64,
}

impl Completion {
    pub fn f_add(&self) -> Polynomial {
        &self.f - &self.f_kappa
    }
}

/// Builds `f_kappa + Σ ε_J x^{b_J}` and certifies it by a finite Milnor
/// number equal to `Π (d - v_i)/v_i`.
pub fn build_completion(
    g: &ChoiceGraph,
    a: &PowerAssignment,
    policy: &EpsilonPolicy,
) -> Result<Completion> {
    build_completion_with(g, a, policy, &CompletionOptions::default())
}

pub fn build_completion_with(
    g: &ChoiceGraph,
    a: &PowerAssignment,
    policy: &EpsilonPolicy,
    options: &CompletionOptions,
) -> Result<Completion> {
    let weights = solve_weights(g, a)?;
    let f_kappa = build_f_kappa(g, a)?;
    let r = support(&f_kappa, &weights)?;
    let collection = if g.components().iter().all(|c| c.vertices.len() == 1) {
        AdmissibleCollection::default()
    } else if options.all_vertices {
        vertex_admissible(g, &r)?
    } else {
        loop_admissible(g, &r)?
    };
    let admissibility = verify_admissible(&collection, &r);
    if !admissibility.admissible {
        return Err(Error::Invariant(format!(
            "collection is not admissible: {admissibility:?}"
        )));
    }
    let mut multipowers = Vec::new();
    for &j in &collection.sets {
        let m = match options.pinned.get(&j) {
            Some(e) => {
                let m = Multipower::new(j, e.clone())?;
                if weights.degree_of(e) != weights.degree() {
                    return Err(Error::NotQuasihomogeneous {
                        exponent: e.to_string(),
                        found: weights.degree_of(e),
                        expected: weights.degree(),
                    });
                }
                m
            }
            None => select_multipower(j, &weights, options.even)?
                .ok_or_else(|| Error::NoMultipower(j.to_string()))?,
        };
        multipowers.push(m);
    }
    let completed = r.with(multipowers.iter().map(|m| m.exponent.clone()))?;
    let leftover = failing_sets(&completed);
    if !leftover.is_empty() {
        return Err(Error::Invariant(format!(
            "completed support still has failing sets {leftover:?}"
        )));
    }
    let expected = weights.milnor_orlik();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let n = g.n_vertices();
    for attempt in 0..policy.max_attempts.max(1) {
        let epsilon: Vec<Rational> = if attempt == 0 {
            vec![Rational::one(); multipowers.len()]
        } else {
            (0..multipowers.len())
                .map(|_| rat(rng.gen_range(1..=1000)))
                .collect()
        };
        let mut f = f_kappa.clone();
        for (m, e) in multipowers.iter().zip(&epsilon) {
            f = &f + &Polynomial::monomial(m.exponent.clone(), e.clone());
        }
        debug_assert_eq!(f.arity(), n);
        if let Milnor::Finite(mu) = milnor_number(&f)? {
            if Rational::from_integer(mu.into()) != expected {
                return Err(Error::Invariant(format!(
                    "Milnor number {mu} differs from the weight formula {expected}"
                )));
            }
            return Ok(Completion {
                f,
                f_kappa,
                weights,
                collection,
                admissibility,
                multipowers,
                epsilon,
                attempts: attempt + 1,
                seed: policy.seed,
                milnor: mu,
            });
        }
        if multipowers.is_empty() {
            break;
        }
    }
    Err(Error::RetriesExhausted {
        attempts: policy.max_attempts,
        seed: policy.seed,
    })
}
