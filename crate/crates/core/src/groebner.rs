//! Buchberger's algorithm over the rationals in graded reverse lexicographic
//! order, Jacobian ideals, normal forms and Milnor numbers.
//!
//! Internally monomials are packed into fixed arrays of `u16`, so at most
//! [`MAX_VARS`] variables are supported. Pairs are selected by (weighted)
//! sugar degree and pruned with the Gebauer–Möller criteria.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graphs::WeightSystem;
use crate::nondegen::IndexSet;
use crate::orbifold::GroupElement;
use crate::poly::{Exponent, Polynomial, Rational};

pub const MAX_VARS: usize = 16;

/// Upper bound on the number of standard monomials enumerated.
pub const MAX_STANDARD_MONOMIALS: usize = 4_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Mono {
    e: [u16; MAX_VARS],
    deg: u32,
}

impl Mono {
    fn one() -> Self {
        Mono {
            e: [0; MAX_VARS],
            deg: 0,
        }
    }

    fn from_exponent(x: &Exponent) -> Result<Self> {
        let mut m = Mono::one();
        for (i, &a) in x.as_slice().iter().enumerate() {
            m.e[i] = u16::try_from(a)
                .map_err(|_| Error::ResourceLimit(format!("exponent {a} too large")))?;
            m.deg += a;
        }
        Ok(m)
    }

    fn to_exponent(self, arity: usize) -> Exponent {
        Exponent::from(
            self.e[..arity]
                .iter()
                .map(|&a| a as u32)
                .collect::<Vec<_>>(),
        )
    }

    fn mask(&self) -> u32 {
        let mut m = 0;
        for (i, &a) in self.e.iter().enumerate() {
            if a > 0 {
                m |= 1 << i;
            }
        }
        m
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut e = [0; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = self.e[i] + o.e[i];
        }
        Mono {
            e,
            deg: self.deg + o.deg,
        }
    }

    fn divides(&self, o: &Mono) -> bool {
        self.deg <= o.deg && self.e.iter().zip(&o.e).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming divisibility.
    fn quotient(&self, o: &Mono) -> Mono {
        let mut e = [0; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = o.e[i] - self.e[i];
        }
        Mono {
            e,
            deg: o.deg - self.deg,
        }
    }

    fn lcm(&self, o: &Mono) -> Mono {
        let mut e = [0; MAX_VARS];
        let mut deg = 0;
        for i in 0..MAX_VARS {
            e[i] = self.e[i].max(o.e[i]);
            deg += e[i] as u32;
        }
        Mono { e, deg }
    }

    fn coprime(&self, o: &Mono) -> bool {
        self.e.iter().zip(&o.e).all(|(&a, &b)| a == 0 || b == 0)
    }

    fn weighted(&self, w: &[u64]) -> u64 {
        w.iter().zip(&self.e).map(|(&w, &a)| w * a as u64).sum()
    }

    /// The variable of a pure power, if this is one.
    fn pure_power_var(&self) -> Option<usize> {
        let mut found = None;
        for (i, &a) in self.e.iter().enumerate() {
            if a > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        match self.deg.cmp(&o.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..MAX_VARS).rev() {
            if self.e[i] != o.e[i] {
                return o.e[i].cmp(&self.e[i]);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Polynomial with integer coefficients, terms in descending order.
#[derive(Clone, Debug)]
struct Poly {
    terms: Vec<(Mono, BigInt)>,
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.e)
    }
}

/// Clears denominators: returns `D p` with integer coefficients and `D`.
fn integral_terms(p: &Polynomial) -> Result<(Vec<(Mono, BigInt)>, BigInt)> {
    let d = p
        .terms()
        .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let terms = p
        .terms()
        .map(|(e, c)| {
            let scaled = c * Rational::from_integer(d.clone());
            Ok((Mono::from_exponent(e)?, scaled.to_integer()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((terms, d))
}

impl Poly {
    fn from_polynomial(p: &Polynomial) -> Result<Self> {
        let (mut terms, _) = integral_terms(p)?;
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut p = Poly { terms };
        p.make_primitive();
        Ok(p)
    }

    /// Monic rational version.
    fn to_polynomial(&self, arity: usize) -> Polynomial {
        let lc = self
            .terms
            .first()
            .map(|t| t.1.clone())
            .unwrap_or_else(BigInt::one);
        Polynomial::from_terms(
            arity,
            self.terms
                .iter()
                .map(|(m, c)| (m.to_exponent(arity), Rational::new(c.clone(), lc.clone()))),
        )
        .expect("arity is consistent")
    }

    fn lm(&self) -> &Mono {
        &self.terms[0].0
    }

    fn lc(&self) -> &BigInt {
        &self.terms[0].1
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Divides out the content and makes the leading coefficient positive.
    fn make_primitive(&mut self) {
        let Some((_, lc)) = self.terms.first() else {
            return;
        };
        let mut g = self
            .terms
            .iter()
            .fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c));
        if lc.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for (_, c) in self.terms.iter_mut() {
                *c /= &g;
            }
        }
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.deg == 0
    }
}

fn add_into(map: &mut BTreeMap<Mono, BigInt>, key: Mono, delta: BigInt) {
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(delta);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += delta;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn to_map(terms: impl IntoIterator<Item = (Mono, BigInt)>) -> BTreeMap<Mono, BigInt> {
    let mut map = BTreeMap::new();
    for (m, c) in terms {
        if !c.is_zero() {
            add_into(&mut map, m, c);
        }
    }
    map
}

/// Fraction-free full reduction. Returns `(r, λ)` with `λ p ≡ r` modulo
/// the reducers and no term of `r` divisible by a leading monomial.
fn reduce<'a, F>(mut todo: BTreeMap<Mono, BigInt>, find: F) -> (Poly, BigInt)
where
    F: Fn(&Mono) -> Option<&'a Poly>,
{
    // `out` entries carry the multiplier in force when they were emitted
    let mut out: Vec<(Mono, BigInt, BigInt)> = Vec::new();
    let mut lambda = BigInt::one();
    while let Some((t, c)) = todo.pop_last() {
        match find(&t) {
            Some(g) => {
                let a = g.lc();
                let h = a.gcd(&c);
                let (a_h, c_h) = (a / &h, &c / &h);
                if !a_h.is_one() {
                    for v in todo.values_mut() {
                        *v *= &a_h;
                    }
                    lambda *= &a_h;
                }
                let q = g.lm().quotient(&t);
                for (u, b) in &g.terms[1..] {
                    add_into(&mut todo, q.mul(u), -(&c_h * b));
                }
            }
            None => out.push((t, c, lambda.clone())),
        }
    }
    let terms = out
        .into_iter()
        .map(|(m, c, at)| {
            let factor = &lambda / &at;
            (m, c * factor)
        })
        .collect();
    (Poly { terms }, lambda)
}

/// Coefficient arithmetic for the pair loop: exact fraction-free integers or
/// a prime field.
trait Arith {
    type Poly: Clone;

    fn lm(p: &Self::Poly) -> &Mono;
    fn is_zero(p: &Self::Poly) -> bool;
    fn is_one(p: &Self::Poly) -> bool;
    /// The S-polynomial of `f` and `g` over `lcm`, before reduction.
    fn s_poly(&self, f: &Self::Poly, g: &Self::Poly, lcm: &Mono) -> Self::Poly;
    /// Full reduction, normalised (primitive or monic).
    fn reduce<'a>(
        &self,
        p: Self::Poly,
        find: impl Fn(&Mono) -> Option<&'a Self::Poly>,
    ) -> Self::Poly
    where
        Self::Poly: 'a;
    /// Reduces everything but the leading term.
    fn reduce_tail<'a>(
        &self,
        p: &Self::Poly,
        find: impl Fn(&Mono) -> Option<&'a Self::Poly>,
    ) -> Self::Poly
    where
        Self::Poly: 'a;
}

struct Integers;

impl Arith for Integers {
    type Poly = Poly;

    fn lm(p: &Poly) -> &Mono {
        p.lm()
    }

    fn is_zero(p: &Poly) -> bool {
        p.is_zero()
    }

    fn is_one(p: &Poly) -> bool {
        p.is_one()
    }

    fn s_poly(&self, f: &Poly, g: &Poly, lcm: &Mono) -> Poly {
        let h = f.lc().gcd(g.lc());
        let (cf, cg) = (g.lc() / &h, f.lc() / &h);
        let qf = f.lm().quotient(lcm);
        let qg = g.lm().quotient(lcm);
        let map = to_map(
            f.terms[1..]
                .iter()
                .map(|(m, c)| (qf.mul(m), c * &cf))
                .chain(g.terms[1..].iter().map(|(m, c)| (qg.mul(m), -(c * &cg)))),
        );
        Poly {
            terms: map.into_iter().rev().collect(),
        }
    }

    fn reduce<'a>(&self, p: Poly, find: impl Fn(&Mono) -> Option<&'a Poly>) -> Poly {
        let (mut r, _) = reduce(to_map(p.terms), find);
        r.make_primitive();
        r
    }

    fn reduce_tail<'a>(&self, p: &Poly, find: impl Fn(&Mono) -> Option<&'a Poly>) -> Poly {
        let (tail, lambda) = reduce(to_map(p.terms[1..].iter().cloned()), find);
        let mut terms = vec![(p.terms[0].0, p.lc() * lambda)];
        terms.extend(tail.terms);
        let mut q = Poly { terms };
        q.make_primitive();
        q
    }
}

/// Monic polynomial over `F_p`, terms in descending order.
#[derive(Clone, Debug)]
struct ModPoly {
    terms: Vec<(Mono, u64)>,
}

/// Arithmetic modulo a prime below `2^63`.
struct Modular {
    p: u64,
}

impl Modular {
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn inverse(&self, a: u64) -> u64 {
        let (mut base, mut exp, mut acc) = (a, self.p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn from_int(&self, c: &BigInt) -> u64 {
        let r = c.mod_floor(&BigInt::from(self.p));
        r.try_into().expect("residue fits in u64")
    }

    fn monic(&self, mut terms: Vec<(Mono, u64)>) -> ModPoly {
        if let Some(&(_, lc)) = terms.first() {
            if lc != 1 {
                let inv = self.inverse(lc);
                for t in terms.iter_mut() {
                    t.1 = self.mul(t.1, inv);
                }
            }
        }
        ModPoly { terms }
    }

    /// `todo += c * q * g.tail`, removing cancelled entries.
    fn subtract(&self, todo: &mut BTreeMap<Mono, u64>, c: u64, q: &Mono, g: &ModPoly) {
        for (u, b) in &g.terms[1..] {
            let delta = self.p - self.mul(c, *b);
            match todo.entry(q.mul(u)) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(delta);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let sum = (*o.get() + delta) % self.p;
                    if sum == 0 {
                        o.remove();
                    } else {
                        *o.get_mut() = sum;
                    }
                }
            }
        }
    }

    fn reduce_map<'a>(
        &self,
        mut todo: BTreeMap<Mono, u64>,
        find: impl Fn(&Mono) -> Option<&'a ModPoly>,
    ) -> Vec<(Mono, u64)> {
        let mut out = Vec::new();
        while let Some((t, c)) = todo.pop_last() {
            match find(&t) {
                Some(g) => self.subtract(&mut todo, c, &g.lm().quotient(&t), g),
                None => out.push((t, c)),
            }
        }
        out
    }
}

impl ModPoly {
    fn lm(&self) -> &Mono {
        &self.terms[0].0
    }
}

impl Arith for Modular {
    type Poly = ModPoly;

    fn lm(p: &ModPoly) -> &Mono {
        p.lm()
    }

    fn is_zero(p: &ModPoly) -> bool {
        p.terms.is_empty()
    }

    fn is_one(p: &ModPoly) -> bool {
        p.terms.len() == 1 && p.terms[0].0.deg == 0
    }

    fn s_poly(&self, f: &ModPoly, g: &ModPoly, lcm: &Mono) -> ModPoly {
        let mut todo: BTreeMap<Mono, u64> = BTreeMap::new();
        let qf = f.lm().quotient(lcm);
        for (m, c) in &f.terms[1..] {
            todo.insert(qf.mul(m), *c);
        }
        self.subtract(&mut todo, 1, &g.lm().quotient(lcm), g);
        ModPoly {
            terms: todo.into_iter().rev().collect(),
        }
    }

    fn reduce<'a>(&self, p: ModPoly, find: impl Fn(&Mono) -> Option<&'a ModPoly>) -> ModPoly {
        let out = self.reduce_map(p.terms.into_iter().collect(), find);
        self.monic(out)
    }

    fn reduce_tail<'a>(&self, p: &ModPoly, find: impl Fn(&Mono) -> Option<&'a ModPoly>) -> ModPoly {
        let mut terms = vec![p.terms[0]];
        terms.extend(self.reduce_map(p.terms[1..].iter().copied().collect(), find));
        ModPoly { terms }
    }
}

struct Element<P> {
    poly: P,
    mask: u32,
    sugar: u64,
    active: bool,
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
    sugar: u64,
}

struct Builder<'w, A: Arith> {
    arith: A,
    weights: &'w [u64],
    elements: Vec<Element<A::Poly>>,
    pairs: Vec<Pair>,
}

impl<'w, A: Arith> Builder<'w, A> {
    fn new(arith: A, weights: &'w [u64]) -> Self {
        Builder {
            arith,
            weights,
            elements: Vec::new(),
            pairs: Vec::new(),
        }
    }

    fn find<'s>(elements: &'s [Element<A::Poly>], m: &Mono) -> Option<&'s A::Poly> {
        let mask = m.mask();
        elements
            .iter()
            .find(|g| g.active && g.mask & !mask == 0 && A::lm(&g.poly).divides(m))
            .map(|g| &g.poly)
    }

    fn reduce(&self, p: A::Poly) -> A::Poly {
        self.arith.reduce(p, |m| Self::find(&self.elements, m))
    }

    /// Reduces an input generator and adds it with its own sugar.
    fn add_generator(&mut self, p: A::Poly, sugar: u64) {
        let h = self.reduce(p);
        if !A::is_zero(&h) {
            self.insert(h, sugar);
        }
    }

    fn pair_sugar(&self, i: usize, j: usize, lcm: &Mono) -> u64 {
        let s = |k: usize| {
            let e = &self.elements[k];
            e.sugar + A::lm(&e.poly).quotient(lcm).weighted(self.weights)
        };
        s(i).max(s(j))
    }

    /// Adds `h` to the basis using the Gebauer–Möller update.
    fn insert(&mut self, h: A::Poly, sugar: u64) {
        let lm_h = *A::lm(&h);
        let new = self.elements.len();
        let mut fresh: Vec<(usize, Mono, bool)> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.active)
            .map(|(k, e)| {
                let lm = A::lm(&e.poly);
                (k, lm.lcm(&lm_h), lm.coprime(&lm_h))
            })
            .collect();
        // criteria M and F on the new pairs
        let mut kept: Vec<(usize, Mono, bool)> = Vec::new();
        while !fresh.is_empty() {
            let (k, l, coprime) = fresh.remove(0);
            let covered = fresh.iter().chain(&kept).any(|(_, l2, _)| l2.divides(&l));
            if coprime || !covered {
                kept.push((k, l, coprime));
            }
        }
        // criterion B on the old pairs
        let elements = &self.elements;
        self.pairs.retain(|p| {
            !lm_h.divides(&p.lcm)
                || A::lm(&elements[p.i].poly).lcm(&lm_h) == p.lcm
                || A::lm(&elements[p.j].poly).lcm(&lm_h) == p.lcm
        });
        for e in self.elements.iter_mut() {
            if e.active && lm_h.divides(A::lm(&e.poly)) {
                e.active = false;
            }
        }
        self.elements.push(Element {
            mask: lm_h.mask(),
            poly: h,
            sugar,
            active: true,
        });
        for (k, l, coprime) in kept {
            // product criterion
            if coprime {
                continue;
            }
            let sugar = self.pair_sugar(k, new, &l);
            self.pairs.push(Pair {
                i: k,
                j: new,
                lcm: l,
                sugar,
            });
        }
    }

    fn run(&mut self) {
        if self.elements.iter().any(|e| A::is_one(&e.poly)) {
            return;
        }
        while !self.pairs.is_empty() {
            let best = (0..self.pairs.len())
                .min_by(|&a, &b| {
                    let (pa, pb) = (&self.pairs[a], &self.pairs[b]);
                    pa.sugar.cmp(&pb.sugar).then_with(|| pa.lcm.cmp(&pb.lcm))
                })
                .expect("nonempty");
            let pair = self.pairs.swap_remove(best);
            let s = self.arith.s_poly(
                &self.elements[pair.i].poly,
                &self.elements[pair.j].poly,
                &pair.lcm,
            );
            let h = self.reduce(s);
            if A::is_zero(&h) {
                continue;
            }
            let unit = A::is_one(&h);
            self.insert(h, pair.sugar);
            if unit {
                return;
            }
        }
    }

    /// Interreduces the active elements into the reduced basis.
    fn finish(self) -> Vec<A::Poly> {
        let active: Vec<&A::Poly> = self
            .elements
            .iter()
            .filter(|e| e.active)
            .map(|e| &e.poly)
            .collect();
        if let Some(one) = active.iter().find(|p| A::is_one(p)) {
            return vec![(*one).clone()];
        }
        let mut basis: Vec<A::Poly> = active
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let find = |m: &Mono| {
                    active
                        .iter()
                        .enumerate()
                        .find(|(o, g)| *o != k && A::lm(g).divides(m))
                        .map(|(_, g)| *g)
                };
                self.arith.reduce_tail(p, find)
            })
            .collect();
        basis.sort_by(|a, b| A::lm(a).cmp(A::lm(b)));
        basis
    }
}

/// Reduced Gröbner basis of an ideal in graded reverse lexicographic order.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    arity: usize,
    basis: Vec<Poly>,
    generators: Vec<Polynomial>,
}

/// Standard monomials of a quotient ring, when finitely many.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientBasis {
    pub standard_monomials: Vec<Exponent>,
    pub finite: bool,
}

impl QuotientBasis {
    pub fn dimension(&self) -> Option<usize> {
        self.finite.then_some(self.standard_monomials.len())
    }
}

/// Dimension of a quotient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Milnor {
    Finite(u64),
    Infinite,
}

impl Milnor {
    pub fn finite(self) -> Option<u64> {
        match self {
            Milnor::Finite(m) => Some(m),
            Milnor::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Milnor::Finite(_))
    }
}

impl fmt::Display for Milnor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Milnor::Finite(m) => write!(f, "{m}"),
            Milnor::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for Milnor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Milnor::Finite(m) => s.serialize_u64(*m),
            Milnor::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// Reduced Gröbner basis for the ideal generated by `gens`, selecting pairs
/// by standard degree.
pub fn groebner(gens: &[Polynomial]) -> Result<GroebnerBasis> {
    let n = gens.first().map(Polynomial::arity).unwrap_or(1);
    groebner_graded(gens, &vec![1; n])
}

/// As [`groebner`], with sugar measured in the given positive weights. For
/// ideals homogeneous with respect to those weights pairs are processed
/// degree by degree.
pub fn groebner_graded(gens: &[Polynomial], weights: &[u64]) -> Result<GroebnerBasis> {
    let arity = gens
        .first()
        .map(Polynomial::arity)
        .unwrap_or(weights.len().max(1));
    if arity > MAX_VARS {
        return Err(Error::ResourceLimit(format!(
            "Gröbner engine supports at most {MAX_VARS} variables, got {arity}"
        )));
    }
    if weights.len() != arity || weights.contains(&0) {
        return Err(Error::ArityMismatch {
            left: arity,
            right: weights.len(),
        });
    }
    for g in gens {
        if g.arity() != arity {
            return Err(Error::ArityMismatch {
                left: arity,
                right: g.arity(),
            });
        }
    }
    let mut inputs: Vec<Poly> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(Poly::from_polynomial)
        .collect::<Result<_>>()?;
    inputs.sort_by(|a, b| a.lm().cmp(b.lm()));
    let mut b = Builder::new(Integers, weights);
    for p in inputs {
        let sugar = input_sugar(&p.terms, weights);
        b.add_generator(p, sugar);
    }
    b.run();
    let basis = b.finish();
    let generators = basis.iter().map(|p| p.to_polynomial(arity)).collect();
    Ok(GroebnerBasis {
        arity,
        basis,
        generators,
    })
}

fn input_sugar<C>(terms: &[(Mono, C)], weights: &[u64]) -> u64 {
    terms
        .iter()
        .map(|(m, _)| m.weighted(weights))
        .max()
        .unwrap_or(0)
}

/// The Mersenne prime `2^61 - 1`.
const CERTIFYING_PRIME: u64 = (1 << 61) - 1;

/// Leading monomials of the reduced basis of the generators taken modulo `p`.
fn modular_leading_monomials(gens: &[Polynomial], weights: &[u64], p: u64) -> Result<Vec<Mono>> {
    let arith = Modular { p };
    let mut inputs = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let (mut terms, _) = integral_terms(g)?;
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let reduced: Vec<(Mono, u64)> = terms
            .iter()
            .map(|(m, c)| (*m, arith.from_int(c)))
            .filter(|t| t.1 != 0)
            .collect();
        if !reduced.is_empty() {
            inputs.push(arith.monic(reduced));
        }
    }
    inputs.sort_by(|a, b| a.lm().cmp(b.lm()));
    let mut b = Builder::new(Modular { p }, weights);
    for q in inputs {
        let sugar = input_sugar(&q.terms, weights);
        b.add_generator(q, sugar);
    }
    b.run();
    Ok(b.finish().iter().map(|q| *q.lm()).collect())
}

/// Number of monomials outside the monomial ideal, if finite.
fn count_standard(lms: &[Mono], arity: usize) -> Result<Option<u64>> {
    let pure: IndexSet = lms.iter().filter_map(Mono::pure_power_var).collect();
    if lms.iter().any(|m| m.deg == 0) {
        return Ok(Some(0));
    }
    if (0..arity).any(|i| !pure.contains(i)) {
        return Ok(None);
    }
    let mut count = 0u64;
    let mut stack = vec![(Mono::one(), 0usize)];
    while let Some((m, last)) = stack.pop() {
        count += 1;
        if count > MAX_STANDARD_MONOMIALS as u64 {
            return Err(Error::ResourceLimit(format!(
                "more than {MAX_STANDARD_MONOMIALS} standard monomials"
            )));
        }
        for i in last..arity {
            let mut child = m;
            child.e[i] += 1;
            child.deg += 1;
            if !lms.iter().any(|l| l.divides(&child)) {
                stack.push((child, i));
            }
        }
    }
    Ok(Some(count))
}

/// Dimension of `Q[x]/(g_1, ..., g_N)` for `N` nonzero generators in `N`
/// variables, each homogeneous for the positive `weights`, when it can be
/// certified from a computation modulo a prime.
///
/// Reduction mod `p` can only lower the rank of each graded piece of the
/// ideal, so a finite quotient mod `p` forces a finite quotient over `Q`.
/// The generators then form a regular sequence and the dimension is
/// `Π deg(g_i) / Π w_i`. Returns `None` when the modular quotient is
/// infinite, leaving the question to the exact computation.
pub fn certified_dimension(gens: &[Polynomial], weights: &[u64]) -> Result<Option<u64>> {
    let n = weights.len();
    if gens.len() != n || n == 0 || n > MAX_VARS || weights.contains(&0) {
        return Ok(None);
    }
    let mut degrees = Vec::with_capacity(n);
    for g in gens {
        if g.arity() != n || g.is_zero() {
            return Ok(None);
        }
        let d = g
            .exponents()
            .next()
            .expect("nonzero")
            .weighted_degree(weights);
        if !g.is_quasihomogeneous(weights, d) {
            return Ok(None);
        }
        degrees.push(d);
    }
    let lms = modular_leading_monomials(gens, weights, CERTIFYING_PRIME)?;
    let Some(mod_p) = count_standard(&lms, n)? else {
        return Ok(None);
    };
    let num = degrees.iter().fold(BigInt::one(), |acc, &d| acc * d);
    let den = weights.iter().fold(BigInt::one(), |acc, &w| acc * w);
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Invariant(format!(
            "complete-intersection count {num}/{den} is not an integer"
        )));
    }
    let mu: u64 = q
        .try_into()
        .map_err(|_| Error::ResourceLimit("dimension exceeds u64".into()))?;
    if mod_p < mu {
        return Err(Error::Invariant(format!(
            "modular quotient has dimension {mod_p}, below the regular-sequence count {mu}"
        )));
    }
    Ok(Some(mu))
}

impl GroebnerBasis {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The reduced monic generators, ascending by leading monomial.
    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn is_unit(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].is_one()
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn leading_monomials(&self) -> Vec<Exponent> {
        self.basis
            .iter()
            .map(|p| p.lm().to_exponent(self.arity))
            .collect()
    }

    fn find(&self, m: &Mono) -> Option<&Poly> {
        self.basis.iter().find(|g| g.lm().divides(m))
    }

    pub fn normal_form(&self, p: &Polynomial) -> Result<Polynomial> {
        if p.arity() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: p.arity(),
            });
        }
        let (terms, denom) = integral_terms(p)?;
        let (r, lambda) = reduce(to_map(terms), |m| self.find(m));
        let scale = Rational::from_integer(lambda * denom);
        Polynomial::from_terms(
            self.arity,
            r.terms.into_iter().map(|(m, c)| {
                (
                    m.to_exponent(self.arity),
                    Rational::from_integer(c) / &scale,
                )
            }),
        )
    }

    pub fn contains(&self, p: &Polynomial) -> Result<bool> {
        Ok(self.normal_form(p)?.is_zero())
    }

    /// True when `e` is not in the leading-term ideal.
    pub fn is_standard(&self, e: &Exponent) -> Result<bool> {
        let m = Mono::from_exponent(e)?;
        Ok(self.find(&m).is_none())
    }

    pub fn is_zero_dimensional(&self) -> bool {
        let mut seen = vec![false; self.arity];
        for p in &self.basis {
            if p.is_one() {
                return true;
            }
            if let Some(v) = p.lm().pure_power_var() {
                seen[v] = true;
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Standard monomials by depth-first search through the staircase, in
    /// ascending monomial order.
    pub fn quotient_basis(&self) -> Result<QuotientBasis> {
        if !self.is_zero_dimensional() {
            return Ok(QuotientBasis {
                standard_monomials: Vec::new(),
                finite: false,
            });
        }
        let mut found: Vec<Mono> = Vec::new();
        if self.is_unit() {
            return Ok(QuotientBasis {
                standard_monomials: Vec::new(),
                finite: true,
            });
        }
        let mut stack = vec![(Mono::one(), 0usize)];
        while let Some((m, last)) = stack.pop() {
            if found.len() >= MAX_STANDARD_MONOMIALS {
                return Err(Error::ResourceLimit(format!(
                    "more than {MAX_STANDARD_MONOMIALS} standard monomials"
                )));
            }
            found.push(m);
            for i in last..self.arity {
                let mut child = m;
                child.e[i] += 1;
                child.deg += 1;
                if self.find(&child).is_none() {
                    stack.push((child, i));
                }
            }
        }
        found.sort();
        Ok(QuotientBasis {
            standard_monomials: found.iter().map(|m| m.to_exponent(self.arity)).collect(),
            finite: true,
        })
    }

    pub fn dimension(&self) -> Result<Milnor> {
        let q = self.quotient_basis()?;
        Ok(match q.dimension() {
            Some(d) => Milnor::Finite(d as u64),
            None => Milnor::Infinite,
        })
    }
}

pub fn is_unit_ideal(gens: &[Polynomial]) -> Result<bool> {
    Ok(groebner(gens)?.is_unit())
}

/// Weights making `f` quasihomogeneous, or all ones.
fn grading_for(f: &Polynomial) -> Vec<u64> {
    WeightSystem::from_polynomial(f)
        .map(|w| w.weights().to_vec())
        .unwrap_or_else(|_| vec![1; f.arity()])
}

/// Gröbner basis of `(∂f/∂x_1, ..., ∂f/∂x_N)`.
pub fn jacobian_ideal(f: &Polynomial) -> Result<GroebnerBasis> {
    groebner_graded(&f.gradient(), &grading_for(f))
}

/// Milnor number of `f`. Quasihomogeneous input is first tried through
/// [`certified_dimension`]; otherwise, or when that is inconclusive, the
/// exact basis over `Q` decides.
pub fn milnor_number(f: &Polynomial) -> Result<Milnor> {
    if let Ok(w) = WeightSystem::from_polynomial(f) {
        if let Some(mu) = certified_dimension(&f.gradient(), w.weights())? {
            return Ok(Milnor::Finite(mu));
        }
    }
    milnor_number_exact(f)
}

/// Milnor number from the exact Jacobian basis alone.
pub fn milnor_number_exact(f: &Polynomial) -> Result<Milnor> {
    jacobian_ideal(f)?.dimension()
}

/// `f^g`: the restriction of `f` to the fixed locus of `g`, kept in the
/// ambient ring with the moved coordinates set to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub fixed: IndexSet,
    pub poly: Polynomial,
}

impl Restriction {
    /// The fixed locus is the origin; by convention `f^g = 1`.
    pub fn is_trivial_locus(&self) -> bool {
        self.fixed.is_empty()
    }

    /// Generators `∂f^g/∂x_i` for fixed `i` and `x_j` for moved `j`, so the
    /// quotient is the Jacobian algebra of `f^g` on the fixed locus, and the
    /// one-dimensional span of `1` when that locus is the origin.
    pub fn jacobian_generators(&self) -> Vec<Polynomial> {
        let n = self.poly.arity();
        (0..n)
            .map(|i| {
                if self.fixed.contains(i) {
                    self.poly.partial_derivative(i).expect("index in range")
                } else {
                    Polynomial::var(n, i)
                }
            })
            .collect()
    }

    pub fn jacobian_ideal(&self, weights: &[u64]) -> Result<GroebnerBasis> {
        groebner_graded(&self.jacobian_generators(), weights)
    }

    pub fn milnor_number(&self, weights: &[u64]) -> Result<Milnor> {
        if let Some(mu) = certified_dimension(&self.jacobian_generators(), weights)? {
            return Ok(Milnor::Finite(mu));
        }
        self.jacobian_ideal(weights)?.dimension()
    }
}

pub fn restrict_to_fixed(f: &Polynomial, g: &GroupElement) -> Result<Restriction> {
    if g.arity() != f.arity() {
        return Err(Error::ArityMismatch {
            left: f.arity(),
            right: g.arity(),
        });
    }
    let fixed = g.fixed();
    let moved: Vec<usize> = fixed.complement(f.arity()).to_vec();
    Ok(Restriction {
        fixed,
        poly: f.set_zero(&moved),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn pa(s: &str, n: usize) -> Polynomial {
        Polynomial::parse_with_arity(s, n).unwrap()
    }

    #[test]
    fn monomial_ideal_is_its_own_basis() {
        let gb = groebner(&[pa("x1^2", 2), pa("x2^2", 2)]).unwrap();
        assert_eq!(gb.generators(), &[pa("x2^2", 2), pa("x1^2", 2)]);
        assert_eq!(gb.dimension().unwrap(), Milnor::Finite(4));
    }

    #[test]
    fn small_ideal_standard_monomials() {
        // x1^2 - x2 and x2^2: leading x1^2, then x1^2 x2 ~ x2^2 = 0 gives
        // nothing new, so 1, x1, x2, x1 x2 remain
        let gb = groebner(&[pa("x1^2 - x2", 2), pa("x2^2", 2)]).unwrap();
        let q = gb.quotient_basis().unwrap();
        let expect: Vec<Exponent> = [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
            .into_iter()
            .map(Exponent::from)
            .collect();
        assert_eq!(q.standard_monomials, expect);
    }

    #[test]
    fn unit_ideal() {
        let gb = groebner(&[pa("1", 2)]).unwrap();
        assert!(gb.is_unit());
        assert_eq!(gb.dimension().unwrap(), Milnor::Finite(0));
        assert!(!is_unit_ideal(&[pa("x1", 1)]).unwrap());
        assert!(is_unit_ideal(&[pa("x1 - 1", 2), pa("x1", 2)]).unwrap());
    }

    #[test]
    fn four_variable_is_degenerate() {
        let f = pa("x1^6*x4 + x2^9*x3 + x3^3*x4 + x4^7", 4);
        assert_eq!(milnor_number(&f).unwrap(), Milnor::Infinite);
    }

    #[test]
    fn four_variable_completed_milnor() {
        let f = pa("x4^7 + x1^6*x4 + x3^3*x4 + x2^9*x3 + x1^3*x3^2", 4);
        assert_eq!(milnor_number(&f).unwrap(), Milnor::Finite(1044));
        assert_eq!(milnor_number_exact(&f).unwrap(), Milnor::Finite(1044));
    }

    #[test]
    fn certified_dimension_agrees_with_exact() {
        for (text, n) in [
            ("x1^3 + x2^2*x1 + x3^8*x1 + x2^2*x3^4 + x4^2*x2", 4),
            ("x1^2*x2 + x2^3*x3 + x3^4 + 5*x2^2*x3^2", 3),
            ("x1^5 + x2^5 + x1*x2^4 - 3/7*x1^2*x2^3", 2),
        ] {
            let f = pa(text, n);
            let w = WeightSystem::from_polynomial(&f).unwrap();
            let exact = milnor_number_exact(&f).unwrap();
            let cert = certified_dimension(&f.gradient(), w.weights()).unwrap();
            assert_eq!(cert, exact.finite(), "{text}");
        }
    }

    #[test]
    fn certified_dimension_defers_on_degenerate_input() {
        let f = pa("x1^2*x2 + x2^5", 2);
        let w = WeightSystem::from_polynomial(&f).unwrap();
        assert_eq!(
            certified_dimension(&f.gradient(), w.weights()).unwrap(),
            Some(6)
        );
        let g = pa("x1^2*x2^2 + x2^4", 2);
        let w = WeightSystem::from_polynomial(&g).unwrap();
        assert_eq!(
            certified_dimension(&g.gradient(), w.weights()).unwrap(),
            None
        );
        assert_eq!(milnor_number(&g).unwrap(), Milnor::Infinite);
        // wrong count of generators, or inhomogeneous ones
        assert_eq!(certified_dimension(&[pa("x1", 2)], &[1, 1]).unwrap(), None);
        assert_eq!(
            certified_dimension(&[pa("x1 + x2^2", 2), pa("x2", 2)], &[1, 1]).unwrap(),
            None
        );
    }

    #[test]
    fn modular_basis_of_a_small_ideal() {
        let gens = [pa("x1^2 - x2", 2), pa("x2^2", 2)];
        let lms = modular_leading_monomials(&gens, &[1, 1], CERTIFYING_PRIME).unwrap();
        let exact: Vec<Mono> = groebner(&gens)
            .unwrap()
            .basis
            .iter()
            .map(|p| *p.lm())
            .collect();
        assert_eq!(lms, exact);
        assert_eq!(count_standard(&lms, 2).unwrap(), Some(4));
    }

    #[test]
    fn normal_form_basics() {
        let fbar = pa("x1^3 + x2^2*x1 + x3^8*x1 + x2^2*x3^4 + x4^2*x2", 4);
        let gb = jacobian_ideal(&fbar).unwrap();
        let d4 = fbar.partial_derivative(3).unwrap();
        assert!(gb.normal_form(&d4).unwrap().is_zero());
        assert!(gb.normal_form(&Polynomial::zero(4)).unwrap().is_zero());
        // x4^2 is congruent to -2(x1 x2 + x2 x3^4) modulo the partials
        let lhs = gb.normal_form(&pa("x4^2", 4)).unwrap();
        let rhs = gb.normal_form(&pa("-2*x1*x2 - 2*x2*x3^4", 4)).unwrap();
        assert_eq!(lhs, rhs);
        assert!(!lhs.is_zero());
        assert_eq!(gb.dimension().unwrap(), Milnor::Finite(88));
        assert!(gb.normal_form(&pa("x1", 2)).is_err());
    }

    #[test]
    fn restriction() {
        let f = pa("x1^3 + x2^4*x1 + x3^8*x1 + x2^4*x3^4 + x4^2", 4);
        let g = GroupElement::new(vec![1, -1, 1, -1]).unwrap();
        let r = restrict_to_fixed(&f, &g).unwrap();
        assert_eq!(r.poly, pa("x1^3 + x3^8*x1", 4));
        assert_eq!(r.milnor_number(&[4, 2, 1, 6]).unwrap(), Milnor::Finite(22));
        let id = GroupElement::identity(4);
        assert_eq!(restrict_to_fixed(&f, &id).unwrap().poly, f);

        let sq = pa("x1^2", 1);
        let r = restrict_to_fixed(&sq, &GroupElement::new(vec![-1]).unwrap()).unwrap();
        assert!(r.is_trivial_locus());
        assert_eq!(r.milnor_number(&[1]).unwrap(), Milnor::Finite(1));
    }

    #[test]
    fn milnor_serializes_as_number_or_word() {
        assert_eq!(
            serde_json::to_string(&Milnor::Finite(1044)).unwrap(),
            "1044"
        );
        assert_eq!(
            serde_json::to_string(&Milnor::Infinite).unwrap(),
            "\"infinite\""
        );
    }

    #[test]
    fn too_many_variables() {
        let f = Polynomial::var(17, 0);
        assert!(matches!(groebner(&[f]), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn rational_coefficients_survive() {
        let gb = groebner(&[pa("2*x1^2 - 3*x2", 2), pa("x2^2", 2)]).unwrap();
        assert_eq!(
            gb.normal_form(&pa("x1^2", 2)).unwrap(),
            Polynomial::var(2, 1).scale(&(rat(3) / rat(2)))
        );
    }
}
