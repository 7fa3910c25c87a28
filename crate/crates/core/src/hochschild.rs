//! The algebra `Jac(f, G)` of a diagonal `±1` symmetry group.
//!
//! `Jac'(f, G) = ⊕_g Jac(f^g) ξ_g` with the product
//! `[φ]ξ_g ∪ [ψ]ξ_h = [φ ψ σ_{g,h}]ξ_{gh}`. The structure constants come from
//! the tensors `H_f` and `H_{f,g}` built with difference derivatives and
//! contracted against `∂_θ` words. The sign of a product of two-leg tensors
//! is the graded one, `(θ_A ⊗ θ_B)(θ_C ⊗ θ_D) = (-1)^{|B||C|} θ_Aθ_C ⊗ θ_Bθ_D`.
//!
//! Only pairs with `gh = id` or a trivial factor are evaluated; the others
//! would need the reduction `⌊·⌋_{gh}` on moved variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::WeightSystem;
use crate::groebner::{restrict_to_fixed, GroebnerBasis};
use crate::linalg;
use crate::nondegen::IndexSet;
use crate::orbifold::{GroupElement, Resolution};
use crate::poly::{rat, ratio, Exponent, Polynomial, Rational};

/// Sign of `θ_A θ_B` reordered into increasing order, or `None` when the
/// words share an index.
fn merge_sign(a: IndexSet, b: IndexSet) -> Option<i64> {
    if !a.intersection(b).is_empty() {
        return None;
    }
    let inversions: usize = b.iter().map(|j| a.iter().filter(|&i| i > j).count()).sum();
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// `θ_A` acting on `∂_{θ_S}` in `C[∂_θ]`: each `θ_i`, rightmost first,
/// removes `∂_{θ_i}` with sign `(-1)^{#{s ∈ S : s < i}}`.
fn contract(a: IndexSet, s: IndexSet) -> Option<(i64, IndexSet)> {
    let mut rest = s;
    let mut sign = 1;
    for i in a.to_vec().into_iter().rev() {
        if !rest.contains(i) {
            return None;
        }
        if rest.iter().filter(|&k| k < i).count() % 2 == 1 {
            sign = -sign;
        }
        rest.remove(i);
    }
    Some((sign, rest))
}

/// `Σ p_{A,B}(x) θ_A ⊗ θ_B`; a single-leg element has `B = ∅`.
#[derive(Clone, PartialEq, Eq)]
pub struct ThetaTensor {
    arity: usize,
    terms: BTreeMap<(IndexSet, IndexSet), Polynomial>,
}

impl ThetaTensor {
    pub fn zero(arity: usize) -> Self {
        ThetaTensor {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        let mut t = Self::zero(arity);
        t.add_term(Polynomial::one(arity), &[], &[]);
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Adds `p θ_{a_1}..θ_{a_k} ⊗ θ_{b_1}..θ_{b_l}` for words in any order,
    /// normalising each word to increasing order.
    pub fn add_term(&mut self, p: Polynomial, a: &[usize], b: &[usize]) {
        let Some((sa, wa)) = normalise_word(a) else {
            return;
        };
        let Some((sb, wb)) = normalise_word(b) else {
            return;
        };
        self.accumulate(wa, wb, p.scale(&rat(sa * sb)));
    }

    fn accumulate(&mut self, a: IndexSet, b: IndexSet, p: Polynomial) {
        if p.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry((a, b))
            .or_insert_with(|| Polynomial::zero(p.arity()));
        *entry = &*entry + &p;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (IndexSet, IndexSet, &Polynomial)> {
        self.terms.iter().map(|(&(a, b), p)| (a, b, p))
    }

    pub fn coefficient(&self, a: IndexSet, b: IndexSet) -> Polynomial {
        self.terms
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.arity))
    }

    pub fn add(&self, other: &ThetaTensor) -> ThetaTensor {
        let mut out = self.clone();
        for (a, b, p) in other.terms() {
            out.accumulate(a, b, p.clone());
        }
        out
    }

    pub fn mul(&self, other: &ThetaTensor) -> ThetaTensor {
        let mut out = ThetaTensor::zero(self.arity);
        for (a, b, p) in self.terms() {
            for (c, d, q) in other.terms() {
                let (Some(s1), Some(s2)) = (merge_sign(a, c), merge_sign(b, d)) else {
                    continue;
                };
                let koszul = if (b.len() * c.len()) % 2 == 0 { 1 } else { -1 };
                out.accumulate(
                    a.union(c),
                    b.union(d),
                    (p * q).scale(&rat(s1 * s2 * koszul)),
                );
            }
        }
        out
    }

    /// Applies `op` to every coefficient.
    pub fn map_coefficients(
        &self,
        mut op: impl FnMut(&Polynomial) -> Result<Polynomial>,
    ) -> Result<ThetaTensor> {
        let mut out = ThetaTensor::zero(self.arity);
        for (a, b, p) in self.terms() {
            out.accumulate(a, b, op(p)?);
        }
        Ok(out)
    }

    /// Places a single-leg tensor on the second leg.
    pub fn to_second_leg(&self) -> ThetaTensor {
        let mut out = ThetaTensor::zero(self.arity);
        for (a, b, p) in self.terms() {
            debug_assert!(b.is_empty());
            out.accumulate(IndexSet::empty(), a.union(b), p.clone());
        }
        out
    }
}

fn normalise_word(w: &[usize]) -> Option<(i64, IndexSet)> {
    let mut set = IndexSet::empty();
    let mut sign = 1;
    for &i in w {
        let s = merge_sign(set, IndexSet::singleton(i))?;
        sign *= s;
        set.insert(i);
    }
    Some((sign, set))
}

impl fmt::Debug for ThetaTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, b, p)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({p}) θ{a} ⊗ θ{b}")?;
        }
        Ok(())
    }
}

/// Blocks `x`, `y`, `z` of a `3N`-variable ring.
fn block(n: usize, k: usize) -> Vec<usize> {
    (k * n..(k + 1) * n).collect()
}

/// `H_f(x, g(x), x) = Σ_{j ≤ i} ∇_j^{y→(y,z)} ∇_i^{x→(x,y)}(f) θ_i ⊗ θ_j`
/// evaluated at `y = g(x)`, `z = x`.
pub fn h_f(f: &Polynomial, g: &GroupElement) -> Result<ThetaTensor> {
    let n = f.arity();
    check_group(n, g)?;
    let lifted = f.embed(3 * n, 0)?;
    let (x, y, z) = (block(n, 0), block(n, 1), block(n, 2));
    let mut specialise = BTreeMap::new();
    for k in 0..n {
        specialise.insert(y[k], Polynomial::var(n, k).scale(&rat(g.sign(k) as i64)));
        specialise.insert(z[k], Polynomial::var(n, k));
    }
    let mut out = ThetaTensor::zero(n);
    for i in 0..n {
        let di = lifted.divided_difference(&x, &y, i)?;
        for j in 0..=i {
            let dij = di.divided_difference(&y, &z, j)?;
            out.add_term(dij.substitute(&specialise, n)?, &[i], &[j]);
        }
    }
    Ok(out)
}

/// `H_{f,g}(x) = Σ_{j<i in I_g^c} 1/(1-g_j) ∇_j^{x→(x,x^g)} ∇_i^{x→(x,g(x))}(f) θ_j θ_i`
/// as a single-leg tensor.
pub fn h_fg(f: &Polynomial, g: &GroupElement) -> Result<ThetaTensor> {
    let n = f.arity();
    check_group(n, g)?;
    let (x, y) = (block(n, 0), block(n, 1));
    let mut act = BTreeMap::new();
    let mut fix = BTreeMap::new();
    for k in 0..n {
        act.insert(y[k], Polynomial::var(n, k).scale(&rat(g.sign(k) as i64)));
        let keep = if g.sign(k) == 1 {
            Polynomial::var(n, k)
        } else {
            Polynomial::zero(n)
        };
        fix.insert(y[k], keep);
    }
    let moved = g.moved().to_vec();
    let mut out = ThetaTensor::zero(n);
    for &i in &moved {
        let di = f
            .embed(2 * n, 0)?
            .divided_difference(&x, &y, i)?
            .substitute(&act, n)?;
        for &j in moved.iter().filter(|&&j| j < i) {
            let dji = di
                .embed(2 * n, 0)?
                .divided_difference(&x, &y, j)?
                .substitute(&fix, n)?;
            let c = Rational::one() / rat(1 - g.sign(j) as i64);
            out.add_term(dji.scale(&c), &[j, i], &[]);
        }
    }
    Ok(out)
}

fn check_group(n: usize, g: &GroupElement) -> Result<()> {
    if g.arity() != n {
        return Err(Error::ArityMismatch {
            left: n,
            right: g.arity(),
        });
    }
    Ok(())
}

/// `Υ(t ⊗ ∂_{θ_dA} ⊗ ∂_{θ_dB})`, grouped by the residual `∂_θ` word. The
/// sign of a term `θ_A ⊗ θ_B` is `(-1)^{|dA||B|}`.
pub fn upsilon(t: &ThetaTensor, da: IndexSet, db: IndexSet) -> BTreeMap<IndexSet, Polynomial> {
    let mut out: BTreeMap<IndexSet, Polynomial> = BTreeMap::new();
    for (a, b, p) in t.terms() {
        let Some((s1, r1)) = contract(a, da) else {
            continue;
        };
        let Some((s2, r2)) = contract(b, db) else {
            continue;
        };
        let Some(s3) = merge_sign(r1, r2) else {
            continue;
        };
        let koszul = if (da.len() * b.len()) % 2 == 0 { 1 } else { -1 };
        let term = p.scale(&rat(s1 * s2 * s3 * koszul));
        let e = out
            .entry(r1.union(r2))
            .or_insert_with(|| Polynomial::zero(p.arity()));
        *e = &*e + &term;
    }
    out.retain(|_, p| !p.is_zero());
    out
}

/// `d_{g,h} = (d_g + d_h - d_gh) / 2`, or `None` when it is not a
/// non-negative integer.
pub fn pair_degree(dg: usize, dh: usize, dgh: usize) -> Option<usize> {
    let s = (dg + dh).checked_sub(dgh)?;
    (s % 2 == 0).then_some(s / 2)
}

/// True for the pairs whose structure constant is evaluated here.
pub fn in_scope(g: &GroupElement, h: &GroupElement) -> bool {
    g.is_identity() || h.is_identity() || g.compose(h).map(|p| p.is_identity()).unwrap_or(false)
}

/// `σ_{g,h}` reduced modulo `jac_gh`, the Jacobian ideal of `f^{gh}`.
pub fn sigma(
    f: &Polynomial,
    g: &GroupElement,
    h: &GroupElement,
    jac_gh: &GroebnerBasis,
) -> Result<Polynomial> {
    let n = f.arity();
    let gh = g.compose(h)?;
    let Some(d) = pair_degree(g.codimension(), h.codimension(), gh.codimension()) else {
        return Ok(Polynomial::zero(n));
    };
    if !in_scope(g, h) {
        return Err(Error::OutOfScope(format!("the pair ({g}, {h})")));
    }
    let floor = |p: &Polynomial| jac_gh.normal_form(p);
    let mut x = ThetaTensor::one(n);
    if d > 0 {
        let hf = h_f(f, g)?;
        let left = h_fg(f, g)?;
        let right = h_fg(f, h)?.map_coefficients(|p| g.act(p))?.to_second_leg();
        let base = hf.add(&left).add(&right).map_coefficients(floor)?;
        for _ in 0..d {
            x = x.mul(&base).map_coefficients(floor)?;
        }
    }
    let contracted = upsilon(&x, g.moved(), h.moved());
    let coeff = contracted
        .get(&gh.moved())
        .cloned()
        .unwrap_or_else(|| Polynomial::zero(n));
    let factorial: u64 = (1..=d as u64).product();
    floor(&coeff.scale(&ratio(1, factorial as i64)))
}

/// `Σ_g [φ_g] ξ_g` with each `φ_g` in normal form for its sector.
#[derive(Clone, PartialEq, Eq)]
pub struct SectorElement {
    parts: BTreeMap<GroupElement, Polynomial>,
}

impl SectorElement {
    pub fn zero() -> Self {
        SectorElement {
            parts: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn component(&self, g: &GroupElement) -> Option<&Polynomial> {
        self.parts.get(g)
    }

    pub fn parts(&self) -> impl Iterator<Item = (&GroupElement, &Polynomial)> {
        self.parts.iter()
    }

    fn insert(&mut self, g: GroupElement, p: Polynomial) {
        if p.is_zero() {
            return;
        }
        let e = self
            .parts
            .entry(g.clone())
            .or_insert_with(|| Polynomial::zero(p.arity()));
        *e = &*e + &p;
        if e.is_zero() {
            self.parts.remove(&g);
        }
    }

    pub fn add(&self, other: &SectorElement) -> SectorElement {
        let mut out = self.clone();
        for (g, p) in other.parts() {
            out.insert(g.clone(), p.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> SectorElement {
        let mut out = SectorElement::zero();
        for (g, p) in self.parts() {
            out.insert(g.clone(), p.scale(c));
        }
        out
    }
}

impl fmt::Debug for SectorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        for (k, (g, p)) in self.parts().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{p}]ξ{g}")?;
        }
        Ok(())
    }
}

/// Gröbner data of one sector.
#[derive(Clone, Debug)]
pub struct Sector {
    pub element: GroupElement,
    pub basis: Vec<Exponent>,
    pub gb: GroebnerBasis,
}

#[derive(Clone, Debug)]
pub struct OrbifoldAlgebra {
    f: Polynomial,
    weights: WeightSystem,
    generators: Vec<GroupElement>,
    sectors: BTreeMap<GroupElement, Sector>,
    sigma: BTreeMap<(GroupElement, GroupElement), Polynomial>,
}

impl OrbifoldAlgebra {
    /// The group generated by `generators`, each of which must leave `f`
    /// invariant.
    pub fn new(f: &Polynomial, generators: &[GroupElement]) -> Result<Self> {
        let n = f.arity();
        let weights = WeightSystem::from_polynomial(f)?;
        let mut elements = BTreeSet::from([GroupElement::identity(n)]);
        for g in generators {
            check_group(n, g)?;
            if !g.leaves_invariant(f)? {
                return Err(Error::InvalidOrbifold(format!(
                    "{f} is not invariant under {g}"
                )));
            }
        }
        loop {
            let mut next = elements.clone();
            for a in &elements {
                for g in generators {
                    next.insert(a.compose(g)?);
                }
            }
            if next.len() == elements.len() {
                break;
            }
            elements = next;
        }
        let mut sectors = BTreeMap::new();
        for g in &elements {
            let gb = restrict_to_fixed(f, g)?.jacobian_ideal(weights.weights())?;
            let q = gb.quotient_basis()?;
            if !q.finite {
                return Err(Error::Invariant(format!(
                    "restriction of {f} to the fixed locus of {g} is degenerate"
                )));
            }
            sectors.insert(
                g.clone(),
                Sector {
                    element: g.clone(),
                    basis: q.standard_monomials,
                    gb,
                },
            );
        }
        let mut table = BTreeMap::new();
        for g in &elements {
            for h in &elements {
                if in_scope(g, h) {
                    let gh = g.compose(h)?;
                    let s = sigma(f, g, h, &sectors[&gh].gb)?;
                    table.insert((g.clone(), h.clone()), s);
                }
            }
        }
        Ok(OrbifoldAlgebra {
            f: f.clone(),
            weights,
            generators: generators.to_vec(),
            sectors,
            sigma: table,
        })
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.sectors.keys()
    }

    pub fn sector(&self, g: &GroupElement) -> Option<&Sector> {
        self.sectors.get(g)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.arity())
    }

    pub fn sigma(&self, g: &GroupElement, h: &GroupElement) -> Result<&Polynomial> {
        self.sigma
            .get(&(g.clone(), h.clone()))
            .ok_or_else(|| Error::OutOfScope(format!("the pair ({g}, {h})")))
    }

    fn sector_of(&self, g: &GroupElement) -> Result<&Sector> {
        self.sectors
            .get(g)
            .ok_or_else(|| Error::InvalidOrbifold(format!("{g} is not in the group")))
    }

    /// `[p] ξ_g`, reduced.
    pub fn element(&self, g: &GroupElement, p: &Polynomial) -> Result<SectorElement> {
        let mut out = SectorElement::zero();
        out.insert(g.clone(), self.sector_of(g)?.gb.normal_form(p)?);
        Ok(out)
    }

    pub fn xi(&self, g: &GroupElement) -> Result<SectorElement> {
        self.element(g, &Polynomial::one(self.arity()))
    }

    pub fn unit(&self) -> SectorElement {
        self.xi(&self.identity()).expect("identity sector")
    }

    pub fn product(&self, u: &SectorElement, v: &SectorElement) -> Result<SectorElement> {
        let mut out = SectorElement::zero();
        for (g, p) in u.parts() {
            for (h, q) in v.parts() {
                let gh = g.compose(h)?;
                let s = self.sigma(g, h)?;
                if s.is_zero() {
                    continue;
                }
                let r = self.sector_of(&gh)?.gb.normal_form(&(&(p * q) * s))?;
                out.insert(gh, r);
            }
        }
        Ok(out)
    }

    /// `h · [φ]ξ_g = Π_{i ∈ I_g^c} h_i^{-1} [φ(h x)] ξ_g`.
    pub fn act(&self, h: &GroupElement, u: &SectorElement) -> Result<SectorElement> {
        let mut out = SectorElement::zero();
        for (g, p) in u.parts() {
            let sign: i64 = g.moved().iter().map(|i| h.sign(i) as i64).product();
            let image = h.act(p)?.scale(&rat(sign));
            out.insert(g.clone(), self.sector_of(g)?.gb.normal_form(&image)?);
        }
        Ok(out)
    }

    pub fn is_invariant(&self, u: &SectorElement) -> Result<bool> {
        for h in &self.generators {
            if self.act(h, u)? != *u {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Standard monomials `x^e ξ_g` fixed by every generator.
    pub fn invariant_basis(&self) -> Vec<(GroupElement, Exponent)> {
        let mut out = Vec::new();
        for (g, sector) in &self.sectors {
            for e in &sector.basis {
                let fixed = self.generators.iter().all(|h| {
                    let moved = g.moved().iter().filter(|&i| h.sign(i) == -1).count() as u32;
                    let flips: u32 = (0..self.arity())
                        .filter(|&i| h.sign(i) == -1)
                        .map(|i| e.get(i))
                        .sum();
                    (moved + flips) % 2 == 0
                });
                if fixed {
                    out.push((g.clone(), e.clone()));
                }
            }
        }
        out
    }

    /// Invariant basis elements per sector.
    pub fn invariant_dimensions(&self) -> BTreeMap<GroupElement, usize> {
        let mut out: BTreeMap<GroupElement, usize> =
            self.sectors.keys().map(|g| (g.clone(), 0)).collect();
        for (g, _) in self.invariant_basis() {
            *out.get_mut(&g).expect("sector") += 1;
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.invariant_basis().len()
    }

    /// `deg ξ_g = Σ_{i ∈ I_g^c} (1/2 - q_i)`.
    pub fn sector_degree(&self, g: &GroupElement) -> Rational {
        let half = ratio(1, 2);
        g.moved().iter().map(|i| &half - &self.weights.q(i)).sum()
    }

    /// Reduced degree of every term, or `None` when `u` is not homogeneous.
    pub fn degree(&self, u: &SectorElement) -> Option<Rational> {
        let mut seen: Option<Rational> = None;
        for (g, p) in u.parts() {
            for (e, _) in p.terms() {
                let d: Rational = (0..self.arity())
                    .map(|i| rat(e.get(i) as i64) * self.weights.q(i))
                    .sum::<Rational>()
                    + self.sector_degree(g);
                match &seen {
                    Some(s) if *s != d => return None,
                    _ => seen = Some(d),
                }
            }
        }
        seen
    }
}

/// Results of the algebra-law checks on a spanning set.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LawReport {
    pub unit: bool,
    pub equivariance: bool,
    pub associativity: bool,
    pub products_checked: usize,
    pub counterexamples: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.unit && self.equivariance && self.associativity
    }
}

/// Unit law for every element, `h(u ∪ v) = hu ∪ hv` for every pair and
/// group element, and associativity for every triple.
pub fn check_laws(alg: &OrbifoldAlgebra, span: &[SectorElement]) -> Result<LawReport> {
    let mut rep = LawReport {
        unit: true,
        equivariance: true,
        associativity: true,
        ..Default::default()
    };
    let one = alg.unit();
    for u in span {
        if alg.product(&one, u)? != *u || alg.product(u, &one)? != *u {
            rep.unit = false;
            rep.counterexamples.push(format!("unit fails on {u:?}"));
        }
    }
    let elements: Vec<GroupElement> = alg.elements().cloned().collect();
    let mut products = BTreeMap::new();
    for (i, u) in span.iter().enumerate() {
        for (j, v) in span.iter().enumerate() {
            let uv = alg.product(u, v)?;
            rep.products_checked += 1;
            for h in &elements {
                let lhs = alg.act(h, &uv)?;
                let rhs = alg.product(&alg.act(h, u)?, &alg.act(h, v)?)?;
                if lhs != rhs {
                    rep.equivariance = false;
                    rep.counterexamples
                        .push(format!("{h} does not commute with {u:?} ∪ {v:?}"));
                }
            }
            products.insert((i, j), uv);
        }
    }
    for i in 0..span.len() {
        for j in 0..span.len() {
            for k in 0..span.len() {
                let left = alg.product(&products[&(i, j)], &span[k])?;
                let right = alg.product(&span[i], &products[&(j, k)])?;
                rep.products_checked += 2;
                if left != right {
                    rep.associativity = false;
                    rep.counterexamples.push(format!(
                        "({:?} ∪ {:?}) ∪ {:?} = {left:?} but the other bracketing gives {right:?}",
                        span[i], span[j], span[k]
                    ));
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorSquare {
    /// `σ_{g,g}`, the class of `(ξ_g)^2` in the untwisted sector.
    pub sigma: String,
    /// Normal form of `x_{N+1}^2` in `Jac(f̄)`.
    pub normal_form_bar: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiReport {
    pub dim_bar: usize,
    pub dim_untwisted: usize,
    pub dim_twisted: usize,
    /// Dimension of the span of the monomials free of `x_{N+1}`.
    pub b1: usize,
    /// Dimension of `x_{N+1}` times the span of monomials in the fixed
    /// coordinates.
    pub b2: usize,
    pub direct_sum: bool,
    /// `x_t x_{N+1} = 0` and `x_{N+1}^2 ∈ B1`, so no monomial with
    /// `α_{N+1} ≥ 2` or `α_t α_{N+1} ≠ 0` is needed.
    pub b2_shape: bool,
    pub images_commute: bool,
    pub relations_vanish: bool,
    pub images_invariant: bool,
    pub injective: bool,
    pub grading: bool,
    pub generator_square: GeneratorSquare,
    pub counterexamples: Vec<String>,
}

impl PsiReport {
    pub fn passed(&self) -> bool {
        self.dim_bar == self.dim_untwisted + self.dim_twisted
            && self.b1 == self.dim_untwisted
            && self.b2 == self.dim_twisted
            && self.direct_sum
            && self.b2_shape
            && self.images_commute
            && self.relations_vanish
            && self.images_invariant
            && self.injective
            && self.grading
            && self.generator_square.matches
    }
}

/// `ψ: Jac(f̄) → Jac(f, G)` on generators: `x_t ↦ [x_t^2]ξ_id`,
/// `x_{N+1} ↦ ξ_g`, `x_i ↦ [x_i]ξ_id`.
pub struct Psi<'a> {
    alg: &'a OrbifoldAlgebra,
    images: Vec<SectorElement>,
}

impl<'a> Psi<'a> {
    pub fn new(alg: &'a OrbifoldAlgebra, res: &Resolution) -> Result<Self> {
        let n = alg.arity();
        let (t, z) = (res.input.flip_leaf, res.input.isolated);
        let id = alg.identity();
        let images = (0..n)
            .map(|i| {
                if i == t {
                    alg.element(&id, &Polynomial::var(n, t).pow(2))
                } else if i == z {
                    alg.xi(&res.input.group)
                } else {
                    alg.element(&id, &Polynomial::var(n, i))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Psi { alg, images })
    }

    pub fn generator(&self, i: usize) -> &SectorElement {
        &self.images[i]
    }

    pub fn apply(&self, p: &Polynomial) -> Result<SectorElement> {
        let mut powers: Vec<Vec<SectorElement>> = vec![vec![self.alg.unit()]; self.images.len()];
        let mut out = SectorElement::zero();
        for (e, c) in p.terms() {
            let mut term = self.alg.unit();
            for i in 0..self.images.len() {
                let k = e.get(i) as usize;
                while powers[i].len() <= k {
                    let next = self
                        .alg
                        .product(powers[i].last().expect("nonempty"), &self.images[i])?;
                    powers[i].push(next);
                }
                if k > 0 {
                    term = self.alg.product(&term, &powers[i][k])?;
                }
            }
            out = out.add(&term.scale(c));
        }
        Ok(out)
    }
}

pub fn verify_psi(alg: &OrbifoldAlgebra, res: &Resolution) -> Result<PsiReport> {
    let n = alg.arity();
    if res.f_bar.arity() != n || res.input.f != *alg.f() {
        return Err(Error::InvalidOrbifold(
            "resolution does not belong to this algebra".into(),
        ));
    }
    let (t, z) = (res.input.flip_leaf, res.input.isolated);
    let g = &res.input.group;
    let psi = Psi::new(alg, res)?;
    let jac_bar = crate::groebner::jacobian_ideal(&res.f_bar)?;
    let basis_bar = jac_bar.quotient_basis()?;
    if !basis_bar.finite {
        return Err(Error::Invariant(format!("{} is degenerate", res.f_bar)));
    }
    let dims = alg.invariant_dimensions();
    let dim_untwisted = dims[&alg.identity()];
    let dim_twisted = dims.get(g).copied().unwrap_or(0);
    let mut counterexamples = Vec::new();

    // B1: the subalgebra generated by x_i, i != N+1; B2: x_{N+1} times the
    // subalgebra generated by the coordinates fixed by g
    let nf_vec = |p: &Polynomial| -> Result<BTreeMap<Exponent, Rational>> {
        Ok(jac_bar
            .normal_form(p)?
            .terms()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect())
    };
    let closure =
        |start: Polynomial, vars: &[usize]| -> Result<(linalg::Span<Exponent>, Vec<Polynomial>)> {
            let mut span = linalg::Span::new();
            let first = jac_bar.normal_form(&start)?;
            span.insert(nf_vec(&first)?);
            let mut found = vec![first];
            let mut k = 0;
            while k < found.len() {
                for &i in vars {
                    let next = jac_bar.normal_form(&(&found[k] * &Polynomial::var(n, i)))?;
                    if span.insert(nf_vec(&next)?) {
                        found.push(next);
                    }
                }
                k += 1;
            }
            Ok((span, found))
        };
    let untwisted_vars: Vec<usize> = (0..n).filter(|&i| i != z).collect();
    let twisted_vars: Vec<usize> = g.fixed().iter().filter(|&i| i != z).collect();
    let (b1, _) = closure(Polynomial::one(n), &untwisted_vars)?;
    let (b2, b2_basis) = closure(Polynomial::var(n, z), &twisted_vars)?;
    let mut sum = b1.clone();
    for p in &b2_basis {
        sum.insert(nf_vec(p)?);
    }
    let direct_sum =
        sum.dim() == b1.dim() + b2.dim() && sum.dim() == basis_bar.standard_monomials.len();
    if !direct_sum {
        counterexamples.push(format!(
            "B1 ({}) and B2 ({}) span {} of {} dimensions",
            b1.dim(),
            b2.dim(),
            sum.dim(),
            basis_bar.standard_monomials.len()
        ));
    }
    let xt_xz = jac_bar.normal_form(&(&Polynomial::var(n, t) * &Polynomial::var(n, z)))?;
    let xz2 = nf_vec(&Polynomial::var(n, z).pow(2))?;
    let b2_shape = xt_xz.is_zero() && b1.contains(xz2);
    if !b2_shape {
        counterexamples.push("x_t x_{N+1} is nonzero or x_{N+1}^2 leaves B1".into());
    }

    let mut images_commute = true;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (psi.generator(i), psi.generator(j));
            if alg.product(a, b)? != alg.product(b, a)? {
                images_commute = false;
                counterexamples.push(format!(
                    "images of x{} and x{} do not commute",
                    i + 1,
                    j + 1
                ));
            }
        }
    }

    let mut relations_vanish = true;
    for i in 0..n {
        let r = res.f_bar.partial_derivative(i)?;
        let image = psi.apply(&r)?;
        if !image.is_zero() {
            relations_vanish = false;
            counterexamples.push(format!("ψ(∂f̄/∂x{}) = {image:?}", i + 1));
        }
    }

    let mut images_invariant = true;
    let mut grading = true;
    let mut columns: BTreeMap<(GroupElement, Exponent), usize> = BTreeMap::new();
    let mut images = Vec::new();
    for e in &basis_bar.standard_monomials {
        let m = Polynomial::monomial(e.clone(), Rational::one());
        let image = psi.apply(&m)?;
        if !alg.is_invariant(&image)? {
            images_invariant = false;
            counterexamples.push(format!("ψ(x^{e}) = {image:?} is not invariant"));
        }
        let expected: Rational = (0..n)
            .map(|i| rat(e.get(i) as i64) * res.weights.q(i))
            .sum();
        if alg.degree(&image) != Some(expected.clone()) {
            grading = false;
            counterexamples.push(format!(
                "ψ(x^{e}) = {image:?} does not have degree {expected}"
            ));
        }
        for (h, p) in image.parts() {
            for (k, _) in p.terms() {
                let next = columns.len();
                columns.entry((h.clone(), k.clone())).or_insert(next);
            }
        }
        images.push(image);
    }
    let rows: Vec<Vec<Rational>> = images
        .iter()
        .map(|image| {
            let mut row = vec![Rational::zero(); columns.len()];
            for (h, p) in image.parts() {
                for (k, c) in p.terms() {
                    row[columns[&(h.clone(), k.clone())]] = c.clone();
                }
            }
            row
        })
        .collect();
    let rank = linalg::rank(rows, columns.len());
    let injective = rank == basis_bar.standard_monomials.len();
    if !injective {
        counterexamples.push(format!(
            "images of the {} basis monomials span only {rank} dimensions",
            basis_bar.standard_monomials.len()
        ));
    }

    let sigma_gg = alg.sigma(g, g)?.clone();
    let nf_bar = jac_bar.normal_form(&Polynomial::var(n, z).pow(2))?;
    let square = psi.apply(&nf_bar)?;
    let matches = square == alg.element(&alg.identity(), &sigma_gg)?
        && alg.product(psi.generator(z), psi.generator(z))? == square;
    if !matches {
        counterexamples.push(format!(
            "(ξ_g)^2 = [{sigma_gg}]ξ_id but ψ(x_{{N+1}}^2) = {square:?}"
        ));
    }

    Ok(PsiReport {
        dim_bar: basis_bar.standard_monomials.len(),
        dim_untwisted,
        dim_twisted,
        b1: b1.dim(),
        b2: b2.dim(),
        direct_sum,
        b2_shape,
        images_commute,
        relations_vanish,
        images_invariant,
        injective,
        grading,
        generator_square: GeneratorSquare {
            sigma: sigma_gg.to_string(),
            normal_form_bar: nf_bar.to_string(),
            matches,
        },
        counterexamples,
    })
}
