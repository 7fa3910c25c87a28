//! Diagonal `Z/2` symmetries and the two-chart resolution of `C^{N+1}/G`.
//!
//! A stage takes a polynomial `f_0` on a loop-with-branches graph and a leaf
//! `t` with even power `2a`, adds an isolated square `x_{N+1}^2`, and lets
//! `g` negate `x_t` and `x_{N+1}`. The first chart of the blow-up,
//! `x_t^2 -> x_t`, `x_{N+1}^2 -> x_t x_{N+1}^2`, gives `f̄`, whose graph is
//! the old one with the edge `N+1 -> t` glued on. Vertex numbers are kept;
//! the new vertex is always the last one.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::complete::{
    build_completion_with, loop_admissible, vertex_admissible, Completion, CompletionOptions,
    EpsilonPolicy,
};
use crate::error::{Error, Result};
use crate::graphs::{build_f_kappa, solve_weights, ChoiceGraph, PowerAssignment, WeightSystem};
use crate::groebner::{is_unit_ideal, jacobian_ideal, restrict_to_fixed, Milnor};
use crate::nondegen::{support, IndexSet};
use crate::poly::{rat, Exponent, Polynomial, Rational};

/// Diagonal matrix with entries `±1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    signs: Vec<i8>,
}

impl GroupElement {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidOrbifold(format!(
                "group entry {bad} is not ±1"
            )));
        }
        Ok(GroupElement { signs })
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { signs: vec![1; n] }
    }

    /// The element negating exactly the coordinates in `flipped`.
    pub fn flipping(n: usize, flipped: IndexSet) -> Self {
        GroupElement {
            signs: (0..n)
                .map(|i| if flipped.contains(i) { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.signs.len()
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// `I_g`, the coordinates with `g_i = 1`.
    pub fn fixed(&self) -> IndexSet {
        (0..self.arity()).filter(|&i| self.signs[i] == 1).collect()
    }

    /// `I_g^c`.
    pub fn moved(&self) -> IndexSet {
        (0..self.arity()).filter(|&i| self.signs[i] == -1).collect()
    }

    /// `d_g = |I_g^c|`.
    pub fn codimension(&self) -> usize {
        self.moved().len()
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        Ok(GroupElement {
            signs: self
                .signs
                .iter()
                .zip(&other.signs)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn inverse(&self) -> GroupElement {
        self.clone()
    }

    /// `f(g x)`.
    pub fn act(&self, f: &Polynomial) -> Result<Polynomial> {
        let factors: Vec<_> = self.signs.iter().map(|&s| rat(s as i64)).collect();
        f.scale_variables(&factors)
    }

    pub fn leaves_invariant(&self, f: &Polynomial) -> Result<bool> {
        Ok(self.act(f)? == *f)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.signs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One `Z/2` stage: `f = f_0 + x_{N+1}^2` with the generator flipping
/// `x_t` and `x_{N+1}`.
#[derive(Clone, Debug)]
pub struct OrbifoldInput {
    pub f: Polynomial,
    /// Graph of `f_kappa`, including the isolated vertex.
    pub graph: ChoiceGraph,
    pub powers: PowerAssignment,
    pub weights: WeightSystem,
    /// The flipped leaf `t` (0-based).
    pub flip_leaf: usize,
    /// The isolated vertex, always the last one.
    pub isolated: usize,
    pub group: GroupElement,
    /// `f - f_kappa`.
    pub f_add: Polynomial,
}

impl OrbifoldInput {
    /// Builds the stage from an already non-degenerate `f0` whose
    /// `f_kappa` part is given by `(g0, a0)` with unit coefficients.
    pub fn from_polynomial(
        g0: &ChoiceGraph,
        a0: &PowerAssignment,
        f0: &Polynomial,
        t: usize,
    ) -> Result<Self> {
        let n = g0.n_vertices();
        if a0.len() != n || f0.arity() != n {
            return Err(Error::ArityMismatch {
                left: n,
                right: f0.arity(),
            });
        }
        if t >= n {
            return Err(Error::IndexOutOfRange { index: t, arity: n });
        }
        if !g0.leaves().contains(&t) {
            return Err(Error::InvalidOrbifold(format!(
                "vertex {} is not a leaf",
                t + 1
            )));
        }
        if a0.get(t) % 2 != 0 || a0.get(t) < 4 {
            return Err(Error::InvalidOrbifold(format!(
                "leaf {} has power {}, need an even power of at least 4",
                t + 1,
                a0.get(t)
            )));
        }
        let f_kappa0 = build_f_kappa(g0, a0)?;
        let f_add0 = f0 - &f_kappa0;
        if f_add0
            .terms()
            .any(|(e, _)| !f_kappa0.coefficient(e).is_zero() || e.get(t) % 2 == 1)
        {
            return Err(Error::InvalidOrbifold(format!(
                "f_add overlaps f_kappa or has an odd power of x{}",
                t + 1
            )));
        }
        let graph = g0.with_isolated(1);
        let powers = a0.with_extra(&[2])?;
        let weights = solve_weights(&graph, &powers)?;
        let mut square = Exponent::zeros(n + 1);
        square.set(n, 2);
        let f = &f0.embed(n + 1, 0)? + &Polynomial::monomial(square, Rational::one());
        weights.check(&f)?;
        let group = GroupElement::flipping(n + 1, [t, n].into_iter().collect());
        if !group.leaves_invariant(&f)? {
            return Err(Error::Invariant(format!(
                "{f} is not invariant under {group}"
            )));
        }
        let f_add = &f - &build_f_kappa(&graph, &powers)?;
        Ok(OrbifoldInput {
            f,
            graph,
            powers,
            weights,
            flip_leaf: t,
            isolated: n,
            group,
            f_add,
        })
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }
}

/// Completes `f_kappa0` with every flipped leaf at even exponent in `f_add`,
/// then builds the stage for `t`.
pub fn build_orbifold_input(
    g0: &ChoiceGraph,
    a0: &PowerAssignment,
    t: usize,
    policy: &EpsilonPolicy,
) -> Result<(Completion, OrbifoldInput)> {
    let options = CompletionOptions {
        even: IndexSet::singleton(t),
        ..Default::default()
    };
    build_orbifold_input_with(g0, a0, t, policy, &options)
}

pub fn build_orbifold_input_with(
    g0: &ChoiceGraph,
    a0: &PowerAssignment,
    t: usize,
    policy: &EpsilonPolicy,
    options: &CompletionOptions,
) -> Result<(Completion, OrbifoldInput)> {
    if t >= g0.n_vertices() {
        return Err(Error::IndexOutOfRange {
            index: t,
            arity: g0.n_vertices(),
        });
    }
    let mut options = options.clone();
    options.even.insert(t);
    let completion = build_completion_with(g0, a0, policy, &options)?;
    let input = OrbifoldInput::from_polynomial(g0, a0, &completion.f, t)?;
    // the extra square is invertible and must not change the collection
    if !completion.collection.is_empty() {
        let r = support(&build_f_kappa(&input.graph, &input.powers)?, &input.weights)?;
        let extended = if options.all_vertices {
            vertex_admissible(&input.graph, &r)?
        } else {
            loop_admissible(&input.graph, &r)?
        };
        if extended.sets != completion.collection.sets {
            return Err(Error::Invariant(format!(
                "isolated vertex changed the admissible collection: {:?} vs {:?}",
                extended.sets, completion.collection.sets
            )));
        }
    }
    Ok((completion, input))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Charts {
    /// `x_t^2 -> x_t`, `x_{N+1}^2 -> x_t x_{N+1}^2`.
    pub first: Polynomial,
    /// `x_t^2 -> x_t^2 x_{N+1}`, `x_{N+1}^2 -> x_{N+1}`.
    pub second: Polynomial,
}

pub fn resolve_charts(inp: &OrbifoldInput) -> Result<Charts> {
    let n = inp.arity();
    let (t, z) = (inp.flip_leaf, inp.isolated);
    let xt = Polynomial::var(n, t);
    let xz = Polynomial::var(n, z);
    let chart = |yt: Polynomial, yz: Polynomial| -> Result<Polynomial> {
        let map = BTreeMap::from([(t, yt), (z, yz)]);
        inp.f.substitute_squares(&map).map_err(|e| match e {
            Error::OddExponent { .. } => {
                Error::Invariant(format!("stage input is not G-invariant: {e}"))
            }
            other => other,
        })
    };
    Ok(Charts {
        first: chart(xt.clone(), &xt * &(&xz * &xz))?,
        second: chart(&(&xt * &xt) * &xz, xz.clone())?,
    })
}

/// Dimension count `μ(f̄) = dim Jac(f)^G + μ(f^g)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bookkeeping {
    pub invariant_untwisted: u64,
    pub twisted: u64,
    pub total: u64,
}

#[derive(Clone, Debug)]
pub struct Resolution {
    pub input: OrbifoldInput,
    pub charts: Charts,
    pub f_bar: Polynomial,
    pub weights: WeightSystem,
    pub graph: ChoiceGraph,
    pub powers: PowerAssignment,
    /// The second chart has no critical points.
    pub chart2_smooth: bool,
    pub milnor: u64,
    pub bookkeeping: Bookkeeping,
}

impl Resolution {
    /// `f̄ - f_kappa̅`.
    pub fn f_add(&self) -> Polynomial {
        &self.f_bar - &build_f_kappa(&self.graph, &self.powers).expect("consistent stage")
    }
}

/// Computes `f̄` from the first chart and checks it against the glued graph,
/// the weight law `(2q_t, q_i, 1/2 - q_t)`, smoothness of the second chart,
/// the Milnor number and the dimension count.
pub fn build_bar_f(inp: &OrbifoldInput) -> Result<Resolution> {
    let charts = resolve_charts(inp)?;
    let (t, z) = (inp.flip_leaf, inp.isolated);
    let n = inp.arity();

    let graph = inp.graph.glue(&[z], &[t])?;
    let mut p = inp.powers.as_slice().to_vec();
    p[t] /= 2;
    let powers = PowerAssignment::new(p)?;

    // independent construction: f_kappa of the glued graph plus f_add with
    // x_t^2 renamed to x_t
    let halve = BTreeMap::from([(t, Polynomial::var(n, t))]);
    let expected = &build_f_kappa(&graph, &powers)? + &inp.f_add.substitute_squares(&halve)?;
    if expected != charts.first {
        return Err(Error::Invariant(format!(
            "first chart {} differs from the glued polynomial {expected}",
            charts.first
        )));
    }
    let f_bar = charts.first.clone();

    let weights = solve_weights(&graph, &powers)?;
    weights.check(&f_bar)?;
    let q = inp.weights.reduced();
    let half = Rational::new(1.into(), 2.into());
    let law: Vec<Rational> = (0..n)
        .map(|i| {
            if i == t {
                &q[t] * rat(2)
            } else if i == z {
                &half - &q[t]
            } else {
                q[i].clone()
            }
        })
        .collect();
    if weights.reduced() != law {
        return Err(Error::Invariant(format!(
            "weights of f̄ {:?} differ from the expected {:?}",
            weights.reduced(),
            law
        )));
    }

    let chart2_smooth = is_unit_ideal(&charts.second.gradient())?;
    if !chart2_smooth {
        return Err(Error::Invariant("second chart has critical points".into()));
    }

    let target = weights.milnor_orlik();
    let milnor = match jacobian_ideal(&f_bar)?.dimension()? {
        Milnor::Finite(mu) if Rational::from_integer(mu.into()) == target => mu,
        other => {
            return Err(Error::Invariant(format!(
                "Milnor number of f̄ is {other}, expected {target}"
            )))
        }
    };

    let bookkeeping = bookkeeping(inp)?;
    if bookkeeping.total != milnor {
        return Err(Error::Invariant(format!(
            "dimension count {} + {} differs from Milnor number {milnor}",
            bookkeeping.invariant_untwisted, bookkeeping.twisted
        )));
    }

    Ok(Resolution {
        input: inp.clone(),
        charts,
        f_bar,
        weights,
        graph,
        powers,
        chart2_smooth,
        milnor,
        bookkeeping,
    })
}

/// Invariant standard monomials of `Jac(f)` plus `μ(f^g)`. Both flipped
/// coordinates leave the fixed locus, so `g` acts trivially on `ξ_g`.
pub fn bookkeeping(inp: &OrbifoldInput) -> Result<Bookkeeping> {
    let moved = inp.group.moved();
    let basis = jacobian_ideal(&inp.f)?.quotient_basis()?;
    if !basis.finite {
        return Err(Error::Invariant(format!("{} is degenerate", inp.f)));
    }
    let invariant_untwisted = basis
        .standard_monomials
        .iter()
        .filter(|e| moved.iter().map(|i| e.get(i)).sum::<u32>() % 2 == 0)
        .count() as u64;
    let twisted =
        match restrict_to_fixed(&inp.f, &inp.group)?.milnor_number(inp.weights.weights())? {
            Milnor::Finite(m) => m,
            Milnor::Infinite => {
                return Err(Error::Invariant(
                    "restriction to the fixed locus is degenerate".into(),
                ))
            }
        };
    Ok(Bookkeeping {
        invariant_untwisted,
        twisted,
        total: invariant_untwisted + twisted,
    })
}

/// The initial completion followed by one resolution per flip.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub completion: Completion,
    pub stages: Vec<Resolution>,
}

impl Pipeline {
    pub fn final_polynomial(&self) -> &Polynomial {
        self.stages.last().map_or(&self.completion.f, |s| &s.f_bar)
    }
}

/// Applies one resolution per entry of `flips`, each a leaf of the graph at
/// its stage. The completion keeps every original flipped leaf at even
/// exponents so that all later stages stay invariant.
pub fn iterate_resolution(
    g0: &ChoiceGraph,
    a0: &PowerAssignment,
    flips: &[usize],
    policy: &EpsilonPolicy,
    options: &CompletionOptions,
) -> Result<Pipeline> {
    let mut options = options.clone();
    for &t in flips {
        if t < g0.n_vertices() {
            options.even.insert(t);
        }
    }
    let completion = build_completion_with(g0, a0, policy, &options)?;
    let mut stages: Vec<Resolution> = Vec::new();
    let stage_err = |k: usize, e: Error| match e {
        Error::InvalidOrbifold(m) => Error::InvalidOrbifold(format!("stage {k}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("stage {k}: {m}")),
        other => other,
    };
    for (k, &t) in flips.iter().enumerate() {
        let (g, a, f) = match stages.last() {
            Some(s) => (&s.graph, &s.powers, &s.f_bar),
            None => (g0, a0, &completion.f),
        };
        let input = OrbifoldInput::from_polynomial(g, a, f, t).map_err(|e| stage_err(k + 1, e))?;
        stages.push(build_bar_f(&input).map_err(|e| stage_err(k + 1, e))?);
    }
    Ok(Pipeline { completion, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    fn pa(s: &str, n: usize) -> Polynomial {
        Polynomial::parse_with_arity(s, n).unwrap()
    }

    fn three_variable() -> (Completion, OrbifoldInput) {
        let g = ChoiceGraph::from_one_based(&[1, 1, 1]).unwrap();
        let a = PowerAssignment::new(vec![3, 4, 8]).unwrap();
        build_orbifold_input(&g, &a, 1, &EpsilonPolicy::default()).unwrap()
    }

    #[test]
    fn group_element_basics() {
        let g = GroupElement::new(vec![1, -1, 1, -1]).unwrap();
        assert_eq!(g.fixed(), IndexSet::from_one_based(&[1, 3]).unwrap());
        assert_eq!(g.codimension(), 2);
        assert!(g.compose(&g).unwrap().is_identity());
        assert_eq!(g.to_string(), "(1,-1,1,-1)");
        assert!(GroupElement::new(vec![1, 2]).is_err());
        assert_eq!(g.act(&pa("x2*x4 + x2", 4)).unwrap(), pa("x2*x4 - x2", 4));
    }

    #[test]
    fn three_variable_input() {
        let (c, inp) = three_variable();
        assert_eq!(c.f_add(), pa("x2^4*x3^4", 3));
        assert_eq!(inp.f, pa("x1^3 + x2^4*x1 + x3^8*x1 + x2^4*x3^4 + x4^2", 4));
        assert_eq!(inp.group, GroupElement::new(vec![1, -1, 1, -1]).unwrap());
        assert_eq!(
            inp.weights.reduced(),
            vec![ratio(1, 3), ratio(1, 6), ratio(1, 12), ratio(1, 2)]
        );
        assert!(inp.group.leaves_invariant(&inp.f).unwrap());
    }

    #[test]
    fn three_variable_charts_and_bar_f() {
        let (_, inp) = three_variable();
        let charts = resolve_charts(&inp).unwrap();
        let f_bar = pa("x1^3 + x2^2*x1 + x3^8*x1 + x2^2*x3^4 + x4^2*x2", 4);
        assert_eq!(charts.first, f_bar);
        assert!(is_unit_ideal(&charts.second.gradient()).unwrap());

        let r = build_bar_f(&inp).unwrap();
        assert_eq!(r.f_bar, f_bar);
        assert_eq!(
            r.weights.reduced(),
            vec![ratio(1, 3), ratio(1, 3), ratio(1, 12), ratio(1, 3)]
        );
        assert_eq!(r.graph, ChoiceGraph::from_one_based(&[1, 1, 1, 2]).unwrap());
        assert_eq!(r.milnor, 88);
        assert_eq!(
            r.bookkeeping,
            Bookkeeping {
                invariant_untwisted: 66,
                twisted: 22,
                total: 88
            }
        );
        assert_eq!(r.f_add(), pa("x2^2*x3^4", 4));
    }

    #[test]
    fn input_preconditions() {
        let g = ChoiceGraph::from_one_based(&[1, 1, 1]).unwrap();
        let a = PowerAssignment::new(vec![3, 4, 8]).unwrap();
        let f = build_f_kappa(&g, &a).unwrap();
        // the root is not a leaf
        assert!(matches!(
            OrbifoldInput::from_polynomial(&g, &a, &f, 0),
            Err(Error::InvalidOrbifold(_))
        ));
        let odd = PowerAssignment::new(vec![3, 5, 8]).unwrap();
        let f = build_f_kappa(&g, &odd).unwrap();
        assert!(matches!(
            OrbifoldInput::from_polynomial(&g, &odd, &f, 1),
            Err(Error::InvalidOrbifold(_))
        ));
        // a power of 2 would halve to a linear term
        let two = PowerAssignment::new(vec![2, 2, 4]).unwrap();
        let f = build_f_kappa(&g, &two).unwrap();
        assert!(OrbifoldInput::from_polynomial(&g, &two, &f, 1).is_err());
        // odd power of the flipped leaf in f_add
        let f = &build_f_kappa(&g, &a).unwrap() + &pa("x2^3*x3^4*x1^0", 3);
        assert!(OrbifoldInput::from_polynomial(&g, &a, &f, 1).is_err());
    }

    #[test]
    fn invertible_chain_resolution() {
        // 2 -> 1 loop of length one, no f_add: f̄ is the glued chain
        let g = ChoiceGraph::from_one_based(&[1, 1]).unwrap();
        let a = PowerAssignment::new(vec![3, 4]).unwrap();
        let p = iterate_resolution(&g, &a, &[1], &EpsilonPolicy::default(), &Default::default())
            .unwrap();
        let s = &p.stages[0];
        assert_eq!(s.f_add(), Polynomial::zero(3));
        assert_eq!(s.f_bar, pa("x1^3 + x2^2*x1 + x3^2*x2", 3));
        assert_eq!(s.milnor, 8);
    }

    #[test]
    fn zero_and_one_flips() {
        let g = ChoiceGraph::from_one_based(&[1, 1, 1]).unwrap();
        let a = PowerAssignment::new(vec![3, 4, 8]).unwrap();
        let p = iterate_resolution(&g, &a, &[], &EpsilonPolicy::default(), &Default::default())
            .unwrap();
        assert!(p.stages.is_empty());
        assert_eq!(p.final_polynomial(), &p.completion.f);
        let p = iterate_resolution(&g, &a, &[1], &EpsilonPolicy::default(), &Default::default())
            .unwrap();
        let (_, inp) = three_variable();
        assert_eq!(p.final_polynomial(), &build_bar_f(&inp).unwrap().f_bar);
    }

    #[test]
    fn two_flips() {
        let g = ChoiceGraph::from_one_based(&[1, 1, 1]).unwrap();
        let a = PowerAssignment::new(vec![3, 4, 4]).unwrap();
        let p = iterate_resolution(
            &g,
            &a,
            &[1, 2],
            &EpsilonPolicy::default(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(p.completion.f_add(), pa("x2^4*x3^2", 3));
        assert_eq!(p.stages.len(), 2);
        let last = &p.stages[1];
        assert_eq!(
            last.f_bar,
            pa("x1^3 + x2^2*x1 + x3^2*x1 + x2^2*x3 + x4^2*x2 + x5^2*x3", 5)
        );
        assert_eq!(
            last.graph,
            ChoiceGraph::from_one_based(&[1, 1, 1, 2, 3]).unwrap()
        );
        for s in &p.stages {
            assert_eq!(
                Rational::from_integer(s.milnor.into()),
                s.weights.milnor_orlik()
            );
            assert_eq!(s.bookkeeping.total, s.milnor);
        }
        // flipping a vertex which is no longer a leaf names the stage
        let err = iterate_resolution(
            &g,
            &a,
            &[1, 1],
            &EpsilonPolicy::default(),
            &Default::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("stage 2"), "{err}");
    }
}
