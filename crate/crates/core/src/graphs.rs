//! Choice maps `kappa: I -> I`, their functional graphs, weight systems and
//! the gluing of isolated vertices onto leaves.
//!
//! Vertices are 0-based. A fixed point `kappa(j) = j` is drawn without an
//! edge and contributes the pure power `x_j^{a_j}` to `f_kappa`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{rat, Exponent, Polynomial, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChoiceGraph {
    kappa: Vec<usize>,
}

/// A connected component of a functional graph: its vertices and its unique
/// cycle, listed along the edges starting from the smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// One loop-with-branches component together with the isolated vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopStructure {
    pub component: Component,
    pub isolated: Vec<usize>,
}

impl ChoiceGraph {
    pub fn new(kappa: Vec<usize>) -> Result<Self> {
        let n = kappa.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if let Some(&bad) = kappa.iter().find(|&&k| k >= n) {
            return Err(Error::InvalidGraph(format!(
                "kappa value {} outside 1..={n}",
                bad + 1
            )));
        }
        Ok(ChoiceGraph { kappa })
    }

    /// Builds from 1-based kappa values.
    pub fn from_one_based(kappa: &[usize]) -> Result<Self> {
        if kappa.contains(&0) {
            return Err(Error::InvalidGraph("kappa values are 1-based".into()));
        }
        Self::new(kappa.iter().map(|k| k - 1).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self, j: usize) -> usize {
        self.kappa[j]
    }

    pub fn kappa_values(&self) -> &[usize] {
        &self.kappa
    }

    pub fn is_fixed(&self, j: usize) -> bool {
        self.kappa[j] == j
    }

    /// Vertices with an edge into `m` (excluding `m` itself).
    pub fn preimage(&self, m: usize) -> Vec<usize> {
        (0..self.n_vertices())
            .filter(|&j| j != m && self.kappa[j] == m)
            .collect()
    }

    /// Fixed points without incoming edges.
    pub fn is_isolated(&self, j: usize) -> bool {
        self.is_fixed(j) && self.preimage(j).is_empty()
    }

    /// The leaves `T_kappa`: vertices with an outgoing edge and no incoming
    /// edge.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n_vertices())
            .filter(|&j| !self.is_fixed(j) && self.preimage(j).is_empty())
            .collect()
    }

    pub fn components(&self) -> Vec<Component> {
        let n = self.n_vertices();
        let mut cycle_of = vec![usize::MAX; n];
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            // walk until a vertex repeats; the repeated tail is the cycle
            let mut seen = Vec::new();
            let mut v = start;
            while !seen.contains(&v) && cycle_of[v] == usize::MAX {
                seen.push(v);
                v = self.kappa[v];
            }
            let id = if cycle_of[v] != usize::MAX {
                cycle_of[v]
            } else {
                let pos = seen.iter().position(|&u| u == v).expect("cycle start");
                let mut cycle = seen[pos..].to_vec();
                let min_pos = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &u)| u)
                    .map(|(i, _)| i)
                    .expect("nonempty cycle");
                cycle.rotate_left(min_pos);
                cycles.push(cycle);
                cycles.len() - 1
            };
            for u in seen {
                cycle_of[u] = id;
            }
        }
        let mut comps: Vec<Component> = cycles
            .into_iter()
            .enumerate()
            .map(|(id, cycle)| Component {
                vertices: (0..n).filter(|&v| cycle_of[v] == id).collect(),
                cycle,
            })
            .collect();
        comps.sort_by_key(|c| c.vertices[0]);
        comps
    }

    /// Decomposes into exactly one component with at least two vertices and
    /// any number of isolated vertices.
    pub fn loop_structure(&self) -> Result<LoopStructure> {
        let comps = self.components();
        let mut big: Vec<Component> = Vec::new();
        let mut isolated = Vec::new();
        for c in comps {
            if c.vertices.len() >= 2 {
                big.push(c);
            } else {
                isolated.push(c.vertices[0]);
            }
        }
        if big.len() != 1 {
            return Err(Error::InvalidGraph(format!(
                "expected one loop-with-branches component, found {}",
                big.len()
            )));
        }
        Ok(LoopStructure {
            component: big.pop().expect("one component"),
            isolated,
        })
    }

    /// Adds edges `new_vertices[i] -> targets[i]`. Each new vertex must be
    /// isolated and each target a leaf of `self`.
    pub fn glue(&self, new_vertices: &[usize], targets: &[usize]) -> Result<ChoiceGraph> {
        if new_vertices.len() != targets.len() {
            return Err(Error::InvalidGraph(
                "glue needs as many targets as new vertices".into(),
            ));
        }
        let leaves = self.leaves();
        let mut kappa = self.kappa.clone();
        for (&v, &t) in new_vertices.iter().zip(targets) {
            if v >= self.n_vertices() || !self.is_isolated(v) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} is not isolated",
                    v + 1
                )));
            }
            if !leaves.contains(&t) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} is not a leaf",
                    t + 1
                )));
            }
            kappa[v] = t;
        }
        let distinct: BTreeSet<_> = new_vertices.iter().collect();
        if distinct.len() != new_vertices.len() {
            return Err(Error::InvalidGraph("repeated vertex in glue".into()));
        }
        ChoiceGraph::new(kappa)
    }

    /// Appends `k` isolated vertices.
    pub fn with_isolated(&self, k: usize) -> ChoiceGraph {
        let n = self.n_vertices();
        let mut kappa = self.kappa.clone();
        kappa.extend(n..n + k);
        ChoiceGraph { kappa }
    }

    /// Graphviz rendering, vertices in index order, cycle edges bold.
    pub fn to_dot(&self) -> String {
        let mut on_cycle = BTreeSet::new();
        for c in self.components() {
            if c.cycle.len() >= 2 {
                on_cycle.extend(c.cycle);
            }
        }
        let mut out = String::from("digraph kappa {\n  splines=curved;\n");
        for j in 0..self.n_vertices() {
            let _ = writeln!(out, "  x{};", j + 1);
        }
        for j in 0..self.n_vertices() {
            let k = self.kappa[j];
            if k == j {
                continue;
            }
            let style = if on_cycle.contains(&j) && on_cycle.contains(&k) {
                " [style=bold]"
            } else {
                ""
            };
            let _ = writeln!(out, "  x{} -> x{}{};", j + 1, k + 1, style);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerAssignment {
    powers: Vec<u32>,
}

impl PowerAssignment {
    pub fn new(powers: Vec<u32>) -> Result<Self> {
        if let Some(p) = powers.iter().position(|&a| a < 2) {
            return Err(Error::InvalidGraph(format!(
                "power a{} = {} must be at least 2",
                p + 1,
                powers[p]
            )));
        }
        Ok(PowerAssignment { powers })
    }

    pub fn get(&self, j: usize) -> u32 {
        self.powers[j]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn with_extra(&self, extra: &[u32]) -> Result<Self> {
        let mut p = self.powers.clone();
        p.extend_from_slice(extra);
        Self::new(p)
    }
}

fn check_lengths(g: &ChoiceGraph, a: &PowerAssignment) -> Result<()> {
    if g.n_vertices() != a.len() {
        return Err(Error::ArityMismatch {
            left: g.n_vertices(),
            right: a.len(),
        });
    }
    Ok(())
}

/// Exponent of the `j`-th summand `x_j^{a_j} x_{kappa(j)}`.
pub fn kappa_exponent(g: &ChoiceGraph, a: &PowerAssignment, j: usize) -> Exponent {
    let mut e = Exponent::zeros(g.n_vertices());
    e.set(j, a.get(j));
    let k = g.kappa(j);
    if k != j {
        e.set(k, 1);
    }
    e
}

/// `f_kappa = sum_j x_j^{a_j} x_{kappa(j)}` with unit coefficients.
pub fn build_f_kappa(g: &ChoiceGraph, a: &PowerAssignment) -> Result<Polynomial> {
    check_lengths(g, a)?;
    Polynomial::from_terms(
        g.n_vertices(),
        (0..g.n_vertices()).map(|j| (kappa_exponent(g, a, j), Rational::one())),
    )
}

/// Integer weights `(v_1, ..., v_N; d)`, primitive, with `0 < v_i < d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightSystem {
    weights: Vec<u64>,
    degree: u64,
}

impl WeightSystem {
    pub fn new(weights: Vec<u64>, degree: u64) -> Result<Self> {
        if weights.iter().any(|&v| v == 0 || v >= degree) {
            return Err(Error::NotSolvable(format!(
                "weights {weights:?} must satisfy 0 < v_i < d = {degree}"
            )));
        }
        let g = weights.iter().fold(degree, |acc, &v| acc.gcd(&v));
        Ok(WeightSystem {
            weights: weights.iter().map(|v| v / g).collect(),
            degree: degree / g,
        })
    }

    /// From reduced weights `q_i = v_i / d`.
    pub fn from_reduced(q: &[Rational]) -> Result<Self> {
        if q.iter().any(|x| !x.is_positive() || *x >= Rational::one()) {
            return Err(Error::NotSolvable(
                "reduced weights must lie strictly between 0 and 1".into(),
            ));
        }
        let d = q
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let weights: Option<Vec<u64>> = q
            .iter()
            .map(|x| {
                (x * Rational::from_integer(d.clone()))
                    .to_integer()
                    .to_u64()
            })
            .collect();
        match (weights, d.to_u64()) {
            (Some(w), Some(d)) => Self::new(w, d),
            _ => Err(Error::ResourceLimit("weights exceed 64 bits".into())),
        }
    }

    /// Solves `sum_i alpha_i q_i = 1` over the support of `f`.
    pub fn from_polynomial(f: &Polynomial) -> Result<Self> {
        let n = f.arity();
        let rows: Vec<Vec<Rational>> = f
            .exponents()
            .map(|e| e.as_slice().iter().map(|&a| rat(a as i64)).collect())
            .collect();
        let rhs = vec![Rational::one(); rows.len()];
        let q = linalg::solve_unique(&rows, &rhs, n)
            .ok_or_else(|| Error::NotSolvable(format!("no unique weight system for {f}")))?;
        Self::from_reduced(&q)
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn q(&self, i: usize) -> Rational {
        Rational::new(self.weights[i].into(), self.degree.into())
    }

    pub fn reduced(&self) -> Vec<Rational> {
        (0..self.arity()).map(|i| self.q(i)).collect()
    }

    pub fn degree_of(&self, e: &Exponent) -> u64 {
        e.weighted_degree(&self.weights)
    }

    /// The quasihomogeneous Milnor number `prod_i (d - v_i) / v_i`.
    pub fn milnor_orlik(&self) -> Rational {
        self.weights.iter().fold(Rational::one(), |acc, &v| {
            acc * Rational::new((self.degree - v).into(), v.into())
        })
    }

    /// Checks that every term of `f` has weighted degree `d`.
    pub fn check(&self, f: &Polynomial) -> Result<()> {
        if f.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: f.arity(),
            });
        }
        for e in f.exponents() {
            let found = self.degree_of(e);
            if found != self.degree {
                return Err(Error::NotQuasihomogeneous {
                    exponent: e.to_string(),
                    found,
                    expected: self.degree,
                });
            }
        }
        Ok(())
    }
}

/// Solves `a_j q_j + q_kappa(j) = 1` (just `a_j q_j = 1` at fixed points).
pub fn solve_weights(g: &ChoiceGraph, a: &PowerAssignment) -> Result<WeightSystem> {
    check_lengths(g, a)?;
    let n = g.n_vertices();
    let rows: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            kappa_exponent(g, a, j)
                .as_slice()
                .iter()
                .map(|&x| rat(x as i64))
                .collect()
        })
        .collect();
    let q = linalg::solve_unique(&rows, &vec![Rational::one(); n], n)
        .ok_or_else(|| Error::NotSolvable("singular exponent matrix".into()))?;
    let half = Rational::new(1.into(), 2.into());
    if let Some(i) = q.iter().position(|x| *x > half) {
        return Err(Error::NotSolvable(format!(
            "q{} = {} exceeds 1/2",
            i + 1,
            q[i]
        )));
    }
    if let Some(i) = q.iter().position(|x| !x.is_positive()) {
        return Err(Error::NotSolvable(format!(
            "q{} = {} is not positive",
            i + 1,
            q[i]
        )));
    }
    WeightSystem::from_reduced(&q)
}

/// Result of matching a three-vertex graph against the seven types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeVariableType {
    pub label: u8,
    /// `relabel[c]` is the original vertex placed at canonical position `c`.
    pub relabel: [usize; 3],
    /// Divisibility side condition, only for types 3 and 6.
    pub divisibility: Option<bool>,
}

/// Canonical shapes (0-based kappa) of the seven types.
const THREE_VARIABLE_TYPES: [[usize; 3]; 7] = [
    [0, 1, 2],
    [2, 1, 2],
    [1, 1, 1],
    [2, 1, 0],
    [2, 1, 1],
    [1, 2, 1],
    [1, 2, 0],
];

pub fn classify_three_variable(g: &ChoiceGraph, a: &PowerAssignment) -> Result<ThreeVariableType> {
    check_lengths(g, a)?;
    if g.n_vertices() != 3 {
        return Err(Error::InvalidGraph(format!(
            "three-variable classification needs 3 vertices, got {}",
            g.n_vertices()
        )));
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for (t, shape) in THREE_VARIABLE_TYPES.iter().enumerate() {
        for p in PERMS {
            // canonical c sits at original vertex p[c]
            let matches = (0..3).all(|c| g.kappa(p[c]) == p[shape[c]]);
            if !matches {
                continue;
            }
            let label = t as u8 + 1;
            let (a1, a2, a3) = (a.get(p[0]) as u64, a.get(p[1]) as u64, a.get(p[2]) as u64);
            let divisibility = match label {
                3 => Some(a1.lcm(&a3) % (a2 - 1) == 0),
                6 => Some((a1 - 1) % ((a2 - 1) * a1.gcd(&a3)) == 0),
                _ => None,
            };
            return Ok(ThreeVariableType {
                label,
                relabel: p,
                divisibility,
            });
        }
    }
    Err(Error::Invariant(format!(
        "unmatched three-variable graph {:?}",
        g.kappa_values()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    fn graph(k: &[usize]) -> ChoiceGraph {
        ChoiceGraph::from_one_based(k).unwrap()
    }

    fn powers(p: &[u32]) -> PowerAssignment {
        PowerAssignment::new(p.to_vec()).unwrap()
    }

    #[test]
    fn four_variable_f_kappa() {
        let f = build_f_kappa(&graph(&[4, 3, 4, 4]), &powers(&[6, 9, 3, 7])).unwrap();
        assert_eq!(
            f,
            Polynomial::parse_with_arity("x1^6*x4 + x2^9*x3 + x3^3*x4 + x4^7", 4).unwrap()
        );
    }

    #[test]
    fn six_variable_f_kappa_and_weights() {
        let g = graph(&[2, 3, 1, 5, 1, 1]);
        let a = powers(&[3, 2, 4, 3, 2, 4]);
        let f = build_f_kappa(&g, &a).unwrap();
        assert_eq!(
            f,
            Polynomial::parse_with_arity(
                "x1^3*x2 + x2^2*x3 + x3^4*x1 + x5^2*x1 + x4^3*x5 + x6^4*x1",
                6
            )
            .unwrap()
        );
        let w = solve_weights(&g, &a).unwrap();
        assert_eq!(w.weights(), &[1, 2, 1, 1, 2, 1]);
        assert_eq!(w.degree(), 5);
        w.check(&f).unwrap();
    }

    #[test]
    fn four_variable_completed_weights() {
        let w = solve_weights(&graph(&[4, 3, 4, 4]), &powers(&[6, 9, 3, 7])).unwrap();
        assert_eq!(w.weights(), &[9, 5, 18, 9]);
        assert_eq!(w.degree(), 63);
        assert_eq!(w.milnor_orlik(), rat(1044));
    }

    #[test]
    fn three_variable_weights() {
        let g = graph(&[1, 1, 1, 4]);
        let a = powers(&[3, 4, 8, 2]);
        let w = solve_weights(&g, &a).unwrap();
        assert_eq!(
            w.reduced(),
            vec![ratio(1, 3), ratio(1, 6), ratio(1, 12), ratio(1, 2)]
        );
    }

    #[test]
    fn isolated_vertex_square() {
        let f = build_f_kappa(&graph(&[1]), &powers(&[2])).unwrap();
        assert_eq!(f, Polynomial::parse_with_arity("x1^2", 1).unwrap());
    }

    #[test]
    fn weights_from_polynomial() {
        let f = Polynomial::parse_with_arity("x1^3 + x2^2*x1 + x3^8*x1 + x2^2*x3^4 + x4^2*x2", 4)
            .unwrap();
        let w = WeightSystem::from_polynomial(&f).unwrap();
        assert_eq!(
            w.reduced(),
            vec![ratio(1, 3), ratio(1, 3), ratio(1, 12), ratio(1, 3)]
        );
        assert_eq!(w.milnor_orlik(), rat(88));
        let bad = Polynomial::parse_with_arity("x1^2 + x1^3*x2", 2).unwrap();
        assert!(matches!(
            WeightSystem::from_polynomial(&bad),
            Err(Error::NotSolvable(_))
        ));
    }

    #[test]
    fn components_and_leaves() {
        // the graph of the gluing example, with vertex 10 isolated
        let g = graph(&[2, 3, 4, 1, 1, 1, 8, 2, 4, 10]);
        let s = g.loop_structure().unwrap();
        assert_eq!(s.component.cycle, vec![0, 1, 2, 3]);
        assert_eq!(s.isolated, vec![9]);
        assert_eq!(g.leaves(), vec![4, 5, 6, 8]);
        assert_eq!(g.preimage(0), vec![3, 4, 5]);
    }

    #[test]
    fn gluing() {
        let g = graph(&[2, 3, 4, 1, 1, 1, 8, 2, 4, 10]);
        let k2 = g.glue(&[9], &[8]).unwrap();
        assert_eq!(k2, graph(&[2, 3, 4, 1, 1, 1, 8, 2, 4, 9]));
        let k3 = g.glue(&[9], &[4]).unwrap();
        assert_eq!(k3, graph(&[2, 3, 4, 1, 1, 1, 8, 2, 4, 5]));
        assert_eq!(g.glue(&[], &[]).unwrap(), g);
        // 1 is on the loop, not a leaf
        assert!(g.glue(&[9], &[0]).is_err());
        // 5 is not isolated
        assert!(g.glue(&[4], &[8]).is_err());
    }

    #[test]
    fn two_nontrivial_components_rejected() {
        let g = graph(&[2, 2, 4, 4]);
        assert!(g.loop_structure().is_err());
    }

    #[test]
    fn three_variable_types() {
        let a = powers(&[3, 4, 5]);
        let t = |k: &[usize]| classify_three_variable(&graph(k), &a).unwrap();
        assert_eq!(t(&[1, 2, 3]).label, 1);
        assert_eq!(t(&[3, 2, 3]).label, 2);
        assert_eq!(t(&[2, 2, 2]).label, 3);
        assert_eq!(t(&[3, 2, 1]).label, 4);
        assert_eq!(t(&[3, 2, 2]).label, 5);
        assert_eq!(t(&[2, 3, 1]).label, 7);
        let six = t(&[2, 3, 2]);
        assert_eq!(six.label, 6);
        assert!(six.divisibility.is_some());
        // permuted 3-cycle
        assert_eq!(t(&[3, 1, 2]).label, 7);
        // 2-cycle {1,2} with branch 3 -> 1
        assert_eq!(t(&[2, 1, 1]).label, 6);
    }

    #[test]
    fn divisibility_flags() {
        // type 3 with a2 - 1 = 2 dividing lcm(2, 3) = 6
        let t3 = classify_three_variable(&graph(&[2, 2, 2]), &powers(&[2, 3, 3])).unwrap();
        assert_eq!(t3.divisibility, Some(true));
        let t3 = classify_three_variable(&graph(&[2, 2, 2]), &powers(&[3, 5, 3])).unwrap();
        assert_eq!(t3.divisibility, Some(false));
        // type 6: (a2 - 1) gcd(a1, a3) | (a1 - 1) with a = (5, 3, 2): 2 * 1 | 4
        let t6 = classify_three_variable(&graph(&[2, 3, 2]), &powers(&[5, 3, 2])).unwrap();
        assert_eq!(t6.divisibility, Some(true));
        assert!(classify_three_variable(&graph(&[1, 2]), &powers(&[2, 2])).is_err());
    }

    #[test]
    fn dot_lists_edges() {
        let dot = graph(&[4, 3, 4, 4]).to_dot();
        assert!(dot.contains("x1 -> x4;"));
        assert!(dot.contains("x2 -> x3;"));
        assert!(!dot.contains("x4 -> x4"));
    }
}
