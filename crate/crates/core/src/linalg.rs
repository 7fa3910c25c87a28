//! Dense Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::Rational;

/// Row-reduces `rows` in place to reduced echelon form and returns the pivot
/// columns.
pub fn row_reduce(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..ncols {
                    let delta = &factor * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Incremental row echelon basis of sparse vectors with ordered keys.
#[derive(Clone, Debug)]
pub struct Span<K: Ord + Clone> {
    rows: Vec<(K, BTreeMap<K, Rational>)>,
}

impl<K: Ord + Clone> Span<K> {
    pub fn new() -> Self {
        Span { rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` lies in
    /// the span.
    pub fn reduce(&self, mut v: BTreeMap<K, Rational>) -> BTreeMap<K, Rational> {
        for (pivot, row) in &self.rows {
            if let Some(c) = v.get(pivot).cloned() {
                for (k, a) in row {
                    let e = v.entry(k.clone()).or_insert_with(Rational::zero);
                    *e -= &c * a;
                    if e.is_zero() {
                        v.remove(k);
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: BTreeMap<K, Rational>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v`, returning false when it was already in the span.
    pub fn insert(&mut self, v: BTreeMap<K, Rational>) -> bool {
        let mut r = self.reduce(v);
        let Some((pivot, lead)) = r.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = Rational::one() / lead;
        for c in r.values_mut() {
            *c *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if let Some(c) = row.get(&pivot).cloned() {
                for (k, a) in &r {
                    let e = row.entry(k.clone()).or_insert_with(Rational::zero);
                    *e -= &c * a;
                    if e.is_zero() {
                        row.remove(k);
                    }
                }
            }
        }
        self.rows.push((pivot, r));
        true
    }
}

pub fn rank(mut rows: Vec<Vec<Rational>>, ncols: usize) -> usize {
    row_reduce(&mut rows, ncols).len()
}

/// Unique solution of `A x = b`, or `None` when the system is inconsistent
/// or underdetermined.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational], nvars: usize) -> Option<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut rows, nvars + 1);
    if pivots.contains(&nvars) || pivots.len() != nvars {
        return None;
    }
    Some((0..nvars).map(|i| rows[i][nvars].clone()).collect())
}
