//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Polynomial`] is a map from [`Exponent`] vectors to nonzero rational
//! coefficients. Exponents are ordered by graded reverse lexicographic order
//! with `x1 > x2 > ... > xN`, so the last entry of the term map is the
//! leading term and printing walks the map backwards.
//!
//! Variables are 0-based in the API and 1-based (`x1`, `x2`, ...) in text.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exact rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact rational `n / d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Vector of non-negative exponents `(a1, ..., aN)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn zeros(arity: usize) -> Self {
        Exponent(vec![0; arity])
    }

    /// Standard basis vector `e_i`.
    pub fn unit(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Exponent(e)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: u32) {
        self.0[i] = value;
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).sum()
    }

    /// `sum_i a_i * w_i`.
    pub fn weighted_degree(&self, weights: &[u64]) -> u64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&a, &w)| a as u64 * w)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Indices with a nonzero entry.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, _)| i)
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.checked_sub(b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    pub fn lcm(&self, other: &Exponent) -> Exponent {
        Exponent(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }

    /// Copy of `self` with arity extended (or truncated) to `arity`,
    /// entries placed starting at `offset`.
    pub fn embed(&self, arity: usize, offset: usize) -> Exponent {
        let mut e = vec![0; arity];
        for (i, &a) in self.0.iter().enumerate() {
            e[offset + i] = a;
        }
        Exponent(e)
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Graded reverse lexicographic order.
impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                // smaller power of the last differing variable wins
                return b.cmp(a);
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Sparse polynomial with rational coefficients in `arity` variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Rational::one())
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        Self::monomial(Exponent::zeros(arity), c)
    }

    /// The variable `x_{i+1}`.
    pub fn var(arity: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(arity, i), Rational::one())
    }

    pub fn monomial(exp: Exponent, c: Rational) -> Self {
        let arity = exp.arity();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Polynomial { arity, terms }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents.
    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Rational)>,
    {
        let mut p = Polynomial::zero(arity);
        for (e, c) in terms {
            if e.arity() != arity {
                return Err(Error::ArityMismatch {
                    left: arity,
                    right: e.arity(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn exponents(&self) -> impl DoubleEndedIterator<Item = &Exponent> {
        self.terms.keys()
    }

    pub fn coefficient(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Exponent, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Exponent::total_degree).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e.get(i)).max().unwrap_or(0)
    }

    /// Adds `c * x^e` in place.
    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_arity(&self, other: &Polynomial) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.arity {
            return Err(Error::IndexOutOfRange {
                index: i,
                arity: self.arity,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = Polynomial::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.arity);
        }
        Polynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    /// Multiplies by the monomial `c * x^e`.
    pub fn mul_term(&self, e: &Exponent, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.arity);
        }
        Polynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(f, a)| (f + e, a * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.arity);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `x_{i+1}`.
    pub fn partial_derivative(&self, i: usize) -> Result<Polynomial> {
        self.check_index(i)?;
        let mut out = Polynomial::zero(self.arity);
        for (e, c) in &self.terms {
            let a = e.get(i);
            if a == 0 {
                continue;
            }
            let mut de = e.clone();
            de.set(i, a - 1);
            out.add_term(de, c * rat(a as i64));
        }
        Ok(out)
    }

    /// All partial derivatives, in variable order.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.arity)
            .map(|i| self.partial_derivative(i).expect("index in range"))
            .collect()
    }

    /// Re-embeds the polynomial into a ring with `arity` variables, moving
    /// variable `k` to `offset + k`.
    pub fn embed(&self, arity: usize, offset: usize) -> Result<Polynomial> {
        if offset + self.arity > arity {
            return Err(Error::ArityMismatch {
                left: arity,
                right: offset + self.arity,
            });
        }
        Ok(Polynomial {
            arity,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.embed(arity, offset), c.clone()))
                .collect(),
        })
    }

    /// Simultaneous substitution `x_k := assignments[k]` into a ring of
    /// `target_arity` variables. Unassigned variables `x_k` map to `x_k` of
    /// the target ring and must therefore satisfy `k < target_arity`.
    pub fn substitute(
        &self,
        assignments: &BTreeMap<usize, Polynomial>,
        target_arity: usize,
    ) -> Result<Polynomial> {
        for (&k, q) in assignments {
            self.check_index(k)?;
            if q.arity != target_arity {
                return Err(Error::ArityMismatch {
                    left: target_arity,
                    right: q.arity,
                });
            }
        }
        let images: Vec<Polynomial> = (0..self.arity)
            .map(|k| match assignments.get(&k) {
                Some(q) => Ok(q.clone()),
                None if k < target_arity => Ok(Polynomial::var(target_arity, k)),
                None => Err(Error::IndexOutOfRange {
                    index: k,
                    arity: target_arity,
                }),
            })
            .collect::<Result<_>>()?;
        Ok(self.compose(&images, target_arity))
    }

    /// Substitution of squares: `x_k^2 := assignments[k]`, i.e. every power
    /// `x_k^(2m)` becomes `assignments[k]^m`. Any odd power of an assigned
    /// variable is rejected.
    pub fn substitute_squares(
        &self,
        assignments: &BTreeMap<usize, Polynomial>,
    ) -> Result<Polynomial> {
        for (&k, q) in assignments {
            self.check_index(k)?;
            self.check_arity(q)?;
        }
        for e in self.terms.keys() {
            for &k in assignments.keys() {
                if e.get(k) % 2 == 1 {
                    return Err(Error::OddExponent {
                        var: k + 1,
                        exponent: e.get(k),
                    });
                }
            }
        }
        let mut out = Polynomial::zero(self.arity);
        let mut cache: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let mut term = Polynomial::one(self.arity);
            for (&k, q) in assignments {
                let m = e.get(k) / 2;
                rest.set(k, 0);
                if m > 0 {
                    let qm = cache.entry((k, m)).or_insert_with(|| q.pow(m));
                    term = &term * &*qm;
                }
            }
            out = &out + &term.mul_term(&rest, c);
        }
        Ok(out)
    }

    /// `f(c_1 x_1, ..., c_N x_N)`.
    pub fn scale_variables(&self, factors: &[Rational]) -> Result<Polynomial> {
        if factors.len() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: factors.len(),
            });
        }
        let mut out = Polynomial::zero(self.arity);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            for (i, &a) in e.as_slice().iter().enumerate() {
                if a > 0 {
                    coeff *= num_traits::pow(factors[i].clone(), a as usize);
                }
            }
            out.add_term(e.clone(), coeff);
        }
        Ok(out)
    }

    /// Sets every listed variable to zero.
    pub fn set_zero(&self, vars: &[usize]) -> Polynomial {
        Polynomial {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().all(|&v| e.get(v) == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// `p(images)` where variable `k` is replaced by `images[k]`.
    fn compose(&self, images: &[Polynomial], target_arity: usize) -> Polynomial {
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|q| vec![Polynomial::one(target_arity), q.clone()])
            .collect();
        let mut out = Polynomial::zero(target_arity);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(target_arity, c.clone());
            for (k, &a) in e.as_slice().iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let a = a as usize;
                while powers[k].len() <= a {
                    let next = &powers[k][powers[k].len() - 1] * &images[k];
                    powers[k].push(next);
                }
                term = &term * &powers[k][a];
            }
            out = &out + &term;
        }
        out
    }

    /// Divided difference along two variable blocks of equal length.
    ///
    /// With `from = (u_1..u_M)` and `to = (w_1..w_M)` this returns
    /// `[p(w_1..w_{i-1}, u_i, ..) - p(w_1..w_i, u_{i+1}, ..)] / (u_i - w_i)`,
    /// where `p(w_1.., u_k..)` means `u_j := w_j` for the listed `j`. The
    /// division is performed and checked for a zero remainder.
    pub fn divided_difference(&self, from: &[usize], to: &[usize], i: usize) -> Result<Polynomial> {
        if from.len() != to.len() {
            return Err(Error::ArityMismatch {
                left: from.len(),
                right: to.len(),
            });
        }
        if i >= from.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                arity: from.len(),
            });
        }
        for &v in from.iter().chain(to) {
            self.check_index(v)?;
        }
        let rename = |upto: usize| -> Polynomial {
            let mut out = Polynomial::zero(self.arity);
            for (e, c) in &self.terms {
                let mut f = e.clone();
                for j in 0..upto {
                    let a = f.get(from[j]);
                    f.set(from[j], 0);
                    f.set(to[j], f.get(to[j]) + a);
                }
                out.add_term(f, c.clone());
            }
            out
        };
        let numerator = &rename(i) - &rename(i + 1);
        let (quotient, remainder) = numerator.divide_by_difference(from[i], to[i]);
        if !remainder.is_zero() {
            return Err(Error::Invariant(format!(
                "divided difference along x{} left remainder {}",
                from[i] + 1,
                remainder
            )));
        }
        Ok(quotient)
    }

    /// Synthetic division by `(x_u - x_v)`, returning quotient and remainder;
    /// the remainder is free of `x_u`.
    fn divide_by_difference(&self, u: usize, v: usize) -> (Polynomial, Polynomial) {
        // coefficients of powers of x_u, highest first
        let mut by_power: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest.set(u, 0);
            by_power
                .entry(e.get(u))
                .or_insert_with(|| Polynomial::zero(self.arity))
                .add_term(rest, c.clone());
        }
        let top = match by_power.keys().next_back() {
            Some(&t) => t,
            None => return (Polynomial::zero(self.arity), Polynomial::zero(self.arity)),
        };
        let shift_v = Exponent::unit(self.arity, v);
        let one = Rational::one();
        let mut quotient = Polynomial::zero(self.arity);
        let mut carry = Polynomial::zero(self.arity);
        for k in (0..=top).rev() {
            let c_k = by_power
                .remove(&k)
                .unwrap_or_else(|| Polynomial::zero(self.arity));
            // q_{k-1} = c_k + x_v * q_k  (carry holds x_v * q_k)
            let q = &c_k + &carry;
            if k == 0 {
                return (quotient, q);
            }
            let xu = Exponent::unit(self.arity, u);
            let mut xu_pow = Exponent::zeros(self.arity);
            for _ in 0..k - 1 {
                xu_pow = &xu_pow + &xu;
            }
            quotient = &quotient + &q.mul_term(&xu_pow, &one);
            carry = q.mul_term(&shift_v, &one);
        }
        unreachable!()
    }

    /// The `i`-th difference derivative, landing in `2N` variables
    /// `(x_1..x_N, y_1..y_N)` with `y_k` stored at index `N + k`.
    pub fn difference_derivative(&self, i: usize) -> Result<Polynomial> {
        self.check_index(i)?;
        let n = self.arity;
        let lifted = self.embed(2 * n, 0)?;
        let from: Vec<usize> = (0..n).collect();
        let to: Vec<usize> = (n..2 * n).collect();
        lifted.divided_difference(&from, &to, i)
    }

    /// True when every term has weighted degree `degree`.
    pub fn is_quasihomogeneous(&self, weights: &[u64], degree: u64) -> bool {
        self.terms
            .keys()
            .all(|e| e.weighted_degree(weights) == degree)
    }

    /// Parses with an explicit arity; variables beyond it are rejected.
    pub fn parse_with_arity(text: &str, arity: usize) -> Result<Polynomial> {
        let p = Parser::new(text).parse()?;
        if p.max_var > arity {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("variable x{} exceeds arity {}", p.max_var, arity),
            });
        }
        Polynomial::from_terms(
            arity,
            p.terms
                .into_iter()
                .map(|(vars, c)| (exponent_from_vars(&vars, arity), c)),
        )
    }
}

fn exponent_from_vars(vars: &BTreeMap<usize, u32>, arity: usize) -> Exponent {
    let mut e = Exponent::zeros(arity);
    for (&v, &a) in vars {
        e.set(v - 1, e.get(v - 1) + a);
    }
    e
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, other: &Polynomial) -> Polynomial {
        self.try_add(other).expect("polynomial arity mismatch in +")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, other: &Polynomial) -> Polynomial {
        self.try_sub(other).expect("polynomial arity mismatch in -")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, other: &Polynomial) -> Polynomial {
        self.try_mul(other).expect("polynomial arity mismatch in *")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Prints in the text grammar, leading term first.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut first = true;
            if e.is_zero() || !mag.is_one() {
                write_rational(f, &mag)?;
                first = false;
            }
            for (i, &a) in e.as_slice().iter().enumerate() {
                if a == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", i + 1)?;
                if a > 1 {
                    write!(f, "^{a}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parses the text grammar; the arity is the largest variable index seen.
impl FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Polynomial> {
        let p = Parser::new(s).parse()?;
        let arity = p.max_var.max(1);
        Polynomial::from_terms(
            arity,
            p.terms
                .into_iter()
                .map(|(vars, c)| (exponent_from_vars(&vars, arity), c)),
        )
    }
}

struct Parsed {
    terms: Vec<(BTreeMap<usize, u32>, Rational)>,
    max_var: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn small_integer(&mut self) -> Result<u32> {
        let n = self.integer()?;
        match u32::try_from(n) {
            Ok(v) => Ok(v),
            Err(_) => self.err("integer too large"),
        }
    }

    fn parse(mut self) -> Result<Parsed> {
        let mut terms = Vec::new();
        let mut max_var = 0;
        let mut sign = Rational::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return self.err("empty polynomial"),
            _ => {}
        }
        loop {
            let (vars, c) = self.term(&mut max_var)?;
            terms.push((vars, sign * c));
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = Rational::one();
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -Rational::one();
                }
                Some(ch) => return self.err(format!("unexpected character '{}'", ch as char)),
            }
        }
        Ok(Parsed { terms, max_var })
    }

    fn term(&mut self, max_var: &mut usize) -> Result<(BTreeMap<usize, u32>, Rational)> {
        let mut coeff = Rational::one();
        let mut vars = BTreeMap::new();
        let mut factors = 0;
        loop {
            match self.peek() {
                Some(ch) if ch.is_ascii_digit() => {
                    let n = self.integer()?;
                    let mut c = Rational::from_integer(n);
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let d = self.integer()?;
                        if d.is_zero() {
                            return self.err("zero denominator");
                        }
                        c /= Rational::from_integer(d);
                    }
                    coeff *= c;
                }
                Some(b'x') => {
                    self.pos += 1;
                    let v = self.small_integer()? as usize;
                    if v == 0 {
                        return self.err("variables are numbered from x1");
                    }
                    let mut a = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        a = self.small_integer()?;
                    }
                    *max_var = (*max_var).max(v);
                    *vars.entry(v).or_insert(0) += a;
                }
                _ => {
                    if factors == 0 {
                        return self.err("expected coefficient or variable");
                    }
                    return Ok((vars, coeff));
                }
            }
            factors += 1;
            if self.peek() == Some(b'*') {
                self.pos += 1;
                match self.peek() {
                    Some(ch) if ch.is_ascii_digit() || ch == b'x' => {}
                    _ => return self.err("dangling '*'"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(s: &str, n: usize) -> Polynomial {
        Polynomial::parse_with_arity(s, n).unwrap()
    }

    #[test]
    fn additive_inverse_is_zero_with_arity() {
        let a = pa("x1^2", 2);
        let z = &a + &(-&a);
        assert!(z.is_zero());
        assert_eq!(z.arity(), 2);
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn disjoint_sum() {
        let s = &pa("x1^2*x2", 2) + &pa("x2^3", 2);
        assert_eq!(s, pa("x1^2*x2 + x2^3", 2));
    }

    #[test]
    fn four_variable_completed_split_sum() {
        let fk = pa("x4^7 + x1^6*x4 + x3^3*x4 + x2^9*x3", 4);
        let fadd = pa("x1^3*x3^2", 4);
        assert_eq!(
            &fk + &fadd,
            pa("x4^7 + x1^6*x4 + x3^3*x4 + x2^9*x3 + x1^3*x3^2", 4)
        );
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(matches!(
            pa("x1", 1).try_add(&pa("x1", 2)),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn power_rule() {
        let f = pa("x4^7 + x1^6*x4 + x3^3*x4 + x2^9*x3", 4);
        assert_eq!(
            f.partial_derivative(3).unwrap(),
            pa("7*x4^6 + x1^6 + x3^3", 4)
        );
        assert!(matches!(
            f.partial_derivative(4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn isolated_square_derivative() {
        let fbar = pa("x1^3 + x2^2*x1 + x4^2*x2", 4);
        assert_eq!(fbar.partial_derivative(3).unwrap(), pa("2*x2*x4", 4));
    }

    #[test]
    fn difference_of_squares() {
        // x1 + y1 and x1 - y1 as x1, x2
        let prod = &pa("x1 + x2", 2) * &pa("x1 - x2", 2);
        assert_eq!(prod, pa("x1^2 - x2^2", 2));
    }

    #[test]
    fn halving_substitution() {
        let mut a = BTreeMap::new();
        a.insert(1, pa("x2", 3));
        let q = pa("x2^4*x3^4", 3).substitute_squares(&a).unwrap();
        assert_eq!(q, pa("x2^2*x3^4", 3));

        let mut b = BTreeMap::new();
        b.insert(0, pa("x3", 3));
        let q = pa("x1^6*x2", 3).substitute_squares(&b).unwrap();
        assert_eq!(q, pa("x3^3*x2", 3));

        assert!(matches!(
            pa("x1^3*x2", 3).substitute_squares(&b),
            Err(Error::OddExponent {
                var: 1,
                exponent: 3
            })
        ));
    }

    #[test]
    fn identity_substitution() {
        let f = pa("x1^3 + 2*x1*x2 - 1/2*x2^5", 2);
        assert_eq!(f.substitute(&BTreeMap::new(), 2).unwrap(), f);
        let mut a = BTreeMap::new();
        a.insert(0, pa("x1", 2));
        a.insert(1, pa("x2", 2));
        assert_eq!(f.substitute(&a, 2).unwrap(), f);
    }

    #[test]
    fn general_substitution() {
        let mut a = BTreeMap::new();
        a.insert(0, pa("x1 + x2", 2));
        let q = pa("x1^2", 2).substitute(&a, 2).unwrap();
        assert_eq!(q, pa("x1^2 + 2*x1*x2 + x2^2", 2));
    }

    #[test]
    fn difference_derivative_examples() {
        // variables of the result: x1..xN then y1..yN
        assert_eq!(
            pa("x1^2", 1).difference_derivative(0).unwrap(),
            pa("x1 + x2", 2)
        );
        let f = pa("x1*x2", 2);
        assert_eq!(f.difference_derivative(0).unwrap(), pa("x2", 4));
        assert_eq!(f.difference_derivative(1).unwrap(), pa("x3", 4));
    }

    #[test]
    fn printing_and_parsing() {
        let f = pa("x4^7 + x1^6*x4 + x3^3*x4 + x2^9*x3 + x1^3*x3^2", 4);
        assert_eq!(
            f.to_string(),
            "x2^9*x3 + x1^6*x4 + x4^7 + x1^3*x3^2 + x3^3*x4"
        );
        assert_eq!(pa("-3/2x1 x2 + 4", 2).to_string(), "-3/2*x1*x2 + 4");
        assert_eq!(pa("2*3*x1*x1", 1), pa("6*x1^2", 1));
        assert!(Polynomial::from_str("x0").is_err());
        assert!(Polynomial::from_str("x1 +").is_err());
        assert!(Polynomial::from_str("x1 * ").is_err());
        assert!(Polynomial::from_str("1/0").is_err());
        assert!(Polynomial::parse_with_arity("x3", 2).is_err());
    }

    #[test]
    fn grevlex_order() {
        let e = |v: Vec<u32>| Exponent::from(v);
        // degree first
        assert!(e(vec![0, 0, 3]) > e(vec![1, 1, 0]));
        // x1 > x2 > x3
        assert!(e(vec![1, 0, 0]) > e(vec![0, 1, 0]));
        // x1 x3 < x2^2 in grevlex
        assert!(e(vec![0, 2, 0]) > e(vec![1, 0, 1]));
    }
}
