//! Polynomials over `Q`, Buchberger's algorithm and the ideal operations
//! used to certify decompositions of Jacobian ideals.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{format_rational, parse_rational};
use crate::exactla::Rational;

pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("variable sets differ: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("cannot parse polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("F and G share variables: {0:?}")]
    NotDisjoint(Vec<String>),
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("ideal is not contained in the probe prime")]
    NotContained,
    #[error("supplied decomposition is invalid: {0}")]
    Decomposition(String),
}

/// A total order on monomials; variable 0 has the highest priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// Block order: grevlex on the first `k` variables, ties broken by
    /// grevlex on the rest. Eliminates the first block.
    Elimination(usize),
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Elimination(k) => {
                grevlex(&a[..k], &b[..k]).then_with(|| grevlex(&a[k..], &b[k..]))
            }
        }
    }
}

/// Polynomial with canonical (order independent) storage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::monomial(nvars, m, Rational::one())
    }

    pub fn monomial(nvars: usize, exps: Monomial, c: Rational) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { nvars, terms }
    }

    /// `Σ coeffs[i] x_i + constant`.
    pub fn linear(coeffs: &[Rational], constant: &Rational) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, constant.clone());
        for (i, c) in coeffs.iter().enumerate() {
            p = &p + &Self::var(n, i).scale(c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Indices of the variables that occur.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i))
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| &acc * self)
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[i] > 0 {
                let mut m2 = m.clone();
                m2[i] -= 1;
                p.add_term(m2, c * Rational::from_integer(m[i].into()));
            }
        }
        p
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(point)
                    .fold(c.clone(), |acc, (&e, x)| acc * num_traits::pow(x.clone(), e as usize))
            })
            .sum()
    }

    /// Exponent of variable `i` dividing every term.
    pub fn min_degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m[i]).min().unwrap_or(0)
    }

    /// Divides every term by `x_i^k`; panics if not divisible.
    pub fn divide_var_power(&self, i: usize, k: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2[i] = m2[i].checked_sub(k).expect("not divisible");
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Moves variable `i` to index `map[i]` in a ring with `nvars` variables.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        Self {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = vec![0; nvars];
                    for (i, &e) in m.iter().enumerate() {
                        m2[map[i]] = e;
                    }
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    pub fn leading_term(&self, ord: MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| ord.cmp(a.0, b.0))
    }

    pub fn to_monic(&self, ord: MonomialOrder) -> Self {
        match self.leading_term(ord) {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let ord = MonomialOrder::GrevLex;
        let dd = SPoly::from_poly(d, ord);
        let (lm, lc) = dd.lead()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = SPoly::from_poly(self, ord);
        let mut quot = Poly::zero(self.nvars);
        while let Some((m, c)) = rem.lead() {
            let m2 = mon_div(m, &lm)?;
            let q = c / &lc;
            quot.add_term(m2.clone(), q.clone());
            rem = rem.sub_mul(&dd, &m2, &q, ord);
        }
        Some(quot)
    }

    pub fn format(&self, vars: &[String]) -> String {
        format_poly(self, vars)
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars);
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars);
        let mut p = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                p.add_term(mon_mul(m1, m2), c1 * c2);
            }
        }
        p
    }
}

fn mon_mul(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn mon_div(a: &[u32], b: &[u32]) -> Option<Monomial> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

fn mon_divides(b: &[u32], a: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

fn mon_lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Terms sorted ascending under an order, leading term last.
#[derive(Debug, Clone)]
struct SPoly(Vec<(Monomial, Rational)>);

impl SPoly {
    fn from_poly(p: &Poly, ord: MonomialOrder) -> Self {
        let mut v: Vec<_> = p.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| ord.cmp(&a.0, &b.0));
        Self(v)
    }

    fn to_poly(&self, nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: self.0.iter().cloned().collect(),
        }
    }

    fn lead(&self) -> Option<(&Monomial, &Rational)> {
        self.0.last().map(|(m, c)| (m, c))
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn monic(mut self) -> Self {
        if let Some((_, c)) = self.0.last() {
            let inv = c.recip();
            for t in &mut self.0 {
                t.1 *= &inv;
            }
        }
        self
    }

    /// `self - q * m * g`.
    fn sub_mul(&self, g: &SPoly, m: &[u32], q: &Rational, ord: MonomialOrder) -> SPoly {
        let mut out = Vec::with_capacity(self.0.len() + g.0.len());
        let mut a = self.0.iter().peekable();
        let mut b = g.0.iter().map(|(gm, gc)| (mon_mul(gm, m), gc * q)).peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => match ord.cmp(&x.0, &y.0) {
                    Ordering::Less => out.push(a.next().unwrap().clone()),
                    Ordering::Greater => {
                        let (m, c) = b.next().unwrap();
                        out.push((m, -c));
                    }
                    Ordering::Equal => {
                        let x = a.next().unwrap();
                        let (_, c) = b.next().unwrap();
                        let v = &x.1 - c;
                        if !v.is_zero() {
                            out.push((x.0.clone(), v));
                        }
                    }
                },
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => {
                    let (m, c) = b.next().unwrap();
                    out.push((m, -c));
                }
                (None, None) => break,
            }
        }
        SPoly(out)
    }
}

/// Full reduction of `f` by monic `basis`.
fn normal_form(f: &SPoly, basis: &[SPoly], ord: MonomialOrder) -> SPoly {
    let mut p = f.clone();
    let mut rem: Vec<(Monomial, Rational)> = Vec::new();
    while let Some((m, c)) = p.lead() {
        let hit = basis.iter().find_map(|g| {
            let (gm, _) = g.lead()?;
            mon_div(m, gm).map(|q| (g, q))
        });
        match hit {
            Some((g, q)) => {
                let c = c.clone();
                p = p.sub_mul(g, &q, &c, ord);
            }
            None => rem.push(p.0.pop().unwrap()),
        }
    }
    rem.reverse();
    SPoly(rem)
}

fn s_poly(f: &SPoly, g: &SPoly, ord: MonomialOrder) -> SPoly {
    let (fm, _) = f.lead().unwrap();
    let (gm, _) = g.lead().unwrap();
    let l = mon_lcm(fm, gm);
    let one = Rational::one();
    let zero = SPoly(Vec::new());
    let a = zero.sub_mul(f, &mon_div(&l, fm).unwrap(), &-one.clone(), ord);
    a.sub_mul(g, &mon_div(&l, gm).unwrap(), &one, ord)
}

/// Reduced Gröbner basis of the ideal generated by `gens`, monic and sorted
/// by leading monomial, largest first.
pub fn buchberger(gens: &[Poly], ord: MonomialOrder) -> Vec<Poly> {
    let Some(nvars) = gens.first().map(Poly::nvars) else {
        return Vec::new();
    };
    let mut basis: Vec<SPoly> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let push = |basis: &mut Vec<SPoly>, pairs: &mut Vec<(usize, usize)>, p: SPoly| {
        let k = basis.len();
        pairs.extend((0..k).map(|i| (i, k)));
        basis.push(p);
    };
    for g in gens {
        let r = normal_form(&SPoly::from_poly(g, ord), &basis, ord);
        if !r.is_zero() {
            push(&mut basis, &mut pairs, r.monic());
        }
    }
    while !pairs.is_empty() {
        if basis.iter().any(|b| b.lead().unwrap().0.iter().all(|&e| e == 0)) {
            return vec![Poly::one(nvars)];
        }
        let lcm_of = |&(i, j): &(usize, usize)| mon_lcm(basis[i].lead().unwrap().0, basis[j].lead().unwrap().0);
        let pos = (0..pairs.len())
            .min_by(|&a, &b| {
                let (la, lb) = (lcm_of(&pairs[a]), lcm_of(&pairs[b]));
                ord.cmp(&la, &lb).then(pairs[a].cmp(&pairs[b]))
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(pos);
        let (mi, mj) = (basis[i].lead().unwrap().0, basis[j].lead().unwrap().0);
        if coprime(mi, mj) {
            continue;
        }
        let l = mon_lcm(mi, mj);
        let pending = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && mon_divides(basis[k].lead().unwrap().0, &l)
                && !pending(i, k)
                && !pending(j, k)
        });
        if chain {
            continue;
        }
        let r = normal_form(&s_poly(&basis[i], &basis[j], ord), &basis, ord);
        if !r.is_zero() {
            push(&mut basis, &mut pairs, r.monic());
        }
    }
    reduce_basis(basis, ord, nvars)
}

fn reduce_basis(basis: Vec<SPoly>, ord: MonomialOrder, nvars: usize) -> Vec<Poly> {
    let mut minimal: Vec<SPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let gm = g.lead().unwrap().0;
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            let hm = h.lead().unwrap().0;
            j != i && mon_divides(hm, gm) && (hm != gm || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<SPoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g.clone())
            .collect();
        // leading term is irreducible by the others, so this only touches tails
        reduced.push(normal_form(&minimal[i], &others, ord).monic());
    }
    reduced.sort_by(|a, b| ord.cmp(b.lead().unwrap().0, a.lead().unwrap().0));
    reduced.iter().map(|p| p.to_poly(nvars)).collect()
}

/// Normal form of `f` against a Gröbner basis for `ord`.
pub fn reduce(f: &Poly, basis: &[Poly], ord: MonomialOrder) -> Poly {
    let sb: Vec<SPoly> = basis.iter().map(|g| SPoly::from_poly(g, ord).monic()).collect();
    normal_form(&SPoly::from_poly(f, ord), &sb, ord).to_poly(f.nvars())
}

pub type Vars = Arc<Vec<String>>;

pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
}

/// Ideal of `Q[vars]` with a lazily computed grevlex Gröbner basis.
#[derive(Debug, Clone)]
pub struct Ideal {
    vars: Vars,
    generators: Vec<Poly>,
    gb: OnceLock<Vec<Poly>>,
}

impl PartialEq for Ideal {
    /// Equality of ideals, not of generating sets.
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.groebner_basis() == other.groebner_basis()
    }
}

impl Ideal {
    pub fn new(vars: Vars, generators: Vec<Poly>) -> Self {
        let n = vars.len();
        assert!(generators.iter().all(|g| g.nvars() == n), "generator in wrong ring");
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        Self {
            vars,
            generators,
            gb: OnceLock::new(),
        }
    }

    pub fn parse<S: AsRef<str>>(vars: Vars, gens: &[S]) -> Result<Self, GroebnerError> {
        let gens = gens
            .iter()
            .map(|g| parse_poly(g.as_ref(), &vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(vars, gens))
    }

    pub fn unit(vars: Vars) -> Self {
        let n = vars.len();
        Self::new(vars, vec![Poly::one(n)])
    }

    fn with_basis(vars: Vars, basis: Vec<Poly>) -> Self {
        let ideal = Self::new(vars, basis.clone());
        let _ = ideal.gb.set(basis);
        ideal
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn groebner_basis(&self) -> &[Poly] {
        self.gb
            .get_or_init(|| buchberger(&self.generators, MonomialOrder::GrevLex))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.groebner_basis(), [g] if g.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, f: &Poly) -> bool {
        reduce(f, self.groebner_basis(), MonomialOrder::GrevLex).is_zero()
    }

    fn check_vars(&self, other: &Ideal) -> Result<(), GroebnerError> {
        if self.vars != other.vars {
            return Err(GroebnerError::VariableMismatch(
                self.vars.to_vec(),
                other.vars.to_vec(),
            ));
        }
        Ok(())
    }

    /// `other ⊆ self`.
    pub fn contains_ideal(&self, other: &Ideal) -> Result<bool, GroebnerError> {
        self.check_vars(other)?;
        Ok(other.generators.iter().all(|g| self.contains(g)))
    }

    /// Mutual containment.
    pub fn equals(&self, other: &Ideal) -> Result<bool, GroebnerError> {
        Ok(self.contains_ideal(other)? && other.contains_ideal(self)?)
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal, GroebnerError> {
        self.check_vars(other)?;
        let gens = self.generators.iter().chain(&other.generators).cloned().collect();
        Ok(Ideal::new(self.vars.clone(), gens))
    }

    pub fn product(&self, other: &Ideal) -> Result<Ideal, GroebnerError> {
        self.check_vars(other)?;
        let gens = self
            .generators
            .iter()
            .flat_map(|a| other.generators.iter().map(move |b| a * b))
            .collect();
        Ok(Ideal::new(self.vars.clone(), gens))
    }

    /// `I ∩ J` by eliminating `t` from `tI + (1-t)J`.
    pub fn intersect(&self, other: &Ideal) -> Result<Ideal, GroebnerError> {
        self.check_vars(other)?;
        if self.is_unit() {
            return Ok(other.clone());
        }
        if other.is_unit() {
            return Ok(self.clone());
        }
        let n = self.nvars();
        if self.is_zero() || other.is_zero() {
            return Ok(Ideal::new(self.vars.clone(), Vec::new()));
        }
        let map: Vec<usize> = (1..=n).collect();
        let t = Poly::var(n + 1, 0);
        let one_minus_t = &Poly::one(n + 1) - &t;
        let gens: Vec<Poly> = self
            .groebner_basis()
            .iter()
            .map(|f| &t * &f.embed(n + 1, &map))
            .chain(
                other
                    .groebner_basis()
                    .iter()
                    .map(|g| &one_minus_t * &g.embed(n + 1, &map)),
            )
            .collect();
        let basis = buchberger(&gens, MonomialOrder::Elimination(1));
        let back: Vec<usize> = (0..=n).map(|i| i.saturating_sub(1)).collect();
        let kept: Vec<Poly> = basis
            .into_iter()
            .filter(|p| p.terms().all(|(m, _)| m[0] == 0))
            .map(|p| project(&p, n, &back))
            .collect();
        Ok(Ideal::with_basis(self.vars.clone(), kept))
    }

    /// `I : (f)`.
    pub fn quotient_by(&self, f: &Poly) -> Result<Ideal, GroebnerError> {
        if f.is_zero() {
            return Err(GroebnerError::ZeroPolynomial);
        }
        let principal = Ideal::new(self.vars.clone(), vec![f.clone()]);
        let meet = self.intersect(&principal)?;
        let gens = meet
            .groebner_basis()
            .iter()
            .map(|g| g.exact_div(f).expect("element of (f) is divisible by f"))
            .collect();
        Ok(Ideal::new(self.vars.clone(), gens))
    }

    /// `I : J`.
    pub fn quotient(&self, other: &Ideal) -> Result<Ideal, GroebnerError> {
        self.check_vars(other)?;
        if other.is_zero() {
            return Err(GroebnerError::ZeroPolynomial);
        }
        let mut acc: Option<Ideal> = None;
        for g in other.groebner_basis() {
            let q = self.quotient_by(g)?;
            acc = Some(match acc {
                None => q,
                Some(a) => a.intersect(&q)?,
            });
        }
        Ok(acc.expect("nonzero ideal has a generator"))
    }

    /// `I : J^∞`.
    pub fn saturate(&self, other: &Ideal) -> Result<Ideal, GroebnerError> {
        let mut cur = self.clone();
        loop {
            let next = cur.quotient(other)?;
            if next.contains_ideal(&cur)? && cur.contains_ideal(&next)? {
                return Ok(cur);
            }
            cur = next;
        }
    }

    /// Same ideal in a ring with more variables; variable `i` goes to `map[i]`.
    pub fn extend(&self, vars: Vars, map: &[usize]) -> Ideal {
        let n = vars.len();
        Ideal::new(vars, self.generators.iter().map(|g| g.embed(n, map)).collect())
    }

    pub fn format_basis(&self) -> Vec<String> {
        self.groebner_basis()
            .iter()
            .map(|g| g.format(&self.vars))
            .collect()
    }

    pub fn format_generators(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.format(&self.vars)).collect()
    }
}

fn project(p: &Poly, nvars: usize, back: &[usize]) -> Poly {
    Poly::from_terms(
        nvars,
        p.terms().map(|(m, c)| {
            let mut m2 = vec![0; nvars];
            for (i, &e) in m.iter().enumerate().skip(1) {
                m2[back[i]] = e;
            }
            (m2, c.clone())
        }),
    )
}

/// Intersection of a list of ideals; the empty list gives the unit ideal.
pub fn intersect_all(vars: &Vars, ideals: &[Ideal]) -> Result<Ideal, GroebnerError> {
    let mut acc = Ideal::unit(vars.clone());
    for i in ideals {
        acc = acc.intersect(i)?;
    }
    Ok(acc)
}

/// `(∂f/∂x_1, ..., ∂f/∂x_n, f)`.
pub fn jacobian_ideal(vars: Vars, f: &Poly) -> Result<Ideal, GroebnerError> {
    if f.is_zero() {
        return Err(GroebnerError::ZeroPolynomial);
    }
    let mut gens: Vec<Poly> = (0..vars.len()).map(|i| f.derivative(i)).collect();
    gens.push(f.clone());
    Ok(Ideal::new(vars, gens))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaberCertificate {
    pub f: String,
    pub g: String,
    /// Gröbner basis of `(J_FG, FG)`.
    pub lhs: Vec<String>,
    /// Gröbner basis of `(F,G) ∩ (J_F,F) ∩ (J_G,G)`.
    pub rhs: Vec<String>,
    pub equal: bool,
}

fn check_disjoint(vars: &Vars, f: &Poly, g: &Poly) -> Result<(), GroebnerError> {
    let shared: Vec<String> = f
        .support()
        .intersection(&g.support())
        .map(|&i| vars[i].clone())
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(GroebnerError::NotDisjoint(shared))
    }
}

/// `(J_FG, FG) = (F,G) ∩ (J_F,F) ∩ (J_G,G)` for `F`, `G` in disjoint variables.
pub fn faber_identity_check(vars: Vars, f: &Poly, g: &Poly) -> Result<FaberCertificate, GroebnerError> {
    check_disjoint(&vars, f, g)?;
    let lhs = jacobian_ideal(vars.clone(), &(f * g))?;
    let fg = Ideal::new(vars.clone(), vec![f.clone(), g.clone()]);
    let rhs = fg
        .intersect(&jacobian_ideal(vars.clone(), f)?)?
        .intersect(&jacobian_ideal(vars.clone(), g)?)?;
    Ok(FaberCertificate {
        f: f.format(&vars),
        g: g.format(&vars),
        lhs: lhs.format_basis(),
        rhs: rhs.format_basis(),
        equal: lhs.equals(&rhs)?,
    })
}

/// A primary ideal with its radical and a label for its support.
#[derive(Debug, Clone)]
pub struct PrimaryComponentSpec {
    pub component: Ideal,
    pub radical: Ideal,
    pub label: String,
}

impl PrimaryComponentSpec {
    /// Component inside its radical, and some power of each radical
    /// generator inside the component.
    pub fn radical_is_valid(&self) -> Result<bool, GroebnerError> {
        if !self.radical.contains_ideal(&self.component)? {
            return Ok(false);
        }
        Ok(self
            .radical
            .generators()
            .iter()
            .all(|r| (1..=32).any(|k| self.component.contains(&r.pow(k)))))
    }

    /// Radical generated by affine-linear forms, hence prime (or unit).
    pub fn radical_is_linear(&self) -> bool {
        self.radical
            .generators()
            .iter()
            .all(|g| g.total_degree().unwrap_or(0) <= 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Pair,
    PushedF,
    PushedG,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub label: String,
    pub kind: ComponentKind,
    pub generators: Vec<String>,
    pub radical: Vec<String>,
    /// Dropping this component strictly enlarges the intersection.
    pub irredundant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionCertificate {
    pub components: Vec<ComponentReport>,
    pub equality: bool,
    pub irredundant: bool,
    pub distinct_radicals: bool,
    pub radicals_prime: bool,
}

impl DecompositionCertificate {
    pub fn passes(&self) -> bool {
        self.equality && self.irredundant && self.distinct_radicals && self.radicals_prime
    }
}

fn product_of(vars: &Vars, factors: &[Poly]) -> Poly {
    factors
        .iter()
        .fold(Poly::one(vars.len()), |acc, f| &acc * f)
}

fn verify_factor_decomposition(
    vars: &Vars,
    f: &Poly,
    comps: &[PrimaryComponentSpec],
    which: &str,
) -> Result<(), GroebnerError> {
    let target = jacobian_ideal(vars.clone(), f)?;
    let comp_ideals: Vec<Ideal> = comps.iter().map(|c| c.component.clone()).collect();
    if !intersect_all(vars, &comp_ideals)?.equals(&target)? {
        return Err(GroebnerError::Decomposition(format!(
            "components of {which} do not intersect to its singular ideal"
        )));
    }
    for c in comps {
        if !c.radical_is_valid()? {
            return Err(GroebnerError::Decomposition(format!(
                "radical of {} is not certified",
                c.label
            )));
        }
    }
    Ok(())
}

/// Certifies that the pair ideals `(f_i, g_j)` and the pushed factor
/// components form a minimal primary decomposition of `(J_FG, FG)`.
pub fn product_decomposition_check(
    vars: Vars,
    f_factors: &[Poly],
    g_factors: &[Poly],
    comps_f: &[PrimaryComponentSpec],
    comps_g: &[PrimaryComponentSpec],
) -> Result<DecompositionCertificate, GroebnerError> {
    let f = product_of(&vars, f_factors);
    let g = product_of(&vars, g_factors);
    check_disjoint(&vars, &f, &g)?;
    verify_factor_decomposition(&vars, &f, comps_f, "F")?;
    verify_factor_decomposition(&vars, &g, comps_g, "G")?;

    let mut specs: Vec<(PrimaryComponentSpec, ComponentKind)> = Vec::new();
    for fi in f_factors {
        for gj in g_factors {
            let pair = Ideal::new(vars.clone(), vec![fi.clone(), gj.clone()]);
            specs.push((
                PrimaryComponentSpec {
                    label: format!("({}, {})", fi.format(&vars), gj.format(&vars)),
                    radical: pair.clone(),
                    component: pair,
                },
                ComponentKind::Pair,
            ));
        }
    }
    specs.extend(comps_f.iter().map(|c| (c.clone(), ComponentKind::PushedF)));
    specs.extend(comps_g.iter().map(|c| (c.clone(), ComponentKind::PushedG)));

    let ideals: Vec<Ideal> = specs.iter().map(|(s, _)| s.component.clone()).collect();
    let k = ideals.len();
    let mut prefix = vec![Ideal::unit(vars.clone())];
    for i in &ideals {
        let next = prefix.last().unwrap().intersect(i)?;
        prefix.push(next);
    }
    let mut suffix = vec![Ideal::unit(vars.clone()); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1].intersect(&ideals[i])?;
    }
    let total = &prefix[k];
    let target = jacobian_ideal(vars.clone(), &(&f * &g))?;
    let equality = total.equals(&target)?;

    let mut components = Vec::with_capacity(k);
    for (i, (spec, kind)) in specs.iter().enumerate() {
        let without = prefix[i].intersect(&suffix[i + 1])?;
        components.push(ComponentReport {
            label: spec.label.clone(),
            kind: *kind,
            generators: spec.component.format_generators(),
            radical: spec.radical.format_generators(),
            irredundant: !total.contains_ideal(&without)?,
        });
    }
    let mut distinct_radicals = true;
    for a in 0..k {
        for b in a + 1..k {
            if specs[a].0.radical.equals(&specs[b].0.radical)? {
                distinct_radicals = false;
            }
        }
    }
    Ok(DecompositionCertificate {
        irredundant: components.iter().all(|c| c.irredundant),
        components,
        equality,
        distinct_radicals,
        radicals_prime: specs.iter().all(|(s, _)| s.radical_is_linear()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProbeOutcome {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    /// Some primary component of `I` lies inside `V(P)`.
    pub inside: bool,
    /// `f` with `I : (f) = P`.
    pub witness: Option<String>,
    pub outcome: ProbeOutcome,
}

/// Is `P` an associated prime of `I`?
pub fn flat_support_probe(i: &Ideal, p: &Ideal) -> Result<ProbeResult, GroebnerError> {
    if !p.contains_ideal(i)? {
        return Err(GroebnerError::NotContained);
    }
    let inside = !i.saturate(p)?.equals(i)?;
    if !inside {
        return Ok(ProbeResult {
            inside,
            witness: None,
            outcome: ProbeOutcome::Refuted,
        });
    }
    let quotient = i.quotient(p)?;
    for f in quotient.groebner_basis() {
        if i.contains(f) {
            continue;
        }
        if i.quotient_by(f)?.equals(p)? {
            return Ok(ProbeResult {
                inside,
                witness: Some(f.format(i.vars())),
                outcome: ProbeOutcome::Confirmed,
            });
        }
    }
    Ok(ProbeResult {
        inside,
        witness: None,
        outcome: ProbeOutcome::Inconclusive,
    })
}

/// Upgrades an inconclusive probe to a refutation when a full
/// decomposition lists no support equal to `P`.
pub fn refute_by_supports(
    result: ProbeResult,
    p: &Ideal,
    supports: &[Ideal],
) -> Result<ProbeResult, GroebnerError> {
    if result.outcome != ProbeOutcome::Inconclusive {
        return Ok(result);
    }
    for s in supports {
        if s.equals(p)? {
            return Ok(result);
        }
    }
    Ok(ProbeResult {
        outcome: ProbeOutcome::Refuted,
        ..result
    })
}

fn format_poly(p: &Poly, vars: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let ord = MonomialOrder::GrevLex;
    let sp = SPoly::from_poly(p, ord);
    let mut out = String::new();
    for (k, (m, c)) in sp.0.iter().rev().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        let factors: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    vars[i].clone()
                } else {
                    format!("{}^{e}", vars[i])
                }
            })
            .collect();
        if factors.is_empty() {
            out.push_str(&format_rational(&a));
        } else {
            if !a.is_one() {
                out.push_str(&format_rational(&a));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("v{i}")).collect();
        f.write_str(&format_poly(self, &names))
    }
}

/// Parses `+ - * ^`, parentheses, integers, `p/q` literals and variables.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<Poly, GroebnerError> {
    let mut p = Parser {
        text,
        toks: tokenize(text)?,
        pos: 0,
        vars,
    };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(poly)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, GroebnerError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            toks.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()/".contains(c) {
            toks.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(GroebnerError::Parse {
                text: text.into(),
                reason: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn err(&self, reason: &str) -> GroebnerError {
        GroebnerError::Parse {
            text: self.text.into(),
            reason: reason.into(),
        }
    }

    fn peek_sym(&self, c: char) -> bool {
        self.toks.get(self.pos) == Some(&Tok::Sym(c))
    }

    fn expr(&mut self) -> Result<Poly, GroebnerError> {
        let mut acc = self.term()?;
        loop {
            if self.peek_sym('+') {
                self.pos += 1;
                acc = &acc + &self.term()?;
            } else if self.peek_sym('-') {
                self.pos += 1;
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, GroebnerError> {
        let mut acc = self.unary()?;
        while self.peek_sym('*') {
            self.pos += 1;
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, GroebnerError> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        let base = self.atom()?;
        if self.peek_sym('^') {
            self.pos += 1;
            match self.toks.get(self.pos) {
                Some(Tok::Num(k)) => {
                    let k: u32 = k.parse().map_err(|_| self.err("exponent too large"))?;
                    self.pos += 1;
                    return Ok(base.pow(k));
                }
                _ => return Err(self.err("expected exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, GroebnerError> {
        let n = self.vars.len();
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(a)) => {
                self.pos += 1;
                let mut lit = a;
                if self.peek_sym('/') {
                    self.pos += 1;
                    match self.toks.get(self.pos) {
                        Some(Tok::Num(b)) => {
                            lit = format!("{lit}/{b}");
                            self.pos += 1;
                        }
                        _ => return Err(self.err("expected denominator")),
                    }
                }
                let c = parse_rational(&lit).map_err(|e| self.err(&e.to_string()))?;
                Ok(Poly::constant(n, c))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| self.err(&format!("unknown variable {name}")))?;
                Ok(Poly::var(n, i))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.peek_sym(')') {
                    return Err(self.err("expected )"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::int;

    fn ring(names: &[&str]) -> Vars {
        vars(names)
    }

    fn p(v: &Vars, s: &str) -> Poly {
        parse_poly(s, v).unwrap()
    }

    fn ideal(v: &Vars, gens: &[&str]) -> Ideal {
        Ideal::parse(v.clone(), gens).unwrap()
    }

    #[test]
    fn parse_and_format_round_trip() {
        let v = ring(&["x", "y"]);
        let f = p(&v, "3/2*x^2*y - (x - 1)*(x + 1) + 2");
        assert_eq!(f.format(&v), "3/2*x^2*y - x^2 + 3");
        assert_eq!(p(&v, &f.format(&v)), f);
        assert!(parse_poly("x + z", &v).is_err());
        assert!(parse_poly("x +", &v).is_err());
        assert!(parse_poly("x $ y", &v).is_err());
    }

    #[test]
    fn orders() {
        let lex = MonomialOrder::Lex;
        let grev = MonomialOrder::GrevLex;
        assert_eq!(lex.cmp(&[1, 0, 0], &[0, 5, 5]), Ordering::Greater);
        assert_eq!(grev.cmp(&[1, 0, 0], &[0, 5, 5]), Ordering::Less);
        // x*z < y^2 in grevlex
        assert_eq!(grev.cmp(&[1, 0, 1], &[0, 2, 0]), Ordering::Less);
        let elim = MonomialOrder::Elimination(1);
        assert_eq!(elim.cmp(&[1, 0, 0], &[0, 9, 9]), Ordering::Greater);
    }

    #[test]
    fn buchberger_examples() {
        let v = ring(&["x", "y"]);
        let gb = buchberger(&[p(&v, "x^2"), p(&v, "x*y")], MonomialOrder::Lex);
        assert_eq!(gb, vec![p(&v, "x^2"), p(&v, "x*y")]);
        let gb = buchberger(&[p(&v, "x"), p(&v, "1 + x")], MonomialOrder::Lex);
        assert_eq!(gb, vec![Poly::one(2)]);
        let v3 = ring(&["x", "y", "z"]);
        let gb = buchberger(&[p(&v3, "x - y"), p(&v3, "y - z")], MonomialOrder::Lex);
        assert_eq!(gb, vec![p(&v3, "x - z"), p(&v3, "y - z")]);
    }

    #[test]
    fn buchberger_matches_hand_elimination() {
        // x^2 + y^2 - 1, x - y: lex gives x - y, y^2 - 1/2
        let v = ring(&["x", "y"]);
        let gb = buchberger(&[p(&v, "x^2 + y^2 - 1"), p(&v, "x - y")], MonomialOrder::Lex);
        assert_eq!(gb, vec![p(&v, "x - y"), p(&v, "y^2 - 1/2")]);
    }

    #[test]
    fn membership_and_equality() {
        let v = ring(&["x", "y"]);
        assert!(ideal(&v, &["x", "y"]).equals(&ideal(&v, &["x + y", "y"])).unwrap());
        assert!(ideal(&v, &["x"]).contains(&p(&v, "x^2")));
        assert!(!ideal(&v, &["x^2"]).contains(&p(&v, "x")));
        let w = ring(&["x", "z"]);
        assert!(matches!(
            ideal(&v, &["x"]).equals(&ideal(&w, &["x"])),
            Err(GroebnerError::VariableMismatch(..))
        ));
    }

    #[test]
    fn intersection_quotient_saturation() {
        let v = ring(&["x", "y"]);
        let meet = ideal(&v, &["x"]).intersect(&ideal(&v, &["y"])).unwrap();
        assert!(meet.equals(&ideal(&v, &["x*y"])).unwrap());
        let q = ideal(&v, &["x^2"]).quotient_by(&p(&v, "x")).unwrap();
        assert!(q.equals(&ideal(&v, &["x"])).unwrap());
        let s = ideal(&v, &["x^2*y"]).saturate(&ideal(&v, &["y"])).unwrap();
        assert!(s.equals(&ideal(&v, &["x^2"])).unwrap());
        let q = ideal(&v, &["x^2", "x*y"]).quotient(&ideal(&v, &["x", "y"])).unwrap();
        assert!(q.equals(&ideal(&v, &["x"])).unwrap());
    }

    #[test]
    fn jacobian_examples() {
        let v = ring(&["x1", "x2"]);
        let j = jacobian_ideal(v.clone(), &p(&v, "x1*x2")).unwrap();
        assert!(j.equals(&ideal(&v, &["x1", "x2"])).unwrap());
        assert!(jacobian_ideal(v.clone(), &p(&v, "x1")).unwrap().is_unit());
        let j = jacobian_ideal(v.clone(), &p(&v, "x1*x2*(x1 + x2)")).unwrap();
        let m = ideal(&v, &["x1", "x2"]);
        // (x1,x2)-primary: saturating by the maximal ideal kills it
        assert!(j.saturate(&m).unwrap().is_unit());
        assert!(m.contains_ideal(&j).unwrap());
        assert!(j.contains(&p(&v, "x1^3")));
    }

    #[test]
    fn faber_small() {
        let v = ring(&["x1", "y1"]);
        let c = faber_identity_check(v.clone(), &p(&v, "x1"), &p(&v, "y1")).unwrap();
        assert!(c.equal);
        assert_eq!(c.lhs, vec!["x1", "y1"]);
        assert!(matches!(
            faber_identity_check(v.clone(), &p(&v, "x1"), &p(&v, "x1*y1")),
            Err(GroebnerError::NotDisjoint(_))
        ));
    }

    #[test]
    fn exact_division() {
        let v = ring(&["x", "y"]);
        let f = p(&v, "x^2 - y^2");
        assert_eq!(f.exact_div(&p(&v, "x - y")), Some(p(&v, "x + y")));
        assert_eq!(f.exact_div(&p(&v, "x")), None);
    }

    #[test]
    fn eval_and_derivative() {
        let v = ring(&["x", "y"]);
        let f = p(&v, "x^2*y + 3");
        assert_eq!(f.derivative(0), p(&v, "2*x*y"));
        assert_eq!(f.eval(&[int(2), int(5)]), int(23));
    }

    #[test]
    fn probe_primary_fixture() {
        let v = ring(&["x1", "x2"]);
        let i = ideal(&v, &["x1^2", "x1*x2", "x2^2"]);
        let pr = ideal(&v, &["x1", "x2"]);
        let r = flat_support_probe(&i, &pr).unwrap();
        assert!(r.inside);
        assert_eq!(r.outcome, ProbeOutcome::Confirmed);
        let not_inside = flat_support_probe(&ideal(&v, &["x1"]), &pr).unwrap();
        assert_eq!(not_inside.outcome, ProbeOutcome::Refuted);
        assert!(matches!(
            flat_support_probe(&ideal(&v, &["x1 + 1"]), &pr),
            Err(GroebnerError::NotContained)
        ));
    }
}
