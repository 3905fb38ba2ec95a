//! Finite quadratic forms `(A, q, b)` and discriminant groups of even
//! lattices.
//!
//! A form is stored on a Smith basis `g_1, …, g_k` with orders
//! `d_1 | d_2 | … | d_k` (all `> 1`). With `N = d_k` the exponent, values are
//! kept as integer numerators: `q(g_i) = Q_i / N  (mod 2)` and
//! `b(g_i, g_j) = B_ij / N  (mod 1)`. Elements are residue tuples.

mod aut;
mod group;
mod lattice_map;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::config::Budget;
use crate::error::{Error, Result};

pub use aut::{find_isomorphism, AutEnumerator, DirectSearch, PrimarySplit};
pub use group::{double_coset_count, FqfIsometry, FqfSubgroup};
pub use lattice_map::{
    discriminant_form, is_isogenus, natural_map, overlattice, DiscriminantGroup, DualBasis,
    DualVector, GenusWitness,
};

/// The full group `O(A, q)` as a subgroup.
pub fn aut_group(form: &FiniteQuadraticForm, budget: &Budget) -> Result<FqfSubgroup> {
    Ok(FqfSubgroup::from_closed(
        form,
        PrimarySplit.enumerate(form, budget)?,
    ))
}

/// A residue tuple; `coords[i]` lives in `Z/d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FqfElement(pub Vec<u64>);

impl FqfElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteQuadraticForm {
    factors: Vec<u64>,
    exponent: u64,
    q: Vec<u64>,
    b: Vec<u64>,
}

fn to_u64(x: &BigInt, what: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::TooLarge(format!("{what} {x}")))
}

/// `x mod m` for a rational `x` whose denominator divides `scale`, returned as
/// the numerator over `scale`.
fn numerator_mod(x: &BigRational, scale: u64, modulus: u64) -> Result<u64> {
    let scaled = x * BigRational::from(BigInt::from(scale));
    if !scaled.is_integer() {
        return Err(Error::NotAnElement);
    }
    let n = scaled.to_integer().mod_floor(&BigInt::from(modulus));
    to_u64(&n, "residue")
}

impl FiniteQuadraticForm {
    /// The trivial form.
    pub fn trivial() -> Self {
        FiniteQuadraticForm {
            factors: vec![],
            exponent: 1,
            q: vec![],
            b: vec![],
        }
    }

    /// Builds a form from generator orders (each `> 1`, dividing the next),
    /// the values `q(g_i) ∈ Q/2Z` and the Gram table `b(g_i, g_j) ∈ Q/Z`.
    pub fn from_values(factors: &[u64], q: &[BigRational], b: &[Vec<BigRational>]) -> Result<Self> {
        let k = factors.len();
        let bad = |reason: &str| Error::BadParams {
            name: "finite quadratic form".into(),
            reason: reason.into(),
        };
        if q.len() != k || b.len() != k || b.iter().any(|row| row.len() != k) {
            return Err(bad("value tables do not match the number of generators"));
        }
        if factors.iter().any(|&d| d < 2) {
            return Err(bad("generator orders must exceed 1"));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(bad("generator orders must divide each other"));
        }
        let exponent = factors.last().copied().unwrap_or(1);
        exponent
            .checked_mul(2 * exponent)
            .ok_or_else(|| Error::TooLarge(format!("exponent {exponent}")))?;
        let mut qn = Vec::with_capacity(k);
        for qi in q {
            qn.push(numerator_mod(qi, exponent, 2 * exponent)?);
        }
        let mut bn = Vec::with_capacity(k * k);
        for (i, row) in b.iter().enumerate() {
            for (j, bij) in row.iter().enumerate() {
                let expected = &b[j][i];
                if numerator_mod(bij, exponent, exponent)?
                    != numerator_mod(expected, exponent, exponent)?
                {
                    return Err(bad("bilinear form is not symmetric"));
                }
                bn.push(numerator_mod(bij, exponent, exponent)?);
            }
        }
        let form = FiniteQuadraticForm {
            factors: factors.to_vec(),
            exponent,
            q: qn,
            b: bn,
        };
        for i in 0..k {
            // b(g_i, g_i) ≡ q(g_i) mod 1
            if form.b[i * k + i] != form.q[i] % exponent {
                return Err(bad("b(x, x) is not q(x) mod 1"));
            }
            // well-defined on Z/d_i
            let d = form.factors[i];
            if !(d as u128 * form.q[i] as u128 * d as u128).is_multiple_of(2 * exponent as u128) {
                return Err(bad("q is not well defined on the cyclic factor"));
            }
            for j in 0..k {
                if !(d as u128 * form.b[i * k + j] as u128).is_multiple_of(exponent as u128) {
                    return Err(bad("b is not well defined on the cyclic factor"));
                }
            }
        }
        Ok(form)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Number of generators, `l(A)`.
    pub fn min_generators(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub(crate) fn check_budget(&self, budget: &Budget) -> Result<()> {
        let order = self
            .factors
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))
            .unwrap_or(u64::MAX);
        if order > budget.max_order {
            return Err(Error::BudgetExceeded {
                what: "discriminant group order".into(),
                size: order,
                budget: budget.max_order,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> FqfElement {
        FqfElement(vec![0; self.factors.len()])
    }

    /// The `i`-th Smith generator.
    pub fn generator(&self, i: usize) -> FqfElement {
        let mut v = self.zero();
        v.0[i] = 1;
        v
    }

    pub fn contains(&self, x: &FqfElement) -> bool {
        x.0.len() == self.factors.len() && x.0.iter().zip(&self.factors).all(|(c, d)| c < d)
    }

    /// Reduces arbitrary integer coefficients of the generators.
    pub fn element_from_coeffs(&self, coeffs: &[i64]) -> FqfElement {
        FqfElement(
            coeffs
                .iter()
                .zip(&self.factors)
                .map(|(&c, &d)| c.rem_euclid(d as i64) as u64)
                .collect(),
        )
    }

    /// All elements in lexicographic order of their residue tuples.
    pub fn elements(&self) -> Vec<FqfElement> {
        let mut out = vec![self.zero()];
        for (i, &d) in self.factors.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for x in &out {
                for c in 0..d {
                    let mut y = x.clone();
                    y.0[i] = c;
                    next.push(y);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    pub fn add(&self, x: &FqfElement, y: &FqfElement) -> FqfElement {
        FqfElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.factors)
                .map(|((a, b), d)| (a + b) % d)
                .collect(),
        )
    }

    pub fn neg(&self, x: &FqfElement) -> FqfElement {
        FqfElement(
            x.0.iter()
                .zip(&self.factors)
                .map(|(a, d)| (d - a) % d)
                .collect(),
        )
    }

    pub fn scale(&self, k: u64, x: &FqfElement) -> FqfElement {
        FqfElement(
            x.0.iter()
                .zip(&self.factors)
                .map(|(&a, &d)| ((a as u128 * k as u128) % d as u128) as u64)
                .collect(),
        )
    }

    /// Order of an element: lcm over coordinates of `d_i / gcd(c_i, d_i)`.
    pub fn element_order(&self, x: &FqfElement) -> u64 {
        x.0.iter()
            .zip(&self.factors)
            .fold(1u64, |acc, (&c, &d)| acc.lcm(&(d / c.gcd(&d))))
    }

    /// Numerator of `q(x)` over `N`, in `[0, 2N)`.
    pub fn q_numerator(&self, x: &FqfElement) -> u64 {
        let k = self.factors.len();
        let m = 2 * self.exponent as u128;
        let mut acc: u128 = 0;
        for i in 0..k {
            let ci = x.0[i] as u128;
            if ci == 0 {
                continue;
            }
            acc = (acc + ci * ci % m * self.q[i] as u128) % m;
            for j in i + 1..k {
                let cj = x.0[j] as u128;
                if cj != 0 {
                    acc = (acc + 2 * (ci * cj % m) * self.b[i * k + j] as u128) % m;
                }
            }
        }
        acc as u64
    }

    /// Numerator of `b(x, y)` over `N`, in `[0, N)`.
    pub fn b_numerator(&self, x: &FqfElement, y: &FqfElement) -> u64 {
        let k = self.factors.len();
        let m = self.exponent as u128;
        let mut acc: u128 = 0;
        for i in 0..k {
            let ci = x.0[i] as u128;
            if ci == 0 {
                continue;
            }
            for j in 0..k {
                let cj = y.0[j] as u128;
                if cj != 0 {
                    acc = (acc + (ci * cj % m) * self.b[i * k + j] as u128) % m;
                }
            }
        }
        acc as u64
    }

    /// `q(x)` as a rational in `[0, 2)`.
    pub fn q(&self, x: &FqfElement) -> BigRational {
        BigRational::new(self.q_numerator(x).into(), self.exponent.into())
    }

    /// `b(x, y)` as a rational in `[0, 1)`.
    pub fn b(&self, x: &FqfElement, y: &FqfElement) -> BigRational {
        BigRational::new(self.b_numerator(x, y).into(), self.exponent.into())
    }

    pub fn q_values(&self) -> Vec<BigRational> {
        (0..self.factors.len())
            .map(|i| self.q(&self.generator(i)))
            .collect()
    }

    pub fn b_values(&self) -> Vec<Vec<BigRational>> {
        let k = self.factors.len();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| self.b(&self.generator(i), &self.generator(j)))
                    .collect()
            })
            .collect()
    }

    pub fn is_isotropic(&self, x: &FqfElement) -> bool {
        self.q_numerator(x) == 0
    }

    /// `I^d(A)`: elements of exact order `d` with `q = 0` in `Q/2Z`.
    pub fn isotropic_elements(&self, d: u64) -> Vec<FqfElement> {
        if d == 0 || !self.exponent.is_multiple_of(d) {
            return vec![];
        }
        self.elements()
            .into_iter()
            .filter(|x| self.element_order(x) == d && self.is_isotropic(x))
            .collect()
    }

    /// The form with `q` negated.
    pub fn negated(&self) -> FiniteQuadraticForm {
        let m2 = 2 * self.exponent;
        let m = self.exponent;
        FiniteQuadraticForm {
            factors: self.factors.clone(),
            exponent: self.exponent,
            q: self.q.iter().map(|&x| (m2 - x) % m2).collect(),
            b: self.b.iter().map(|&x| (m - x) % m).collect(),
        }
    }

    /// Every nonzero element pairs nontrivially with some generator.
    pub fn is_nondegenerate(&self) -> bool {
        let gens: Vec<_> = (0..self.factors.len()).map(|i| self.generator(i)).collect();
        self.elements()
            .iter()
            .filter(|x| x.0.iter().any(|&c| c != 0))
            .all(|x| gens.iter().any(|g| self.b_numerator(x, g) != 0))
    }

    /// Subgroup generated by the given elements, as a sorted element list.
    pub fn span(&self, gens: &[FqfElement]) -> Vec<FqfElement> {
        let mut set: BTreeSet<FqfElement> = BTreeSet::new();
        set.insert(self.zero());
        for g in gens {
            let current: Vec<FqfElement> = set.iter().cloned().collect();
            let ord = self.element_order(g);
            for h in current {
                let mut y = h.clone();
                for _ in 1..ord {
                    y = self.add(&y, g);
                    set.insert(y.clone());
                }
            }
        }
        set.into_iter().collect()
    }

    /// All subgroups of the given order on which `q` vanishes, each as a
    /// sorted element list; the list itself is sorted.
    pub fn isotropic_subgroups(&self, order: u64) -> Vec<Vec<FqfElement>> {
        if order == 0 || !self.order().is_multiple_of(order) {
            return vec![];
        }
        let candidates: Vec<FqfElement> = self
            .elements()
            .into_iter()
            .filter(|x| x.0.iter().any(|&c| c != 0) && self.is_isotropic(x))
            .collect();
        let mut seen: BTreeSet<Vec<FqfElement>> = BTreeSet::new();
        let mut frontier = vec![vec![self.zero()]];
        seen.insert(frontier[0].clone());
        while let Some(h) = frontier.pop() {
            if h.len() as u64 == order {
                continue;
            }
            for x in &candidates {
                if h.binary_search(x).is_ok() || h.iter().any(|y| self.b_numerator(x, y) != 0) {
                    continue;
                }
                let mut gens = h.clone();
                gens.push(x.clone());
                let bigger = self.span(&gens);
                if order.is_multiple_of(bigger.len() as u64) && seen.insert(bigger.clone()) {
                    frontier.push(bigger);
                }
            }
        }
        seen.into_iter()
            .filter(|h| h.len() as u64 == order)
            .collect()
    }

    /// Orthogonal complement of a subgroup.
    pub fn orthogonal(&self, h: &[FqfElement]) -> Vec<FqfElement> {
        self.elements()
            .into_iter()
            .filter(|x| h.iter().all(|y| self.b_numerator(x, y) == 0))
            .collect()
    }

    /// Smith generators of a prime-power component, each given as
    /// `(generator index, multiplier)` with `multiplier · g_index` spanning
    /// the cyclic `p`-part of `⟨g_index⟩`.
    pub(crate) fn primary_parts(&self) -> Vec<PrimaryPart> {
        let mut primes: Vec<u64> = vec![];
        let mut n = self.exponent;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                primes.push(p);
                while n.is_multiple_of(p) {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        primes
            .into_iter()
            .map(|p| {
                let mut gens = vec![];
                let mut orders = vec![];
                for (i, &d) in self.factors.iter().enumerate() {
                    let mut pe = 1;
                    while d % (pe * p) == 0 {
                        pe *= p;
                    }
                    if pe > 1 {
                        gens.push((i, d / pe));
                        orders.push(pe);
                    }
                }
                let elems: Vec<FqfElement> = gens
                    .iter()
                    .map(|&(i, c)| self.scale(c, &self.generator(i)))
                    .collect();
                let q: Vec<BigRational> = elems.iter().map(|x| self.q(x)).collect();
                let b: Vec<Vec<BigRational>> = elems
                    .iter()
                    .map(|x| elems.iter().map(|y| self.b(x, y)).collect())
                    .collect();
                let form = FiniteQuadraticForm::from_values(&orders, &q, &b)
                    .expect("prime-power component of a valid form");
                PrimaryPart {
                    prime: p,
                    gens,
                    form,
                }
            })
            .collect()
    }
}

pub(crate) struct PrimaryPart {
    pub prime: u64,
    pub gens: Vec<(usize, u64)>,
    pub form: FiniteQuadraticForm,
}

/// `q` table for reports: one row per generator.
#[derive(Clone, Debug, Serialize)]
pub struct FormTable {
    pub invariant_factors: Vec<u64>,
    pub order: u64,
    pub q: Vec<String>,
    pub b: Vec<Vec<String>>,
}

impl From<&FiniteQuadraticForm> for FormTable {
    fn from(f: &FiniteQuadraticForm) -> Self {
        let show = |r: &BigRational| {
            if r.is_zero() {
                "0".to_string()
            } else {
                r.to_string()
            }
        };
        FormTable {
            invariant_factors: f.factors.clone(),
            order: f.order(),
            q: f.q_values().iter().map(show).collect(),
            b: f.b_values()
                .iter()
                .map(|row| row.iter().map(show).collect())
                .collect(),
        }
    }
}
