use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{FiniteQuadraticForm, FqfElement};
use crate::config::Budget;
use crate::error::{Error, Result};

/// An automorphism of a finite quadratic form, as a matrix on Smith
/// generator coordinates: column `j` is the image of `g_j`, row `i` is
/// reduced modulo `d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FqfIsometry {
    dim: usize,
    entries: Vec<u64>,
}

impl FqfIsometry {
    pub fn identity(form: &FiniteQuadraticForm) -> Self {
        let k = form.min_generators();
        let mut entries = vec![0; k * k];
        for i in 0..k {
            entries[i * k + i] = 1;
        }
        FqfIsometry { dim: k, entries }
    }

    pub fn minus_identity(form: &FiniteQuadraticForm) -> Self {
        Self::from_images(
            form,
            &(0..form.min_generators())
                .map(|i| form.neg(&form.generator(i)))
                .collect::<Vec<_>>(),
        )
    }

    /// The map sending `g_j` to `images[j]`.
    pub fn from_images(form: &FiniteQuadraticForm, images: &[FqfElement]) -> Self {
        let k = form.min_generators();
        assert_eq!(images.len(), k);
        let mut entries = vec![0; k * k];
        for (j, img) in images.iter().enumerate() {
            for i in 0..k {
                entries[i * k + j] = img.0[i];
            }
        }
        FqfIsometry { dim: k, entries }
    }

    /// Builds a map from integer matrix entries, reducing row `i` mod `d_i`.
    pub fn from_matrix(form: &FiniteQuadraticForm, rows: &[Vec<i64>]) -> Self {
        let k = form.min_generators();
        assert_eq!(rows.len(), k);
        let mut entries = vec![0; k * k];
        for (i, row) in rows.iter().enumerate() {
            let d = form.invariant_factors()[i] as i64;
            for (j, &x) in row.iter().enumerate() {
                entries[i * k + j] = x.rem_euclid(d) as u64;
            }
        }
        FqfIsometry { dim: k, entries }
    }

    pub fn matrix(&self) -> Vec<Vec<u64>> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn image_of_generator(&self, j: usize) -> FqfElement {
        FqfElement(
            (0..self.dim)
                .map(|i| self.entries[i * self.dim + j])
                .collect(),
        )
    }

    pub fn apply(&self, form: &FiniteQuadraticForm, x: &FqfElement) -> FqfElement {
        let k = self.dim;
        FqfElement(
            (0..k)
                .map(|i| {
                    let d = form.invariant_factors()[i] as u128;
                    let s = (0..k).fold(0u128, |acc, j| {
                        (acc + self.entries[i * k + j] as u128 * x.0[j] as u128) % d
                    });
                    s as u64
                })
                .collect(),
        )
    }

    /// `self ∘ other`
    pub fn compose(&self, form: &FiniteQuadraticForm, other: &FqfIsometry) -> FqfIsometry {
        let images: Vec<FqfElement> = (0..self.dim)
            .map(|j| self.apply(form, &other.image_of_generator(j)))
            .collect();
        Self::from_images(form, &images)
    }

    /// Well defined, preserves `q` and `b`, and is bijective.
    pub fn is_automorphism(&self, form: &FiniteQuadraticForm) -> bool {
        let k = form.min_generators();
        if self.dim != k {
            return false;
        }
        let images: Vec<FqfElement> = (0..k).map(|j| self.image_of_generator(j)).collect();
        for (j, img) in images.iter().enumerate() {
            let d = form.invariant_factors()[j];
            if !form.contains(img) || form.scale(d, img) != form.zero() {
                return false;
            }
            if form.q_numerator(img) != form.q_numerator(&form.generator(j)) {
                return false;
            }
            for (i, other) in images.iter().enumerate().take(j) {
                if form.b_numerator(img, other)
                    != form.b_numerator(&form.generator(j), &form.generator(i))
                {
                    return false;
                }
            }
        }
        form.span(&images).len() as u64 == form.order()
    }
}

/// A subgroup of `O(A, q)` given by generators, with its closure cached in
/// canonical (sorted) order.
#[derive(Clone, Debug)]
pub struct FqfSubgroup {
    form: FiniteQuadraticForm,
    generators: Vec<FqfIsometry>,
    elements: BTreeSet<FqfIsometry>,
}

impl FqfSubgroup {
    pub fn generate(
        form: &FiniteQuadraticForm,
        generators: Vec<FqfIsometry>,
        budget: &Budget,
    ) -> Result<Self> {
        if generators.iter().any(|g| !g.is_automorphism(form)) {
            return Err(Error::NotIsometry);
        }
        let id = FqfIsometry::identity(form);
        let mut elements = BTreeSet::new();
        elements.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = g.compose(form, &x);
                if elements.insert(y.clone()) {
                    if elements.len() as u64 > budget.max_group {
                        return Err(Error::BudgetExceeded {
                            what: "subgroup closure".into(),
                            size: elements.len() as u64,
                            budget: budget.max_group,
                        });
                    }
                    queue.push_back(y);
                }
            }
        }
        Ok(FqfSubgroup {
            form: form.clone(),
            generators,
            elements,
        })
    }

    /// Wraps an already closed element list (e.g. a full enumeration).
    pub(crate) fn from_closed(form: &FiniteQuadraticForm, elements: Vec<FqfIsometry>) -> Self {
        let elements: BTreeSet<FqfIsometry> = elements.into_iter().collect();
        FqfSubgroup {
            form: form.clone(),
            generators: elements.iter().cloned().collect(),
            elements,
        }
    }

    pub fn trivial(form: &FiniteQuadraticForm) -> Self {
        Self::from_closed(form, vec![FqfIsometry::identity(form)])
    }

    /// `{±id}`.
    pub fn plus_minus(form: &FiniteQuadraticForm) -> Self {
        Self::from_closed(
            form,
            vec![
                FqfIsometry::identity(form),
                FqfIsometry::minus_identity(form),
            ],
        )
    }

    pub fn form(&self) -> &FiniteQuadraticForm {
        &self.form
    }

    pub fn generators(&self) -> &[FqfIsometry] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = &FqfIsometry> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &FqfIsometry) -> bool {
        self.elements.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &FqfSubgroup) -> bool {
        self.form == other.form && self.elements.iter().all(|g| other.contains(g))
    }

    /// Closure under composition (and hence inverses).
    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|a| {
            self.elements
                .iter()
                .all(|b| self.contains(&a.compose(&self.form, b)))
        })
    }

    /// `c · H · c⁻¹` for an automorphism `c`.
    pub fn conjugate(&self, c: &FqfIsometry) -> FqfSubgroup {
        let f = &self.form;
        let mut c_inv = c.clone();
        // finite order: c^(k-1) = c⁻¹
        let id = FqfIsometry::identity(f);
        let mut p = c.clone();
        while p != id {
            c_inv = p.clone();
            p = p.compose(f, c);
        }
        let elements = self
            .elements
            .iter()
            .map(|h| c.compose(f, &h.compose(f, &c_inv)))
            .collect();
        FqfSubgroup {
            form: f.clone(),
            generators: self
                .generators
                .iter()
                .map(|h| c.compose(f, &h.compose(f, &c_inv)))
                .collect(),
            elements,
        }
    }

    /// Orbits of the subgroup on a set of elements, each sorted; orbits are
    /// listed by their smallest member.
    pub fn orbits(&self, points: &[FqfElement]) -> Vec<Vec<FqfElement>> {
        let mut seen: BTreeSet<FqfElement> = BTreeSet::new();
        let mut sorted: Vec<&FqfElement> = points.iter().collect();
        sorted.sort();
        let mut out = vec![];
        for x in sorted {
            if seen.contains(x) {
                continue;
            }
            let orbit: BTreeSet<FqfElement> = self
                .elements
                .iter()
                .map(|g| g.apply(&self.form, x))
                .collect();
            seen.extend(orbit.iter().cloned());
            out.push(orbit.into_iter().collect());
        }
        out
    }

    /// Image of a subset (e.g. a subgroup) under each element; returns the
    /// orbit of the subset as sorted element lists.
    pub fn orbit_of_subset(&self, subset: &[FqfElement]) -> BTreeSet<Vec<FqfElement>> {
        self.elements
            .iter()
            .map(|g| {
                let mut img: Vec<FqfElement> =
                    subset.iter().map(|x| g.apply(&self.form, x)).collect();
                img.sort();
                img
            })
            .collect()
    }
}

/// `|left \ ambient / right|` by exhaustive sweeping of the ambient group.
pub fn double_coset_count(
    left: &FqfSubgroup,
    ambient: &FqfSubgroup,
    right: &FqfSubgroup,
) -> Result<u64> {
    if !left.is_subgroup_of(ambient) || !right.is_subgroup_of(ambient) {
        return Err(Error::SubgroupNotContained);
    }
    let f = &ambient.form;
    let mut seen: BTreeSet<&FqfIsometry> = BTreeSet::new();
    let mut count = 0;
    for x in ambient.elements() {
        if seen.contains(x) {
            continue;
        }
        count += 1;
        for h in left.elements() {
            let hx = h.compose(f, x);
            for k in right.elements() {
                let y = hx.compose(f, k);
                let y = ambient.elements.get(&y).expect("closed ambient group");
                seen.insert(y);
            }
        }
    }
    Ok(count)
}
