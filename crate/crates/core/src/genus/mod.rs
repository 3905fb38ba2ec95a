//! Genus classes: the uniqueness criterion from the discriminant form, and
//! exhaustive classification in rank 2.

mod binary;

use crate::config::Budget;
use crate::discriminant::{discriminant_form, find_isomorphism, FiniteQuadraticForm};
use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, LatticeIsometry};

pub use binary::{anisotropic_automorphisms, canonical_form, isotropic_lines, CanonicalForm};

/// Indefinite and `rank ≥ l(A) + 2`: the genus is a single class and
/// `O(L) → O(A_L)` is onto.
pub fn nikulin_unique(l: &EvenLattice) -> Result<bool> {
    if !l.is_indefinite() {
        return Ok(false);
    }
    let a = discriminant_form(l)?;
    Ok(l.rank() >= a.min_generators() + 2)
}

/// An explicit isometry `L → M` (columns are images in `M` coordinates).
pub fn equivalent_rank2(l: &EvenLattice, m: &EvenLattice) -> Result<Option<LatticeIsometry>> {
    let cl = canonical_form(l)?;
    let cm = canonical_form(m)?;
    if cl.gram != cm.gram {
        return Ok(None);
    }
    let back = cl
        .transform
        .inverse_integral()
        .expect("unimodular transform");
    let iso = LatticeIsometry {
        matrix: cm.transform.mul(&back),
    };
    debug_assert!(iso.maps_onto(l, m));
    Ok(Some(iso))
}

#[derive(Clone, Debug)]
pub struct GenusQuery {
    pub signature: (usize, usize),
    pub target_form: FiniteQuadraticForm,
    /// Largest Gram entry searched.
    pub search_bound: u64,
}

impl GenusQuery {
    pub fn of(l: &EvenLattice, search_bound: u64) -> Result<GenusQuery> {
        Ok(GenusQuery {
            signature: l.signature(),
            target_form: discriminant_form(l)?,
            search_bound,
        })
    }

    /// Every canonical form has Gram entries at most `|det|`.
    pub fn required_bound(&self) -> u64 {
        self.target_form.order()
    }
}

/// Isometry classes in the genus, as canonical representatives in sorted
/// order. Complete: every class has a canonical form within the bound.
pub fn genus_representatives_rank2(
    query: &GenusQuery,
    budget: &Budget,
) -> Result<Vec<EvenLattice>> {
    if query.signature.0 + query.signature.1 != 2 {
        return Err(Error::NotRank2);
    }
    let required = query.required_bound();
    if query.search_bound < required {
        return Err(Error::BoundTooSmall {
            bound: query.search_bound,
            required,
        });
    }
    let mut out = vec![];
    for gram in binary::forms_with_det(query.signature, query.target_form.order()) {
        let l = EvenLattice::new(gram)?;
        let a = discriminant_form(&l)?;
        if find_isomorphism(&a, &query.target_form, budget)?.is_some() {
            out.push(l);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{diagonal, hyperbolic, root_a, RootSign};
    use crate::linalg::ZMatrix;

    #[test]
    fn uniqueness_criterion() {
        let u = hyperbolic(1).unwrap();
        assert!(nikulin_unique(&u).unwrap());
        assert!(!nikulin_unique(&hyperbolic(3).unwrap()).unwrap());
        assert!(nikulin_unique(&hyperbolic(3).unwrap().direct_sum(&u)).unwrap());
        assert!(!nikulin_unique(&root_a(2, RootSign::Negative).unwrap()).unwrap());
    }

    #[test]
    fn rank2_equivalence() {
        let u3 = hyperbolic(3).unwrap();
        let p = ZMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let moved = EvenLattice::new(p.congruence(u3.gram())).unwrap();
        let iso = equivalent_rank2(&moved, &u3).unwrap().unwrap();
        assert!(iso.maps_onto(&moved, &u3));
        assert!(
            equivalent_rank2(&hyperbolic(1).unwrap(), &hyperbolic(2).unwrap())
                .unwrap()
                .is_none()
        );
        let id = equivalent_rank2(&u3, &u3).unwrap().unwrap();
        assert!(id.maps_onto(&u3, &u3));
        assert_eq!(
            equivalent_rank2(&diagonal(&[2]).unwrap(), &u3).unwrap_err(),
            Error::NotRank2
        );
    }

    #[test]
    fn genus_of_hyperbolic_planes() {
        let budget = Budget::default();
        for r in 1..=12 {
            let ur = hyperbolic(r).unwrap();
            let q = GenusQuery::of(&ur, (r * r) as u64).unwrap();
            let reps = genus_representatives_rank2(&q, &budget).unwrap();
            assert_eq!(reps.len(), 1, "r = {r}");
            assert!(equivalent_rank2(&reps[0], &ur).unwrap().is_some());
        }
        let q = GenusQuery::of(&hyperbolic(4).unwrap(), 3).unwrap();
        assert!(matches!(
            genus_representatives_rank2(&q, &budget),
            Err(Error::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn definite_genus() {
        let budget = Budget::default();
        let l = diagonal(&[-2, -2]).unwrap();
        let q = GenusQuery::of(&l, 4).unwrap();
        let reps = genus_representatives_rank2(&q, &budget).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(equivalent_rank2(&reps[0], &l).unwrap().is_some());
    }
}
