use cuspcount::counting::{count_cusps_zero_dim, count_fm, FmInputs, K3Model, OMGenerators};
use cuspcount::discriminant::{aut_group, discriminant_form, overlattice, DiscriminantGroup};
use cuspcount::genus::{equivalent_rank2, genus_representatives_rank2, GenusQuery};
use cuspcount::isotropic::{
    classify_i1_orbits, enumerate_isotropic, hyperbolic_completion, projection_isometry,
    quotient_lattice, stabilizer_compose, stabilizer_decompose, transvection, HyperbolicSplit,
    StabilizerParts,
};
use cuspcount::lattice::{diagonal, hyperbolic, root_a};
use cuspcount::linalg::{Int, ZMatrix};
use cuspcount::{
    Budget, Embedding, EvenLattice, FqfIsometry, LatticeIsometry, LatticeVector, RootSign,
};
use proptest::prelude::*;

fn u() -> EvenLattice {
    hyperbolic(1).unwrap()
}

/// Lattices of the form `U ⊕ L₁`.
fn split_lattices() -> Vec<EvenLattice> {
    vec![
        u().direct_sum(&diagonal(&[-2]).unwrap()),
        u().direct_sum(&diagonal(&[-6]).unwrap()),
        u().direct_sum(&diagonal(&[-2, -4]).unwrap()),
        u().direct_sum(&root_a(2, RootSign::Negative).unwrap()),
        u().direct_sum(&u()),
        u().direct_sum(&hyperbolic(3).unwrap()),
        u().direct_sum(&diagonal(&[2, -2, -2]).unwrap()),
    ]
}

struct Setup {
    lattice: EvenLattice,
    split: HyperbolicSplit,
    complement_gens: Vec<LatticeIsometry>,
}

fn setup(i: usize) -> Setup {
    let lattice = split_lattices().swap_remove(i);
    let iv = enumerate_isotropic(&lattice, 1)
        .unwrap()
        .into_iter()
        .find(|v| v.divisor == 1.into())
        .unwrap();
    let split = hyperbolic_completion(&lattice, &iv).unwrap();
    let complement_gens = OMGenerators::builtin(&split.complement, &Budget::default())
        .unwrap()
        .generators;
    Setup {
        lattice,
        split,
        complement_gens,
    }
}

impl Setup {
    fn complement_vector(&self, coords: &[i64]) -> LatticeVector {
        let k = self.split.complement.rank();
        self.split
            .from_complement(&LatticeVector::from_i64(&coords[..k]))
    }

    /// Steps are `(true, _, v)` for `T_v` and `(false, j, _)` for the lift of
    /// the `j`-th generator of `O(L₁)`.
    fn word(&self, steps: &[(bool, usize, Vec<i64>)]) -> LatticeIsometry {
        let n = self.lattice.rank();
        steps
            .iter()
            .fold(LatticeIsometry::identity(n), |g, (t, j, v)| {
                let step = if *t || self.complement_gens.is_empty() {
                    transvection(&self.split, &self.complement_vector(v)).unwrap()
                } else {
                    let h = self.complement_gens[j % self.complement_gens.len()].clone();
                    let v = LatticeVector::zero(n);
                    stabilizer_compose(&self.split, &StabilizerParts { h, v }).unwrap()
                };
                g.compose(&step)
            })
    }
}

fn coords() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 3)
}

fn steps() -> impl Strategy<Value = Vec<(bool, usize, Vec<i64>)>> {
    prop::collection::vec((any::<bool>(), 0usize..8, coords()), 1..5)
}

fn lattice_index() -> impl Strategy<Value = usize> {
    0..split_lattices().len()
}

fn power(form: &cuspcount::FiniteQuadraticForm, g: &FqfIsometry, k: usize) -> FqfIsometry {
    (0..k).fold(FqfIsometry::identity(form), |acc, _| acc.compose(form, g))
}

fn inverse(form: &cuspcount::FiniteQuadraticForm, g: &FqfIsometry) -> FqfIsometry {
    let id = FqfIsometry::identity(form);
    let mut x = g.clone();
    let mut order = 1;
    while x != id {
        x = x.compose(form, g);
        order += 1;
    }
    power(form, g, order - 1)
}

/// Random even Gram matrices of rank 3 with at least one isotropic vector in
/// the small box.
fn isotropic_ternary() -> impl Strategy<Value = EvenLattice> {
    (
        -3i64..=3,
        -3i64..=3,
        -3i64..=3,
        -4i64..=4,
        -4i64..=4,
        -4i64..=4,
    )
        .prop_filter_map("degenerate or anisotropic", |(a, b, c, x, y, z)| {
            let rows = vec![vec![2 * a, x, y], vec![x, 2 * b, z], vec![y, z, 2 * c]];
            let l = EvenLattice::from_rows(&rows).ok()?;
            let found = enumerate_isotropic(&l, 3).ok()?;
            (!found.is_empty()).then_some(l)
        })
}

fn det_u64(l: &EvenLattice) -> u64 {
    l.det().magnitude().to_string().parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transvections_form_a_group_acting_trivially(
        i in lattice_index(),
        v in coords(),
        w in coords(),
    ) {
        let s = setup(i);
        let (v, w) = (s.complement_vector(&v), s.complement_vector(&w));
        let tv = transvection(&s.split, &v).unwrap();
        let tw = transvection(&s.split, &w).unwrap();
        prop_assert!(tv.preserves(&s.lattice));
        prop_assert_eq!(tv.apply(&s.split.l), s.split.l.clone());
        prop_assert_eq!(tv.compose(&tw), transvection(&s.split, &v.add(&w)).unwrap());
        prop_assert_eq!(
            tv.compose(&transvection(&s.split, &v.neg()).unwrap()),
            LatticeIsometry::identity(s.lattice.rank())
        );
        let disc = DiscriminantGroup::new(&s.lattice).unwrap();
        prop_assert_eq!(disc.natural_map(&tv).unwrap(), FqfIsometry::identity(disc.form()));
    }

    #[test]
    fn stabilizer_decomposition_round_trips(i in lattice_index(), word in steps()) {
        let s = setup(i);
        let g = s.word(&word);
        prop_assert_eq!(g.apply(&s.split.l), s.split.l.clone());
        let parts = stabilizer_decompose(&s.split, &g).unwrap();
        prop_assert!(parts.h.preserves(&s.split.complement));
        prop_assert_eq!(stabilizer_compose(&s.split, &parts).unwrap(), g);
    }

    #[test]
    fn projection_between_hyperbolic_embeddings(i in lattice_index(), word in steps()) {
        let s = setup(i);
        let g = s.word(&word);
        let n = s.lattice.rank();
        let phi1 = s.split.embedding();
        let phi2 = Embedding::from_vectors(n, &[g.apply(&s.split.m), s.split.l.clone()]);
        let p = projection_isometry(&s.lattice, &phi1, &phi2).unwrap();
        let src = s.lattice.sublattice(&s.lattice.orthogonal_kernel(&phi1)).unwrap();
        let tgt = s.lattice.sublattice(&s.lattice.orthogonal_kernel(&phi2)).unwrap();
        prop_assert!(p.maps_onto(&src, &tgt));
        // swapping the embeddings gives the inverse
        let q = projection_isometry(&s.lattice, &phi2, &phi1).unwrap();
        prop_assert_eq!(q.compose(&p), LatticeIsometry::identity(src.rank()));
    }

    #[test]
    fn divisor_square_identity(l in isotropic_ternary()) {
        let a_l = det_u64(&l);
        for iv in enumerate_isotropic(&l, 3).unwrap() {
            let q = quotient_lattice(&l, &iv).unwrap();
            let d: u64 = iv.divisor.to_string().parse().unwrap();
            prop_assert_eq!(d * d * det_u64(&q), a_l);
        }
    }

    #[test]
    fn squarefree_determinant_forces_divisor_one(l in isotropic_ternary()) {
        let a_l = det_u64(&l);
        let squarefree = (2..).take_while(|p| p * p <= a_l).all(|p| !a_l.is_multiple_of(p * p));
        prop_assume!(squarefree);
        for iv in enumerate_isotropic(&l, 3).unwrap() {
            prop_assert_eq!(iv.divisor.clone(), Int::from(1));
        }
    }

    #[test]
    fn overlattice_index_law(r in 1i64..=6, k in 1i64..=4) {
        let l = hyperbolic(r).unwrap().direct_sum(&diagonal(&[-2 * k]).unwrap());
        let disc = DiscriminantGroup::new(&l).unwrap();
        let a_l = disc.form().order();
        for h in (1..=a_l).filter(|h| a_l.is_multiple_of(h * h)) {
            for sub in disc.form().isotropic_subgroups(h) {
                let (over, _) = overlattice(&disc, &sub).unwrap();
                prop_assert_eq!(h * h * det_u64(&over), a_l);
            }
        }
    }

    #[test]
    fn counts_are_invariant_under_conjugating_the_hodge_image(
        r in 3i64..=12,
        hi in any::<prop::sample::Index>(),
        ci in any::<prop::sample::Index>(),
    ) {
        let budget = Budget::default();
        let ns = hyperbolic(r).unwrap();
        let form = discriminant_form(&ns).unwrap();
        let all: Vec<FqfIsometry> = aut_group(&form, &budget).unwrap().elements().cloned().collect();
        let h = hi.get(&all).clone();
        let c = ci.get(&all).clone();
        let conj = c.compose(&form, &h).compose(&form, &inverse(&form, &c));
        let base = K3Model::generic(ns.clone()).unwrap();
        let m1 = base.clone().with_hodge_image(vec![h], &budget).unwrap();
        let m2 = base.with_hodge_image(vec![conj], &budget).unwrap();
        let inputs = FmInputs::derive(&ns, &budget).unwrap();
        prop_assert_eq!(
            count_fm(&m1, &inputs.genus, &inputs.gens, &budget).unwrap().value,
            count_fm(&m2, &inputs.genus, &inputs.gens, &budget).unwrap().value
        );
        for d in (1..=r as u64).filter(|d| (r as u64).is_multiple_of(*d)) {
            prop_assert_eq!(
                count_cusps_zero_dim(&m1, d, &budget).unwrap().value,
                count_cusps_zero_dim(&m2, d, &budget).unwrap().value
            );
        }
    }

    #[test]
    fn windowed_counts_grow_with_the_bound(i in lattice_index(), b in 1u64..=2) {
        let l = split_lattices().swap_remove(i);
        let small = enumerate_isotropic(&l, b).unwrap();
        let large = enumerate_isotropic(&l, b + 1).unwrap();
        prop_assert!(small.iter().all(|v| large.contains(v)));
        let budget = Budget::default();
        let c1 = classify_i1_orbits(&l, b, &budget).unwrap();
        let c2 = classify_i1_orbits(&l, b + 1, &budget).unwrap();
        prop_assert!(c1.classes.len() <= c2.classes.len());
        let n1: usize = c1.classes.iter().map(|c| c.members.len()).sum();
        let n2: usize = c2.classes.iter().map(|c| c.members.len()).sum();
        prop_assert!(n1 <= n2);
    }

    #[test]
    fn hyperbolic_genus_rescales_to_u(r in 1i64..=12, a in -3i64..=3, b in -3i64..=3) {
        let budget = Budget::default();
        let ur = hyperbolic(r).unwrap();
        let query = GenusQuery::of(&ur, 0).unwrap();
        let query = GenusQuery { search_bound: query.required_bound(), ..query };
        // a unimodular change of basis of U(r) stays in the genus
        let p = ZMatrix::from_rows(&[vec![1, a], vec![b, 1 + a * b]]);
        let moved = EvenLattice::new(p.congruence(ur.gram())).unwrap();
        let mut members = genus_representatives_rank2(&query, &budget).unwrap();
        members.push(moved);
        for m in members {
            let gram = m.gram().to_i64_rows().unwrap();
            prop_assert!(gram.iter().flatten().all(|x| x % r == 0));
            let scaled = m.rescale_rational(1, r).unwrap();
            prop_assert!(equivalent_rank2(&scaled, &u()).unwrap().is_some());
        }
    }
}
