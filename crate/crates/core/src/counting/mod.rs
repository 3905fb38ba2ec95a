//! Fourier–Mukai partner counts, twisted classes and cusps of a K3 surface,
//! all reduced to orbit and double-coset counts on the discriminant group
//! of its Néron–Severi lattice.
//!
//! The surface enters only through `NS` and the image `H ⊆ O(A_NS)` of its
//! Hodge isometries (by default `{±id}`, the generic case).

mod om;
mod ur;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::Budget;
use crate::discriminant::{
    aut_group, double_coset_count, find_isomorphism, DiscriminantGroup, FiniteQuadraticForm,
    FqfElement, FqfIsometry, FqfSubgroup,
};
use crate::error::{Error, Result};
use crate::genus::{genus_representatives_rank2, nikulin_unique, GenusQuery};
use crate::isotropic::{enumerate_isotropic, hyperbolic_completion, window_note};
use crate::lattice::EvenLattice;

pub use om::{
    binary_isotropic_automorphisms, definite_automorphisms, isotropic_orbits, IsotropicOrbit,
    OMGenerators, OrbitData,
};
pub use ur::{mu1_fiber_ur, tau_phi, ur_example, Mu1Fiber, UrClosedForms, UrReport};

/// `NS(S)` with the Hodge image `H ⊆ O(A_NS)`.
#[derive(Clone, Debug)]
pub struct K3Model {
    ns: EvenLattice,
    disc: DiscriminantGroup,
    hodge_image: FqfSubgroup,
}

impl K3Model {
    /// A generic surface: `H = {±id}`.
    pub fn generic(ns: EvenLattice) -> Result<Self> {
        let (p, _) = ns.signature();
        if p != 1 {
            return Err(Error::InvalidModel(format!(
                "NS must have signature (1, {}), got {:?}",
                ns.rank().saturating_sub(1),
                ns.signature()
            )));
        }
        let disc = DiscriminantGroup::new(&ns)?;
        let hodge_image = FqfSubgroup::plus_minus(disc.form());
        Ok(K3Model {
            ns,
            disc,
            hodge_image,
        })
    }

    /// Replaces `H` by the group generated by `gens`.
    pub fn with_hodge_image(mut self, gens: Vec<FqfIsometry>, budget: &Budget) -> Result<Self> {
        self.hodge_image = FqfSubgroup::generate(self.disc.form(), gens, budget)?;
        Ok(self)
    }

    pub fn ns(&self) -> &EvenLattice {
        &self.ns
    }

    pub fn form(&self) -> &FiniteQuadraticForm {
        self.disc.form()
    }

    pub fn discriminant(&self) -> &DiscriminantGroup {
        &self.disc
    }

    pub fn hodge_image(&self) -> &FqfSubgroup {
        &self.hodge_image
    }
}

/// The common image of `Γ_S` and `Γ_S⁺` in `O(A)`: `H` itself.
pub fn gamma_image(model: &K3Model) -> FqfSubgroup {
    model.hodge_image.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    DoubleCoset,
    OrbitOnA,
    UrClosedForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub value: u64,
    pub route: Route,
    /// When false the value is a lower bound.
    pub exact: bool,
    pub window_note: String,
}

/// Representatives of a genus, with a flag saying whether every class is
/// present.
#[derive(Clone, Debug)]
pub struct GenusList {
    pub members: Vec<EvenLattice>,
    pub complete: bool,
    pub note: String,
}

impl GenusList {
    pub fn supplied(members: Vec<EvenLattice>, complete: bool) -> Self {
        GenusList {
            members,
            complete,
            note: "supplied".into(),
        }
    }

    /// Rank ≤ 1 and the uniqueness criterion give the lattice alone; rank 2
    /// is classified exhaustively. Otherwise only the lattice itself is
    /// listed and the list is flagged incomplete.
    pub fn derive(l: &EvenLattice, budget: &Budget) -> Result<Self> {
        let single = |note: &str, complete| GenusList {
            members: vec![l.clone()],
            complete,
            note: note.into(),
        };
        if l.rank() <= 1 {
            return Ok(single("rank <= 1", true));
        }
        if nikulin_unique(l)? {
            return Ok(single("single class by the uniqueness criterion", true));
        }
        if l.rank() == 2 {
            let mut query = GenusQuery::of(l, 0)?;
            query.search_bound = query.required_bound();
            return Ok(GenusList {
                members: genus_representatives_rank2(&query, budget)?,
                complete: true,
                note: "rank 2, exhaustive reduced forms".into(),
            });
        }
        Ok(single(
            "genus of rank >= 3 not classified; only the lattice itself",
            false,
        ))
    }
}

/// Genus and `O(M)` generators for the partner count of `ns`.
#[derive(Clone, Debug)]
pub struct FmInputs {
    pub genus: GenusList,
    pub gens: Vec<OMGenerators>,
}

impl FmInputs {
    pub fn derive(ns: &EvenLattice, budget: &Budget) -> Result<Self> {
        let genus = GenusList::derive(ns, budget)?;
        let gens = genus
            .members
            .iter()
            .map(|m| OMGenerators::builtin(m, budget))
            .collect::<Result<_>>()?;
        Ok(FmInputs { genus, gens })
    }
}

/// Carries `h ⊆ O(A)` to `O(B)` along some isomorphism `B → A`. Double
/// coset counts do not depend on the choice.
fn transport(
    h: &FqfSubgroup,
    target: &FiniteQuadraticForm,
    budget: &Budget,
) -> Result<FqfSubgroup> {
    let source = h.form();
    if source == target {
        return Ok(h.clone());
    }
    let phi = find_isomorphism(target, source, budget)?.ok_or_else(|| {
        Error::InvalidModel("genus member with a different discriminant form".into())
    })?;
    let back: BTreeMap<FqfElement, FqfElement> = target
        .elements()
        .into_iter()
        .map(|x| (phi.apply(source, &x), x))
        .collect();
    let gens = h
        .generators()
        .iter()
        .map(|g| {
            let images: Vec<FqfElement> = (0..target.min_generators())
                .map(|j| back[&g.apply(source, &phi.image_of_generator(j))].clone())
                .collect();
            FqfIsometry::from_images(target, &images)
        })
        .collect();
    FqfSubgroup::generate(target, gens, budget)
}

fn require_complete(gens: &[&OMGenerators]) -> Result<()> {
    if gens.iter().any(|g| !g.complete) {
        return Err(Error::IncompleteInputs(
            "O(M) generators are not known to be complete; the double-coset count would overcount"
                .into(),
        ));
    }
    Ok(())
}

fn coset_term(model: &K3Model, m: &EvenLattice, right: Right<'_>, budget: &Budget) -> Result<u64> {
    let disc = DiscriminantGroup::new(m)?;
    let ambient = aut_group(disc.form(), budget)?;
    let left = transport(&model.hodge_image, disc.form(), budget)?;
    let right = match right {
        Right::Group(g) => g.image(&disc, budget)?,
        Right::Onto => ambient.clone(),
        Right::Generated(list) => {
            let images = list
                .iter()
                .map(|g| disc.natural_map(g))
                .collect::<Result<Vec<_>>>()?;
            FqfSubgroup::generate(disc.form(), images, budget)?
        }
    };
    double_coset_count(&left, &ambient, &right)
}

enum Right<'a> {
    Group(&'a OMGenerators),
    Onto,
    Generated(&'a [crate::lattice::LatticeIsometry]),
}

/// `#FM(S) = Σ_M |H \ O(A_M) / r_M(O(M))|` over the genus of `NS`.
pub fn count_fm(
    model: &K3Model,
    genus: &GenusList,
    gens: &[OMGenerators],
    budget: &Budget,
) -> Result<CountReport> {
    check_lengths(genus, gens.len())?;
    require_complete(&gens.iter().collect::<Vec<_>>())?;
    let mut value = 0;
    for (m, g) in genus.members.iter().zip(gens) {
        value += coset_term(model, m, Right::Group(g), budget)?;
    }
    Ok(CountReport {
        value,
        route: Route::DoubleCoset,
        exact: genus.complete,
        window_note: genus.note.clone(),
    })
}

fn check_lengths(genus: &GenusList, n: usize) -> Result<()> {
    if genus.members.len() != n {
        return Err(Error::DimensionMismatch {
            expected: genus.members.len(),
            got: n,
        });
    }
    Ok(())
}

/// `#𝓕𝓜^d(S)`: orbits of `H` on `I^d(A)`, the isotropic elements of order
/// `d`. This is the number of 0-dimensional cusps of divisor `d` whenever
/// `U` embeds in `NS`.
pub fn count_cusps_zero_dim(model: &K3Model, d: u64, budget: &Budget) -> Result<CountReport> {
    if d == 0 {
        return Err(Error::BadParams {
            name: "d".into(),
            reason: "must be positive".into(),
        });
    }
    let form = model.form();
    form.check_budget(budget)?;
    let points = form.isotropic_elements(d);
    // only with U in NS is this also the cusp count
    const SEARCH: u64 = 3;
    let meaning = match enumerate_isotropic(&model.ns, SEARCH) {
        Ok(found) if found.iter().any(|v| v.divisor == 1.into()) => {
            "0-dimensional cusps (U embeds in NS)".to_string()
        }
        Ok(_) => format!(
            "coarse twisted classes only: no U in NS found ({})",
            window_note(SEARCH)
        ),
        Err(_) => "coarse twisted classes; whether U embeds in NS was not checked".to_string(),
    };
    Ok(CountReport {
        value: model.hodge_image.orbits(&points).len() as u64,
        route: Route::OrbitOnA,
        exact: true,
        window_note: format!(
            "orbits of the Hodge image on isotropic elements of order {d}; {meaning}"
        ),
    })
}

/// `#FM_ell(S) = Σ_M Σ_[k] |H \ O(A_M) / r_M(O(M)^k)|`.
pub fn count_fm_elliptic(
    model: &K3Model,
    genus: &GenusList,
    orbit_data: &[OrbitData],
    budget: &Budget,
) -> Result<CountReport> {
    check_lengths(genus, orbit_data.len())?;
    if orbit_data.iter().any(|o| !o.stabilizers_complete) {
        return Err(Error::IncompleteInputs(
            "stabilizer generators are not known to be complete; the double-coset count would overcount".into(),
        ));
    }
    let mut value = 0;
    let mut exact = genus.complete;
    let mut notes = vec![genus.note.clone()];
    for (m, data) in genus.members.iter().zip(orbit_data) {
        exact &= data.orbits_complete;
        notes.push(data.note.clone());
        for orbit in &data.orbits {
            let right = if orbit.stabilizer_onto {
                Right::Onto
            } else {
                Right::Generated(&orbit.stabilizer)
            };
            value += coset_term(model, m, right, budget)?;
        }
    }
    notes.dedup();
    Ok(CountReport {
        value,
        route: Route::DoubleCoset,
        exact,
        window_note: notes.join("; "),
    })
}

/// Orbit data for every genus member, with isotropic vectors searched in
/// `|coords| <= bound`.
pub fn derive_orbit_data(genus: &GenusList, bound: u64, budget: &Budget) -> Result<Vec<OrbitData>> {
    genus
        .members
        .iter()
        .map(|m| isotropic_orbits(m, bound, budget))
        .collect()
}

/// The genus of `l^⊥/Zl` for a divisor-one isotropic `l ∈ NS`, with `O(L)`
/// generators.
#[derive(Clone, Debug)]
pub struct SectionInputs {
    pub quotient: EvenLattice,
    pub genus: GenusList,
    pub gens: Vec<OMGenerators>,
}

impl SectionInputs {
    pub fn derive(ns: &EvenLattice, bound: u64, budget: &Budget) -> Result<Self> {
        let found = enumerate_isotropic(ns, bound)?;
        let Some(iv) = found.into_iter().find(|v| v.divisor == 1.into()) else {
            return Err(Error::NoSectionClass);
        };
        let quotient = hyperbolic_completion(ns, &iv)?.complement;
        let inputs = FmInputs::derive(&quotient, budget)?;
        Ok(SectionInputs {
            quotient,
            genus: inputs.genus,
            gens: inputs.gens,
        })
    }
}

/// `#FM_ell,sec(S) = Σ_{L ∈ G(l^⊥/Zl)} |H \ O(A_L) / r_L(O(L))|`, using
/// `A_NS ≅ A_L` from `NS ≅ U ⊕ L`.
pub fn count_fm_elliptic_sec(
    model: &K3Model,
    inputs: &SectionInputs,
    budget: &Budget,
) -> Result<CountReport> {
    let mut report = count_fm(model, &inputs.genus, &inputs.gens, budget)?;
    report.window_note = format!("quotient genus: {}", inputs.genus.note);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspCount {
    pub divisor: u64,
    pub count: u64,
}

/// Both routes when `U ↪ NS`: one partner, one standard cusp, and the cusp
/// count for every divisor `d` of the exponent of `A`.
#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    pub fm: u64,
    pub cusps_d1: u64,
    pub cusps_by_divisor: Vec<CuspCount>,
    pub passes: bool,
}

pub fn route_crosscheck(model: &K3Model, bound: u64, budget: &Budget) -> Result<Crosscheck> {
    let found = enumerate_isotropic(&model.ns, bound)?;
    let Some(iv) = found.into_iter().find(|v| v.divisor == 1.into()) else {
        return Err(Error::HypothesisFails(format!(
            "no divisor-1 isotropic vector ({})",
            window_note(bound)
        )));
    };
    hyperbolic_completion(&model.ns, &iv)?;
    let inputs = FmInputs::derive(&model.ns, budget)?;
    let fm = count_fm(model, &inputs.genus, &inputs.gens, budget)?;
    let cusps_d1 = count_cusps_zero_dim(model, 1, budget)?.value;
    let exponent = model.form().exponent();
    let cusps_by_divisor = (1..=exponent)
        .filter(|d| exponent.is_multiple_of(*d))
        .map(|d| {
            Ok(CuspCount {
                divisor: d,
                count: count_cusps_zero_dim(model, d, budget)?.value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Crosscheck {
        fm: fm.value,
        cusps_d1,
        cusps_by_divisor,
        passes: fm.exact && fm.value == 1 && cusps_d1 == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{diagonal, hyperbolic};

    fn u_plus(k: i64) -> EvenLattice {
        hyperbolic(1)
            .unwrap()
            .direct_sum(&diagonal(&[-2 * k]).unwrap())
    }

    fn fm(ns: &EvenLattice) -> CountReport {
        let budget = Budget::default();
        let model = K3Model::generic(ns.clone()).unwrap();
        let inputs = FmInputs::derive(ns, &budget).unwrap();
        count_fm(&model, &inputs.genus, &inputs.gens, &budget).unwrap()
    }

    #[test]
    fn signature_is_checked() {
        assert!(matches!(
            K3Model::generic(diagonal(&[-2, -2]).unwrap()),
            Err(Error::InvalidModel(_))
        ));
        assert!(K3Model::generic(diagonal(&[2]).unwrap()).is_ok());
    }

    #[test]
    fn partners_of_hyperbolic_planes() {
        assert_eq!(fm(&hyperbolic(3).unwrap()).value, 1);
        assert_eq!(fm(&hyperbolic(12).unwrap()).value, 4);
        for k in 1..=5 {
            let r = fm(&u_plus(k));
            assert_eq!(r.value, 1, "k = {k}");
            assert!(r.exact);
        }
    }

    #[test]
    fn cusps() {
        let budget = Budget::default();
        let m = K3Model::generic(u_plus(1)).unwrap();
        assert_eq!(count_cusps_zero_dim(&m, 2, &budget).unwrap().value, 0);
        assert_eq!(count_cusps_zero_dim(&m, 1, &budget).unwrap().value, 1);
        let m = K3Model::generic(hyperbolic(2).unwrap()).unwrap();
        assert_eq!(count_cusps_zero_dim(&m, 2, &budget).unwrap().value, 2);
        assert_eq!(count_cusps_zero_dim(&m, 4, &budget).unwrap().value, 0);
    }

    #[test]
    fn hodge_image_extremes() {
        let budget = Budget::default();
        let m = K3Model::generic(hyperbolic(3).unwrap()).unwrap();
        let full = aut_group(m.form(), &budget).unwrap();
        let m = m
            .with_hodge_image(full.generators().to_vec(), &budget)
            .unwrap();
        assert_eq!(gamma_image(&m).order(), full.order());
        let genus = GenusList::derive(m.ns(), &budget).unwrap();
        let data = derive_orbit_data(&genus, 3, &budget).unwrap();
        assert_eq!(
            count_fm_elliptic(&m, &genus, &data, &budget).unwrap().value,
            1
        );
        let m = K3Model::generic(hyperbolic(3).unwrap()).unwrap();
        let m = m.with_hodge_image(vec![], &budget).unwrap();
        assert_eq!(gamma_image(&m).order(), 1);
    }

    #[test]
    fn elliptic_counts() {
        let budget = Budget::default();
        for r in [1, 3, 4, 5, 6, 12] {
            let ns = hyperbolic(r).unwrap();
            let model = K3Model::generic(ns.clone()).unwrap();
            let genus = GenusList::derive(&ns, &budget).unwrap();
            let data = derive_orbit_data(&genus, 3, &budget).unwrap();
            let c = count_fm_elliptic(&model, &genus, &data, &budget).unwrap();
            let order = aut_group(model.form(), &budget).unwrap().order() as u64;
            let expected = if r == 1 { 1 } else { order / 2 };
            assert_eq!(c.value, expected, "r = {r}");
            assert!(c.exact);
        }
    }

    #[test]
    fn sections() {
        let budget = Budget::default();
        let u = hyperbolic(1).unwrap();
        let model = K3Model::generic(u.clone()).unwrap();
        let inputs = SectionInputs::derive(&u, 2, &budget).unwrap();
        assert_eq!(
            count_fm_elliptic_sec(&model, &inputs, &budget)
                .unwrap()
                .value,
            1
        );
        assert_eq!(
            SectionInputs::derive(&hyperbolic(2).unwrap(), 4, &budget).unwrap_err(),
            Error::NoSectionClass
        );
        for k in 1..=6 {
            let ns = u_plus(k);
            let model = K3Model::generic(ns.clone()).unwrap();
            let inputs = SectionInputs::derive(&ns, 2, &budget).unwrap();
            let c = count_fm_elliptic_sec(&model, &inputs, &budget).unwrap();
            // ±id is both factors, and central
            let order = aut_group(model.form(), &budget).unwrap().order() as u64;
            let pm = if k == 1 { 1 } else { 2 };
            assert_eq!(c.value, order / pm, "k = {k}");
        }
    }

    #[test]
    fn crosscheck() {
        let budget = Budget::default();
        for k in [1, 2, 3] {
            let c = route_crosscheck(&K3Model::generic(u_plus(k)).unwrap(), 2, &budget).unwrap();
            assert!(c.passes);
        }
        let c = route_crosscheck(&K3Model::generic(u_plus(1)).unwrap(), 2, &budget).unwrap();
        let counts: Vec<(u64, u64)> = c
            .cusps_by_divisor
            .iter()
            .map(|c| (c.divisor, c.count))
            .collect();
        assert_eq!(counts, vec![(1, 1), (2, 0)]);
        assert!(matches!(
            route_crosscheck(
                &K3Model::generic(hyperbolic(2).unwrap()).unwrap(),
                4,
                &budget
            ),
            Err(Error::HypothesisFails(_))
        ));
    }
}
