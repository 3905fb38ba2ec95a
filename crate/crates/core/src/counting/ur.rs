//! The family `NS = U(r)`, `r > 2`, checked by brute force against the
//! closed forms in `τ(r)` (number of prime factors) and `φ(r)`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;

use super::{
    binary_isotropic_automorphisms, count_fm, count_fm_elliptic, derive_orbit_data, gamma_image,
    CountReport, FmInputs, GenusList, K3Model, Route,
};
use crate::config::Budget;
use crate::discriminant::{DiscriminantGroup, DualVector, FqfIsometry};
use crate::error::{Error, Result};
use crate::genus::{equivalent_rank2, genus_representatives_rank2, GenusQuery};
use crate::lattice::{hyperbolic, LatticeIsometry, LatticeVector};
use crate::linalg::{ext_gcd, ints, Int, ZMatrix};

/// `(τ(r), φ(r))`.
pub fn tau_phi(r: u64) -> (u32, u64) {
    let (mut n, mut tau, mut phi, mut p) = (r, 0, r, 2);
    while p * p <= n {
        if n % p == 0 {
            tau += 1;
            phi = phi / p * (p - 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        tau += 1;
        phi = phi / n * (n - 1);
    }
    (tau, phi)
}

fn check_r(r: u64) -> Result<()> {
    if r <= 2 {
        return Err(Error::BadParams {
            name: "U(r)".into(),
            reason: format!("r must exceed 2, got {r}"),
        });
    }
    if r > 1 << 20 {
        return Err(Error::TooLarge(r.to_string()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UrClosedForms {
    pub fm: u64,
    pub fm_elliptic: u64,
    pub mu1_fiber: u64,
    pub standard_cusps: u64,
}

impl UrClosedForms {
    pub fn of(r: u64) -> Self {
        let (tau, phi) = tau_phi(r);
        let p = 1u64 << tau;
        UrClosedForms {
            fm: p * phi / 4,
            fm_elliptic: p * phi / 2,
            mu1_fiber: phi / 2,
            standard_cusps: p,
        }
    }
}

/// The fiber of `μ₁` over a standard isotropic plane of `U(r) ⊕ U`.
#[derive(Clone, Debug, Serialize)]
pub struct Mu1Fiber {
    /// Classes of `r(φ_(α,β,γ,δ))` modulo `±id`.
    pub value: u64,
    /// `(Z/r)^× / ±1`, enumerated.
    pub units_mod_sign: u64,
    /// Number of `(α, β)` tried.
    pub maps_checked: u64,
    /// Every map was an isometry acting on `A` as `diag(β, δ)`.
    pub maps_verified: bool,
}

impl Mu1Fiber {
    pub fn report(&self) -> CountReport {
        CountReport {
            value: self.value,
            route: Route::OrbitOnA,
            exact: self.maps_verified && self.value == self.units_mod_sign,
            window_note: format!(
                "{} maps with 1 <= alpha <= r, |beta| <= r",
                self.maps_checked
            ),
        }
    }
}

/// On `U(r) ⊕ U` with basis `l₁, m₁, e₁, f₁` (`(l₁, m₁) = r`, `(e₁, f₁) = 1`)
/// and `βδ + rαγ = 1`, the map `l₁ ↦ δl₁ − rγf₁`, `m₁ ↦ βm₁ − rαe₁`,
/// `e₁ ↦ γm₁ + δe₁`, `f₁ ↦ αl₁ + βf₁` fixes the plane `⟨l₁, f₁⟩`. The fiber
/// is the set of these maps modulo `Γ_S`, i.e. their images on `A` modulo
/// `±id`.
pub fn mu1_fiber_ur(r: u64) -> Result<Mu1Fiber> {
    check_r(r)?;
    let ri = r as i64;
    let lattice = hyperbolic(ri)?.direct_sum(&hyperbolic(1)?);
    let disc = DiscriminantGroup::new(&lattice)?;
    let form = disc.form();
    let dual = |i: usize| {
        let mut numerators = ints(&[0, 0, 0, 0]);
        numerators[i] = Int::from(1);
        DualVector {
            numerators,
            denominator: Int::from(r),
        }
    };
    let l_r = disc.element_of(&dual(0))?;
    let m_r = disc.element_of(&dual(1))?;

    let mut classes: BTreeSet<FqfIsometry> = BTreeSet::new();
    let mut checked = 0;
    let mut verified = true;
    for alpha in 1..=ri {
        for beta in -ri..=ri {
            if beta.gcd(&(ri * alpha)) != 1 {
                continue;
            }
            let (g, delta, gamma) = ext_gcd(&Int::from(beta), &Int::from(ri * alpha));
            debug_assert_eq!(g, Int::from(1));
            let rg = &gamma * ri;
            let cols = vec![
                vec![delta.clone(), Int::from(0), Int::from(0), -rg],
                ints(&[0, beta, -ri * alpha, 0]),
                vec![Int::from(0), gamma.clone(), delta.clone(), Int::from(0)],
                ints(&[alpha, 0, 0, beta]),
            ];
            let phi = LatticeIsometry {
                matrix: ZMatrix::from_cols(4, &cols),
            };
            checked += 1;
            if !phi.preserves(&lattice) {
                verified = false;
                continue;
            }
            let image = disc.natural_map(&phi)?;
            let delta_mod = delta.mod_floor(&Int::from(r));
            let delta_mod: u64 = delta_mod.try_into().expect("residue below r");
            verified &= image.apply(form, &m_r) == form.scale(beta.rem_euclid(ri) as u64, &m_r)
                && image.apply(form, &l_r) == form.scale(delta_mod, &l_r);
            let neg = FqfIsometry::minus_identity(form).compose(form, &image);
            classes.insert(image.min(neg));
        }
    }
    let units = (1..r)
        .filter(|a| a.gcd(&r) == 1)
        .map(|a| a.min(r - a))
        .collect::<BTreeSet<_>>();
    Ok(Mu1Fiber {
        value: classes.len() as u64,
        units_mod_sign: units.len() as u64,
        maps_checked: checked,
        maps_verified: verified,
    })
}

/// Every item of the `U(r)` example, each computed by enumeration and set
/// beside its closed form.
#[derive(Clone, Debug, Serialize)]
pub struct UrReport {
    pub r: u64,
    pub tau: u32,
    pub phi: u64,
    /// The genus of `U(r)` is `{U(r)}`.
    pub genus_singleton: bool,
    pub fm: CountReport,
    /// `±l` and `±m` give different elliptic fibrations and different
    /// 1-dimensional cusps.
    pub cusps_distinct: bool,
    pub fm_elliptic: CountReport,
    pub mu1_fiber: CountReport,
    /// `#(Γ_S \ I₂^st)`, as `#FM_ell / #μ₁⁻¹(E)`.
    pub standard_cusps: u64,
    pub closed_forms: UrClosedForms,
    pub passes: bool,
}

pub fn ur_example(r: u64, budget: &Budget) -> Result<UrReport> {
    check_r(r)?;
    let (tau, phi) = tau_phi(r);
    let ns = hyperbolic(r as i64)?;
    let model = K3Model::generic(ns.clone())?;

    let query = GenusQuery::of(&ns, r * r)?;
    let reps = genus_representatives_rank2(&query, budget)?;
    let genus_singleton = reps.len() == 1 && equivalent_rank2(&reps[0], &ns)?.is_some();

    let inputs = FmInputs::derive(&ns, budget)?;
    let fm = count_fm(&model, &inputs.genus, &inputs.gens, budget)?;

    let cusps_distinct = cusps_distinct(&model, r)?;

    let genus = GenusList::derive(&ns, budget)?;
    let data = derive_orbit_data(&genus, 1, budget)?;
    let fm_elliptic = count_fm_elliptic(&model, &genus, &data, budget)?;

    let fiber = mu1_fiber_ur(r)?;
    let mu1_fiber = fiber.report();
    let standard_cusps = if mu1_fiber.value > 0 && fm_elliptic.value % mu1_fiber.value == 0 {
        fm_elliptic.value / mu1_fiber.value
    } else {
        0
    };

    let closed_forms = UrClosedForms::of(r);
    let passes = genus_singleton
        && cusps_distinct
        && fm.exact
        && fm_elliptic.exact
        && mu1_fiber.exact
        && fm.value == closed_forms.fm
        && fm_elliptic.value == closed_forms.fm_elliptic
        && mu1_fiber.value == closed_forms.mu1_fiber
        && standard_cusps == closed_forms.standard_cusps;
    Ok(UrReport {
        r,
        tau,
        phi,
        genus_singleton,
        fm,
        cusps_distinct,
        fm_elliptic,
        mu1_fiber,
        standard_cusps,
        closed_forms,
        passes,
    })
}

/// The only isometries taking `l` to `m` act on `A` outside the Hodge
/// image, and no element of the Hodge image takes `⟨l/r⟩` to `⟨m/r⟩`.
fn cusps_distinct(model: &K3Model, r: u64) -> Result<bool> {
    let disc = model.discriminant();
    let form = model.form();
    let h = gamma_image(model);
    let ns = model.ns();
    let (l, m) = (
        LatticeVector::from_i64(&[1, 0]),
        LatticeVector::from_i64(&[0, 1]),
    );
    let all = binary_isotropic_automorphisms(ns)?;
    let mut swapping = all.iter().filter(|g| g.apply(&l) == m).peekable();
    if swapping.peek().is_none() {
        return Ok(false);
    }
    for g in swapping {
        if h.contains(&disc.natural_map(g)?) {
            return Ok(false);
        }
    }
    let gen = |i: usize| {
        let mut numerators = ints(&[0, 0]);
        numerators[i] = Int::from(1);
        disc.element_of(&DualVector {
            numerators,
            denominator: Int::from(r),
        })
    };
    let span_l = form.span(&[gen(0)?]);
    let mut span_m = form.span(&[gen(1)?]);
    span_m.sort();
    Ok(!h.orbit_of_subset(&span_l).contains(&span_m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        assert_eq!(tau_phi(12), (2, 4));
        assert_eq!(tau_phi(30), (3, 8));
        assert_eq!(tau_phi(7), (1, 6));
        assert_eq!(tau_phi(16), (1, 8));
        let c = UrClosedForms::of(30);
        assert_eq!(
            (c.fm, c.fm_elliptic, c.mu1_fiber, c.standard_cusps),
            (16, 32, 4, 8)
        );
    }

    #[test]
    fn fibers() {
        assert_eq!(mu1_fiber_ur(3).unwrap().value, 1);
        assert_eq!(mu1_fiber_ur(5).unwrap().value, 2);
        let f = mu1_fiber_ur(12).unwrap();
        assert_eq!(f.value, 2);
        assert!(f.report().exact);
        assert!(mu1_fiber_ur(2).is_err());
    }

    #[test]
    fn small_cases() {
        let budget = Budget::default();
        let rep = ur_example(3, &budget).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert_eq!(
            (
                rep.fm.value,
                rep.cusps_distinct,
                rep.fm_elliptic.value,
                rep.mu1_fiber.value,
                rep.standard_cusps
            ),
            (1, true, 2, 1, 2)
        );
        let rep = ur_example(12, &budget).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert_eq!(
            (
                rep.fm.value,
                rep.fm_elliptic.value,
                rep.mu1_fiber.value,
                rep.standard_cusps
            ),
            (4, 8, 2, 4)
        );
    }
}
