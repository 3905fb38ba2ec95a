//! Named algorithms behind common traits, selected at run time by name.

use crate::config::Budget;
use crate::counting::{
    count_cusps_zero_dim, count_fm, count_fm_elliptic, count_fm_elliptic_sec, derive_orbit_data,
    CountReport, FmInputs, GenusList, K3Model, Route, SectionInputs, UrClosedForms,
};
use crate::discriminant::{AutEnumerator, DirectSearch, PrimarySplit};
use crate::error::{Error, Result};
use crate::genus::equivalent_rank2;
use crate::isotropic::{enumerate_isotropic, window_note};
use crate::lattice::hyperbolic;

/// What is being counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountKind {
    /// `#FM(S)`.
    Fm,
    /// `#FM_ell(S)`.
    FmElliptic,
    /// `#FM_ell,sec(S)`.
    FmEllipticSec,
    /// Twisted classes / 0-dimensional cusps of divisor `d`.
    Cusps(u64),
}

impl CountKind {
    pub fn name(&self) -> &'static str {
        match self {
            CountKind::Fm => "fm",
            CountKind::FmElliptic => "fm-elliptic",
            CountKind::FmEllipticSec => "fm-elliptic-sec",
            CountKind::Cusps(_) => "cusps",
        }
    }

    /// The strategy used when none is named.
    pub fn default_strategy(&self) -> &'static str {
        match self {
            CountKind::Cusps(_) => "orbit-on-a",
            _ => "double-coset",
        }
    }
}

pub struct CountRequest<'a> {
    pub model: &'a K3Model,
    pub kind: CountKind,
    /// Coordinate bound for isotropic vector searches.
    pub bound: u64,
}

pub trait CountingStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn count(&self, request: &CountRequest<'_>, budget: &Budget) -> Result<CountReport>;
}

fn not_applicable(strategy: &dyn CountingStrategy, reason: impl Into<String>) -> Error {
    Error::NotApplicable {
        strategy: strategy.name().into(),
        reason: reason.into(),
    }
}

/// Sums of double cosets over the genus (and isotropic orbits).
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleCosetStrategy;

impl CountingStrategy for DoubleCosetStrategy {
    fn name(&self) -> &'static str {
        "double-coset"
    }

    fn summary(&self) -> &'static str {
        "H \\ O(A_M) / r_M(O(M)) summed over the genus"
    }

    fn count(&self, request: &CountRequest<'_>, budget: &Budget) -> Result<CountReport> {
        let model = request.model;
        let ns = model.ns();
        match request.kind {
            CountKind::Fm => {
                let inputs = FmInputs::derive(ns, budget)?;
                count_fm(model, &inputs.genus, &inputs.gens, budget)
            }
            CountKind::FmElliptic => {
                let genus = GenusList::derive(ns, budget)?;
                let data = derive_orbit_data(&genus, request.bound, budget)?;
                count_fm_elliptic(model, &genus, &data, budget)
            }
            CountKind::FmEllipticSec => {
                let inputs = SectionInputs::derive(ns, request.bound, budget)?;
                count_fm_elliptic_sec(model, &inputs, budget)
            }
            CountKind::Cusps(_) => Err(not_applicable(self, "cusps are orbits on A")),
        }
    }
}

/// Orbits of the Hodge image on isotropic elements of `A`. For `#FM` this
/// needs `U ↪ NS`, where partners and standard cusps are both single.
#[derive(Clone, Copy, Debug, Default)]
pub struct OrbitOnAStrategy;

impl CountingStrategy for OrbitOnAStrategy {
    fn name(&self) -> &'static str {
        "orbit-on-a"
    }

    fn summary(&self) -> &'static str {
        "orbits of H on I^d(A); #FM as the d = 1 count when U embeds in NS"
    }

    fn count(&self, request: &CountRequest<'_>, budget: &Budget) -> Result<CountReport> {
        match request.kind {
            CountKind::Cusps(d) => count_cusps_zero_dim(request.model, d, budget),
            CountKind::Fm => {
                let found = enumerate_isotropic(request.model.ns(), request.bound)?;
                if !found.iter().any(|v| v.divisor == 1.into()) {
                    return Err(Error::HypothesisFails(format!(
                        "no divisor-1 isotropic vector ({})",
                        window_note(request.bound)
                    )));
                }
                count_cusps_zero_dim(request.model, 1, budget)
            }
            kind => Err(not_applicable(
                self,
                format!("no orbit formula for {}", kind.name()),
            )),
        }
    }
}

/// Closed forms in `τ(r)` and `φ(r)` for `NS ≅ U(r)`, `r > 2`, generic.
#[derive(Clone, Copy, Debug, Default)]
pub struct UrClosedFormStrategy;

impl UrClosedFormStrategy {
    fn parameter(request: &CountRequest<'_>) -> Option<u64> {
        let ns = request.model.ns();
        let factors = request.model.form().invariant_factors();
        if ns.rank() != 2 || factors.len() != 2 || factors[0] != factors[1] || factors[0] <= 2 {
            return None;
        }
        let r = factors[0];
        let ur = hyperbolic(r as i64).ok()?;
        equivalent_rank2(ns, &ur).ok().flatten()?;
        let h = request.model.hodge_image();
        let generic = h.order() == 2
            && h.contains(&crate::discriminant::FqfIsometry::minus_identity(h.form()));
        generic.then_some(r)
    }
}

impl CountingStrategy for UrClosedFormStrategy {
    fn name(&self) -> &'static str {
        "ur-closed-form"
    }

    fn summary(&self) -> &'static str {
        "2^(tau(r)-2) phi(r) and 2^(tau(r)-1) phi(r) for a generic NS = U(r)"
    }

    fn count(&self, request: &CountRequest<'_>, _budget: &Budget) -> Result<CountReport> {
        let r = Self::parameter(request)
            .ok_or_else(|| not_applicable(self, "NS is not U(r), r > 2, with H = {±id}"))?;
        let forms = UrClosedForms::of(r);
        let value = match request.kind {
            CountKind::Fm => forms.fm,
            CountKind::FmElliptic => forms.fm_elliptic,
            kind => {
                return Err(not_applicable(
                    self,
                    format!("no closed form for {}", kind.name()),
                ))
            }
        };
        Ok(CountReport {
            value,
            route: Route::UrClosedForm,
            exact: true,
            window_note: format!("closed form at r = {r}"),
        })
    }
}

pub fn counting_strategies() -> Vec<Box<dyn CountingStrategy>> {
    vec![
        Box::new(DoubleCosetStrategy),
        Box::new(OrbitOnAStrategy),
        Box::new(UrClosedFormStrategy),
    ]
}

pub fn counting_strategy(name: &str) -> Result<Box<dyn CountingStrategy>> {
    counting_strategies()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::UnknownStrategy(name.into()))
}

pub fn aut_enumerators() -> Vec<Box<dyn AutEnumerator>> {
    vec![Box::new(PrimarySplit), Box::new(DirectSearch)]
}

pub fn aut_enumerator(name: &str) -> Result<Box<dyn AutEnumerator>> {
    aut_enumerators()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::UnknownStrategy(name.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::diagonal;

    fn run(name: &str, ns: crate::EvenLattice, kind: CountKind) -> Result<CountReport> {
        let model = K3Model::generic(ns)?;
        let request = CountRequest {
            model: &model,
            kind,
            bound: 2,
        };
        counting_strategy(name)?.count(&request, &Budget::default())
    }

    #[test]
    fn lookup() {
        assert!(matches!(
            counting_strategy("nope"),
            Err(Error::UnknownStrategy(_))
        ));
        assert!(matches!(
            aut_enumerator("nope"),
            Err(Error::UnknownStrategy(_))
        ));
        for s in counting_strategies() {
            assert_eq!(counting_strategy(s.name()).unwrap().name(), s.name());
        }
        for e in aut_enumerators() {
            assert_eq!(aut_enumerator(e.name()).unwrap().name(), e.name());
        }
    }

    #[test]
    fn strategies_agree() {
        for r in [3, 5, 12] {
            for kind in [CountKind::Fm, CountKind::FmElliptic] {
                let a = run("double-coset", hyperbolic(r).unwrap(), kind).unwrap();
                let b = run("ur-closed-form", hyperbolic(r).unwrap(), kind).unwrap();
                assert_eq!(a.value, b.value);
                assert_eq!(b.route, Route::UrClosedForm);
            }
        }
        let ns = hyperbolic(1).unwrap().direct_sum(&diagonal(&[-4]).unwrap());
        let a = run("double-coset", ns.clone(), CountKind::Fm).unwrap();
        let b = run("orbit-on-a", ns, CountKind::Fm).unwrap();
        assert_eq!((a.value, b.value), (1, 1));
    }

    #[test]
    fn wrong_context() {
        let ns = || hyperbolic(2).unwrap();
        assert!(matches!(
            run("ur-closed-form", ns(), CountKind::Fm),
            Err(Error::NotApplicable { .. })
        ));
        assert!(matches!(
            run("double-coset", ns(), CountKind::Cusps(2)),
            Err(Error::NotApplicable { .. })
        ));
        assert!(matches!(
            run("orbit-on-a", ns(), CountKind::Fm),
            Err(Error::HypothesisFails(_))
        ));
        assert_eq!(
            run("orbit-on-a", ns(), CountKind::Cusps(2)).unwrap().value,
            2
        );
    }
}
