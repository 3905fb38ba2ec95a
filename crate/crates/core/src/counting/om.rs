//! Generators of `O(M)` where they can be listed, and orbit data for
//! `O(M)` acting on primitive isotropic vectors.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::config::Budget;
use crate::discriminant::{aut_group, DiscriminantGroup, FqfSubgroup};
use crate::error::{Error, Result};
use crate::genus::{
    anisotropic_automorphisms, genus_representatives_rank2, isotropic_lines, nikulin_unique,
    GenusQuery,
};
use crate::isotropic::{
    classify_i1_orbits, hyperbolic_completion, stabilizer_compose, IsotropicVector, StabilizerParts,
};
use crate::lattice::{EvenLattice, LatticeIsometry, LatticeVector};
use crate::linalg::{Int, ZMatrix};

/// Generators for (a subgroup of) `O(M)`.
#[derive(Clone, Debug)]
pub struct OMGenerators {
    pub generators: Vec<LatticeIsometry>,
    /// The generators generate all of `O(M)`.
    pub complete: bool,
    /// `r_M : O(M) → O(A_M)` is known to be onto.
    pub surjective: bool,
}

impl OMGenerators {
    /// A user-supplied list; each generator is checked against the Gram
    /// matrix.
    pub fn supplied(
        m: &EvenLattice,
        generators: Vec<LatticeIsometry>,
        complete: bool,
    ) -> Result<Self> {
        if generators.iter().any(|g| !g.preserves(m)) {
            return Err(Error::NotIsometry);
        }
        Ok(OMGenerators {
            generators,
            complete,
            surjective: false,
        })
    }

    /// Complete lists for rank ≤ 1, for lattices meeting the uniqueness
    /// criterion (through surjectivity), for indefinite rank-2 lattices,
    /// and for small definite lattices. Otherwise `{±id}`,
    /// flagged incomplete.
    pub fn builtin(m: &EvenLattice, budget: &Budget) -> Result<Self> {
        let n = m.rank();
        let minus = vec![LatticeIsometry::minus_identity(n)];
        let done = |generators| OMGenerators {
            generators,
            complete: true,
            surjective: false,
        };
        if n == 0 {
            return Ok(done(vec![]));
        }
        if n == 1 {
            return Ok(done(minus));
        }
        if nikulin_unique(m)? {
            return Ok(OMGenerators {
                generators: minus,
                complete: true,
                surjective: true,
            });
        }
        if n == 2 && m.is_indefinite() {
            if isotropic_lines(m)?.is_empty() {
                let gens = anisotropic_automorphisms(m)?;
                return Ok(done(
                    gens.into_iter()
                        .map(|matrix| LatticeIsometry { matrix })
                        .collect(),
                ));
            }
            return Ok(done(binary_isotropic_automorphisms(m)?));
        }
        if !m.is_indefinite() {
            match definite_automorphisms(m, budget) {
                Ok(all) => return Ok(done(all)),
                Err(Error::BudgetExceeded { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(OMGenerators {
            generators: minus,
            complete: false,
            surjective: false,
        })
    }

    /// `r_M(⟨generators⟩) ⊆ O(A_M)`; all of `O(A_M)` when `r_M` is onto.
    pub fn image(&self, disc: &DiscriminantGroup, budget: &Budget) -> Result<FqfSubgroup> {
        if self.surjective {
            return aut_group(disc.form(), budget);
        }
        let images = self
            .generators
            .iter()
            .map(|g| disc.natural_map(g))
            .collect::<Result<Vec<_>>>()?;
        FqfSubgroup::generate(disc.form(), images, budget)
    }
}

/// All of `O(M)` for a rank-2 lattice with square `−det`: every isometry
/// permutes the lines `±v₁, ±v₂`, and preserving `(v₁, v₂)` forces the same
/// sign on both.
pub fn binary_isotropic_automorphisms(m: &EvenLattice) -> Result<Vec<LatticeIsometry>> {
    let lines = isotropic_lines(m)?;
    if lines.len() != 2 {
        return Err(Error::NotApplicable {
            strategy: "isotropic lines".into(),
            reason: "the lattice has no isotropic vectors".into(),
        });
    }
    let b = ZMatrix::from_cols(2, &[lines[0].0.clone(), lines[1].0.clone()]);
    let b_inv = b.inverse_rational().expect("independent lines");
    let mut out = BTreeSet::new();
    for (w1, w2) in [(&lines[0], &lines[1]), (&lines[1], &lines[0])] {
        for sign in [1i64, -1] {
            let s = Int::from(sign);
            let t = ZMatrix::from_cols(2, &[w1.scale(&s).0, w2.scale(&s).0]);
            if let Some(g) = integral_product(&t, &b_inv) {
                let iso = LatticeIsometry { matrix: g };
                if iso.preserves(m) {
                    out.insert(iso.matrix.to_rows());
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|rows| LatticeIsometry {
            matrix: ZMatrix::from_rows(&rows),
        })
        .collect())
}

fn integral_product(t: &ZMatrix, inv: &[Vec<BigRational>]) -> Option<ZMatrix> {
    let n = t.rows();
    let mut out = ZMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = BigRational::zero();
            for (k, row) in inv.iter().enumerate() {
                acc += BigRational::from(t[(i, k)].clone()) * &row[j];
            }
            if !acc.is_integer() {
                return None;
            }
            out[(i, j)] = acc.to_integer();
        }
    }
    Some(out)
}

/// Every isometry of a definite lattice, by matching basis images among
/// vectors of the same norm.
pub fn definite_automorphisms(m: &EvenLattice, budget: &Budget) -> Result<Vec<LatticeIsometry>> {
    let n = m.rank();
    let gram = if m.signature().0 == 0 {
        m.gram().neg()
    } else {
        m.gram().clone()
    };
    let inv = gram.inverse_rational().ok_or(Error::Degenerate)?;
    let norms: BTreeSet<Int> = (0..n).map(|i| gram[(i, i)].clone()).collect();
    let top = norms.iter().max().cloned().unwrap_or_else(Int::zero);
    // x_i² ≤ N·(G⁻¹)_ii on the ellipsoid xᵀGx ≤ N
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let x = (BigRational::from(top.clone()) * &inv[i][i])
                .floor()
                .to_integer();
            x.sqrt().to_i64().unwrap_or(i64::MAX)
        })
        .collect();
    let size = bounds
        .iter()
        .try_fold(1u64, |acc, &b| acc.checked_mul(2 * b.unsigned_abs() + 1))
        .unwrap_or(u64::MAX);
    if size > budget.max_group {
        return Err(Error::BudgetExceeded {
            what: "short vector box".into(),
            size,
            budget: budget.max_group,
        });
    }
    let lat = EvenLattice::new(gram.clone())?;
    let mut by_norm: Vec<Vec<LatticeVector>> = vec![vec![]; n];
    let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
    'outer: loop {
        let v = LatticeVector::from_i64(&x);
        if !v.is_zero() {
            let nv = lat.norm(&v);
            for i in 0..n {
                if nv == gram[(i, i)] {
                    by_norm[i].push(v.clone());
                }
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if x[i] < bounds[i] {
                x[i] += 1;
                break;
            }
            x[i] = -bounds[i];
        }
    }

    let mut out = vec![];
    let mut chosen: Vec<LatticeVector> = vec![];
    let mut cursor = vec![0usize; n];
    let mut level = 0;
    loop {
        if cursor[level] >= by_norm[level].len() {
            if level == 0 {
                break;
            }
            cursor[level] = 0;
            level -= 1;
            chosen.pop();
            cursor[level] += 1;
            continue;
        }
        let y = &by_norm[level][cursor[level]];
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, x)| lat.pair(x, y) == gram[(i, level)]);
        if !ok {
            cursor[level] += 1;
            continue;
        }
        chosen.push(y.clone());
        if level + 1 == n {
            let cols: Vec<Vec<Int>> = chosen.iter().map(|v| v.0.clone()).collect();
            out.push(LatticeIsometry {
                matrix: ZMatrix::from_cols(n, &cols),
            });
            if out.len() as u64 > budget.max_group {
                return Err(Error::BudgetExceeded {
                    what: "definite automorphism group".into(),
                    size: out.len() as u64,
                    budget: budget.max_group,
                });
            }
            chosen.pop();
            cursor[level] += 1;
        } else {
            level += 1;
        }
    }
    out.sort_by_key(|a| a.matrix.to_rows());
    Ok(out)
}

/// An `O(M)`-orbit of primitive isotropic vectors with generators of the
/// stabilizer of its representative.
#[derive(Clone, Debug, Serialize)]
pub struct IsotropicOrbit {
    pub representative: Vec<i64>,
    pub divisor: u64,
    #[serde(skip)]
    pub stabilizer: Vec<LatticeIsometry>,
    /// The stabilizer maps onto `O(A_M)` (the listed generators need not
    /// show this).
    pub stabilizer_onto: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitData {
    pub orbits: Vec<IsotropicOrbit>,
    /// Every orbit is listed.
    pub orbits_complete: bool,
    /// Every stabilizer list generates the whole stabilizer.
    pub stabilizers_complete: bool,
    pub note: String,
}

/// Orbits of `O(M)` on primitive isotropic vectors.
///
/// Rank 2 is exact (at most two isotropic lines). In higher rank the
/// divisor-one orbits are read off from the isometry classes of `l^⊥/Zl`
/// found in the window, with stabilizers `id ⊕ O(L₁)` (transvections act
/// trivially on `A_M`). Completeness needs every class of the quotient genus
/// to appear and no isotropic element of order > 1 in `A_M`.
pub fn isotropic_orbits(m: &EvenLattice, bound: u64, budget: &Budget) -> Result<OrbitData> {
    let n = m.rank();
    if n < 2 || !m.is_indefinite() {
        return Ok(OrbitData {
            orbits: vec![],
            orbits_complete: true,
            stabilizers_complete: true,
            note: "no isotropic vectors".into(),
        });
    }
    if n == 2 {
        return binary_orbits(m);
    }
    let disc = DiscriminantGroup::new(m)?;
    let form = disc.form();
    let higher = (2..=form.exponent())
        .filter(|d| form.exponent() % d == 0)
        .any(|d| !form.isotropic_elements(d).is_empty());
    let classes = match classify_i1_orbits(m, bound, budget) {
        Ok(c) => c,
        Err(Error::NoneFoundInWindow(_)) => {
            return Ok(OrbitData {
                orbits: vec![],
                orbits_complete: false,
                stabilizers_complete: true,
                note: format!("no divisor-1 isotropic vector with |coords| <= {bound}"),
            })
        }
        Err(e) => return Err(e),
    };
    let mut stabilizers_complete = true;
    let mut orbits = vec![];
    let mut quotient_rank = 0;
    for class in &classes.classes {
        let iv = IsotropicVector::new(m, LatticeVector::from_i64(&class.members[0]))?;
        let split = hyperbolic_completion(m, &iv)?;
        quotient_rank = split.complement.rank();
        let om = OMGenerators::builtin(&split.complement, budget)?;
        stabilizers_complete &= om.complete;
        let stabilizer = om
            .generators
            .iter()
            .map(|h| {
                stabilizer_compose(
                    &split,
                    &StabilizerParts {
                        h: h.clone(),
                        v: LatticeVector::zero(n),
                    },
                )
            })
            .collect::<Result<_>>()?;
        orbits.push(IsotropicOrbit {
            representative: class.members[0].clone(),
            divisor: 1,
            stabilizer,
            stabilizer_onto: om.surjective,
        });
    }
    let expected = match quotient_rank {
        0 | 1 => Some(1),
        2 => {
            let first =
                IsotropicVector::new(m, LatticeVector::from_i64(&classes.classes[0].members[0]))?;
            let q = crate::isotropic::quotient_lattice(m, &first)?;
            let query = GenusQuery::of(&q, form.order())?;
            Some(genus_representatives_rank2(&query, budget)?.len())
        }
        _ => None,
    };
    let orbits_complete = classes.by_isometry && !higher && expected == Some(orbits.len());
    let mut note = classes.window.clone();
    if higher {
        note.push_str("; vectors of divisor > 1 are not classified");
    }
    Ok(OrbitData {
        orbits,
        orbits_complete,
        stabilizers_complete,
        note,
    })
}

fn binary_orbits(m: &EvenLattice) -> Result<OrbitData> {
    let lines = isotropic_lines(m)?;
    if lines.is_empty() {
        return Ok(OrbitData {
            orbits: vec![],
            orbits_complete: true,
            stabilizers_complete: true,
            note: "no isotropic vectors".into(),
        });
    }
    let group = binary_isotropic_automorphisms(m)?;
    let mut points: Vec<LatticeVector> = lines.iter().flat_map(|v| [v.clone(), v.neg()]).collect();
    points.sort();
    let mut seen: BTreeSet<LatticeVector> = BTreeSet::new();
    let mut orbits = vec![];
    for p in points.iter().rev() {
        if seen.contains(p) {
            continue;
        }
        for g in &group {
            seen.insert(g.apply(p));
        }
        let stabilizer: Vec<LatticeIsometry> = group
            .iter()
            .filter(|g| g.apply(p) == *p && g.matrix != ZMatrix::identity(2))
            .cloned()
            .collect();
        let divisor = m.divisor(p)?;
        orbits.push(IsotropicOrbit {
            representative: p.to_i64().ok_or_else(|| Error::TooLarge("vector".into()))?,
            divisor: divisor
                .to_u64()
                .ok_or_else(|| Error::TooLarge(divisor.to_string()))?,
            stabilizer,
            stabilizer_onto: false,
        });
    }
    Ok(OrbitData {
        orbits,
        orbits_complete: true,
        stabilizers_complete: true,
        note: "both isotropic lines".into(),
    })
}
