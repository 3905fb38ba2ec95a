//! Primitive isotropic vectors: bounded enumeration, hyperbolic splittings
//! `L = Zl + Zm ⊕ L₁`, the quotients `l^⊥/Zl`, transvections and the
//! stabilizer `O(L)^l`.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::config::Budget;
use crate::discriminant::is_isogenus;
use crate::error::{Error, Result};
use crate::genus::{equivalent_rank2, nikulin_unique};
use crate::lattice::{Embedding, EvenLattice, LatticeIsometry, LatticeVector};
use crate::linalg::{self, Int, ZMatrix};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IsotropicVector {
    pub vector: LatticeVector,
    pub divisor: Int,
}

impl IsotropicVector {
    /// Checks isotropy and primitivity and computes the divisor.
    pub fn new(l: &EvenLattice, v: LatticeVector) -> Result<Self> {
        if !l.is_primitive(&v)? {
            return Err(Error::NotPrimitiveIsotropic);
        }
        if !l.norm(&v).is_zero() {
            return Err(Error::NotPrimitiveIsotropic);
        }
        let divisor = l.divisor(&v)?;
        Ok(IsotropicVector { vector: v, divisor })
    }
}

/// Points in the box `|coords| ≤ bound` beyond which enumeration refuses.
const MAX_WINDOW: u64 = 50_000_000;

/// Primitive isotropic vectors with `max |coordinate| ≤ bound`, one per
/// `±` pair (first nonzero coordinate positive), in lexicographic order.
/// Complete within the window only.
pub fn enumerate_isotropic(l: &EvenLattice, bound: u64) -> Result<Vec<IsotropicVector>> {
    let n = l.rank();
    if !l.is_indefinite() || bound == 0 {
        return Ok(vec![]);
    }
    let side = 2 * bound + 1;
    let points = (0..n)
        .try_fold(1u64, |acc, _| acc.checked_mul(side))
        .unwrap_or(u64::MAX);
    if points > MAX_WINDOW {
        return Err(Error::BudgetExceeded {
            what: "isotropic search window".into(),
            size: points,
            budget: MAX_WINDOW,
        });
    }
    let gram: Vec<Vec<i128>> = l
        .gram()
        .to_rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_i128().ok_or_else(|| Error::TooLarge(x.to_string())))
                .collect()
        })
        .collect::<Result<_>>()?;
    let b = bound as i64;
    let mut out = vec![];
    let mut x = vec![-b; n];
    loop {
        let first = x.iter().find(|&&c| c != 0);
        if matches!(first, Some(&c) if c > 0) {
            let mut norm: i128 = 0;
            for i in 0..n {
                let xi = x[i] as i128;
                if xi == 0 {
                    continue;
                }
                norm += gram[i][i] * xi * xi;
                for j in i + 1..n {
                    norm += 2 * gram[i][j] * xi * x[j] as i128;
                }
            }
            if norm == 0 && x.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1 {
                let v = LatticeVector::from_i64(&x);
                let divisor = l.divisor(&v)?;
                out.push(IsotropicVector { vector: v, divisor });
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort();
                return Ok(out);
            }
            i -= 1;
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
        }
    }
}

/// Human-readable statement of the window an enumeration covers.
pub fn window_note(bound: u64) -> String {
    format!("complete within |coords| <= {bound}")
}

/// `L = (Zl + Zm) ⊕ L₁` with `(l, l) = (m, m) = 0` and `(l, m) = 1`.
#[derive(Clone, Debug)]
pub struct HyperbolicSplit {
    lattice: EvenLattice,
    pub l: LatticeVector,
    pub m: LatticeVector,
    /// Basis of `L₁` as columns in `L` coordinates.
    pub complement_basis: ZMatrix,
    pub complement: EvenLattice,
}

impl HyperbolicSplit {
    pub fn lattice(&self) -> &EvenLattice {
        &self.lattice
    }

    /// The embedding `U → L` with `e ↦ m`, `f ↦ l`.
    pub fn embedding(&self) -> Embedding {
        Embedding::from_vectors(self.lattice.rank(), &[self.m.clone(), self.l.clone()])
    }

    /// Columns `l, m, L₁`: a unimodular change of basis.
    pub fn basis(&self) -> ZMatrix {
        let lm = ZMatrix::from_cols(self.lattice.rank(), &[self.l.0.clone(), self.m.0.clone()]);
        lm.hcat(&self.complement_basis)
    }

    /// Coordinates of a vector of `L₁` in the complement basis.
    pub fn complement_coords(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if self.complement.rank() == 0 {
            return if v.is_zero() {
                Ok(LatticeVector(vec![]))
            } else {
                Err(Error::VectorNotInComplement)
            };
        }
        linalg::solve_integral(&self.complement_basis, &v.0)
            .map(LatticeVector)
            .ok_or(Error::VectorNotInComplement)
    }

    /// A complement vector, given in complement coordinates, in `L`.
    pub fn from_complement(&self, w: &LatticeVector) -> LatticeVector {
        if self.complement.rank() == 0 {
            return LatticeVector::zero(self.lattice.rank());
        }
        LatticeVector(self.complement_basis.mul_vec(&w.0))
    }

    /// Orthogonal projection onto `L₁`.
    pub fn project(&self, x: &LatticeVector) -> LatticeVector {
        let a = self.lattice.pair(x, &self.m);
        let b = self.lattice.pair(x, &self.l);
        x.sub(&self.l.scale(&a)).sub(&self.m.scale(&b))
    }
}

/// Completes a divisor-one isotropic vector to a hyperbolic pair: take any
/// `m'` with `(l, m') = 1` and correct it to `m = m' − ((m', m')/2)·l`.
pub fn hyperbolic_completion(l: &EvenLattice, iv: &IsotropicVector) -> Result<HyperbolicSplit> {
    if !iv.divisor.is_one() {
        return Err(Error::DivisorNotOne(iv.divisor.to_string()));
    }
    let n = l.rank();
    let lv = &iv.vector;
    let p = l.pairing_vector(lv);
    let row = ZMatrix::from_rows(&[p]);
    let m_prime = LatticeVector(
        linalg::solve_integral(&row, &[Int::one()])
            .ok_or_else(|| Error::DivisorNotOne(iv.divisor.to_string()))?,
    );
    let half = l.norm(&m_prime) / 2;
    let m = m_prime.sub(&lv.scale(&half));
    let plane = Embedding::from_vectors(n, &[lv.clone(), m.clone()]);
    let complement_basis = l.orthogonal_kernel(&plane);
    let complement = if complement_basis.cols() == 0 {
        EvenLattice::zero()
    } else {
        l.sublattice(&complement_basis)?
    };
    let split = HyperbolicSplit {
        lattice: l.clone(),
        l: lv.clone(),
        m,
        complement_basis,
        complement,
    };
    debug_assert!(split.basis().det().abs().is_one());
    Ok(split)
}

/// `l^⊥ / Zl` on an integral basis: a saturated basis of `l^⊥` in which `l`
/// is the first vector, with `l` dropped.
pub fn quotient_lattice(l: &EvenLattice, iv: &IsotropicVector) -> Result<EvenLattice> {
    let n = l.rank();
    let perp = l.orthogonal_kernel(&Embedding::from_vectors(
        n,
        std::slice::from_ref(&iv.vector),
    ));
    if perp.cols() <= 1 {
        return Ok(EvenLattice::zero());
    }
    let c = linalg::solve_integral(&perp, &iv.vector.0).ok_or(Error::NotPrimitiveIsotropic)?;
    let completion = linalg::complete_to_basis(&c).ok_or(Error::NotPrimitiveIsotropic)?;
    let k = perp.cols();
    let rest = perp.mul(&completion).submatrix(0..n, 1..k);
    l.sublattice(&rest)
}

/// `d² · |A_{l^⊥/Zl}| = |A_L|`.
pub fn check_div_square(l: &EvenLattice, iv: &IsotropicVector) -> Result<bool> {
    let q = quotient_lattice(l, iv)?;
    let d2 = &iv.divisor * &iv.divisor;
    Ok(d2 * q.det().abs() == l.det().abs())
}

/// `T_v(x) = x + (x, l)·v − ((x, l)(v, v)/2 + (x, v))·l` for `v ∈ L₁`: fixes
/// `l`, sends `m` to `m + v − ((v, v)/2)·l` and `v'` to `v' − (v', v)·l`.
pub fn transvection(split: &HyperbolicSplit, v: &LatticeVector) -> Result<LatticeIsometry> {
    let lat = &split.lattice;
    let n = lat.rank();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    split.complement_coords(v)?;
    let half_vv = lat.norm(v) / 2;
    let cols: Vec<Vec<Int>> = (0..n)
        .map(|i| {
            let mut x = LatticeVector::zero(n);
            x.0[i] = Int::one();
            let xl = lat.pair(&x, &split.l);
            let xv = lat.pair(&x, v);
            let coeff = &xl * &half_vv + xv;
            x.add(&v.scale(&xl)).sub(&split.l.scale(&coeff)).0
        })
        .collect();
    let iso = LatticeIsometry {
        matrix: ZMatrix::from_cols(n, &cols),
    };
    debug_assert!(iso.preserves(lat));
    Ok(iso)
}

/// `g = (id ⊕ h) · T_v` for `g ∈ O(L)^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerParts {
    /// Isometry of `L₁` in complement coordinates.
    pub h: LatticeIsometry,
    /// `v ∈ L₁` in `L` coordinates.
    pub v: LatticeVector,
}

/// `h = pr_{L₁} ∘ g|_{L₁}` and `v = h⁻¹(pr_{L₁} g(m))`.
pub fn stabilizer_decompose(
    split: &HyperbolicSplit,
    g: &LatticeIsometry,
) -> Result<StabilizerParts> {
    let lat = &split.lattice;
    if !g.preserves(lat) {
        return Err(Error::NotIsometry);
    }
    if g.apply(&split.l) != split.l {
        return Err(Error::DoesNotFixL);
    }
    let k = split.complement.rank();
    let h_cols: Vec<Vec<Int>> = (0..k)
        .map(|j| {
            let w = LatticeVector(split.complement_basis.col(j));
            let img = split.project(&g.apply(&w));
            split.complement_coords(&img).map(|c| c.0)
        })
        .collect::<Result<_>>()?;
    let h = LatticeIsometry {
        matrix: if k == 0 {
            ZMatrix::zeros(0, 0)
        } else {
            ZMatrix::from_cols(k, &h_cols)
        },
    };
    let pgm = split.complement_coords(&split.project(&g.apply(&split.m)))?;
    let v = if k == 0 {
        LatticeVector::zero(lat.rank())
    } else {
        let h_inv = h.inverse();
        split.from_complement(&h_inv.apply(&pgm))
    };
    Ok(StabilizerParts { h, v })
}

/// `(id_{Zl+Zm} ⊕ h) · T_v` in `L` coordinates.
pub fn stabilizer_compose(
    split: &HyperbolicSplit,
    parts: &StabilizerParts,
) -> Result<LatticeIsometry> {
    let t = transvection(split, &parts.v)?;
    let p = split.basis();
    let block = ZMatrix::identity(2).block_diag(&parts.h.matrix);
    let p_inv = p.inverse_integral().expect("unimodular split");
    let lift = LatticeIsometry {
        matrix: p.mul(&block).mul(&p_inv),
    };
    Ok(lift.compose(&t))
}

/// For hyperbolic embeddings `φ₁, φ₂ : U → L` with `φ₁(f) = φ₂(f)`, the map
/// `x ↦ x − (x, φ₂(e))·f` from `φ₁(U)^⊥` to `φ₂(U)^⊥`, as a matrix from the
/// first complement's basis to the second's.
pub fn projection_isometry(
    l: &EvenLattice,
    phi1: &Embedding,
    phi2: &Embedding,
) -> Result<LatticeIsometry> {
    for phi in [phi1, phi2] {
        let g = phi.pullback(l);
        if phi.source_rank() != 2 || g != *crate::lattice::hyperbolic(1)?.gram() {
            return Err(Error::NotHyperbolic);
        }
    }
    let f = phi1.image(1);
    if f != phi2.image(1) {
        return Err(Error::FImagesDiffer);
    }
    let e2 = phi2.image(0);
    let b1 = l.orthogonal_kernel(phi1);
    let b2 = l.orthogonal_kernel(phi2);
    let k = b1.cols();
    if k == 0 {
        return Ok(LatticeIsometry {
            matrix: ZMatrix::zeros(0, 0),
        });
    }
    let cols: Vec<Vec<Int>> = (0..k)
        .map(|j| {
            let x = LatticeVector(b1.col(j));
            let y = x.sub(&f.scale(&l.pair(&x, &e2)));
            linalg::solve_integral(&b2, &y.0).ok_or(Error::NotIsometry)
        })
        .collect::<Result<_>>()?;
    let iso = LatticeIsometry {
        matrix: ZMatrix::from_cols(k, &cols),
    };
    let src = l.sublattice(&b1)?;
    let tgt = l.sublattice(&b2)?;
    if !iso.maps_onto(&src, &tgt) {
        return Err(Error::NotIsometry);
    }
    Ok(iso)
}

/// A class of divisor-one isotropic vectors sharing a quotient lattice.
#[derive(Clone, Debug, Serialize)]
pub struct I1Class {
    /// Gram matrix of the quotient for the first member.
    pub quotient: Vec<Vec<i64>>,
    pub members: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct I1Classification {
    pub classes: Vec<I1Class>,
    /// Whether quotients were compared up to isometry (rather than only up
    /// to genus).
    pub by_isometry: bool,
    pub window: String,
}

/// Groups the divisor-one vectors of the window by the isometry class of
/// `l^⊥/Zl`, which by the orbit–genus bijection labels their `O(L)`-orbit.
/// Quotients of rank ≤ 2 are compared exactly; in higher rank the genus is
/// used, which is exact when the quotient's genus has one class.
pub fn classify_i1_orbits(
    l: &EvenLattice,
    bound: u64,
    budget: &Budget,
) -> Result<I1Classification> {
    let found: Vec<IsotropicVector> = enumerate_isotropic(l, bound)?
        .into_iter()
        .filter(|v| v.divisor.is_one())
        .collect();
    if found.is_empty() {
        return Err(Error::NoneFoundInWindow(bound));
    }
    let mut reps: Vec<(EvenLattice, Vec<IsotropicVector>)> = vec![];
    let mut by_isometry = true;
    for v in found {
        let q = quotient_lattice(l, &v)?;
        let mut placed = false;
        for (rep, members) in reps.iter_mut() {
            let same = match q.rank() {
                0 => true,
                1 => rep.gram() == q.gram(),
                2 => equivalent_rank2(rep, &q)?.is_some(),
                _ => {
                    if !nikulin_unique(&q)? {
                        by_isometry = false;
                    }
                    is_isogenus(rep, &q, budget)?.is_some()
                }
            };
            if same {
                members.push(v.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            reps.push((q, vec![v]));
        }
    }
    let to_rows = |x: &ZMatrix| {
        x.to_i64_rows()
            .ok_or_else(|| Error::TooLarge("quotient Gram".into()))
    };
    let classes = reps
        .into_iter()
        .map(|(q, members)| {
            Ok(I1Class {
                quotient: to_rows(q.gram())?,
                members: members
                    .iter()
                    .map(|v| {
                        v.vector
                            .to_i64()
                            .ok_or_else(|| Error::TooLarge("vector".into()))
                    })
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(I1Classification {
        classes,
        by_isometry,
        window: window_note(bound),
    })
}

/// A primitive rank-2 sublattice on which the form vanishes.
#[derive(Clone, Debug)]
pub struct IsotropicPlane {
    pub basis: [LatticeVector; 2],
}

impl IsotropicPlane {
    pub fn new(l: &EvenLattice, a: LatticeVector, b: LatticeVector) -> Result<Self> {
        let emb = Embedding::from_vectors(l.rank(), &[a.clone(), b.clone()]);
        if !emb.pullback(l).is_zero() || !emb.is_primitive() {
            return Err(Error::NotIsotropicPlane);
        }
        Ok(IsotropicPlane { basis: [a, b] })
    }
}

/// `Some(e)` with `(e, E) = Z`, preferring an isotropic `e`; `None` if the
/// pairings of `E` with `L` generate a proper ideal.
pub fn is_standard_plane(l: &EvenLattice, plane: &IsotropicPlane) -> Result<Option<LatticeVector>> {
    let n = l.rank();
    let emb = Embedding::from_vectors(n, &plane.basis);
    if !emb.pullback(l).is_zero() || !emb.is_primitive() {
        return Err(Error::NotIsotropicPlane);
    }
    let pairing = emb.matrix.transpose().mul(l.gram());
    let snf = linalg::smith_normal_form(&pairing);
    if snf.diagonal().first().is_none_or(|d| !d.is_one()) {
        return Ok(None);
    }
    // some primitive combination f of E has divisor 1: solve (e, f) = 1
    for f in plane_combinations(&plane.basis) {
        let p = l.pairing_vector(&f);
        if !linalg::gcd_all(&p).is_one() {
            continue;
        }
        let iv = IsotropicVector::new(l, f)?;
        let split = hyperbolic_completion(l, &iv)?;
        return Ok(Some(split.m));
    }
    Ok(None)
}

/// Primitive combinations `x·a + y·b` in order of growing height.
fn plane_combinations(basis: &[LatticeVector; 2]) -> impl Iterator<Item = LatticeVector> + '_ {
    (1i64..).flat_map(move |h| {
        let mut pts = vec![];
        for x in -h..=h {
            for y in -h..=h {
                if x.abs().max(y.abs()) == h && x.gcd(&y) == 1 && (x > 0 || (x == 0 && y > 0)) {
                    pts.push(
                        basis[0]
                            .scale(&Int::from(x))
                            .add(&basis[1].scale(&Int::from(y))),
                    );
                }
            }
        }
        pts
    })
}
