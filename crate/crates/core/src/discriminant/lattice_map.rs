//! The discriminant group `A_L = L^∨ / L` of an even lattice and the maps
//! induced on it.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::aut::find_isomorphism;
use super::{FiniteQuadraticForm, FqfElement, FqfIsometry};
use crate::config::Budget;
use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, LatticeIsometry};
use crate::linalg::{self, Int, ZMatrix};

/// A dual vector `numerators / denominator` in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualVector {
    pub numerators: Vec<Int>,
    pub denominator: Int,
}

/// `A_L` together with the Smith data that links it to `L`.
#[derive(Clone, Debug)]
pub struct DiscriminantGroup {
    lattice: EvenLattice,
    form: FiniteQuadraticForm,
    /// `U` with `U · G · V = D`.
    left: ZMatrix,
    /// `V` with `U · G · V = D`.
    right: ZMatrix,
    /// Smith indices whose factor exceeds 1, paired with the factor.
    kept: Vec<(usize, Int)>,
}

impl DiscriminantGroup {
    pub fn new(lattice: &EvenLattice) -> Result<Self> {
        let snf = linalg::smith_normal_form(lattice.gram());
        let kept: Vec<(usize, Int)> = snf
            .diagonal()
            .into_iter()
            .enumerate()
            .filter(|(_, d)| !d.is_one())
            .collect();
        let factors: Vec<u64> = kept
            .iter()
            .map(|(_, d)| {
                d.to_u64()
                    .ok_or_else(|| Error::TooLarge(format!("invariant factor {d}")))
            })
            .collect::<Result<_>>()?;
        // generator i = V e_i / d_i
        let gens: Vec<Vec<Int>> = kept.iter().map(|(i, _)| snf.right.col(*i)).collect();
        let value = |x: &[Int], dx: &Int, y: &[Int], dy: &Int| -> BigRational {
            let g = lattice.gram();
            let gy = g.mul_vec(y);
            let num = x.iter().zip(&gy).fold(Int::zero(), |s, (a, b)| s + a * b);
            BigRational::new(num, dx * dy)
        };
        let q: Vec<BigRational> = gens
            .iter()
            .zip(&kept)
            .map(|(v, (_, d))| value(v, d, v, d))
            .collect();
        let b: Vec<Vec<BigRational>> = gens
            .iter()
            .zip(&kept)
            .map(|(v, (_, dv))| {
                gens.iter()
                    .zip(&kept)
                    .map(|(w, (_, dw))| {
                        let x = value(v, dv, w, dw);
                        &x - BigRational::from(x.floor().to_integer())
                    })
                    .collect()
            })
            .collect();
        let q: Vec<BigRational> = q
            .into_iter()
            .map(|x| {
                let two = BigRational::from(Int::from(2));
                let k = (&x / &two).floor();
                x - two * k
            })
            .collect();
        let form = FiniteQuadraticForm::from_values(&factors, &q, &b)?;
        Ok(DiscriminantGroup {
            lattice: lattice.clone(),
            form,
            left: snf.left,
            right: snf.right,
            kept,
        })
    }

    pub fn form(&self) -> &FiniteQuadraticForm {
        &self.form
    }

    pub fn lattice(&self) -> &EvenLattice {
        &self.lattice
    }

    /// Residue class of a dual vector; fails if it is not in `L^∨`.
    pub fn element_of(&self, x: &DualVector) -> Result<FqfElement> {
        if x.numerators.len() != self.lattice.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.lattice.rank(),
                got: x.numerators.len(),
            });
        }
        let gx = self.lattice.gram().mul_vec(&x.numerators);
        let mut integral = Vec::with_capacity(gx.len());
        for v in gx {
            if !v.is_multiple_of(&x.denominator) {
                return Err(Error::NotAnElement);
            }
            integral.push(v / &x.denominator);
        }
        let w = self.left.mul_vec(&integral);
        Ok(FqfElement(
            self.kept
                .iter()
                .map(|(i, d)| {
                    w[*i]
                        .mod_floor(d)
                        .to_u64()
                        .expect("residue below a u64 factor")
                })
                .collect(),
        ))
    }

    /// A dual vector representing the element.
    pub fn lift(&self, x: &FqfElement) -> DualVector {
        let n = self.lattice.rank();
        let denominator = Int::from(self.form.exponent());
        let mut numerators = vec![Int::zero(); n];
        for ((i, d), &c) in self.kept.iter().zip(&x.0) {
            let scale = &denominator / d * Int::from(c);
            for (r, num) in numerators.iter_mut().enumerate() {
                *num += &self.right[(r, *i)] * &scale;
            }
        }
        DualVector {
            numerators,
            denominator,
        }
    }

    /// `r_L(g)`: the action of a lattice isometry on `A_L`.
    pub fn natural_map(&self, g: &LatticeIsometry) -> Result<FqfIsometry> {
        if !g.preserves(&self.lattice) {
            return Err(Error::NotIsometry);
        }
        let images: Vec<FqfElement> = (0..self.form.min_generators())
            .map(|j| {
                let x = self.lift(&self.form.generator(j));
                let moved = DualVector {
                    numerators: g.matrix.mul_vec(&x.numerators),
                    denominator: x.denominator,
                };
                self.element_of(&moved)
            })
            .collect::<Result<_>>()?;
        Ok(FqfIsometry::from_images(&self.form, &images))
    }
}

pub fn discriminant_form(lattice: &EvenLattice) -> Result<FiniteQuadraticForm> {
    Ok(DiscriminantGroup::new(lattice)?.form)
}

pub fn natural_map(lattice: &EvenLattice, g: &LatticeIsometry) -> Result<FqfIsometry> {
    DiscriminantGroup::new(lattice)?.natural_map(g)
}

/// The even overlattice `L̃ ⊇ L` with `L̃ / L = H`, returned with the basis
/// of `L̃` expressed in `L ⊗ Q` coordinates (columns, over a common
/// denominator).
pub fn overlattice(
    disc: &DiscriminantGroup,
    subgroup: &[FqfElement],
) -> Result<(EvenLattice, DualBasis)> {
    let form = disc.form();
    if subgroup
        .iter()
        .any(|x| !form.contains(x) || !form.is_isotropic(x))
    {
        return Err(Error::NotIsotropic);
    }
    for x in subgroup {
        for y in subgroup {
            if form.b_numerator(x, y) != 0 {
                return Err(Error::NotIsotropic);
            }
        }
    }
    let n = disc.lattice().rank();
    let den = Int::from(form.exponent());
    // generators of den·L̃ as rows: den·e_i and den·lift(h)
    let mut rows: Vec<Vec<Int>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { den.clone() } else { Int::zero() })
                .collect()
        })
        .collect();
    for h in subgroup {
        let lift = disc.lift(h);
        let k = &den / &lift.denominator;
        rows.push(lift.numerators.iter().map(|x| x * &k).collect());
    }
    let hnf = linalg::hermite_normal_form(&ZMatrix::from_rows(&rows));
    let basis = hnf.transpose();
    let g = disc.lattice().gram();
    let scaled = basis.congruence(g);
    let den2 = &den * &den;
    let mut gram = ZMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if !scaled[(i, j)].is_multiple_of(&den2) {
                return Err(Error::NotIsotropic);
            }
            gram[(i, j)] = &scaled[(i, j)] / &den2;
        }
    }
    let lattice = EvenLattice::new(gram).map_err(|_| Error::NotIsotropic)?;
    Ok((
        lattice,
        DualBasis {
            basis,
            denominator: den,
        },
    ))
}

/// Basis vectors `basis[:, j] / denominator` in the coordinates of a
/// sublattice.
#[derive(Clone, Debug)]
pub struct DualBasis {
    pub basis: ZMatrix,
    pub denominator: Int,
}

/// Witness that two lattices are in the same genus.
#[derive(Clone, Debug)]
pub struct GenusWitness {
    /// Images of the Smith generators of `A_L` in `A_M`.
    pub isomorphism: FqfIsometry,
}

/// Equal signatures and isomorphic discriminant forms.
pub fn is_isogenus(
    l: &EvenLattice,
    m: &EvenLattice,
    budget: &Budget,
) -> Result<Option<GenusWitness>> {
    if l.rank() != m.rank() || l.signature() != m.signature() || l.det().abs() != m.det().abs() {
        return Ok(None);
    }
    let a = discriminant_form(l)?;
    let b = discriminant_form(m)?;
    Ok(find_isomorphism(&a, &b, budget)?.map(|isomorphism| GenusWitness { isomorphism }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{diagonal, hyperbolic};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hyperbolic_discriminants() {
        assert!(discriminant_form(&hyperbolic(1).unwrap())
            .unwrap()
            .is_trivial());
        let u4 = DiscriminantGroup::new(&hyperbolic(4).unwrap()).unwrap();
        let f = u4.form();
        assert_eq!(f.invariant_factors(), &[4, 4]);
        // l/4 and m/4 are isotropic and pair to 1/4
        let l = u4
            .element_of(&DualVector {
                numerators: linalg::ints(&[1, 0]),
                denominator: Int::from(4),
            })
            .unwrap();
        let m = u4
            .element_of(&DualVector {
                numerators: linalg::ints(&[0, 1]),
                denominator: Int::from(4),
            })
            .unwrap();
        assert_eq!(f.q(&l), rat(0, 1));
        assert_eq!(f.q(&m), rat(0, 1));
        assert_eq!(f.b(&l, &m), rat(1, 4));
        assert_eq!(f.min_generators(), 2);
    }

    #[test]
    fn rank_one_discriminant() {
        let f = discriminant_form(&diagonal(&[-4]).unwrap()).unwrap();
        assert_eq!(f.invariant_factors(), &[4]);
        assert_eq!(f.q(&f.generator(0)), rat(7, 4));
        assert!(f.isotropic_elements(2).is_empty());
    }

    #[test]
    fn lift_round_trips() {
        let l = hyperbolic(6).unwrap().direct_sum(&diagonal(&[-4]).unwrap());
        let d = DiscriminantGroup::new(&l).unwrap();
        for x in d.form().elements() {
            assert_eq!(d.element_of(&d.lift(&x)).unwrap(), x);
        }
        assert_eq!(d.form().order(), 144);
    }

    #[test]
    fn natural_map_examples() {
        let r = 5;
        let l = hyperbolic(r).unwrap();
        let d = DiscriminantGroup::new(&l).unwrap();
        let f = d.form();
        let neg = d.natural_map(&LatticeIsometry::minus_identity(2)).unwrap();
        assert_eq!(neg, FqfIsometry::minus_identity(f));
        let swap = LatticeIsometry::new(&l, ZMatrix::from_rows(&[vec![0, 1], vec![1, 0]])).unwrap();
        let s = d.natural_map(&swap).unwrap();
        let lr = d
            .element_of(&DualVector {
                numerators: linalg::ints(&[1, 0]),
                denominator: Int::from(r),
            })
            .unwrap();
        let mr = d
            .element_of(&DualVector {
                numerators: linalg::ints(&[0, 1]),
                denominator: Int::from(r),
            })
            .unwrap();
        assert_eq!(s.apply(f, &lr), mr);
        assert_eq!(s.apply(f, &mr), lr);

        // id ⊕ -id on U(2) ⊕ U acts trivially
        let l = hyperbolic(2).unwrap().direct_sum(&hyperbolic(1).unwrap());
        let g = ZMatrix::identity(2).block_diag(&ZMatrix::identity(2).neg());
        let img = natural_map(&l, &LatticeIsometry::new(&l, g).unwrap()).unwrap();
        assert_eq!(img, FqfIsometry::identity(&discriminant_form(&l).unwrap()));

        assert!(natural_map(
            &l,
            &LatticeIsometry {
                matrix: ZMatrix::identity(4).scale(&Int::from(2))
            }
        )
        .is_err());
    }

    #[test]
    fn overlattice_examples() {
        let u2 = hyperbolic(2).unwrap();
        let d = DiscriminantGroup::new(&u2).unwrap();
        let l_half = d
            .element_of(&DualVector {
                numerators: linalg::ints(&[1, 0]),
                denominator: Int::from(2),
            })
            .unwrap();
        let (over, _) = overlattice(&d, &[d.form().zero(), l_half]).unwrap();
        assert_eq!(over.det(), Int::from(-1));
        assert!(over.is_indefinite());

        let (same, _) = overlattice(&d, &[d.form().zero()]).unwrap();
        assert_eq!(same.det(), u2.det());

        let both = d.form().elements();
        assert_eq!(overlattice(&d, &both).unwrap_err(), Error::NotIsotropic);

        let l = hyperbolic(4).unwrap().direct_sum(&hyperbolic(1).unwrap());
        let d = DiscriminantGroup::new(&l).unwrap();
        let l4 = d
            .element_of(&DualVector {
                numerators: linalg::ints(&[1, 0, 0, 0]),
                denominator: Int::from(4),
            })
            .unwrap();
        let h = d.form().span(&[l4]);
        let (over, _) = overlattice(&d, &h).unwrap();
        assert_eq!(
            d.form().order(),
            16 * discriminant_form(&over).unwrap().order()
        );
    }

    #[test]
    fn isogenus_examples() {
        let budget = Budget::default();
        let a = hyperbolic(3).unwrap().direct_sum(&hyperbolic(1).unwrap());
        let b = hyperbolic(1).unwrap().direct_sum(&hyperbolic(3).unwrap());
        assert!(is_isogenus(&a, &b, &budget).unwrap().is_some());
        assert!(
            is_isogenus(&hyperbolic(1).unwrap(), &hyperbolic(2).unwrap(), &budget)
                .unwrap()
                .is_none()
        );
        // U(4) vs the even lattice [[0,4],[4,4]]: same group (Z/4)^2, different q
        let odd_half = EvenLattice::from_rows(&[vec![0, 4], vec![4, 4]]).unwrap();
        assert!(is_isogenus(&hyperbolic(4).unwrap(), &odd_half, &budget)
            .unwrap()
            .is_none());
        // U(2) vs diag(2,-2): |A| = 4 both, but (Z/2)^2 with q values 0,0 vs 1/2,3/2
        let d = diagonal(&[2, -2]).unwrap();
        assert!(is_isogenus(&hyperbolic(2).unwrap(), &d, &budget)
            .unwrap()
            .is_none());
    }
}
