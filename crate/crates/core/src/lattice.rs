//! Even lattices given by integral Gram matrices.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gcd_all, Int, ZMatrix};

/// A nondegenerate even lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EvenLattice {
    gram: ZMatrix,
}

/// Coordinates of a lattice vector in the lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<Int>);

impl LatticeVector {
    pub fn from_i64(xs: &[i64]) -> Self {
        LatticeVector(linalg::ints(xs))
    }

    pub fn zero(n: usize) -> Self {
        LatticeVector(vec![Int::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn coords(&self) -> &[Int] {
        &self.0
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Int) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        self.scale(&-Int::one())
    }

    /// gcd of the coordinates.
    pub fn content(&self) -> Int {
        gcd_all(&self.0)
    }

    /// Flips the sign so that the first nonzero coordinate is positive.
    pub fn sign_normalized(&self) -> LatticeVector {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

/// An integral matrix acting on lattice coordinates (columns are images of
/// basis vectors).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeIsometry {
    pub matrix: ZMatrix,
}

impl LatticeIsometry {
    pub fn new(lattice: &EvenLattice, matrix: ZMatrix) -> Result<Self> {
        let iso = LatticeIsometry { matrix };
        if !iso.preserves(lattice) {
            return Err(Error::NotIsometry);
        }
        Ok(iso)
    }

    pub fn identity(n: usize) -> Self {
        LatticeIsometry {
            matrix: ZMatrix::identity(n),
        }
    }

    pub fn minus_identity(n: usize) -> Self {
        LatticeIsometry {
            matrix: ZMatrix::identity(n).neg(),
        }
    }

    /// `matrixᵀ · gram · matrix = gram` and `det = ±1`.
    pub fn preserves(&self, lattice: &EvenLattice) -> bool {
        let m = &self.matrix;
        m.rows() == lattice.rank()
            && m.is_square()
            && m.congruence(lattice.gram()) == *lattice.gram()
            && m.det().abs().is_one()
    }

    /// Checks that this matrix maps `source` isometrically onto `target`.
    pub fn maps_onto(&self, source: &EvenLattice, target: &EvenLattice) -> bool {
        let m = &self.matrix;
        m.rows() == target.rank()
            && m.cols() == source.rank()
            && m.congruence(target.gram()) == *source.gram()
            && m.det().abs().is_one()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &LatticeIsometry) -> LatticeIsometry {
        LatticeIsometry {
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn inverse(&self) -> LatticeIsometry {
        LatticeIsometry {
            matrix: self
                .matrix
                .inverse_integral()
                .expect("isometries are unimodular"),
        }
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector(self.matrix.mul_vec(&v.0))
    }
}

/// Columns are the images of the source basis in target coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub matrix: ZMatrix,
}

impl Embedding {
    pub fn from_vectors(target_rank: usize, vectors: &[LatticeVector]) -> Self {
        let cols: Vec<Vec<Int>> = vectors.iter().map(|v| v.0.clone()).collect();
        Embedding {
            matrix: ZMatrix::from_cols(target_rank, &cols),
        }
    }

    pub fn source_rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn image(&self, i: usize) -> LatticeVector {
        LatticeVector(self.matrix.col(i))
    }

    /// Gram matrix of the source pulled back from `target`.
    pub fn pullback(&self, target: &EvenLattice) -> ZMatrix {
        self.matrix.congruence(target.gram())
    }

    /// True when the image is a primitive sublattice (all SNF factors 1).
    pub fn is_primitive(&self) -> bool {
        let snf = linalg::smith_normal_form(&self.matrix);
        snf.rank() == self.source_rank() && snf.diagonal().iter().all(One::is_one)
    }
}

/// Sign convention for the root lattices `A(n)`, `D(n)`, `E8`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootSign {
    #[default]
    Negative,
    Positive,
}

impl EvenLattice {
    /// Validates an integral Gram matrix.
    pub fn new(gram: ZMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::NotSquare {
                rows: gram.rows(),
                cols: gram.cols(),
            });
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if let Some(i) = (0..gram.rows()).find(|&i| gram[(i, i)].is_odd()) {
            return Err(Error::OddDiagonal(i));
        }
        if gram.det().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(EvenLattice { gram })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != rows.len()) {
            return Err(Error::NotSquare {
                rows: rows.len(),
                cols: r.len(),
            });
        }
        Self::new(ZMatrix::from_rows(rows))
    }

    /// The rank-0 lattice.
    pub fn zero() -> Self {
        EvenLattice {
            gram: ZMatrix::zeros(0, 0),
        }
    }

    pub fn gram(&self) -> &ZMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> Int {
        self.gram.det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> Int {
        let gw = self.gram.mul_vec(&w.0);
        v.0.iter()
            .zip(&gw)
            .map(|(a, b)| a * b)
            .fold(Int::zero(), |s, x| s + x)
    }

    pub fn norm(&self, v: &LatticeVector) -> Int {
        self.pair(v, v)
    }

    /// Pairings of `v` with every basis vector.
    pub fn pairing_vector(&self, v: &LatticeVector) -> Vec<Int> {
        self.gram.mul_vec(&v.0)
    }

    fn check_len(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `(positive, negative)` eigenvalue counts, computed exactly.
    pub fn signature(&self) -> (usize, usize) {
        let (p, n, z) = linalg::inertia(&self.gram);
        debug_assert_eq!(z, 0);
        (p, n)
    }

    pub fn is_indefinite(&self) -> bool {
        let (p, n) = self.signature();
        p > 0 && n > 0
    }

    /// Positive generator of the ideal `(v, L) ⊆ Z`.
    pub fn divisor(&self, v: &LatticeVector) -> Result<Int> {
        self.check_len(v)?;
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(gcd_all(&self.pairing_vector(v)))
    }

    pub fn is_primitive(&self, v: &LatticeVector) -> Result<bool> {
        self.check_len(v)?;
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(v.content().is_one())
    }

    pub fn direct_sum(&self, other: &EvenLattice) -> EvenLattice {
        EvenLattice {
            gram: self.gram.block_diag(&other.gram),
        }
    }

    /// `L(n)`: the Gram matrix multiplied by a nonzero integer.
    pub fn rescale(&self, n: i64) -> Result<EvenLattice> {
        self.rescale_rational(n, 1)
    }

    /// `L(num/den)`; fails unless the result is even and integral.
    pub fn rescale_rational(&self, num: i64, den: i64) -> Result<EvenLattice> {
        if num == 0 || den == 0 {
            return Err(Error::NonIntegralRescale(format!("{num}/{den}")));
        }
        let factor = BigRational::new(Int::from(num), Int::from(den));
        let mut g = ZMatrix::zeros(self.rank(), self.rank());
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                let v = BigRational::from(self.gram[(i, j)].clone()) * &factor;
                if !v.is_integer() {
                    return Err(Error::NonIntegralRescale(format!("{num}/{den}")));
                }
                g[(i, j)] = v.to_integer();
            }
        }
        EvenLattice::new(g).map_err(|_| Error::NonIntegralRescale(format!("{num}/{den}")))
    }

    pub fn negated(&self) -> EvenLattice {
        EvenLattice {
            gram: self.gram.neg(),
        }
    }

    /// Saturated basis of `S^⊥ ∩ L`, as columns, whether or not the
    /// restricted form is degenerate.
    pub fn orthogonal_kernel(&self, s: &Embedding) -> ZMatrix {
        let pairing = s.matrix.transpose().mul(&self.gram);
        linalg::kernel(&pairing)
    }

    /// Orthogonal complement of a primitive sublattice, with its embedding.
    pub fn orthogonal_complement(&self, s: &Embedding) -> Result<(EvenLattice, Embedding)> {
        if s.matrix.rows() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: s.matrix.rows(),
            });
        }
        if !s.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        let basis = self.orthogonal_kernel(s);
        let gram = basis.congruence(&self.gram);
        if gram.det().is_zero() {
            return Err(Error::DegenerateSublattice);
        }
        Ok((EvenLattice { gram }, Embedding { matrix: basis }))
    }

    /// Restricts the form to the span of the given columns.
    pub fn sublattice(&self, basis: &ZMatrix) -> Result<EvenLattice> {
        EvenLattice::new(basis.congruence(&self.gram))
    }
}

pub fn hyperbolic(r: i64) -> Result<EvenLattice> {
    if r == 0 {
        return Err(Error::BadParams {
            name: "U".into(),
            reason: "U(0) is degenerate".into(),
        });
    }
    EvenLattice::from_rows(&[vec![0, r], vec![r, 0]])
}

fn signed(rows: Vec<Vec<i64>>, sign: RootSign) -> Vec<Vec<i64>> {
    match sign {
        RootSign::Positive => rows,
        RootSign::Negative => rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| -x).collect())
            .collect(),
    }
}

fn cartan(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut g = vec![vec![0i64; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in edges {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    g
}

pub fn root_a(n: usize, sign: RootSign) -> Result<EvenLattice> {
    if n == 0 {
        return Err(Error::BadParams {
            name: "A".into(),
            reason: "rank must be positive".into(),
        });
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    EvenLattice::from_rows(&signed(cartan(n, &edges), sign))
}

pub fn root_d(n: usize, sign: RootSign) -> Result<EvenLattice> {
    if n < 2 {
        return Err(Error::BadParams {
            name: "D".into(),
            reason: "D(n) needs n >= 2".into(),
        });
    }
    // chain 0..n-2, with n-2 and n-1 both attached to n-3
    let mut edges: Vec<_> = (1..n - 1).map(|i| (i - 1, i)).collect();
    if n >= 3 {
        edges.retain(|&(_, b)| b != n - 2);
        edges.push((n - 3, n - 2));
        edges.push((n - 3, n - 1));
    }
    EvenLattice::from_rows(&signed(cartan(n, &edges), sign))
}

pub fn root_e8(sign: RootSign) -> EvenLattice {
    // Bourbaki labels 1..8 -> 0..7: chain 1-3-4-5-6-7-8, node 2 on node 4
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    EvenLattice::from_rows(&signed(cartan(8, &edges), sign)).expect("E8 Cartan matrix is valid")
}

pub fn diagonal(entries: &[i64]) -> Result<EvenLattice> {
    let n = entries.len();
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { entries[i] } else { 0 })
                .collect()
        })
        .collect();
    EvenLattice::from_rows(&rows)
}

/// Standard named lattices: `U`, `U(r)`, `A(n)`, `D(n)`, `E8`, `diag(...)`.
pub fn named_lattice(name: &str, params: &[i64], sign: RootSign) -> Result<EvenLattice> {
    let bad = |reason: &str| Error::BadParams {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    let single = |params: &[i64]| -> Result<i64> {
        match params {
            [x] => Ok(*x),
            _ => Err(bad("expected exactly one integer parameter")),
        }
    };
    match name {
        "U" => match params {
            [] => hyperbolic(1),
            _ => hyperbolic(single(params)?),
        },
        "A" => {
            let n = single(params)?;
            let n = usize::try_from(n).map_err(|_| bad("rank must be positive"))?;
            root_a(n, sign)
        }
        "D" => {
            let n = single(params)?;
            let n = usize::try_from(n).map_err(|_| bad("rank must be at least 2"))?;
            root_d(n, sign)
        }
        "E8" => {
            if params.is_empty() {
                Ok(root_e8(sign))
            } else {
                Err(bad("E8 takes no parameters"))
            }
        }
        "diag" => {
            if params.is_empty() {
                return Err(bad("diag needs at least one entry"));
            }
            diagonal(params).map_err(|e| match e {
                Error::OddDiagonal(_) => bad("diagonal entries must be even"),
                Error::Degenerate => bad("diagonal entries must be nonzero"),
                other => other,
            })
        }
        _ => Err(Error::UnknownName(name.to_string())),
    }
}
