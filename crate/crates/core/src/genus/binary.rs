//! Reduction theory for even binary lattices.
//!
//! The Gram matrix `[[2a, b], [b, 2c]]` is the binary form `ax² + bxy + cy²`
//! with discriminant `D = b² − 4ac = −det`. Canonical representatives under
//! `GL₂(Z)`:
//!
//! - definite: Gauss reduced with `0 ≤ b ≤ a ≤ c` (after negating a negative
//!   definite form);
//! - indefinite, `D` not a square: the lexicographically least form among
//!   the reduction cycles of the form and of its mirror `(a, −b, c)`;
//! - `D = n²`: `[[0, n], [n, k]]` with `0 ≤ k < 2n`, least over the two
//!   isotropic lines.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, LatticeVector};
use crate::linalg::{self, Int, ZMatrix};

/// `transformᵀ · G · transform = gram`, with `transform` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub gram: ZMatrix,
    pub transform: ZMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Form {
    a: Int,
    b: Int,
    c: Int,
}

impl Form {
    fn from_gram(g: &ZMatrix) -> Form {
        Form {
            a: &g[(0, 0)] / 2,
            b: g[(0, 1)].clone(),
            c: &g[(1, 1)] / 2,
        }
    }

    fn gram(&self) -> ZMatrix {
        ZMatrix::from_rows(&[
            vec![&self.a * 2, self.b.clone()],
            vec![self.b.clone(), &self.c * 2],
        ])
    }

    fn disc(&self) -> Int {
        &self.b * &self.b - Int::from(4) * &self.a * &self.c
    }
}

/// A form together with the basis change that produced it.
#[derive(Clone, Debug)]
struct Tracked {
    form: Form,
    p: ZMatrix,
}

impl Tracked {
    fn apply(&mut self, m: [[i64; 2]; 2]) {
        let m = ZMatrix::from_rows(&[vec![m[0][0], m[0][1]], vec![m[1][0], m[1][1]]]);
        self.apply_matrix(&m);
    }

    fn apply_matrix(&mut self, m: &ZMatrix) {
        self.form = Form::from_gram(&m.congruence(&self.form.gram()));
        self.p = self.p.mul(m);
    }

    fn shear(&mut self, t: &Int) {
        let m = ZMatrix::from_rows(&[vec![Int::one(), t.clone()], vec![Int::zero(), Int::one()]]);
        self.apply_matrix(&m);
    }
}

pub fn canonical_form(l: &EvenLattice) -> Result<CanonicalForm> {
    if l.rank() != 2 {
        return Err(Error::NotRank2);
    }
    let start = Tracked {
        form: Form::from_gram(l.gram()),
        p: ZMatrix::identity(2),
    };
    let d = start.form.disc();
    let best = if d.is_negative() {
        definite(start)
    } else {
        let n = d.sqrt();
        if &n * &n == d {
            square(start, &n)
        } else {
            indefinite(start, &d)
        }
    };
    Ok(CanonicalForm {
        gram: best.form.gram(),
        transform: best.p,
    })
}

fn definite(mut t: Tracked) -> Tracked {
    let negative = t.form.a.is_negative();
    if negative {
        t.form = Form {
            a: -&t.form.a,
            b: -&t.form.b,
            c: -&t.form.c,
        };
    }
    loop {
        // b into (−a, a]
        let two_a = &t.form.a * 2;
        let k = (&t.form.a - &t.form.b).div_floor(&two_a);
        if !k.is_zero() {
            t.shear(&k);
        }
        if t.form.a > t.form.c {
            t.apply([[0, -1], [1, 0]]);
            continue;
        }
        break;
    }
    if t.form.b.is_negative() {
        t.apply([[1, 0], [0, -1]]);
    }
    if negative {
        t.form = Form {
            a: -&t.form.a,
            b: -&t.form.b,
            c: -&t.form.c,
        };
    }
    t
}

fn is_reduced(f: &Form, s: &Int) -> bool {
    let two_a = f.a.abs() * 2;
    f.b.is_positive() && &f.b <= s && s - &f.b < two_a && two_a <= s + &f.b
}

/// One step of the reduction operator.
fn rho(t: &mut Tracked, d: &Int, s: &Int) {
    let f = &t.form;
    let ac = f.c.abs();
    let two_ac = &ac * 2;
    let r = if &ac > s {
        &ac - (&ac + &f.b).mod_floor(&two_ac)
    } else {
        s - (s + &f.b).mod_floor(&two_ac)
    };
    let k = (&f.b + &r) / (&f.c * 2);
    let next = Form {
        a: f.c.clone(),
        b: r.clone(),
        c: (&r * &r - d) / (&f.c * 4),
    };
    let m = ZMatrix::from_rows(&[vec![Int::zero(), -Int::one()], vec![Int::one(), k]]);
    t.p = t.p.mul(&m);
    t.form = next;
}

fn indefinite(start: Tracked, d: &Int) -> Tracked {
    let s = d.sqrt();
    let mut best: Option<Tracked> = None;
    let mut mirrored = start.clone();
    mirrored.apply([[1, 0], [0, -1]]);
    for mut t in [start, mirrored] {
        while !is_reduced(&t.form, &s) {
            rho(&mut t, d, &s);
        }
        let first = t.form.clone();
        loop {
            if best.as_ref().is_none_or(|b| t.form < b.form) {
                best = Some(t.clone());
            }
            rho(&mut t, d, &s);
            if t.form == first {
                break;
            }
        }
    }
    best.expect("nonempty cycle")
}

/// Primitive vectors spanning the two isotropic lines of a binary form with
/// square discriminant `n²`.
/// Generators of `O(L)` for an indefinite binary lattice whose `−det` is
/// not a square: `−id`, the automorph of one period of the reduction cycle,
/// and an improper automorph when the form is properly equivalent to its
/// mirror.
pub fn anisotropic_automorphisms(l: &EvenLattice) -> Result<Vec<ZMatrix>> {
    if l.rank() != 2 {
        return Err(Error::NotRank2);
    }
    let start = Tracked {
        form: Form::from_gram(l.gram()),
        p: ZMatrix::identity(2),
    };
    let d = start.form.disc();
    let s = d.sqrt();
    if !d.is_positive() || &s * &s == d {
        return Err(Error::NotApplicable {
            strategy: "reduction cycle".into(),
            reason: "the form is definite or represents zero".into(),
        });
    }
    let reduce = |mut t: Tracked| {
        while !is_reduced(&t.form, &s) {
            rho(&mut t, &d, &s);
        }
        t
    };
    let base = reduce(start.clone());
    let back = base.p.inverse_integral().expect("unimodular");
    let mut t = base.clone();
    let mut cycle = vec![];
    loop {
        rho(&mut t, &d, &s);
        cycle.push(t.clone());
        if t.form == base.form {
            break;
        }
    }
    let mut out = vec![ZMatrix::identity(2).neg(), t.p.mul(&back)];
    let mut mirrored = start;
    mirrored.apply([[1, 0], [0, -1]]);
    let mut m = reduce(mirrored);
    let first = m.form.clone();
    loop {
        if m.form == base.form {
            out.push(m.p.mul(&back));
            break;
        }
        rho(&mut m, &d, &s);
        if m.form == first {
            break;
        }
    }
    Ok(out)
}

fn lines_of(f: &Form, n: &Int) -> Vec<Vec<Int>> {
    let mut lines: Vec<Vec<Int>> = vec![];
    if f.a.is_zero() {
        lines.push(vec![Int::one(), Int::zero()]);
        lines.push(vec![f.c.clone(), -&f.b]);
    } else {
        for sign in [1, -1] {
            lines.push(vec![-&f.b + n * sign, &f.a * 2]);
        }
    }
    lines
        .into_iter()
        .map(|v| {
            let g = linalg::gcd_all(&v);
            let v: Vec<Int> = v.iter().map(|x| x / &g).collect();
            LatticeVector(v).sign_normalized().0
        })
        .collect()
}

/// The two isotropic lines of a rank-2 lattice, or none when `−det` is not
/// a square.
pub fn isotropic_lines(l: &EvenLattice) -> Result<Vec<LatticeVector>> {
    if l.rank() != 2 {
        return Err(Error::NotRank2);
    }
    let f = Form::from_gram(l.gram());
    let d = f.disc();
    if d.is_negative() {
        return Ok(vec![]);
    }
    let n = d.sqrt();
    if &n * &n != d {
        return Ok(vec![]);
    }
    let mut lines: Vec<LatticeVector> = lines_of(&f, &n).into_iter().map(LatticeVector).collect();
    lines.sort();
    Ok(lines)
}

fn square(start: Tracked, n: &Int) -> Tracked {
    let lines = lines_of(&start.form, n);
    let mut best: Option<Tracked> = None;
    for v in lines {
        let basis = linalg::complete_to_basis(&v).expect("primitive line");
        let mut t = start.clone();
        t.apply_matrix(&basis);
        debug_assert!(t.form.a.is_zero());
        if t.form.b.is_negative() {
            t.apply([[1, 0], [0, -1]]);
        }
        // (w + k v, w + k v) = 2c + 2kn
        let twice_c: Int = &t.form.c * 2;
        let two_n: Int = n * 2;
        let k = -twice_c.div_floor(&two_n);
        if !k.is_zero() {
            t.shear(&k);
        }
        if best.as_ref().is_none_or(|bst| t.form < bst.form) {
            best = Some(t);
        }
    }
    best.expect("two isotropic lines")
}

/// Every canonical form with the given signature and `|det|`, sorted.
pub(crate) fn forms_with_det(signature: (usize, usize), det: u64) -> Vec<ZMatrix> {
    let delta = Int::from(det);
    let mut out: Vec<ZMatrix> = vec![];
    match signature {
        (2, 0) | (0, 2) => {
            // 4ac − b² = Δ with 0 ≤ b ≤ a ≤ c, so 3a² ≤ Δ
            let mut a = Int::one();
            while Int::from(3) * &a * &a <= delta {
                let mut b = Int::zero();
                while b <= a {
                    let num = &delta + &b * &b;
                    let four_a = &a * 4;
                    if num.is_multiple_of(&four_a) {
                        let c = &num / &four_a;
                        if c >= a {
                            let f = Form {
                                a: a.clone(),
                                b: b.clone(),
                                c,
                            };
                            let g = f.gram();
                            out.push(if signature == (0, 2) { g.neg() } else { g });
                        }
                    }
                    b += 1;
                }
                a += 1;
            }
        }
        (1, 1) => {
            let n = delta.sqrt();
            if &n * &n == delta {
                let mut k = Int::zero();
                while k < &n * 2 {
                    out.push(ZMatrix::from_rows(&[
                        vec![Int::zero(), n.clone()],
                        vec![n.clone(), k.clone()],
                    ]));
                    k += 2;
                }
            } else {
                // reduced forms: 0 < b ≤ s and s − b < 2|a| ≤ s + b, with 4ac = b² − Δ
                let s = delta.sqrt();
                let mut b = Int::one();
                while b <= s {
                    let num = &b * &b - &delta;
                    let mut two_a: Int = &s - &b + 1;
                    while two_a <= &s + &b {
                        if two_a.is_even() {
                            let abs_a: Int = &two_a / 2;
                            for a in [abs_a.clone(), -abs_a.clone()] {
                                let four_a: Int = &a * 4;
                                if num.is_multiple_of(&four_a) {
                                    let c = &num / &four_a;
                                    out.push(Form { a, b: b.clone(), c }.gram());
                                }
                            }
                        }
                        two_a += 1;
                    }
                    b += 1;
                }
            }
        }
        _ => {}
    }
    let mut canon: Vec<ZMatrix> = out
        .into_iter()
        .filter_map(|g| EvenLattice::new(g).ok())
        .map(|l| canonical_form(&l).expect("rank 2").gram)
        .collect();
    canon.sort_by_key(|x| x.to_rows());
    canon.dedup();
    canon
}
