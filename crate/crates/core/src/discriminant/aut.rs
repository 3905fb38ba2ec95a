//! Enumeration of `O(A, q)` and isomorphism search between finite forms.
//!
//! Two interchangeable enumerators are provided: a whole-group backtracking
//! search over generator images, and a search that splits `A` into its
//! prime-power components, enumerates each, and recombines by the Chinese
//! remainder theorem.

use super::{FiniteQuadraticForm, FqfElement, FqfIsometry};
use crate::config::Budget;
use crate::error::{Error, Result};

/// A strategy for listing every automorphism of a finite quadratic form.
pub trait AutEnumerator: Send + Sync {
    fn name(&self) -> &'static str;

    /// All automorphisms, sorted.
    fn enumerate(&self, form: &FiniteQuadraticForm, budget: &Budget) -> Result<Vec<FqfIsometry>>;
}

/// Backtracking over generator images in the whole group.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectSearch;

/// Product of the automorphism groups of the prime-power components.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrimarySplit;

impl AutEnumerator for DirectSearch {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn enumerate(&self, form: &FiniteQuadraticForm, budget: &Budget) -> Result<Vec<FqfIsometry>> {
        form.check_budget(budget)?;
        let mut maps = matching_maps(form, form, usize::MAX, budget)?;
        maps.sort();
        Ok(maps)
    }
}

impl AutEnumerator for PrimarySplit {
    fn name(&self) -> &'static str {
        "primary"
    }

    fn enumerate(&self, form: &FiniteQuadraticForm, budget: &Budget) -> Result<Vec<FqfIsometry>> {
        form.check_budget(budget)?;
        let parts = form.primary_parts();
        let mut groups = Vec::with_capacity(parts.len());
        let mut total: u64 = 1;
        for part in &parts {
            let auts = matching_maps(&part.form, &part.form, usize::MAX, budget)?;
            total = total.saturating_mul(auts.len() as u64);
            if total > budget.max_group {
                return Err(Error::BudgetExceeded {
                    what: "automorphism group order".into(),
                    size: total,
                    budget: budget.max_group,
                });
            }
            groups.push(auts);
        }

        let n = form.exponent();
        let k = form.min_generators();
        // idempotent e_p ≡ 1 mod p^a, ≡ 0 mod N / p^a
        let idempotents: Vec<u64> = parts
            .iter()
            .map(|part| {
                let mut pa = 1;
                while n.is_multiple_of(pa * part.prime) {
                    pa *= part.prime;
                }
                let m = n / pa;
                (m as u128 * mod_inverse(m % pa, pa) as u128 % n as u128) as u64
            })
            .collect();

        let mut out = Vec::with_capacity(total as usize);
        let mut choice = vec![0usize; groups.len()];
        loop {
            let mut images = vec![vec![0u64; k]; k];
            for (pi, part) in parts.iter().enumerate() {
                let sigma = &groups[pi][choice[pi]];
                for (local_j, &(j, cj)) in part.gens.iter().enumerate() {
                    let dj = form.invariant_factors()[j];
                    // e_p·g_j = t·(c_j·g_j)
                    let t = (idempotents[pi] % dj) / cj;
                    let img = sigma.image_of_generator(local_j);
                    for (local_i, &(i, ci)) in part.gens.iter().enumerate() {
                        let di = form.invariant_factors()[i] as u128;
                        let add = t as u128 * img.0[local_i] as u128 % di * ci as u128 % di;
                        images[j][i] = ((images[j][i] as u128 + add) % di) as u64;
                    }
                }
            }
            let images: Vec<FqfElement> = images.into_iter().map(FqfElement).collect();
            out.push(FqfIsometry::from_images(form, &images));

            // odometer over the component choices
            let mut idx = 0;
            loop {
                if idx == groups.len() {
                    out.sort();
                    return Ok(out);
                }
                choice[idx] += 1;
                if choice[idx] < groups[idx].len() {
                    break;
                }
                choice[idx] = 0;
                idx += 1;
            }
        }
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible");
    t.rem_euclid(m as i128) as u64
}

/// Maps `A → B` sending Smith generators to elements of the same order,
/// the same `q` value and the same pairwise `b` values. Stops after `limit`.
///
/// Since `b` on a discriminant form is nondegenerate, every such map is
/// injective, hence an isomorphism when `|A| = |B|`.
fn matching_maps(
    a: &FiniteQuadraticForm,
    b: &FiniteQuadraticForm,
    limit: usize,
    budget: &Budget,
) -> Result<Vec<FqfIsometry>> {
    if a.invariant_factors() != b.invariant_factors() {
        return Ok(vec![]);
    }
    let k = a.min_generators();
    if k == 0 {
        return Ok(vec![FqfIsometry::identity(a)]);
    }
    let elems = b.elements();
    let candidates: Vec<Vec<FqfElement>> = (0..k)
        .map(|j| {
            let g = a.generator(j);
            let d = a.invariant_factors()[j];
            let q = a.q_numerator(&g);
            elems
                .iter()
                .filter(|y| b.element_order(y) == d && b.q_numerator(y) == q)
                .cloned()
                .collect()
        })
        .collect();
    let b_table: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| a.b_numerator(&a.generator(i), &a.generator(j)))
                .collect()
        })
        .collect();

    let mut out = vec![];
    let mut chosen: Vec<FqfElement> = Vec::with_capacity(k);
    let mut cursor = vec![0usize; k];
    let mut level = 0;
    loop {
        if cursor[level] >= candidates[level].len() {
            if level == 0 {
                break;
            }
            cursor[level] = 0;
            level -= 1;
            chosen.pop();
            cursor[level] += 1;
            continue;
        }
        let y = &candidates[level][cursor[level]];
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, x)| b.b_numerator(x, y) == b_table[i][level]);
        if !ok {
            cursor[level] += 1;
            continue;
        }
        chosen.push(y.clone());
        if level + 1 == k {
            out.push(FqfIsometry::from_images(b, &chosen));
            if out.len() >= limit {
                return Ok(out);
            }
            if out.len() as u64 > budget.max_group {
                return Err(Error::BudgetExceeded {
                    what: "automorphism group order".into(),
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
    Ok(out)
}

/// An isomorphism `A → B` of finite quadratic forms, if one exists. The
/// witness is given as images of the Smith generators of `A` in `B`.
pub fn find_isomorphism(
    a: &FiniteQuadraticForm,
    b: &FiniteQuadraticForm,
    budget: &Budget,
) -> Result<Option<FqfIsometry>> {
    if a.invariant_factors() != b.invariant_factors() {
        return Ok(None);
    }
    a.check_budget(budget)?;
    Ok(matching_maps(a, b, 1, budget)?.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn hyperbolic_form(r: u64) -> FiniteQuadraticForm {
        let z = rat(0, 1);
        let x = rat(1, r as i64);
        FiniteQuadraticForm::from_values(
            &[r, r],
            &[z.clone(), z.clone()],
            &[vec![z.clone(), x.clone()], vec![x, z]],
        )
        .unwrap()
    }

    fn tau(mut r: u64) -> u32 {
        let mut t = 0;
        let mut p = 2;
        while p * p <= r {
            if r.is_multiple_of(p) {
                t += 1;
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            p += 1;
        }
        t + u32::from(r > 1)
    }

    fn phi(r: u64) -> u64 {
        (1..=r).filter(|&a| num_integer::gcd(a, r) == 1).count() as u64
    }

    #[test]
    fn both_enumerators_agree_on_hyperbolic_forms() {
        let budget = Budget::default();
        for r in [1u64, 2, 3, 4, 6, 12] {
            let f = if r == 1 {
                FiniteQuadraticForm::trivial()
            } else {
                hyperbolic_form(r)
            };
            let direct = DirectSearch.enumerate(&f, &budget).unwrap();
            let split = PrimarySplit.enumerate(&f, &budget).unwrap();
            assert_eq!(direct, split, "r = {r}");
            assert!(direct.iter().all(|g| g.is_automorphism(&f)));
            let expected = if r == 1 { 1 } else { (1u64 << tau(r)) * phi(r) };
            if r > 2 {
                assert_eq!(direct.len() as u64, expected, "r = {r}");
            }
        }
    }

    #[test]
    fn known_orders() {
        let budget = Budget::default();
        assert_eq!(
            DirectSearch
                .enumerate(&hyperbolic_form(3), &budget)
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            DirectSearch
                .enumerate(&hyperbolic_form(12), &budget)
                .unwrap()
                .len(),
            16
        );
    }

    #[test]
    fn budget_is_enforced() {
        let tight = Budget::with_max_order(10);
        assert!(matches!(
            DirectSearch.enumerate(&hyperbolic_form(4), &tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn isomorphism_search() {
        let budget = Budget::default();
        let f = hyperbolic_form(4);
        let w = find_isomorphism(&f, &f, &budget).unwrap().unwrap();
        assert!(w.is_automorphism(&f));
        // q(g2) = 1/2 can be repaired by g2 -> g2 + 3 g1; q(g2) = 1/4 cannot,
        // since every q value of the hyperbolic form lies in Z/2
        let z = rat(0, 1);
        let g = FiniteQuadraticForm::from_values(
            &[4, 4],
            &[z.clone(), rat(1, 2)],
            &[vec![z.clone(), rat(1, 4)], vec![rat(1, 4), rat(1, 2)]],
        )
        .unwrap();
        assert!(find_isomorphism(&f, &g, &budget).unwrap().is_some());
        let h = FiniteQuadraticForm::from_values(
            &[4, 4],
            &[z.clone(), rat(1, 4)],
            &[vec![z.clone(), rat(1, 4)], vec![rat(1, 4), rat(1, 4)]],
        )
        .unwrap();
        assert!(find_isomorphism(&f, &h, &budget).unwrap().is_none());
    }

    #[test]
    fn inverse_mod() {
        assert_eq!(mod_inverse(3, 7), 5);
        assert_eq!(mod_inverse(5, 12), 5);
    }
}
