//! Exponent solution sets of `C z = d` where `z_i = γ_i^{n_i}`.
//!
//! A single equation splits into three parts: two same-base exponents
//! within `N` of each other (substitute and recurse), some proper sub-sum
//! vanishing (recurse on both halves), or neither, in which case the two
//! dominant terms have different bases and [`mixed::solve_mixed_ordered`]
//! enumerates the finitely many solutions.

pub mod cells;
pub mod mixed;
pub mod single;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub use cells::{cell_normalize, AClassCell, AClassRepr, Completeness};
pub use mixed::{mixed_gap_bounds, solve_mixed_ordered, GapBounds, MixedOutcome};
pub use single::solve_single_base;

use crate::ast::is_power_of;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

type Term = (usize, BigInt);

pub(crate) struct Solver<'a> {
    bases: &'a [BigInt],
    budget: u64,
    memo: HashMap<(Vec<Term>, BigInt), AClassRepr>,
}

/// Smallest `N` with `γ^N > bound` for every base `γ` among `terms`.
fn gap_bound(bases: &[BigInt], terms: &[Term], bound: &BigInt) -> u64 {
    terms
        .iter()
        .map(|(i, _)| {
            let mut n = 0;
            let mut p = BigInt::from(1);
            while &p <= bound {
                p *= &bases[*i];
                n += 1;
            }
            n
        })
        .max()
        .unwrap_or(0)
}

impl<'a> Solver<'a> {
    pub(crate) fn new(bases: &'a [BigInt], budget: u64) -> Self {
        Solver { bases, budget, memo: HashMap::new() }
    }

    fn arity(&self) -> usize {
        self.bases.len()
    }

    /// `terms` carry nonzero coefficients on distinct columns.
    pub(crate) fn solve(&mut self, mut terms: Vec<Term>, d: BigInt) -> AClassRepr {
        terms.sort();
        let key = (terms, d);
        if let Some(r) = self.memo.get(&key) {
            return AClassRepr { enumerated: 0, ..r.clone() };
        }
        let r = self.solve_uncached(&key.0, &key.1);
        self.memo.insert(key, r.clone());
        r
    }

    fn solve_uncached(&mut self, terms: &[Term], d: &BigInt) -> AClassRepr {
        let l = self.arity();
        if terms.is_empty() {
            return if d.is_zero() { AClassRepr::universe(l) } else { AClassRepr::empty(l) };
        }
        // every power is at least 1
        let sum: BigInt = terms.iter().map(|(_, c)| c).sum();
        if terms.iter().all(|(_, c)| c.is_positive()) && d < &sum
            || terms.iter().all(|(_, c)| c.is_negative()) && d > &sum
        {
            return AClassRepr::empty(l);
        }
        if let [(i, c)] = terms {
            let (q, r) = (d / c, d % c);
            return match is_power_of(&q, &self.bases[*i]) {
                Some(n) if r.is_zero() => AClassRepr::from_cells(l, [AClassCell::fixed(&[(*i, n)])]),
                _ => AClassRepr::empty(l),
            };
        }
        let bound = d.abs() + terms.iter().map(|(_, c)| c.abs()).sum::<BigInt>();
        let gap = gap_bound(self.bases, terms, &bound);
        let mut acc = AClassRepr::empty(l);

        // two same-base exponents at distance k ≤ gap
        for (x, (a, ca)) in terms.iter().enumerate() {
            for (y, (b, cb)) in terms.iter().enumerate() {
                if x == y || self.bases[*a] != self.bases[*b] {
                    continue;
                }
                let mut scale = BigInt::from(1);
                for k in 0..=gap {
                    if k > 0 || x < y {
                        let merged = ca * &scale + cb;
                        let reduced: Vec<Term> = terms
                            .iter()
                            .filter(|(i, _)| i != a && i != b)
                            .cloned()
                            .chain((!merged.is_zero()).then(|| (*b, merged)))
                            .collect();
                        let sub = self.solve(reduced, d.clone());
                        acc = acc.union(&sub.with_offset(*a, *b, k as i64));
                    }
                    scale *= &self.bases[*a];
                }
            }
        }

        let base0 = &self.bases[terms[0].0];
        let mixed = terms.iter().any(|(i, _)| &self.bases[*i] != base0);
        if !mixed {
            return acc;
        }

        // a proper sub-sum vanishes
        let full = (1usize << terms.len()) - 1;
        for mask in 1..full {
            if (mask as u32).count_ones() < 2 {
                continue;
            }
            let part: Vec<Term> = (0..terms.len()).filter(|j| mask >> j & 1 == 1).map(|j| terms[j].clone()).collect();
            let rest: Vec<Term> = (0..terms.len()).filter(|j| mask >> j & 1 == 0).map(|j| terms[j].clone()).collect();
            // the shorter side first; an empty side makes the other irrelevant
            let (first, second) = if rest.len() <= part.len() {
                (self.solve(rest, d.clone()), (part, BigInt::zero()))
            } else {
                (self.solve(part, BigInt::zero()), (rest, d.clone()))
            };
            if first.is_empty() {
                acc = acc.union(&first);
                continue;
            }
            let other = self.solve(second.0, second.1);
            acc = acc.union(&first.intersect(&other));
        }

        // dominant terms on different bases
        let coeffs: Vec<BigInt> = terms.iter().map(|(_, c)| c.clone()).collect();
        let bases: Vec<BigInt> = terms.iter().map(|(i, _)| self.bases[*i].clone()).collect();
        for p1 in 0..terms.len() {
            for p2 in 0..terms.len() {
                if &bases[p1] != base0 || &bases[p2] == base0 {
                    continue;
                }
                let out = solve_mixed_ordered(&coeffs, &bases, d, p1, p2, gap, self.budget);
                let cells = out.solutions.iter().map(|e| {
                    let fixes: Vec<(usize, u64)> = terms.iter().zip(e).map(|((i, _), n)| (*i, *n)).collect();
                    AClassCell::fixed(&fixes)
                });
                let part = AClassRepr {
                    completeness: out.completeness,
                    enumerated: out.enumerated,
                    ..AClassRepr::from_cells(l, cells)
                };
                acc = acc.union(&part);
            }
        }
        acc
    }
}

/// Solution set of `C z = d` over columns with base values `bases`, which
/// take at most two multiplicatively independent values.
pub fn solve_equalities(c: &[Vec<BigInt>], d: &[BigInt], bases: &[BigInt], budget: u64) -> AClassRepr {
    let mut solver = Solver::new(bases, budget);
    let mut acc = AClassRepr::universe(bases.len());
    for (row, rhs) in c.iter().zip(d) {
        let terms: Vec<Term> = row.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect();
        let r = solver.solve(terms, rhs.clone());
        acc = acc.intersect(&r);
        if acc.is_empty() && acc.completeness == Completeness::Complete {
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn offset_family_example() {
        let r = solve_equalities(&[v(&[15, -5, 1])], &v(&[8]), &v(&[3, 3, 2]), 20_000);
        assert!(r.cells.contains(&AClassCell::fixed(&[(0, 0), (1, 3), (2, 7)])));
        assert!(r.cells.contains(&AClassCell::fixed(&[(0, 1), (1, 8), (2, 15)])));
        assert!(r.cells.contains(&AClassCell { offsets: vec![(1, 0, 1)], fixes: vec![(2, 3)] }));
        assert_eq!(r.cells.len(), 3);
    }

    #[test]
    fn systems() {
        let r = solve_equalities(&[v(&[1, -1, 0]), v(&[0, 0, 1])], &v(&[0, 9]), &v(&[2, 2, 3]), 1000);
        assert_eq!(r.cells, vec![AClassCell { offsets: vec![(1, 0, 0)], fixes: vec![(2, 2)] }]);
        let r = solve_equalities(&[v(&[1]), v(&[1])], &v(&[2, 4]), &v(&[2]), 1000);
        assert!(r.is_empty());
        assert_eq!(r.completeness, Completeness::Complete);
    }
}
