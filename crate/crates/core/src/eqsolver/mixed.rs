//! Equations over two independent bases with no vanishing proper sub-sum and
//! a fixed pair of dominant terms: explicit exponent bounds from linear forms
//! in logarithms and a bounded enumeration.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cells::Completeness;
use crate::numth::{log_int, padic_valuation, select_prime, BigRat, DirectedLog};

/// Univariate polynomial with rational coefficients, lowest degree first.
pub type Poly = Vec<BigRat>;

/// Window and gap data for one choice of dominant terms `p1` (base α) and
/// `p2` (base β). Polynomials are in `x = ln(1 + max(n_{p1}, n_{p2}))`.
#[derive(Clone, Debug)]
pub struct GapBounds {
    /// `n_{p1} ≥ (ln β/ln α)·n_{p2} − xi1`
    pub xi1: BigRat,
    /// `n_{p2} ≥ (ln α/ln β)·n_{p1} − xi2`
    pub xi2: BigRat,
    /// `polys[j]` bounds the gap to the j-th largest term, `polys[0] = polys[1] = 1`.
    pub polys: Vec<Poly>,
    kappa1: BigRat,
    c0: BigRat,
    k0: BigRat,
    log_sum: BigRat,
    lmin: BigRat,
}

fn prec() -> BigRat {
    crate::numth::enclosure_floor()
}

fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

fn ln(x: &BigInt) -> DirectedLog {
    log_int(x, &prec()).expect("positive argument")
}

/// Upper bound of `num / den` for an enclosure `den > 0`.
fn div_up(num: &BigRat, den: &DirectedLog) -> BigRat {
    if num.is_negative() {
        num / &den.hi
    } else {
        num / &den.lo
    }
}

fn poly_eval(p: &[BigRat], x: &BigRat) -> BigRat {
    p.iter().rev().fold(BigRat::zero(), |acc, c| acc * x + c)
}

fn poly_add(a: &[BigRat], b: &[BigRat]) -> Poly {
    (0..a.len().max(b.len()))
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
        .collect()
}

fn poly_scale(a: &[BigRat], k: &BigRat) -> Poly {
    a.iter().map(|c| c * k).collect()
}

/// `(c0 + x)·p`
fn poly_mul_linear(p: &[BigRat], c0: &BigRat) -> Poly {
    let mut out = vec![BigRat::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] += c * c0;
        out[i + 1] += c;
    }
    out
}

impl GapBounds {
    /// `κ1·(c0 + x)·(K0 + L·p)`, the linear-forms bound on `−ln|Λ|`.
    fn linear_forms(&self, p: &[BigRat]) -> Poly {
        let inner = poly_add(&[self.k0.clone()], &poly_scale(p, &self.log_sum));
        poly_scale(&poly_mul_linear(&inner, &self.c0), &self.kappa1)
    }
}

pub fn mixed_gap_bounds(coeffs: &[BigInt], bases: &[BigInt], d: &BigInt, p1: usize, p2: usize) -> GapBounds {
    let (a, b) = (&bases[p1], &bases[p2]);
    let (lna, lnb) = (ln(a), ln(b));
    let abs_sum = |skip: Option<usize>| -> BigInt {
        d.abs() + coeffs.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, c)| c.abs()).sum::<BigInt>()
    };
    let xi2 = div_up(&(ln(&abs_sum(Some(p1))).hi - ln(&coeffs[p1].abs()).lo), &lnb);
    let xi1 = div_up(&(ln(&abs_sum(Some(p2))).hi - ln(&coeffs[p2].abs()).lo), &lna);
    let side_sum = |g: &BigInt| -> BigInt {
        coeffs.iter().zip(bases).filter(|(_, z)| *z == g).map(|(c, _)| c.abs()).sum()
    };
    let k0 = ln(&side_sum(a)).hi + ln(&side_sum(b)).hi + rat(4, 25);
    // three logarithms: 30^6 · 3^4.5 with √3 < 1.733
    let kappa1 = rat(7, 5)
        * BigRat::from_integer(num_traits::pow(BigInt::from(30), 6) * 81)
        * rat(1733, 1000)
        * &lna.hi
        * &lnb.hi;
    let mut gb = GapBounds {
        xi1,
        xi2,
        polys: vec![vec![BigRat::one()]; 2.min(coeffs.len())],
        kappa1,
        c0: BigRat::one() + ln(&BigInt::from(3)).hi,
        k0,
        log_sum: &lna.hi + &lnb.hi,
        lmin: lna.lo.clone().min(lnb.lo.clone()),
    };
    let lk2 = ln(&abs_sum(None)).hi;
    for _ in 2..coeffs.len() {
        let p = gb.polys.last().unwrap().clone();
        let lf = poly_add(&gb.linear_forms(&p), &[lk2.clone()]);
        let next = poly_add(&poly_scale(&lf, &gb.lmin.recip()), &p);
        gb.polys.push(next);
    }
    gb
}

/// Smallest power of two `B` such that `n < R(ln(1 + n))` forces `n < B`.
/// `R` must have nonnegative coefficients.
pub fn polylog_fixpoint(r: &[BigRat]) -> BigInt {
    let ln2_hi = rat(6932, 10000);
    let deg = BigRat::from_integer(BigInt::from(r.len().saturating_sub(1) as u64));
    let two_deg = &deg + &deg;
    let mut k = 0u32;
    loop {
        let x = BigRat::from_integer(BigInt::from(k + 1)) * &ln2_hi + BigRat::one();
        let pow = BigRat::from_integer(BigInt::one() << k);
        if x >= two_deg && pow >= poly_eval(r, &x) {
            return BigInt::one() << k;
        }
        k += 1;
    }
}

/// Bound on `max(n_{p1}, n_{p2})` over solutions with `p1`, `p2` dominant.
pub fn exponent_bound(coeffs: &[BigInt], bases: &[BigInt], d: &BigInt, p1: usize, p2: usize, gb: &GapBounds) -> BigInt {
    let pl = gb.polys.last().unwrap();
    if !d.is_zero() {
        let lf = poly_add(&gb.linear_forms(pl), &[ln(&d.abs()).hi]);
        return polylog_fixpoint(&poly_add(&poly_scale(&lf, &gb.lmin.recip()), pl));
    }
    let (a, b) = (&bases[p1], &bases[p2]);
    // s: smaller base; xi_t bounds the larger-base exponent from below
    let (s, t, xi_t, xi_s) = if a < b { (a, b, &gb.xi2, &gb.xi1) } else { (b, a, &gb.xi1, &gb.xi2) };
    let p = select_prime(s, t).expect("independent bases");
    let vs = padic_valuation(&p, s).unwrap().unwrap_or(0);
    let vt = padic_valuation(&p, t).unwrap().unwrap_or(0);
    let target = BigRat::new(BigInt::from(vs), BigInt::from(vt));
    let mut pr = prec();
    let (lns, lnt) = loop {
        let (x, y) = (log_int(s, &pr).unwrap(), log_int(t, &pr).unwrap());
        if &x.lo / &y.hi > target && y.lo > x.hi {
            break (x, y);
        }
        pr /= BigInt::from(1u64 << 16);
    };
    let theta = &lns.lo / &lnt.hi - target;
    let lp_vt = ln(&p).lo * BigInt::from(vt);
    let sum_c: BigInt = coeffs.iter().map(|c| c.abs()).sum();
    let zero = BigRat::zero();
    let slope = BigRat::one() + &lns.hi / &lp_vt;
    let constant = xi_t.max(&zero) + ln(&sum_c).hi / &lp_vt;
    let r1 = poly_scale(&poly_add(&[constant], &poly_scale(pl, &slope)), &theta.recip());
    let b1 = polylog_fixpoint(&r1);
    // larger-base exponent at least the smaller-base one
    let b2 = (xi_s.max(&zero) / (&lnt.lo / &lns.hi - BigRat::one())).ceil().to_integer() + 1;
    b1.max(b2)
}

const P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn residue(x: &BigInt) -> u64 {
    x.mod_floor(&BigInt::from(P)).to_u64().unwrap()
}

struct PowTable {
    base: u64,
    pows: Vec<u64>,
    index: HashMap<u64, u64>,
}

impl PowTable {
    fn new(base: u64) -> Self {
        let mut t = PowTable { base, pows: vec![], index: HashMap::new() };
        t.ensure(0);
        t
    }

    fn ensure(&mut self, e: u64) {
        while self.pows.len() as u64 <= e {
            let next = match self.pows.last() {
                None => 1,
                Some(&x) => mulmod(x, self.base),
            };
            self.index.entry(next).or_insert(self.pows.len() as u64);
            self.pows.push(next);
        }
    }

    fn get(&mut self, e: u64) -> u64 {
        self.ensure(e);
        self.pows[e as usize]
    }
}

fn ln_f64(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 900 {
        x.to_f64().unwrap().ln()
    } else {
        (x >> (bits - 64) as usize).to_f64().unwrap().ln() + (bits - 64) as f64 * std::f64::consts::LN_2
    }
}

#[derive(Clone, Debug)]
pub struct MixedOutcome {
    pub solutions: Vec<Vec<u64>>,
    pub completeness: Completeness,
    pub enumerated: u64,
}

/// Equation, dominance of `p1`, `p2` and no vanishing proper sub-sum.
pub fn verify_ordered(coeffs: &[BigInt], bases: &[BigInt], d: &BigInt, exps: &[u64], p1: usize, p2: usize) -> bool {
    let l = coeffs.len();
    let full = (1usize << l) - 1;
    let vals: Vec<BigInt> = (0..l).map(|i| num_traits::pow(bases[i].clone(), exps[i] as usize)).collect();
    let terms: Vec<BigInt> = coeffs.iter().zip(&vals).map(|(c, v)| c * v).collect();
    if &terms.iter().sum::<BigInt>() != d {
        return false;
    }
    if (0..l).any(|j| j != p1 && j != p2 && (vals[j] > vals[p1] || vals[j] > vals[p2])) {
        return false;
    }
    // subset sums, each mask extending the one without its lowest bit
    let mut sums = vec![BigInt::zero(); full];
    for m in 1..full {
        let low = m.trailing_zeros() as usize;
        sums[m] = &sums[m & (m - 1)] + &terms[low];
        if sums[m].is_zero() {
            return false;
        }
    }
    true
}

/// Solutions with `p1` (base α) and `p2` (base β) the two dominant terms, all
/// same-base gaps above `gap` and no vanishing proper sub-sum.
///
/// Tuples are enumerated by increasing `n_{p1}`; the last free exponent is
/// located through a residue table modulo 2^61 − 1 and every hit is checked
/// exactly. Complete iff `n_{p1}` reaches the proven bound within `budget`
/// candidates.
pub fn solve_mixed_ordered(
    coeffs: &[BigInt],
    bases: &[BigInt],
    d: &BigInt,
    p1: usize,
    p2: usize,
    gap: u64,
    budget: u64,
) -> MixedOutcome {
    let l = coeffs.len();
    let truncated = MixedOutcome { solutions: vec![], completeness: Completeness::BudgetTruncated, enumerated: 0 };
    let gb = mixed_gap_bounds(coeffs, bases, d, p1, p2);
    let bound = exponent_bound(coeffs, bases, d, p1, p2, &gb).to_u64().unwrap_or(u64::MAX);
    let last = if l == 2 { p2 } else { (0..l).rev().find(|&i| i != p1 && i != p2).unwrap() };
    let others: Vec<usize> = (0..l).filter(|&i| i != p1 && i != p2 && i != last).collect();
    let (a, b) = (&bases[p1], &bases[p2]);
    let cr: Vec<u64> = coeffs.iter().map(residue).collect();
    let (ar, br) = (residue(a), residue(b));
    if ar == 0 || br == 0 || cr[last] == 0 {
        return truncated;
    }
    let inv_last = powmod(cr[last], P - 2);
    let dr = residue(d);
    let mut tab_a = PowTable::new(ar);
    let mut tab_b = PowTable::new(br);
    let is_a = |i: usize| &bases[i] == a;
    let (lna, lnb) = (ln_f64(a), ln_f64(b));
    let abs_sum = |skip: usize| -> BigInt {
        d.abs() + coeffs.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, c)| c.abs()).sum::<BigInt>()
    };
    // |c_{p1}|·α^{n1} ≤ K2·β^{n2} and |c_{p2}|·β^{n2} ≤ K1·α^{n1}
    let lo_shift = ln_f64(&coeffs[p1].abs()) - ln_f64(&abs_sum(p1));
    let hi_shift = ln_f64(&abs_sum(p2)) - ln_f64(&coeffs[p2].abs());

    let mut found: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut enumerated = 0u64;
    let mut exps = vec![0u64; l];
    let mut n1 = 0u64;
    let completeness = loop {
        if n1 > bound {
            break Completeness::Complete;
        }
        if enumerated >= budget {
            break Completeness::BudgetTruncated;
        }
        let x = n1 as f64 * lna;
        let n2_lo = (((x + lo_shift) / lnb).ceil() - 1.0).max(0.0) as u64;
        let n2_hi = ((((x + hi_shift) / lnb).floor() + 1.0).max(0.0) as u64).min(bound);
        exps[p1] = n1;
        let t1 = mulmod(cr[p1], tab_a.get(n1));
        if l == 2 {
            enumerated += 1;
            tab_b.ensure(n2_hi);
            let target = mulmod((dr + P - t1) % P, inv_last);
            if let Some(&e) = tab_b.index.get(&target) {
                exps[p2] = e;
                if verify_ordered(coeffs, bases, d, &exps, p1, p2) {
                    found.insert(exps.clone());
                }
            }
            n1 += 1;
            continue;
        }
        let mut stop = false;
        for n2 in n2_lo..=n2_hi {
            exps[p2] = n2;
            let t2 = mulmod(cr[p2], tab_b.get(n2));
            let cap = |i: usize| if is_a(i) { n1.checked_sub(gap + 1) } else { n2.checked_sub(gap + 1) };
            let caps: Option<Vec<u64>> = others.iter().map(|&i| cap(i)).collect();
            let (Some(caps), Some(last_cap)) = (caps, cap(last)) else { continue };
            let tab_last = if is_a(last) { &mut tab_a } else { &mut tab_b };
            tab_last.ensure(last_cap);
            let mut odo = vec![0u64; others.len()];
            loop {
                if enumerated >= budget {
                    stop = true;
                    break;
                }
                enumerated += 1;
                let spread = others.iter().zip(&odo).enumerate().all(|(i, (&oi, &ei))| {
                    others[..i].iter().zip(&odo[..i]).all(|(&oj, &ej)| is_a(oi) != is_a(oj) || ei.abs_diff(ej) > gap)
                });
                if spread {
                    let mut rest = (t1 + t2) % P;
                    for (&i, &e) in others.iter().zip(&odo) {
                        exps[i] = e;
                        let z = if is_a(i) { tab_a.get(e) } else { tab_b.get(e) };
                        rest = (rest + mulmod(cr[i], z)) % P;
                    }
                    let target = mulmod((dr + P - rest) % P, inv_last);
                    let index = if is_a(last) { &tab_a.index } else { &tab_b.index };
                    if let Some(&e) = index.get(&target) {
                        exps[last] = e;
                        if verify_ordered(coeffs, bases, d, &exps, p1, p2) {
                            found.insert(exps.clone());
                        }
                    }
                }
                // odometer step
                let mut k = 0;
                while k < odo.len() {
                    if odo[k] < caps[k] {
                        odo[k] += 1;
                        break;
                    }
                    odo[k] = 0;
                    k += 1;
                }
                if k == odo.len() {
                    break;
                }
            }
            if stop {
                break;
            }
        }
        if stop {
            break Completeness::BudgetTruncated;
        }
        n1 += 1;
    };
    MixedOutcome { solutions: found.into_iter().collect(), completeness, enumerated }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| bi(x)).collect()
    }

    #[test]
    fn xi_matches_direct_formula() {
        // 2^n1 − 3^n2 = 9: |d| + |c2| = 10, |c1| = 1
        let gb = mixed_gap_bounds(&v(&[1, -1]), &v(&[2, 3]), &bi(9), 0, 1);
        assert!(gb.xi2 >= BigRat::new(bi(2302585), bi(1000000)) / BigRat::new(bi(1098613), bi(1000000)));
        assert_eq!(gb.polys, vec![vec![BigRat::one()]; 2]);
    }

    #[test]
    fn gap_polys_grow_in_degree() {
        let gb = mixed_gap_bounds(&v(&[1, -1, 1, 1]), &v(&[2, 3, 2, 3]), &bi(5), 0, 1);
        assert_eq!(gb.polys.len(), 4);
        assert_eq!(gb.polys[2].len(), 2);
        assert_eq!(gb.polys[3].len(), 3);
        assert!(gb.polys[2][1] >= &gb.kappa1 / ln(&bi(3)).hi);
    }

    #[test]
    fn fixpoint_dominates() {
        let r = vec![BigRat::from_integer(bi(1000)), BigRat::from_integer(bi(50))];
        let b = polylog_fixpoint(&r).to_f64().unwrap();
        for n in [b, 2.0 * b, 10.0 * b] {
            assert!(n >= 1000.0 + 50.0 * (1.0 + n).ln());
        }
    }

    #[test]
    fn bounds_are_finite() {
        let b = exponent_bound(&v(&[1, -1]), &v(&[2, 3]), &bi(0), 0, 1, &mixed_gap_bounds(&v(&[1, -1]), &v(&[2, 3]), &bi(0), 0, 1));
        // two terms and d = 0: the valuation argument alone gives a small bound
        assert!(b < bi(64));
        let gb = mixed_gap_bounds(&v(&[1, -1]), &v(&[2, 3]), &bi(5), 0, 1);
        assert!(exponent_bound(&v(&[1, -1]), &v(&[2, 3]), &bi(5), 0, 1, &gb) > bi(1000));
    }

    #[test]
    fn powers_of_two_and_three_meet_once() {
        let out = solve_mixed_ordered(&v(&[1, -1]), &v(&[2, 3]), &bi(0), 0, 1, 3, 2000);
        assert_eq!(out.solutions, vec![vec![0, 0]]);
        assert_eq!(out.completeness, Completeness::Complete);
    }

    #[test]
    fn offset_family_ordering() {
        // 15·3^n1 − 5·3^n2 + 2^n3 = 8 with 2^n3 and 3^n2 dominant
        let out = solve_mixed_ordered(&v(&[15, -5, 1]), &v(&[3, 3, 2]), &bi(8), 2, 1, 5, 5000);
        assert!(out.solutions.contains(&vec![1, 8, 15]));
    }

    #[test]
    fn sum_of_two_powers_of_two() {
        // 2^a + 2^b = 3^c restricted to one dominant 2-power
        let out = solve_mixed_ordered(&v(&[1, 1, -1]), &v(&[2, 2, 3]), &bi(0), 1, 2, 0, 5000);
        assert!(out.solutions.contains(&vec![0, 3, 2]));
        assert!(out.solutions.contains(&vec![0, 1, 1]));
    }
}
