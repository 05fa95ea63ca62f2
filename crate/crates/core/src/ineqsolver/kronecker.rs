//! Exact search for `α^{n1}/β^{n2}` inside an open rational interval.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::numth::logs::{log_enclosure, log_int, DirectedLog};
use crate::numth::BigRat;

/// Open interval `(lo, hi)`; `hi = None` is `+∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRat,
    pub hi: Option<BigRat>,
}

impl Interval {
    pub fn new(lo: BigRat, hi: Option<BigRat>) -> Self {
        Interval { lo, hi }
    }

    pub fn bounded(lo: BigRat, hi: BigRat) -> Self {
        Interval { lo, hi: Some(hi) }
    }

    pub fn is_empty(&self) -> bool {
        self.hi.as_ref().is_some_and(|h| h <= &self.lo || !h.is_positive())
    }

    /// `lo < num/den < hi` for `den > 0`.
    pub fn contains_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        let n = BigRat::from_integer(num.clone());
        let above = &self.lo * den < n;
        let below = self.hi.as_ref().is_none_or(|h| n < h * den);
        above && below
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("empty interval")]
pub struct EmptyInterval;

pub(crate) fn ln_f64(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 900 {
        x.to_f64().unwrap().ln()
    } else {
        (x >> (bits - 64) as usize).to_f64().unwrap().ln() + (bits - 64) as f64 * std::f64::consts::LN_2
    }
}

fn ln_rat(x: &BigRat) -> f64 {
    ln_f64(x.numer()) - ln_f64(x.denom())
}

/// Log enclosures used to settle float candidates without forming powers.
struct Certifier {
    ln_a: DirectedLog,
    ln_b: DirectedLog,
    ln_lo: Option<DirectedLog>,
    ln_hi: Option<DirectedLog>,
}

impl Certifier {
    fn new(alpha: &BigInt, beta: &BigInt, interval: &Interval) -> Self {
        let prec = BigRat::new(BigInt::from(1), BigInt::from(1) << 128u32);
        let ln = |x: &BigRat| log_enclosure(x, &prec).expect("positive");
        Certifier {
            ln_a: log_int(alpha, &prec).expect("positive"),
            ln_b: log_int(beta, &prec).expect("positive"),
            ln_lo: interval.lo.is_positive().then(|| ln(&interval.lo)),
            ln_hi: interval.hi.as_ref().map(ln),
        }
    }

    /// `Some(inside)` when the enclosures decide membership.
    fn decide(&self, n1: u64, n2: u64) -> Option<bool> {
        let t = self.ln_a.scale(&BigRat::from_integer(n1.into())).sub(&self.ln_b.scale(&BigRat::from_integer(n2.into())));
        let above = self.ln_lo.as_ref().map_or(Some(true), |l| {
            if t.lo > l.hi {
                Some(true)
            } else if t.hi < l.lo {
                Some(false)
            } else {
                None
            }
        });
        let below = self.ln_hi.as_ref().map_or(Some(true), |h| {
            if t.hi < h.lo {
                Some(true)
            } else if t.lo > h.hi {
                Some(false)
            } else {
                None
            }
        });
        match (above, below) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
}

/// First `(n1, n2)` in increasing `n1` with `n1 ≥ min_exp` and
/// `α^{n1}/β^{n2}` in the interval.
pub fn kronecker_search(alpha: &BigInt, beta: &BigInt, interval: &Interval, min_exp: u64) -> Result<(u64, u64), EmptyInterval> {
    kronecker_search_from(alpha, beta, interval, min_exp, 0)
}

/// As [`kronecker_search`] with a lower bound on each exponent.
///
/// Candidates are located with floating-point logarithms and accepted only
/// after an exact comparison; the scan over `n1` terminates because the
/// ratios are dense when the bases are independent.
pub fn kronecker_search_from(
    alpha: &BigInt,
    beta: &BigInt,
    interval: &Interval,
    min_a: u64,
    min_b: u64,
) -> Result<(u64, u64), EmptyInterval> {
    if interval.is_empty() {
        return Err(EmptyInterval);
    }
    let (la, lb) = (ln_f64(alpha), ln_f64(beta));
    let llo = if interval.lo.is_positive() { ln_rat(&interval.lo) } else { f64::NEG_INFINITY };
    let lhi = interval.hi.as_ref().map_or(f64::INFINITY, ln_rat);
    let mut cert: Option<Certifier> = None;
    let mut n1 = min_a;
    loop {
        let x = n1 as f64 * la;
        let tol = 1e-9 + x.abs() * 1e-14;
        // α^{n1}/β^{n2} ∈ (lo, hi)  ⇔  n2 ∈ ((x − lhi)/lb, (x − llo)/lb)
        let from = if lhi.is_finite() { ((x - lhi) / lb - 1.0).floor().max(0.0) as u64 } else { 0 };
        let to = if llo.is_finite() { ((x - llo) / lb + 1.0).ceil().max(0.0) as u64 } else { u64::MAX };
        let from = from.max(min_b);
        if from <= to {
            let to = to.min(from + 4 + (to - from).min(1 << 20));
            for n2 in from..=to {
                let t = x - n2 as f64 * lb;
                if t < llo - tol {
                    break;
                }
                if t < lhi + tol {
                    let c = cert.get_or_insert_with(|| Certifier::new(alpha, beta, interval));
                    let inside = c.decide(n1, n2).unwrap_or_else(|| {
                        let pa = num_traits::pow(alpha.clone(), n1 as usize);
                        let pb = num_traits::pow(beta.clone(), n2 as usize);
                        interval.contains_ratio(&pa, &pb)
                    });
                    if inside {
                        return Ok((n1, n2));
                    }
                }
            }
        }
        n1 += 1;
    }
}

/// `(d, m)` with `d > big_m` and `|β^d/α^m − μ/a| < δ/(4a)`.
pub fn simult_approx(
    alpha: &BigInt,
    beta: &BigInt,
    a: &BigRat,
    mu: &BigRat,
    delta: &BigRat,
    big_delta: &BigRat,
    big_m: u64,
) -> (u64, u64) {
    assert!(a.is_positive() && mu.is_positive() && delta.is_positive() && big_delta.is_positive());
    let two = BigRat::from_integer(BigInt::from(2));
    assert!(big_delta < a && mu * big_delta / a <= delta / &two, "Δ too large");
    let xi = delta / (a * BigRat::from_integer(BigInt::from(4)));
    let target = mu / a;
    let lo = (&target - &xi).max(BigRat::zero());
    let iv = Interval::bounded(lo, &target + &xi);
    kronecker_search_from(beta, alpha, &iv, big_m + 1, 0).expect("interval around a positive target")
}
