use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::factor::{factorize, padic_valuation};
use super::logs::{height, log_enclosure, log_ratio};
use super::{BigRat, NumthError};

fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

fn work_precision() -> BigRat {
    rat(1, 1 << 24)
}

/// Smallest s with s² ≥ k.
fn ceil_sqrt(k: u64) -> u64 {
    let mut s = (k as f64).sqrt() as u64;
    while s * s < k {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= k {
        s -= 1;
    }
    s
}

/// Lower bound L with log|Π γ_i^{b_i} − 1| > L whenever the product is not 1.
pub fn matveev_bound(gammas: &[BigRat], bs: &[BigInt]) -> Result<BigRat, NumthError> {
    let k = gammas.len();
    if k == 0 {
        return Err(NumthError::Domain("empty product".into()));
    }
    if bs.len() != k {
        return Err(NumthError::Domain("length mismatch".into()));
    }
    let prec = work_precision();
    // π < 22/7 bounds the imaginary part of the principal log of a negative rational
    let pi_hi = rat(22, 7);
    let mut prod = BigRat::one();
    for g in gammas {
        if g.is_zero() {
            return Err(NumthError::Domain("zero base".into()));
        }
        let h = height(g, &prec)?.hi;
        let mut abs_log = log_enclosure(&g.abs(), &prec)?.abs_hi();
        if g.is_negative() {
            abs_log += &pi_hi;
        }
        let a = h.max(abs_log).max(rat(4, 25));
        prod *= a;
    }
    let big_b = bs.iter().map(|b| b.abs()).max().unwrap().max(BigInt::one());
    let kb = BigRat::from_integer(big_b * BigInt::from(k));
    let log_kb = log_enclosure(&kb, &prec)?.hi;
    let ku = k as u64;
    let k45 = BigInt::from(ku.pow(4) * ceil_sqrt(ku));
    let thirty = num_traits::pow(BigInt::from(30), k + 3);
    let l = rat(-7, 5) * BigRat::from_integer(thirty * k45) * (BigRat::one() + log_kb) * prod;
    Ok(l)
}

/// Minimal (a, b) with α^a = β^b, if any.
pub fn multiplicative_relation(alpha: &BigInt, beta: &BigInt) -> Result<Option<(u64, u64)>, NumthError> {
    let fa = factorize(alpha)?;
    let fb = factorize(beta)?;
    if fa.0.len() != fb.0.len() || fa.primes().zip(fb.primes()).any(|(p, q)| p != q) {
        return Ok(None);
    }
    // a·e_α = b·e_β componentwise
    let (ea, eb) = (fa.0[0].1 as u64, fb.0[0].1 as u64);
    let g = ea.gcd(&eb);
    let (a, b) = (eb / g, ea / g);
    let ok = fa.0.iter().zip(&fb.0).all(|((_, x), (_, y))| a * (*x as u64) == b * (*y as u64));
    Ok(ok.then_some((a, b)))
}

/// A prime p | β with log α / log β > ν_p(α)/ν_p(β), certified by enclosure.
pub fn select_prime(alpha: &BigInt, beta: &BigInt) -> Result<BigInt, NumthError> {
    if alpha <= &BigInt::one() || beta <= &BigInt::one() {
        return Err(NumthError::Domain("bases must exceed 1".into()));
    }
    if multiplicative_relation(alpha, beta)?.is_some() {
        return Err(NumthError::Domain(format!("{alpha} and {beta} are multiplicatively dependent")));
    }
    let fb = factorize(beta)?;
    for (p, vb) in &fb.0 {
        let va = padic_valuation(p, alpha)?.unwrap_or(0);
        let target = BigRat::new(BigInt::from(va), BigInt::from(*vb));
        if va == 0 {
            return Ok(p.clone());
        }
        let mut prec = rat(1, 1 << 16);
        loop {
            let r = log_ratio(alpha, beta, &prec)?;
            if r.lo > target {
                return Ok(p.clone());
            }
            if r.hi < target {
                break;
            }
            prec /= BigInt::from(1 << 16);
        }
    }
    Err(NumthError::Domain("no admissible prime".into()))
}

/// Verifies the selector's inequality at a given precision.
pub fn prime_certified(alpha: &BigInt, beta: &BigInt, p: &BigInt, precision: &BigRat) -> bool {
    let (Ok(Some(va)), Ok(Some(vb))) = (padic_valuation(p, alpha), padic_valuation(p, beta)) else {
        return false;
    };
    if vb == 0 {
        return false;
    }
    let target = BigRat::new(BigInt::from(va), BigInt::from(vb));
    log_ratio(alpha, beta, precision).is_ok_and(|r| r.lo > target)
}

#[cfg(test)]
pub(crate) fn to_f64(x: &BigRat) -> f64 {
    use num_traits::ToPrimitive;
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn bound_for_single_base() {
        let l = matveev_bound(&[rat(2, 1)], &[bi(3)]).unwrap();
        // -1.4 * 30^4 * (1 + ln 3) * ln 2 = -1.6425e6 (approx), and L must not exceed it
        let reference = -1.4 * 810000.0 * (1.0 + 3f64.ln()) * 2f64.ln();
        assert!(to_f64(&l) <= reference);
        assert!(to_f64(&l) > 1.01 * reference);
        let l300 = matveev_bound(&[rat(2, 1)], &[bi(300)]).unwrap();
        assert!(l300 < l);
        assert!(matveev_bound(&[rat(2, 1)], &[bi(1)]).unwrap() < BigRat::zero());
        assert!(matveev_bound(&[], &[]).is_err());
    }

    #[test]
    fn relations() {
        assert_eq!(multiplicative_relation(&bi(2), &bi(3)).unwrap(), None);
        assert_eq!(multiplicative_relation(&bi(4), &bi(8)).unwrap(), Some((3, 2)));
        assert_eq!(multiplicative_relation(&bi(6), &bi(12)).unwrap(), None);
        assert_eq!(multiplicative_relation(&bi(36), &bi(6)).unwrap(), Some((1, 2)));
    }

    #[test]
    fn selected_primes() {
        assert_eq!(select_prime(&bi(2), &bi(3)).unwrap(), bi(3));
        assert_eq!(select_prime(&bi(12), &bi(18)).unwrap(), bi(3));
        assert_eq!(select_prime(&bi(18), &bi(12)).unwrap(), bi(2));
        assert!(select_prime(&bi(4), &bi(8)).is_err());
        for (a, b) in [(2, 3), (12, 18), (18, 12), (6, 10), (10, 6), (3, 2), (5, 7)] {
            let p = select_prime(&bi(a), &bi(b)).unwrap();
            assert!(prime_certified(&bi(a), &bi(b), &p, &rat(1, 1 << 40)), "{a} {b}");
        }
    }
}
