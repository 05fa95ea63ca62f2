use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumthError;

/// Prime factorization, primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization(pub Vec<(BigInt, u32)>);

impl Factorization {
    pub fn product(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, (p, e)| acc * num_traits::pow(p.clone(), *e as usize))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.0.iter().map(|(p, _)| p)
    }

    pub fn exponent(&self, p: &BigInt) -> u32 {
        self.0.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

const MR_BASES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Miller–Rabin over the first 20 primes; deterministic below 3.3·10²⁴.
pub fn is_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    for &b in &MR_BASES {
        let b = BigInt::from(b);
        if n == &b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &b in &MR_BASES {
        let mut x = BigInt::from(b).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigInt, c: u64) -> Option<BigInt> {
    let one = BigInt::one();
    let c = BigInt::from(c);
    let f = |x: &BigInt| (x * x + &c) % n;
    let (mut y, m) = (BigInt::from(2), 128u64);
    let (mut g, mut r, mut q) = (one.clone(), 1u64, one.clone());
    let (mut x, mut ys) = (y.clone(), y.clone());
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        if r > 1 << 26 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

fn split_into(n: BigInt, out: &mut Vec<BigInt>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    for c in 1u64.. {
        if let Some(d) = pollard_brent(&n, c) {
            let rest = &n / &d;
            split_into(d, out);
            split_into(rest, out);
            return;
        }
    }
}

pub fn factorize(n: &BigInt) -> Result<Factorization, NumthError> {
    if n < &BigInt::from(2) {
        return Err(NumthError::Domain(format!("cannot factor {n}")));
    }
    let mut n = n.clone();
    let mut found: Vec<BigInt> = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        if &pb * &pb > n {
            break;
        }
        while (&n % &pb).is_zero() {
            n /= &pb;
            found.push(pb.clone());
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        if n.to_u64().is_some_and(|v| v <= TRIAL_LIMIT * TRIAL_LIMIT) {
            found.push(n);
        } else {
            split_into(n, &mut found);
        }
    }
    found.sort();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for q in found {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    Ok(Factorization(out))
}

/// ν_p(x); `None` stands for +∞ (x = 0).
pub fn padic_valuation(p: &BigInt, x: &BigInt) -> Result<Option<u64>, NumthError> {
    if !is_prime(p) {
        return Err(NumthError::Domain(format!("{p} is not prime")));
    }
    if x.is_zero() {
        return Ok(None);
    }
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return Ok(Some(v));
        }
        x = q;
        v += 1;
    }
}
