use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{BigRat, NumthError};

/// Rational enclosure `[lo, hi]` of a real quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedLog {
    pub lo: BigRat,
    pub hi: BigRat,
}

impl DirectedLog {
    pub fn exact(x: BigRat) -> Self {
        DirectedLog { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, o: &DirectedLog) -> DirectedLog {
        DirectedLog { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &DirectedLog) -> DirectedLog {
        DirectedLog { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn scale(&self, k: &BigRat) -> DirectedLog {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.is_negative() {
            DirectedLog { lo: b, hi: a }
        } else {
            DirectedLog { lo: a, hi: b }
        }
    }

    pub fn mul(&self, o: &DirectedLog) -> DirectedLog {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        DirectedLog {
            lo: c.iter().min().unwrap().clone(),
            hi: c.iter().max().unwrap().clone(),
        }
    }

    /// Quotient; `o` must not contain 0.
    pub fn div(&self, o: &DirectedLog) -> Result<DirectedLog, NumthError> {
        if !(o.lo.is_positive() || o.hi.is_negative()) {
            return Err(NumthError::Domain("division by an enclosure containing 0".into()));
        }
        let inv = DirectedLog { lo: o.hi.recip(), hi: o.lo.recip() };
        Ok(self.mul(&inv))
    }

    /// Upper bound of |x|.
    pub fn abs_hi(&self) -> BigRat {
        self.lo.abs().max(self.hi.abs())
    }
}

fn bits_for(precision: &BigRat) -> u64 {
    // smallest b with 2^-b <= precision
    let mut b = 0u64;
    let mut scaled = precision.clone();
    while scaled < BigRat::one() {
        scaled *= BigRat::from_integer(BigInt::from(2));
        b += 1;
    }
    b
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    Integer::div_ceil(a, b)
}

/// Fixed-point bounds (scale 2^bits) on atanh(t) for t ∈ [tl, th] ⊂ [0, 0.35].
fn atanh_fixed(tl: &BigInt, th: &BigInt, bits: u64) -> (BigInt, BigInt) {
    let one = BigInt::one() << bits;
    let t2l = (tl * tl) >> bits;
    let t2h = ceil_div(&(th * th), &one);
    let (mut pl, mut ph) = (tl.clone(), th.clone());
    let (mut sl, mut sh) = (BigInt::zero(), BigInt::zero());
    let mut i = 0u64;
    loop {
        let k = BigInt::from(2 * i + 1);
        sl += &pl / &k;
        sh += ceil_div(&ph, &k);
        pl = (&pl * &t2l) >> bits;
        ph = ceil_div(&(&ph * &t2h), &one);
        i += 1;
        if ph.is_zero() {
            break;
        }
        if ph <= BigInt::one() {
            // remaining tail: t^(2i+1)/((2i+1)(1-t^2)) with 1-t^2 > 7/8
            let k = BigInt::from(2 * i + 1);
            sh += ceil_div(&(&ph * BigInt::from(8)), &(k * BigInt::from(7)));
            break;
        }
    }
    (sl, sh)
}

fn ln2_fixed(bits: u64) -> (BigInt, BigInt) {
    let one = BigInt::one() << bits;
    let three = BigInt::from(3);
    let (l, h) = atanh_fixed(&(&one / &three), &ceil_div(&one, &three), bits);
    (l * 2, h * 2)
}

/// Enclosure of ln x with width at most `precision`.
pub fn log_enclosure(x: &BigRat, precision: &BigRat) -> Result<DirectedLog, NumthError> {
    if !x.is_positive() {
        return Err(NumthError::Domain(format!("log of non-positive {x}")));
    }
    if !precision.is_positive() {
        return Err(NumthError::Domain("precision must be positive".into()));
    }
    if x.is_one() {
        return Ok(DirectedLog::exact(BigRat::zero()));
    }
    let (p, q) = (x.numer().clone(), x.denom().clone());
    let mut k = p.bits() as i64 - q.bits() as i64;
    let below = |k: i64| {
        if k >= 0 {
            p < (&q << k as u64)
        } else {
            (&p << (-k) as u64) < q
        }
    };
    if below(k) {
        k -= 1;
    }
    // y = x / 2^k in [1, 2); t = (y-1)/(y+1) = num/den
    let (yn, yd) = if k >= 0 { (p.clone(), &q << k as u64) } else { (&p << (-k) as u64, q.clone()) };
    let num = &yn - &yd;
    let den = &yn + &yd;
    let ka = BigInt::from(k.unsigned_abs());
    let mut bits = bits_for(precision) + 8 + (64 - k.unsigned_abs().leading_zeros()) as u64;
    loop {
        let tl = (&num << bits) / &den;
        let th = ceil_div(&(&num << bits), &den);
        let (al, ah) = atanh_fixed(&tl, &th, bits);
        let (l2l, l2h) = ln2_fixed(bits);
        let (lo, hi) = if k >= 0 {
            (&ka * &l2l + al * 2, &ka * &l2h + ah * 2)
        } else {
            (al * 2 - &ka * &l2h, ah * 2 - &ka * &l2l)
        };
        let scale = BigInt::one() << bits;
        let out = DirectedLog {
            lo: BigRat::new(lo, scale.clone()),
            hi: BigRat::new(hi, scale),
        };
        if &out.width() <= precision {
            return Ok(out);
        }
        bits += 32;
    }
}

pub fn log_int(n: &BigInt, precision: &BigRat) -> Result<DirectedLog, NumthError> {
    log_enclosure(&BigRat::from_integer(n.clone()), precision)
}

/// Enclosure of ln a / ln b for integers a, b > 1.
pub fn log_ratio(a: &BigInt, b: &BigInt, precision: &BigRat) -> Result<DirectedLog, NumthError> {
    let mut p = precision.clone() / BigInt::from(4);
    loop {
        let r = log_int(a, &p)?.div(&log_int(b, &p)?)?;
        if &r.width() <= precision {
            return Ok(r);
        }
        p /= BigInt::from(16);
    }
}

/// h(z) = max(log|num|, log|den|) of a reduced rational.
pub fn height(z: &BigRat, precision: &BigRat) -> Result<DirectedLog, NumthError> {
    if z.is_zero() {
        return Err(NumthError::Domain("height of 0".into()));
    }
    let m = z.numer().abs().max(z.denom().abs());
    log_int(&m, precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRat {
        BigRat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ln_one_is_exact() {
        assert_eq!(log_enclosure(&r(1, 1), &r(1, 1000)).unwrap(), DirectedLog::exact(r(0, 1)));
    }

    #[test]
    fn ln_two() {
        let e = log_enclosure(&r(2, 1), &r(1, 1_000_000)).unwrap();
        // ln 2 = 0.69314718055994530942...
        assert!(e.lo <= r(69314718056, 100_000_000_000) && e.hi >= r(69314718055, 100_000_000_000));
        assert!(e.lo > r(693146, 1_000_000) && e.hi < r(693148, 1_000_000));
        assert!(e.width() <= r(1, 1_000_000));
    }

    #[test]
    fn ratio_contains_three() {
        let p = r(1, 1 << 20);
        let q = log_enclosure(&r(8, 1), &p).unwrap().div(&log_enclosure(&r(2, 1), &p).unwrap()).unwrap();
        assert!(q.contains(&r(3, 1)));
    }

    #[test]
    fn small_and_negative_logs() {
        let p = r(1, 1 << 30);
        let e = log_enclosure(&r(1, 3), &p).unwrap();
        let f = log_enclosure(&r(3, 1), &p).unwrap();
        assert!(e.lo <= -f.lo.clone() && -f.hi.clone() <= e.hi);
        assert!(e.hi < r(-1098, 1000) && e.lo > r(-1099, 1000));
        let big = BigInt::from(10).pow(40u32);
        let g = log_int(&big, &p).unwrap();
        // 40 ln 10 = 92.1034037...
        assert!(g.lo < r(921034038, 10_000_000) && g.hi > r(921034037, 10_000_000));
    }

    #[test]
    fn heights() {
        let p = r(1, 1 << 20);
        let h = height(&r(3, 2), &p).unwrap();
        assert_eq!(h, log_int(&BigInt::from(3), &p).unwrap());
        assert_eq!(height(&r(1, 1), &p).unwrap(), DirectedLog::exact(r(0, 1)));
        let h = height(&r(-7, 4), &p).unwrap();
        assert!(h.lo < r(19460, 10000) && h.hi > r(19459, 10000));
        assert!(height(&r(0, 1), &p).is_err());
    }

    proptest::proptest! {
        #[test]
        fn height_subadditive(a in 1i64..500, b in 1i64..500, c in 1i64..500, d in 1i64..500) {
            let p = r(1, 1 << 24);
            let (z1, z2) = (r(a, b), r(c, d));
            let lhs = height(&(&z1 * &z2), &p).unwrap();
            let rhs = height(&z1, &p).unwrap().add(&height(&z2, &p).unwrap());
            proptest::prop_assert!(lhs.hi <= rhs.hi + r(1, 1 << 20));
        }

        #[test]
        fn enclosure_brackets_exp(n in 1i64..10_000, d in 1i64..10_000) {
            // e^lo <= n/d <= e^hi checked through monotone exactness: ln(x)+ln(1/x) encloses 0
            let p = r(1, 1 << 24);
            let a = log_enclosure(&r(n, d), &p).unwrap();
            let b = log_enclosure(&r(d, n), &p).unwrap();
            let s = a.add(&b);
            proptest::prop_assert!(s.contains(&r(0, 1)));
            proptest::prop_assert!(a.width() <= p);
        }
    }
}
