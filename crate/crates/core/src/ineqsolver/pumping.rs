//! Extending one near-solution of a system of linear forms in powers to
//! infinitely many, and raising strict-system witnesses above a threshold.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::kronecker::{kronecker_search_from, ln_f64, Interval};
use crate::numth::BigRat;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PumpingError {
    #[error("form of arity {got} over {want} columns")]
    Arity { got: usize, want: usize },
    #[error("exponent tuple of length {got} over {want} columns")]
    Tuple { got: usize, want: usize },
    #[error("negative threshold")]
    NegativeThreshold,
    #[error("witness does not satisfy the zero-threshold system")]
    NotAWitness,
}

/// Output of [`pumping_params`]. Column 0 carries the base `β`; every
/// column whose base differs from `β` carries `α`.
#[derive(Clone, Debug)]
pub struct PumpingParams {
    pub mu: BigRat,
    pub delta: BigRat,
    pub nu: BigRat,
    pub beta: BigInt,
    pub alpha: Option<BigInt>,
    /// `true` for columns on base `β`.
    pub beta_cols: Vec<bool>,
    pub m: Vec<u64>,
    /// Per form, the `β` part and `α` part evaluated at `m`.
    pub split: Vec<(BigRat, BigRat)>,
}

fn pow(b: &BigInt, e: u64) -> BigInt {
    num_traits::pow(b.clone(), e as usize)
}

fn rat(x: BigInt) -> BigRat {
    BigRat::from_integer(x)
}

pub(crate) fn eval_form(form: &[BigRat], vals: &[BigInt]) -> BigRat {
    form.iter().zip(vals).map(|(c, v)| c * v).sum()
}

/// Parameters `μ, δ` such that every hit `n1 > m1`, `|α^k/β^{n1} − μ| < δ`
/// extends through [`PumpingParams::extend`] to a tuple keeping the signs
/// of the forms positive at `m` and moving each `h_j/β^{n1}` by less than
/// `ε`.
///
/// `ν = 1/2^k` for the least `k ≥ 1` satisfying both side conditions,
/// `μ = β^{−m1}` and `δ = ν·β^{−m1}/2`.
pub fn pumping_params(forms: &[Vec<BigRat>], bases: &[BigInt], m: &[u64], eps: &BigRat) -> Result<PumpingParams, PumpingError> {
    let l = bases.len();
    if m.len() != l {
        return Err(PumpingError::Tuple { got: m.len(), want: l });
    }
    if let Some(f) = forms.iter().find(|f| f.len() != l) {
        return Err(PumpingError::Arity { got: f.len(), want: l });
    }
    let beta = bases[0].clone();
    let beta_cols: Vec<bool> = bases.iter().map(|b| b == &beta).collect();
    let alpha = bases.iter().find(|b| *b != &beta).cloned();
    let split: Vec<(BigRat, BigRat)> = forms
        .iter()
        .map(|f| {
            let mut t = BigRat::zero();
            let mut s = BigRat::zero();
            for i in 0..l {
                let v = &f[i] * rat(pow(&bases[i], m[i]));
                if beta_cols[i] {
                    t += v;
                } else {
                    s += v;
                }
            }
            (t, s)
        })
        .collect();
    let scale = rat(pow(&beta, m[0]));
    let mut nu = BigRat::new(BigInt::one(), BigInt::from(2));
    let half = nu.clone();
    loop {
        let lo = BigRat::one() - &nu;
        let hi = BigRat::one() + &nu;
        let cond_a = split
            .iter()
            .filter(|(t, s)| (t + s).is_positive())
            .all(|(t, s)| (t + &lo * s).is_positive() && (t + &hi * s).is_positive());
        let cond_b = split.iter().all(|(_, s)| &nu * s.abs() / &scale < *eps);
        if cond_a && cond_b {
            break;
        }
        nu *= &half;
    }
    let mu = BigRat::one() / &scale;
    let delta = &nu * &mu * &half;
    Ok(PumpingParams { mu, delta, nu, beta, alpha, beta_cols, m: m.to_vec(), split })
}

impl PumpingParams {
    /// Interval `(μ − δ, μ + δ)` for `α^k/β^{n1}`.
    pub fn window(&self) -> Interval {
        Interval::bounded(&self.mu - &self.delta, &self.mu + &self.delta)
    }

    /// Tuple for the hit `(n1, k)`: `β` columns shift by `n1 − m1`, `α`
    /// columns by `k`.
    pub fn extend(&self, n1: u64, k: u64) -> Option<Vec<u64>> {
        if n1 <= self.m[0] {
            return None;
        }
        let sb = n1 - self.m[0];
        Some(self.m.iter().zip(&self.beta_cols).map(|(&mi, &b)| if b { mi + sb } else { mi + k }).collect())
    }

    /// Next hit `(n1, k)` with `n1 ≥ min_n1` (and `n1 > m1`).
    pub fn next_hit(&self, min_n1: u64, min_k: u64) -> (u64, u64) {
        let n1_from = min_n1.max(self.m[0] + 1);
        match &self.alpha {
            Some(alpha) => {
                let (k, n1) = kronecker_search_from(alpha, &self.beta, &self.window(), min_k, n1_from).expect("window non-empty");
                (n1, k)
            }
            // no α column: k is irrelevant
            None => (n1_from, min_k),
        }
    }
}

/// Zero-threshold form of `A z > b`; `b` must be non-negative.
pub fn shift_to_zero(a: &[Vec<BigInt>], b: &[BigInt]) -> Result<Vec<Vec<BigInt>>, PumpingError> {
    if b.iter().any(|x| x.is_negative()) {
        return Err(PumpingError::NegativeThreshold);
    }
    Ok(a.to_vec())
}

pub(crate) fn satisfies(bases: &[BigInt], a: &[Vec<BigInt>], b: &[BigInt], exps: &[u64]) -> bool {
    let vals: Vec<BigInt> = bases.iter().zip(exps).map(|(g, &e)| pow(g, e)).collect();
    a.iter().zip(b).all(|(row, rhs)| row.iter().zip(&vals).map(|(c, v)| c * v).sum::<BigInt>() > *rhs)
}

/// Turns a witness of `A z > 0` into one of `A z > b` for `b ≥ 0`.
///
/// Tries uniform shifts (larger base by `s`, smaller by about `s·log ratio`)
/// before falling back to pumping hits.
pub fn inflate_witness(bases: &[BigInt], a: &[Vec<BigInt>], b: &[BigInt], m: &[u64]) -> Result<Vec<u64>, PumpingError> {
    if b.iter().any(|x| x.is_negative()) {
        return Err(PumpingError::NegativeThreshold);
    }
    let zeros = vec![BigInt::zero(); b.len()];
    if !satisfies(bases, a, &zeros, m) {
        return Err(PumpingError::NotAWitness);
    }
    if satisfies(bases, a, b, m) {
        return Ok(m.to_vec());
    }
    let big = bases.iter().max().unwrap().clone();
    let small = bases.iter().min().unwrap().clone();
    if big == small {
        let mut s = 1;
        loop {
            let n: Vec<u64> = m.iter().map(|x| x + s).collect();
            if satisfies(bases, a, b, &n) {
                return Ok(n);
            }
            s += 1;
        }
    }
    let r = ln_f64(&big) / ln_f64(&small);
    for s in 1..=64u64 {
        let x = s as f64 * r;
        let lo = (x.floor() as i64 - 1).max(0) as u64;
        let hi = x.ceil() as u64 + 1;
        for t in lo..=hi {
            let n: Vec<u64> = m.iter().zip(bases).map(|(&mi, g)| if g == &big { mi + s } else { mi + t }).collect();
            if satisfies(bases, a, b, &n) {
                return Ok(n);
            }
        }
    }
    // pumping with the first column as β
    let l = bases.len();
    let forms: Vec<Vec<BigRat>> = a.iter().map(|row| row.iter().cloned().map(rat).collect()).collect();
    let scale = rat(pow(&bases[0], m[0]));
    let vals: Vec<BigInt> = bases.iter().zip(m).map(|(g, &e)| pow(g, e)).collect();
    let eps = forms.iter().map(|f| eval_form(f, &vals) / &scale).min().unwrap() / rat(BigInt::from(2));
    let params = pumping_params(&forms, bases, m, &eps)?;
    let bmax = rat(b.iter().max().cloned().unwrap_or_default());
    let mut n1 = m[0] + 1;
    while &eps * rat(pow(&bases[0], n1)) <= bmax {
        n1 += 1;
    }
    let mut k = 0;
    loop {
        let (h, kk) = params.next_hit(n1, k);
        let n = params.extend(h, kk).unwrap();
        debug_assert_eq!(n.len(), l);
        if satisfies(bases, a, b, &n) {
            return Ok(n);
        }
        n1 = h;
        k = kk + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn r(n: i64, d: i64) -> BigRat {
        BigRat::new(bi(n), bi(d))
    }

    #[test]
    fn single_beta_form() {
        let p = pumping_params(&[vec![r(1, 1)]], &[bi(3)], &[2], &r(1, 10)).unwrap();
        assert_eq!(p.nu, r(1, 2));
        assert_eq!(p.mu, r(1, 9));
        assert_eq!(p.delta, r(1, 36));
    }

    #[test]
    fn nu_halves_for_alpha_part() {
        // h = x1 − x2 at (3^2, 2^3): s = −8, (B) needs ν·8/9 < 1/10
        let p = pumping_params(&[vec![r(1, 1), r(-1, 1)]], &[bi(3), bi(2)], &[2, 3], &r(1, 10)).unwrap();
        assert_eq!(p.nu, r(1, 16));
        let p = pumping_params(&[vec![r(-1, 1)]], &[bi(3)], &[0], &r(1, 10)).unwrap();
        assert_eq!(p.nu, r(1, 2));
    }

    #[test]
    fn extension_keeps_sign() {
        let forms = vec![vec![r(1, 1), r(-1, 1)]];
        let bases = [bi(3), bi(2)];
        let p = pumping_params(&forms, &bases, &[2, 3], &r(1, 10)).unwrap();
        let (mut n1, mut k) = (0, 0);
        for _ in 0..5 {
            let (h, kk) = p.next_hit(n1, k);
            let n = p.extend(h, kk).unwrap();
            let vals: Vec<BigInt> = bases.iter().zip(&n).map(|(g, &e)| pow(g, e)).collect();
            assert!(eval_form(&forms[0], &vals).is_positive());
            n1 = h;
            k = kk + 1;
        }
    }

    #[test]
    fn inflation() {
        let a = vec![vec![bi(1), bi(-1)]];
        assert_eq!(inflate_witness(&[bi(2), bi(3)], &a, &[bi(5)], &[1, 0]), Ok(vec![4, 1]));
        assert_eq!(inflate_witness(&[bi(2), bi(3)], &a, &[bi(0)], &[1, 0]), Ok(vec![1, 0]));
        assert_eq!(inflate_witness(&[bi(2), bi(3)], &a, &[bi(-1)], &[1, 0]), Err(PumpingError::NegativeThreshold));
        let a = vec![vec![bi(1), bi(-1)]];
        assert_eq!(inflate_witness(&[bi(2), bi(2)], &a, &[bi(100)], &[1, 0]), Ok(vec![8, 7]));
        assert_eq!(shift_to_zero(&a, &[bi(5)]).unwrap(), a);
    }

    #[test]
    fn inflation_by_pumping() {
        // 3^{n0} − 2^{n1} − 2^{n2} > b with a narrow ratio window
        let a = vec![vec![bi(1), bi(-1), bi(-1)], vec![bi(-1), bi(1), bi(2)]];
        let bases = [bi(3), bi(2), bi(2)];
        let m = [3, 4, 3];
        assert!(satisfies(&bases, &a, &[bi(0), bi(0)], &m));
        let n = inflate_witness(&bases, &a, &[bi(1000), bi(1000)], &m).unwrap();
        assert!(satisfies(&bases, &a, &[bi(1000), bi(1000)], &n));
    }
}
