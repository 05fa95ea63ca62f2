//! Factorization, valuations, heights, logarithm enclosures and the linear-forms
//! lower bound used to bound exponents of mixed equations.

use std::sync::atomic::{AtomicU32, Ordering};

use num_rational::BigRational;
use thiserror::Error;

pub mod factor;
pub mod logs;
pub mod matveev;

pub use factor::{factorize, is_prime, padic_valuation, Factorization};
pub use logs::{height, log_enclosure, log_int, log_ratio, DirectedLog};
pub use matveev::{matveev_bound, multiplicative_relation, prime_certified, select_prime};

pub type BigRat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumthError {
    #[error("domain error: {0}")]
    Domain(String),
}

static FLOOR_BITS: AtomicU32 = AtomicU32::new(32);

/// Sets the width `2^-bits` that log enclosures in bound computations start from.
pub fn set_enclosure_floor_bits(bits: u32) {
    FLOOR_BITS.store(bits.clamp(8, 4096), Ordering::Relaxed);
}

pub fn enclosure_floor() -> BigRational {
    let bits = FLOOR_BITS.load(Ordering::Relaxed);
    BigRational::new(1.into(), num_bigint::BigInt::from(1) << bits)
}
