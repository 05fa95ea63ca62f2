use num_bigint::BigInt;

use super::cells::AClassRepr;
use super::Solver;

/// Solutions of `Σ c_i γ^{n_i} = d`; the result is always complete.
pub fn solve_single_base(coeffs: &[BigInt], d: &BigInt, gamma: &BigInt) -> AClassRepr {
    let bases = vec![gamma.clone(); coeffs.len()];
    let mut s = Solver::new(&bases, 0);
    let terms = coeffs.iter().cloned().enumerate().filter(|(_, c)| c != &BigInt::from(0)).collect();
    s.solve(terms, d.clone())
}
