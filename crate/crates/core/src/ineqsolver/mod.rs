//! Strict inequalities between sums of powers, with exact witnesses.

pub mod kronecker;
pub mod pumping;
pub mod strict;

pub use kronecker::{kronecker_search, kronecker_search_from, simult_approx, EmptyInterval, Interval};
pub use pumping::{inflate_witness, pumping_params, shift_to_zero, PumpingError, PumpingParams};
pub use strict::{eliminate_bounded_gap, lift_gap, solve_strict, GapError, Inhomogeneous, StrictSolver, StrictSystem, StrictVerdict};
