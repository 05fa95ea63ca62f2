//! Decision procedure for existential linear integer arithmetic extended with
//! two power predicates `α^ℕ` and `β^ℕ`, with exact witnesses.

pub mod ast;
pub mod cli;
pub mod driver;
pub mod eqsolver;
pub mod ineqsolver;
pub mod linarith;
pub mod numth;
pub mod oracle;
pub mod powerprep;
pub mod reductions;
pub mod textio;
