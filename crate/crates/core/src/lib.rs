//! Exact algebraic tools for discrete-time multistate Markov models of any
//! order: admissible paths, binomial relations among path probabilities,
//! their verification, and closed-form maximum likelihood estimates.

pub mod error;
pub mod model;
pub mod paths;
pub mod rational;
pub mod relations;
pub mod verify;
pub mod estimate;
pub mod io;
