//! Shampoo-family optimizer with decoupled weight decay and conjugate
//! one-sided/two-sided preconditioning, together with the matrix functions
//! it needs and randomized checks of the inequalities it relies on.

pub mod error;
pub mod exponent;
pub mod matfun;
pub mod optimizer;
pub mod oracles;
pub mod rng;
pub mod schedule;
pub mod theory;

pub use error::{Error, Result};
pub use exponent::{Exponent, ExponentPair};
pub use matfun::{Mat, SymPsd};
pub use optimizer::{Hyperparams, OptimizerState, StepDiagnostics, TraceRecord};
pub use oracles::GradOracle;
