//! The optimizer: moment and preconditioner averages, `ε`-shifted
//! fractional-power preconditioning, decoupled weight decay.
//!
//! ```text
//! M_k = θ M_{k-1} + (1-θ) G_k
//! L_k = β L_{k-1} + (1-β) G_k G_kᵀ
//! R_k = β R_{k-1} + (1-β) G_kᵀ G_k
//! X_{k+1} = (1-λη) X_k - η (L_k+εI)^{-1/(2p)} M_k (R_k+εI)^{-1/(2q)}
//! ```
//!
//! There is no bias correction.

mod hyper;
mod run;
mod state;

pub use hyper::Hyperparams;
pub use run::{default_record_interval, is_recorded, run, NullSink, RunOptions, RunSummary, TraceRecord, TraceSink};
pub use state::{OptimizerState, StepDiagnostics};
