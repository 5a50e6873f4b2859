//! CSP-free adaptive Kriging reliability analysis.
//!
//! Stage 1 builds a Kriging surrogate of a limit-state function by adding
//! one swarm-optimised training point per iteration, with no candidate
//! pool. Stage 2 classifies a Monte Carlo population with the surrogate.
//! A pool-based AK-MCS+U baseline and plain Monte Carlo are included for
//! comparison, along with a registry of benchmark problems.

pub mod benchmarks;
pub mod cli;
pub mod driver;
pub mod error;
pub mod kriging;
pub mod learning;
pub mod metrics;
pub mod probspace;
pub mod pso;
pub mod trussfe;

pub use benchmarks::{make, Benchmark, BenchmarkParams};
pub use driver::{build_surrogate, estimate_pf, run_method, run_single, Method, MethodConfig, RunResult};
pub use error::{Error, Result};
pub use kriging::{KrigingModel, Prediction, TrainingSet};
pub use probspace::{RandomVectorSpec, RngStream, SampleMatrix};
