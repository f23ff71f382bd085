//! Variance-reduced stochastic gradient methods for regularized empirical
//! risk minimization.
//!
//! The crate covers data ingestion ([`data`]), composite objectives
//! ([`model`]), proximal operators ([`prox`]), variance-reduced estimators
//! ([`estimator`]), the solvers themselves ([`solver`]), independent oracles
//! for testing ([`diagnostics`]) and a file-driven experiment runner
//! ([`experiment`]).
//!
//! ```
//! use std::sync::Arc;
//! use vrsgd::{synthetic, Algorithm, LossKind, Objective, Regularizer, SolverConfig};
//!
//! let data = Arc::new(synthetic::ridge(100, 5, 7).unwrap().normalize_rows());
//! let obj = Objective::new(data, LossKind::Squared, Regularizer::L2(1e-2)).unwrap();
//! let cfg = SolverConfig::new(Algorithm::VrSgd, 0.25).epochs(10);
//! let record = vrsgd::solver::run(&cfg, &obj).unwrap();
//! assert!(record.final_objective < record.initial_objective);
//! ```

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod prox;
pub mod solver;

pub use data::{parse_libsvm, synthetic, to_libsvm, Dataset, IndexSampler, Row, SamplingScheme};
pub use diagnostics::{theoretical_rate_sc, RateOption, RateReport};
pub use error::{DataError, DiagnosticsError, ExperimentError, ModelError, SolverError};
pub use estimator::{EstimatorState, SagaState};
pub use experiment::{run_experiment, ExperimentConfig};
pub use model::{LossKind, Objective, Regularizer};
pub use prox::ProxSpec;
pub use solver::{Algorithm, EpochEntry, RunRecord, RunStatus, SolverConfig};
