//! First-order solvers for nonmonotone variational inequalities that admit a
//! weak Minty solution: OGDA+, EG+, adaptive EG+ and a stochastic OGDA+,
//! together with benchmark operators, rate certificates and a small
//! experiment runner.
//!
//! ```
//! use minty::algorithms::{Algorithm, SolverConfig};
//! use minty::problems::lower_bound_problem;
//!
//! let op = lower_bound_problem(1.0, -0.05).unwrap().problem;
//! let cfg = SolverConfig::new(Algorithm::OgdaPlus, 0.3, 0.5).with_iters(5000);
//! let trace = minty::solve(&op, &cfg, vec![1.0, 1.0]).unwrap();
//! assert_eq!(trace.status(), minty::diagnostics::RunStatus::Converged);
//! ```

pub mod algorithms;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod operators;
pub mod problems;
pub mod solver;
pub mod stochastic;
mod vecops;

pub use error::{Error, Result};
pub use operators::{OperatorProblem, Region};
pub use solver::solve;
