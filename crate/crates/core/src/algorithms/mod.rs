//! Deterministic iterations: OGDA+, fixed-step EG+ and adaptive-step EG+,
//! plus the step-size conditions under which their rates hold.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

mod bounds;
mod eg;
mod ogda;

pub use bounds::{ogda_step_size_bound, validate_weak_minty_config, Validity, Verdict};
pub use eg::{AdaptiveEgState, EgPlusState};
pub use ogda::OgdaPlusState;

/// What a single iteration did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Iteration index `k` of this step.
    pub k: usize,
    /// The point `u_k` whose field norm is rated by the convergence theorems.
    pub rated_point: Vec<f64>,
    /// The point the next iteration starts from.
    pub u_next: Vec<f64>,
    /// `||F(u_k)||^2`.
    pub field_norm_sq: f64,
    pub step_used: f64,
    /// Fresh oracle calls made by this step.
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    OgdaPlus,
    EgPlus,
    AdaptiveEgPlus,
    StochOgdaPlus,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::OgdaPlus,
        Algorithm::EgPlus,
        Algorithm::AdaptiveEgPlus,
        Algorithm::StochOgdaPlus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::OgdaPlus => "ogda-plus",
            Algorithm::EgPlus => "eg-plus",
            Algorithm::AdaptiveEgPlus => "adaptive-eg-plus",
            Algorithm::StochOgdaPlus => "stoch-ogda-plus",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == norm)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Hyperparameters for one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Step size `a`, or the initial step `a_0` for adaptive EG+.
    pub a: f64,
    /// Ratio `gamma` in `(0, 1]`.
    pub gamma: f64,
    /// Adaptive step factor `tau` in `(0, 1)`.
    pub tau: f64,
    /// Per-sample noise scale for the stochastic oracle.
    pub sigma: f64,
    pub batch: usize,
    pub iters: usize,
    /// Converged once the best `||F(u_k)||` is at most `tol`.
    pub tol: f64,
    pub seed: u64,
    /// Diverged once `||u_k||` exceeds this.
    pub divergence_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::OgdaPlus,
            a: 0.1,
            gamma: 0.5,
            tau: 0.99,
            sigma: 0.0,
            batch: 1,
            iters: 1000,
            tol: 1e-6,
            seed: 0,
            divergence_threshold: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, a: f64, gamma: f64) -> Self {
        Self {
            algorithm,
            a,
            gamma,
            ..Self::default()
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_noise(mut self, sigma: f64, batch: usize, seed: u64) -> Self {
        self.sigma = sigma;
        self.batch = batch;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_step(self.a)?;
        check_gamma(self.gamma)?;
        if self.algorithm == Algorithm::AdaptiveEgPlus {
            check_tau(self.tau)?;
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and nonnegative"));
        }
        if self.batch == 0 {
            return Err(invalid("batch", "must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.divergence_threshold.is_nan() || self.divergence_threshold <= 0.0 {
            return Err(invalid("divergence_threshold", "must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn check_step(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            "a",
            format!("step size must be positive and finite, got {a}"),
        ))
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(invalid("gamma", format!("must lie in (0, 1], got {gamma}")))
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(invalid("tau", format!("must lie in (0, 1), got {tau}")))
    }
}
