use std::fmt;

use crate::error::{invalid, Result};
use crate::operators::OperatorProblem;

use super::{check_gamma, check_step};

/// Largest admissible `aL` for OGDA+ with auxiliary parameter `lambda`:
/// `(2 - lambda gamma - gamma) / (2 - lambda gamma + gamma)`.
///
/// `lambda = 1/gamma` gives `(1 - gamma) / (1 + gamma)`, and `lambda -> 0`
/// gives the monotone bound `(2 - gamma) / (2 + gamma)`. A negative value
/// means no step size is admissible for this pair.
pub fn ogda_step_size_bound(gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(lambda >= 0.0 && lambda <= 2.0 / gamma) {
        return Err(invalid(
            "lambda",
            format!("must lie in [0, 2/gamma], got {lambda}"),
        ));
    }
    let lg = lambda * gamma;
    Ok((2.0 - lg - gamma) / (2.0 - lg + gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `a > rho` and `aL <= (1 - gamma)/(1 + gamma)`.
    Pass,
    /// Outside the rate theorem; solvers still run such configurations.
    TheoryGap,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::TheoryGap => "THEORY-GAP",
        })
    }
}

/// Outcome of checking an OGDA+ configuration against the weak Minty rate
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub verdict: Verdict,
    /// `a - rho`; must be positive.
    pub rho_margin: f64,
    /// `(1 - gamma)/(1 + gamma) - aL`; must be nonnegative.
    pub step_margin: f64,
    /// `(1 - gamma)/(1 + gamma)`.
    pub step_bound: f64,
}

pub fn validate_weak_minty_config(op: &OperatorProblem, a: f64, gamma: f64) -> Result<Validity> {
    check_step(a)?;
    check_gamma(gamma)?;
    let l = op.require_lipschitz()?;
    let rho = op.require_rho()?;
    let step_bound = (1.0 - gamma) / (1.0 + gamma);
    let rho_margin = a - rho;
    let step_margin = step_bound - a * l;
    let verdict = if rho_margin > 0.0 && step_margin >= 0.0 {
        Verdict::Pass
    } else {
        Verdict::TheoryGap
    };
    Ok(Validity {
        verdict,
        rho_margin,
        step_margin,
        step_bound,
    })
}
