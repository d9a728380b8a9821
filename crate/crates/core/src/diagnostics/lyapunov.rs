//! Per-step potential decrease checks behind the rate certificates.
//!
//! OGDA+: `V_k = ||u_k + a F(u_{k-1}) - u*||^2` satisfies
//! `V_{k+1} + a g (a - rho) ||F(u_k)||^2 <= V_k`.
//!
//! Adaptive EG+ with `gamma = 1/2`: `W_k = 2 ||ubar_k - u*||^2` satisfies
//! `W_{k+1} + a_k (a_k/2 - rho) ||F(u_k)||^2 <= W_k` for `k >= k0` whenever
//! the coefficient is positive.

use crate::algorithms::{AdaptiveEgState, OgdaPlusState};
use crate::error::Result;
use crate::operators::OperatorProblem;
use crate::vecops::{axpy, norm_sq, sub};

use super::certificate::detect_k0;

/// Absolute slack, scaled by `max(1, V_0)`.
pub const LYAPUNOV_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    /// Potential values `V_0, V_1, ...`.
    pub values: Vec<f64>,
    /// Steps at which the inequality was checked.
    pub checked: usize,
    /// Largest `lhs - rhs` seen, before slack.
    pub worst_excess: f64,
    pub violations: usize,
    pub k0: Option<usize>,
}

impl LyapunovReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

pub fn ogda_lyapunov_check(
    op: &OperatorProblem,
    u0: Vec<f64>,
    a: f64,
    gamma: f64,
    steps: usize,
) -> Result<LyapunovReport> {
    let solution = op.require_solution()?.to_vec();
    let rho = op.require_rho()?;
    let mut state = OgdaPlusState::new(op, u0, a, gamma)?;
    let potential = |s: &OgdaPlusState| norm_sq(&sub(&axpy(s.u(), a, s.g_prev()), &solution));
    let mut values = vec![potential(&state)];
    let tol = LYAPUNOV_SLACK * values[0].max(1.0);
    let coeff = a * gamma * (a - rho);
    let (mut worst, mut violations) = (f64::NEG_INFINITY, 0);
    for _ in 0..steps {
        let r = state.step(op)?;
        let v_next = potential(&state);
        let excess = v_next + coeff * r.field_norm_sq - values.last().unwrap();
        worst = worst.max(excess);
        if excess > tol {
            violations += 1;
        }
        values.push(v_next);
    }
    Ok(LyapunovReport {
        values,
        checked: steps,
        worst_excess: worst,
        violations,
        k0: None,
    })
}

/// Runs adaptive EG+ with `gamma = 1/2` for `steps + 1` steps and checks the
/// first `steps` transitions from the detected `k0` on.
pub fn adaptive_lyapunov_check(
    op: &OperatorProblem,
    u0: Vec<f64>,
    a0: f64,
    tau: f64,
    steps: usize,
) -> Result<LyapunovReport> {
    let solution = op.require_solution()?.to_vec();
    let rho = op.require_rho()?;
    let mut state = AdaptiveEgState::new(op, u0, a0, tau, 0.5)?;
    let potential = |ub: &[f64]| 2.0 * norm_sq(&sub(ub, &solution));
    let mut values = vec![potential(state.u_bar())];
    let mut step_sizes = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        let r = state.step(op)?;
        step_sizes.push(r.step_used);
        norms.push(r.field_norm_sq);
        values.push(potential(state.u_bar()));
    }
    let k0 = detect_k0(&step_sizes, tau);
    let tol = LYAPUNOV_SLACK * values[0].max(1.0);
    let (mut worst, mut violations, mut checked) = (f64::NEG_INFINITY, 0, 0);
    for k in k0..steps {
        let a = step_sizes[k];
        let coeff = a * (a / 2.0 - rho);
        if coeff <= 0.0 {
            continue;
        }
        checked += 1;
        let excess = values[k + 1] + coeff * norms[k] - values[k];
        worst = worst.max(excess);
        if excess > tol {
            violations += 1;
        }
    }
    values.truncate(steps + 1);
    Ok(LyapunovReport {
        values,
        checked,
        worst_excess: worst,
        violations,
        k0: Some(k0),
    })
}
