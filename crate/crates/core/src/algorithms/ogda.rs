use crate::error::{Error, Result};
use crate::operators::OperatorProblem;
use crate::vecops::{all_finite, norm_sq};

use super::{check_gamma, check_step, StepReport};

/// OGDA+ iterate: `u_{k+1} = u_k - a((1 + gamma) F(u_k) - F(u_{k-1}))`,
/// started from `u_{-1} = u_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdaPlusState {
    u: Vec<f64>,
    g_prev: Vec<f64>,
    a: f64,
    gamma: f64,
    k: usize,
}

impl OgdaPlusState {
    /// Oracle calls spent by [`OgdaPlusState::new`] on `F(u_{-1})`.
    pub const INITIAL_ORACLE_CALLS: u64 = 1;

    pub fn new(op: &OperatorProblem, u0: Vec<f64>, a: f64, gamma: f64) -> Result<Self> {
        check_step(a)?;
        check_gamma(gamma)?;
        op.check_dim(&u0)?;
        let g_prev = op.eval(&u0);
        if !all_finite(&g_prev) {
            return Err(Error::NonFinite { k: 0, u: u0 });
        }
        Ok(Self::from_parts(u0, g_prev, a, gamma))
    }

    /// Builds a state from an explicit previous field value (used by the
    /// stochastic variant, which supplies a batch estimate instead).
    pub(crate) fn from_parts(u: Vec<f64>, g_prev: Vec<f64>, a: f64, gamma: f64) -> Self {
        Self {
            u,
            g_prev,
            a,
            gamma,
            k: 0,
        }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// `F(u_{k-1})` (or its estimate).
    pub fn g_prev(&self) -> &[f64] {
        &self.g_prev
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Applies the update with a given `g_k`; returns the previous iterate.
    pub(crate) fn advance(&mut self, g: Vec<f64>) -> Vec<f64> {
        let c = 1.0 + self.gamma;
        let next: Vec<f64> = self
            .u
            .iter()
            .zip(g.iter().zip(&self.g_prev))
            .map(|(u, (g, gp))| u - self.a * (c * g - gp))
            .collect();
        self.g_prev = g;
        self.k += 1;
        std::mem::replace(&mut self.u, next)
    }

    pub fn step(&mut self, op: &OperatorProblem) -> Result<StepReport> {
        let g = op.eval(&self.u);
        if !all_finite(&g) {
            return Err(Error::NonFinite {
                k: self.k,
                u: self.u.clone(),
            });
        }
        let k = self.k;
        let field_norm_sq = norm_sq(&g);
        let rated = self.advance(g);
        Ok(StepReport {
            k,
            rated_point: rated,
            u_next: self.u.clone(),
            field_norm_sq,
            step_used: self.a,
            oracle_calls: 1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{lower_bound_problem, monotone_quadratic_problem};

    #[test]
    fn first_step_uses_gamma_times_field() {
        let op = monotone_quadratic_problem(2.0, 1).unwrap().problem;
        let mut s = OgdaPlusState::new(&op, vec![1.0], 0.1, 1.0).unwrap();
        let r = s.step(&op).unwrap();
        assert!((r.u_next[0] - 0.8).abs() < 1e-15);
        assert_eq!(r.field_norm_sq, 4.0);
        assert_eq!(r.oracle_calls, 1);
        assert_eq!(s.g_prev(), &[2.0]);
    }

    #[test]
    fn hand_computed_lower_bound_step() {
        let op = lower_bound_problem(3f64.sqrt(), -1.0).unwrap().problem;
        let mut s = OgdaPlusState::new(&op, vec![1.0, 0.0], 0.25, 0.5).unwrap();
        let r = s.step(&op).unwrap();
        assert!((r.u_next[0] - 1.125).abs() < 1e-15);
        assert!((r.u_next[1] - 0.125 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.rated_point, vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        let op = monotone_quadratic_problem(1.0, 2).unwrap().problem;
        assert!(OgdaPlusState::new(&op, vec![1.0, 1.0], 0.0, 0.5).is_err());
        assert!(OgdaPlusState::new(&op, vec![1.0, 1.0], 0.1, 0.0).is_err());
        assert!(OgdaPlusState::new(&op, vec![1.0, 1.0], 0.1, 1.5).is_err());
        assert!(matches!(
            OgdaPlusState::new(&op, vec![1.0], 0.1, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_field_aborts_with_point() {
        let op = OperatorProblem::new("nan", 1, |u| vec![if u[0] < 1.0 { f64::NAN } else { u[0] }]);
        let mut s = OgdaPlusState::new(&op, vec![1.0], 0.5, 1.0).unwrap();
        // u_1 = 1 - 0.5 * (2 - 1) = 0.5, where F is NaN
        s.step(&op).unwrap();
        match s.step(&op) {
            Err(Error::NonFinite { k, u }) => {
                assert_eq!(k, 1);
                assert_eq!(u, vec![0.5]);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
