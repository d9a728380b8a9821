//! Runs any of the iterations to convergence, divergence or budget and
//! records the trace.

use log::warn;

use crate::algorithms::{
    AdaptiveEgState, Algorithm, EgPlusState, OgdaPlusState, SolverConfig, StepReport,
};
use crate::diagnostics::{classify_run, IterateTrace, RunStatus};
use crate::error::{Error, Result};
use crate::operators::OperatorProblem;
use crate::stochastic::{StochOgdaState, StochasticOracle};
use crate::vecops::{all_finite, norm};

enum Engine {
    Ogda(OgdaPlusState),
    Eg(EgPlusState),
    Adaptive(AdaptiveEgState),
    Stoch(Box<(StochOgdaState, StochasticOracle)>),
}

impl Engine {
    fn build(op: &OperatorProblem, config: &SolverConfig, u0: Vec<f64>) -> Result<(Self, u64)> {
        Ok(match config.algorithm {
            Algorithm::OgdaPlus => (
                Engine::Ogda(OgdaPlusState::new(op, u0, config.a, config.gamma)?),
                OgdaPlusState::INITIAL_ORACLE_CALLS,
            ),
            Algorithm::EgPlus => (
                Engine::Eg(EgPlusState::new(op, u0, config.a, config.gamma)?),
                EgPlusState::INITIAL_ORACLE_CALLS,
            ),
            Algorithm::AdaptiveEgPlus => (
                Engine::Adaptive(AdaptiveEgState::new(
                    op,
                    u0,
                    config.a,
                    config.tau,
                    config.gamma,
                )?),
                AdaptiveEgState::INITIAL_ORACLE_CALLS,
            ),
            Algorithm::StochOgdaPlus => {
                let mut oracle = StochasticOracle::new(op.clone(), config.sigma, config.seed)?;
                let state =
                    StochOgdaState::new(&mut oracle, u0, config.a, config.gamma, config.batch)?;
                (
                    Engine::Stoch(Box::new((state, oracle))),
                    config.batch as u64,
                )
            }
        })
    }

    fn base_point(&self) -> &[f64] {
        match self {
            Engine::Ogda(s) => s.u(),
            Engine::Eg(s) => s.u_bar(),
            Engine::Adaptive(s) => s.u_bar(),
            Engine::Stoch(b) => b.0.u(),
        }
    }

    fn step(&mut self, op: &OperatorProblem) -> Result<StepReport> {
        match self {
            Engine::Ogda(s) => s.step(op),
            Engine::Eg(s) => s.step(op),
            Engine::Adaptive(s) => s.step(op),
            Engine::Stoch(b) => {
                let (s, o) = &mut **b;
                s.step(o)
            }
        }
    }
}

/// Runs `config.algorithm` from `u0`.
///
/// Configurations outside the rate theorems are run anyway. A non-finite
/// value or `||u_k|| > config.divergence_threshold` ends the run as
/// diverged rather than as an error.
pub fn solve(op: &OperatorProblem, config: &SolverConfig, u0: Vec<f64>) -> Result<IterateTrace> {
    config.validate()?;
    op.check_dim(&u0)?;
    let (mut engine, init_calls) = match Engine::build(op, config, u0.clone()) {
        Ok(e) => e,
        Err(Error::NonFinite { k, u }) => {
            let mut trace = IterateTrace::new(u0, 0);
            trace.mark_diverged(format!("non-finite field at iteration {k}, u = {u:?}"));
            trace.set_status(RunStatus::Diverged);
            return Ok(trace);
        }
        Err(e) => return Err(e),
    };
    let mut trace = IterateTrace::new(u0, init_calls);
    let tol_sq = config.tol * config.tol;
    for _ in 0..config.iters {
        let base = engine.base_point().to_vec();
        let report = match engine.step(op) {
            Ok(r) => r,
            Err(Error::NonFinite { k, u }) => {
                trace.mark_diverged(format!("non-finite value at iteration {k}, u = {u:?}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let next_norm = norm(&report.u_next);
        let blown = !all_finite(&report.u_next) || next_norm > config.divergence_threshold;
        let k = report.k;
        if let Some(region) = &op.rho_region {
            if !trace.left_rho_region() && !region.contains(&report.rated_point) {
                warn!(
                    "{}: iterate {k} left the region where rho = {:?} holds",
                    op.name, op.weak_minty_rho
                );
                trace.mark_left_rho_region();
            }
        }
        trace.push(base, report);
        if trace.best_norm_sq().is_some_and(|b| b <= tol_sq) {
            break;
        }
        if blown {
            trace.mark_diverged(format!("||u_{}|| = {next_norm:e} at iteration {k}", k + 1));
            break;
        }
    }
    let status = classify_run(&trace, config.tol);
    trace.set_status(status);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{lower_bound_problem, monotone_quadratic_problem};

    #[test]
    fn zero_operator_converges_immediately() {
        let op = OperatorProblem::new("zero", 2, |_| vec![0.0, 0.0]);
        for alg in Algorithm::ALL {
            let cfg = SolverConfig::new(alg, 0.1, 0.5);
            let t = solve(&op, &cfg, vec![1.0, 2.0]).unwrap();
            assert_eq!(t.status(), RunStatus::Converged, "{alg}");
            assert_eq!(t.len(), 1);
        }
    }

    #[test]
    fn eg_plus_diverges_on_lower_bound() {
        let op = lower_bound_problem(3f64.sqrt(), -1.0).unwrap().problem;
        let cfg = SolverConfig::new(Algorithm::EgPlus, 0.5, 0.5).with_iters(10_000);
        let t = solve(&op, &cfg, vec![1.0, 1.0]).unwrap();
        assert_ne!(t.status(), RunStatus::Converged);
        assert!(t.best_norm_sq().unwrap() >= t.rows()[0].field_norm_sq);
    }

    #[test]
    fn ogda_converges_on_monotone_quadratic() {
        let op = monotone_quadratic_problem(1.0, 2).unwrap().problem;
        let cfg = SolverConfig::new(Algorithm::OgdaPlus, 0.3, 1.0).with_iters(1000);
        let t = solve(&op, &cfg, vec![1.0, 1.0]).unwrap();
        assert_eq!(t.status(), RunStatus::Converged);
        assert_eq!(t.total_oracle_calls(), t.len() as u64 + 1);
    }

    #[test]
    fn rejects_invalid_config() {
        let op = monotone_quadratic_problem(1.0, 2).unwrap().problem;
        let cfg = SolverConfig::new(Algorithm::OgdaPlus, -0.3, 1.0);
        assert!(solve(&op, &cfg, vec![1.0, 1.0]).is_err());
        let cfg = SolverConfig::new(Algorithm::OgdaPlus, 0.3, 1.0);
        assert!(solve(&op, &cfg, vec![1.0]).is_err());
    }
}
