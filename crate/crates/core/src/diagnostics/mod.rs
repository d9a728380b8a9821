//! Iterate traces, rate certificates, weak Minty sign grids and residuals,
//! and run classification.

use std::fmt;
use std::fmt::Write as _;

use crate::algorithms::StepReport;

mod certificate;
mod lyapunov;
mod minty;

pub use certificate::{evaluate_certificate, RateCertificate, TheoremId, CERTIFICATE_SLACK};
pub use lyapunov::{adaptive_lyapunov_check, ogda_lyapunov_check, LyapunovReport, LYAPUNOV_SLACK};
pub use minty::{sign_grid, weak_minty_residual, SignGrid, SIGN_ZERO_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    Diverged,
    BudgetExhausted,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Diverged => "diverged",
            RunStatus::BudgetExhausted => "budget_exhausted",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// The rated point `u_k`.
    pub point: Vec<f64>,
    /// The point the step started from (`u_k` for OGDA+, `ubar_k` for EG+).
    pub base: Vec<f64>,
    pub field_norm_sq: f64,
    pub step: f64,
    /// Oracle calls so far, including initialization.
    pub oracle_calls: u64,
    /// `min_{i <= k} field_norm_sq[i]`.
    pub best_norm_sq: f64,
    pub best_index: usize,
}

/// Append-only per-iteration record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    rows: Vec<TraceRow>,
    initial_point: Vec<f64>,
    initial_oracle_calls: u64,
    final_point: Vec<f64>,
    diverged: bool,
    abort_reason: Option<String>,
    left_rho_region: bool,
    status: RunStatus,
}

impl IterateTrace {
    pub fn new(initial_point: Vec<f64>, initial_oracle_calls: u64) -> Self {
        Self {
            final_point: initial_point.clone(),
            rows: Vec::new(),
            initial_point,
            initial_oracle_calls,
            diverged: false,
            abort_reason: None,
            left_rho_region: false,
            status: RunStatus::BudgetExhausted,
        }
    }

    pub fn push(&mut self, base: Vec<f64>, report: StepReport) {
        let calls = self.total_oracle_calls() + report.oracle_calls;
        let (best_norm_sq, best_index) = match self.rows.last() {
            Some(last) if last.best_norm_sq <= report.field_norm_sq => {
                (last.best_norm_sq, last.best_index)
            }
            _ => (report.field_norm_sq, report.k),
        };
        self.final_point = report.u_next;
        self.rows.push(TraceRow {
            k: report.k,
            point: report.rated_point,
            base,
            field_norm_sq: report.field_norm_sq,
            step: report.step_used,
            oracle_calls: calls,
            best_norm_sq,
            best_index,
        });
    }

    pub fn mark_diverged(&mut self, reason: impl Into<String>) {
        self.diverged = true;
        self.abort_reason = Some(reason.into());
    }

    pub fn mark_left_rho_region(&mut self) {
        self.left_rho_region = true;
    }

    pub fn set_status(&mut self, status: RunStatus) {
        self.status = status;
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn initial_point(&self) -> &[f64] {
        &self.initial_point
    }

    /// The point the next step would start from.
    pub fn final_point(&self) -> &[f64] {
        &self.final_point
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub fn abort_reason(&self) -> Option<&str> {
        self.abort_reason.as_deref()
    }

    pub fn left_rho_region(&self) -> bool {
        self.left_rho_region
    }

    pub fn status(&self) -> RunStatus {
        self.status
    }

    pub fn total_oracle_calls(&self) -> u64 {
        self.rows
            .last()
            .map_or(self.initial_oracle_calls, |r| r.oracle_calls)
    }

    pub fn best_norm_sq(&self) -> Option<f64> {
        self.rows.last().map(|r| r.best_norm_sq)
    }

    pub fn final_step(&self) -> Option<f64> {
        self.rows.last().map(|r| r.step)
    }

    /// `k,u_0..u_{d-1},field_norm_sq,step,oracle_calls`
    pub fn to_csv(&self) -> String {
        let d = self.initial_point.len();
        let mut out = String::from("k");
        for i in 0..d {
            let _ = write!(out, ",u_{i}");
        }
        out.push_str(",field_norm_sq,step,oracle_calls\n");
        for r in &self.rows {
            let _ = write!(out, "{}", r.k);
            for x in &r.point {
                let _ = write!(out, ",{}", fmt_real(*x));
            }
            let _ = writeln!(
                out,
                ",{},{},{}",
                fmt_real(r.field_norm_sq),
                fmt_real(r.step),
                r.oracle_calls
            );
        }
        out
    }
}

/// Reals in CSV output carry 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Converged iff the best `||F||^2` reached `tol^2`; diverged iff the
/// magnitude guard tripped; otherwise the budget ran out.
pub fn classify_run(trace: &IterateTrace, tol: f64) -> RunStatus {
    match trace.best_norm_sq() {
        Some(best) if best <= tol * tol => RunStatus::Converged,
        _ if trace.diverged() => RunStatus::Diverged,
        _ => RunStatus::BudgetExhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(k: usize, nsq: f64, calls: u64) -> StepReport {
        StepReport {
            k,
            rated_point: vec![k as f64],
            u_next: vec![k as f64 + 1.0],
            field_norm_sq: nsq,
            step_used: 0.1,
            oracle_calls: calls,
        }
    }

    #[test]
    fn best_tracks_running_min() {
        let mut t = IterateTrace::new(vec![0.0], 1);
        for (k, v) in [4.0, 2.0, 3.0, 1.0, 1.5].into_iter().enumerate() {
            t.push(vec![k as f64], report(k, v, 1));
        }
        let best: Vec<_> = t
            .rows()
            .iter()
            .map(|r| (r.best_norm_sq, r.best_index))
            .collect();
        assert_eq!(best, vec![(4.0, 0), (2.0, 1), (2.0, 1), (1.0, 3), (1.0, 3)]);
        let calls: Vec<_> = t.rows().iter().map(|r| r.oracle_calls).collect();
        assert_eq!(calls, vec![2, 3, 4, 5, 6]);
        assert_eq!(t.final_point(), &[5.0]);
    }

    #[test]
    fn classification() {
        let mut t = IterateTrace::new(vec![0.0], 0);
        assert_eq!(classify_run(&t, 1e-3), RunStatus::BudgetExhausted);
        t.push(vec![0.0], report(0, 0.0, 2));
        assert_eq!(classify_run(&t, 1e-6), RunStatus::Converged);
        let mut d = IterateTrace::new(vec![0.0], 0);
        d.push(vec![0.0], report(0, 5.0, 2));
        d.mark_diverged("norm guard");
        assert_eq!(classify_run(&d, 1e-6), RunStatus::Diverged);
    }

    #[test]
    fn csv_header_and_format() {
        let mut t = IterateTrace::new(vec![0.0, 0.0], 1);
        t.push(
            vec![0.0, 0.0],
            StepReport {
                k: 0,
                rated_point: vec![0.5, -1.0],
                u_next: vec![0.0, 0.0],
                field_norm_sq: 0.25,
                step_used: 0.1,
                oracle_calls: 1,
            },
        );
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("k,u_0,u_1,field_norm_sq,step,oracle_calls")
        );
        assert_eq!(
            lines.next(),
            Some("0,5.0000000000000000e-1,-1.0000000000000000e0,2.5000000000000000e-1,1.0000000000000001e-1,2")
        );
        assert!(!csv.contains('\r'));
    }
}
