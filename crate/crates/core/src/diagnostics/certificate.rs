use std::fmt;
use std::fmt::Write as _;

use crate::algorithms::{Algorithm, SolverConfig};
use crate::error::{invalid, Result};
use crate::operators::OperatorProblem;
use crate::vecops::{axpy, norm_sq, sub};

use super::{fmt_real, IterateTrace};

/// Relative slack allowed when comparing best-iterate norms to a bound.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// OGDA+ under a weak Minty solution: `a > rho`, `aL <= (1-g)/(1+g)`,
    /// `min_i ||F(u_i)||^2 <= ||u_0 + aF(u_0) - u*||^2 / (k a g (a - rho))`.
    OgdaWeakMinty,
    /// OGDA+ for monotone `F` with `aL = (2-g)/(2+g) - eps`,
    /// `min_i ||F(u_i)||^2 <= 2 ||u_0 + aF(u_0) - u*||^2 / (k a^2 g^2 eps)`.
    OgdaMonotone,
    /// Adaptive EG+ with `gamma = 1/2` and `a_inf > 2 rho`,
    /// `min_{k0<=i<=k} ||F(u_i)||^2 <= L ||ubar_k0 - u*||^2 / ((k-k0) tau (a_inf/2 - rho))`.
    AdaptiveEg,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::OgdaWeakMinty => "ogda_weak_minty",
            TheoremId::OgdaMonotone => "ogda_monotone",
            TheoremId::AdaptiveEg => "adaptive_eg",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A best-iterate rate bound evaluated along a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    pub theorem: Option<TheoremId>,
    pub applicable: bool,
    /// Why the certificate does not apply.
    pub reason: Option<String>,
    /// Trace index of the first bounded row.
    pub start_index: usize,
    /// Bound for rows `start_index..`.
    pub bound_at_k: Vec<f64>,
    /// Best `||F||^2` over the rated window, for rows `start_index..`.
    pub best_norm_sq: Vec<f64>,
    /// Trace index of the first violation.
    pub violated_at: Option<usize>,
    /// Uses end-of-run quantities (adaptive EG+: final step and `k0`).
    pub post_hoc: bool,
    /// `k0` used by the adaptive certificate.
    pub k0: Option<usize>,
}

impl RateCertificate {
    fn not_applicable(theorem: Option<TheoremId>, reason: impl Into<String>) -> Self {
        Self {
            theorem,
            applicable: false,
            reason: Some(reason.into()),
            start_index: 0,
            bound_at_k: Vec::new(),
            best_norm_sq: Vec::new(),
            violated_at: None,
            post_hoc: false,
            k0: None,
        }
    }

    pub fn violations(&self) -> usize {
        self.bound_at_k
            .iter()
            .zip(&self.best_norm_sq)
            .filter(|(b, v)| **v > **b * (1.0 + CERTIFICATE_SLACK))
            .count()
    }

    /// `k,bound,best_norm_sq,ok`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,bound,best_norm_sq,ok\n");
        for (i, (b, v)) in self.bound_at_k.iter().zip(&self.best_norm_sq).enumerate() {
            let ok = *v <= *b * (1.0 + CERTIFICATE_SLACK);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.start_index + i,
                fmt_real(*b),
                fmt_real(*v),
                ok
            );
        }
        out
    }
}

fn stays_in_rho_region(trace: &IterateTrace, op: &OperatorProblem) -> bool {
    match &op.rho_region {
        None => true,
        Some(region) => trace
            .rows()
            .iter()
            .all(|r| region.contains(&r.point) && region.contains(&r.base)),
    }
}

/// `||u_0 + a F(u_0) - u*||^2`
fn ogda_initial_potential(op: &OperatorProblem, u0: &[f64], a: f64, solution: &[f64]) -> f64 {
    let shifted = axpy(u0, a, &op.eval(u0));
    norm_sq(&sub(&shifted, solution))
}

fn finish(
    theorem: TheoremId,
    trace: &IterateTrace,
    start_index: usize,
    bound: impl Fn(usize) -> f64,
    post_hoc: bool,
    k0: Option<usize>,
) -> RateCertificate {
    let rows = &trace.rows()[start_index..];
    let mut best = f64::INFINITY;
    let mut bounds = Vec::with_capacity(rows.len());
    let mut bests = Vec::with_capacity(rows.len());
    let mut violated_at = None;
    for (i, r) in rows.iter().enumerate() {
        best = best.min(r.field_norm_sq);
        let b = bound(start_index + i);
        if violated_at.is_none() && best > b * (1.0 + CERTIFICATE_SLACK) {
            violated_at = Some(start_index + i);
        }
        bounds.push(b);
        bests.push(best);
    }
    RateCertificate {
        theorem: Some(theorem),
        applicable: true,
        reason: None,
        start_index,
        bound_at_k: bounds,
        best_norm_sq: bests,
        violated_at,
        post_hoc,
        k0,
    }
}

/// First index from which `tau * a_i <= a_{i+1}` holds for every later step.
pub(crate) fn detect_k0(steps: &[f64], tau: f64) -> usize {
    steps
        .windows(2)
        .rposition(|w| tau * w[0] > w[1])
        .map_or(0, |i| i + 1)
}

/// Picks the rate theorem matching the run and evaluates it at every row.
pub fn evaluate_certificate(
    trace: &IterateTrace,
    op: &OperatorProblem,
    config: &SolverConfig,
) -> Result<RateCertificate> {
    let solution = op.require_solution()?;
    if trace.is_empty() {
        return Err(invalid("trace", "cannot certify an empty trace"));
    }
    let (a, gamma) = (config.a, config.gamma);
    match config.algorithm {
        Algorithm::OgdaPlus => {
            let Some(l) = op.lipschitz else {
                return Ok(RateCertificate::not_applicable(
                    None,
                    "lipschitz constant unknown",
                ));
            };
            let v0 = ogda_initial_potential(op, trace.initial_point(), a, solution);
            if op.monotone {
                let eps = (2.0 - gamma) / (2.0 + gamma) - a * l;
                if eps > 0.0 {
                    let c = 2.0 * v0 / (a * a * gamma * gamma * eps);
                    return Ok(finish(
                        TheoremId::OgdaMonotone,
                        trace,
                        0,
                        |k| c / (k + 1) as f64,
                        false,
                        None,
                    ));
                }
            }
            let Some(rho) = op.weak_minty_rho else {
                return Ok(RateCertificate::not_applicable(
                    Some(TheoremId::OgdaWeakMinty),
                    "weak Minty parameter unknown",
                ));
            };
            if a <= rho {
                return Ok(RateCertificate::not_applicable(
                    Some(TheoremId::OgdaWeakMinty),
                    "a <= rho",
                ));
            }
            if a * l > (1.0 - gamma) / (1.0 + gamma) {
                return Ok(RateCertificate::not_applicable(
                    Some(TheoremId::OgdaWeakMinty),
                    "aL > (1 - gamma)/(1 + gamma)",
                ));
            }
            if !stays_in_rho_region(trace, op) {
                return Ok(RateCertificate::not_applicable(
                    Some(TheoremId::OgdaWeakMinty),
                    "iterates left the region where rho holds",
                ));
            }
            let c = v0 / (a * gamma * (a - rho));
            Ok(finish(
                TheoremId::OgdaWeakMinty,
                trace,
                0,
                |k| c / (k + 1) as f64,
                false,
                None,
            ))
        }
        Algorithm::AdaptiveEgPlus => {
            let theorem = Some(TheoremId::AdaptiveEg);
            if gamma != 0.5 {
                return Ok(RateCertificate::not_applicable(
                    theorem,
                    "requires gamma = 1/2",
                ));
            }
            let (Some(l), Some(rho)) = (op.lipschitz, op.weak_minty_rho) else {
                return Ok(RateCertificate::not_applicable(
                    theorem,
                    "lipschitz constant or weak Minty parameter unknown",
                ));
            };
            let steps: Vec<f64> = trace.rows().iter().map(|r| r.step).collect();
            let a_inf = *steps.last().expect("nonempty trace");
            if a_inf <= 2.0 * rho {
                return Ok(RateCertificate::not_applicable(theorem, "a_inf <= 2 rho"));
            }
            if !stays_in_rho_region(trace, op) {
                return Ok(RateCertificate::not_applicable(
                    theorem,
                    "iterates left the region where rho holds",
                ));
            }
            let k0 = detect_k0(&steps, config.tau);
            if k0 + 1 >= trace.len() {
                return Ok(RateCertificate::not_applicable(theorem, "no rows after k0"));
            }
            let anchor = &trace.rows()[k0].base;
            let c = l / (config.tau * (a_inf / 2.0 - rho)) * norm_sq(&sub(anchor, solution));
            let mut cert = finish(
                TheoremId::AdaptiveEg,
                trace,
                k0,
                |k| {
                    if k == k0 {
                        f64::INFINITY
                    } else {
                        c / (k - k0) as f64
                    }
                },
                true,
                Some(k0),
            );
            // the k = k0 row has no finite bound
            cert.start_index = k0 + 1;
            cert.bound_at_k.remove(0);
            cert.best_norm_sq.remove(0);
            Ok(cert)
        }
        Algorithm::EgPlus => Ok(RateCertificate::not_applicable(
            None,
            "no rate certificate for fixed-step EG+",
        )),
        Algorithm::StochOgdaPlus => Ok(RateCertificate::not_applicable(
            None,
            "stochastic rate holds in expectation only",
        )),
    }
}
