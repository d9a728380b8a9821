use crate::error::{Error, Result};
use crate::operators::OperatorProblem;
use crate::vecops::{all_finite, axpy, dist, norm_sq};

use super::{check_gamma, check_step, check_tau, StepReport};

fn eval_checked(op: &OperatorProblem, u: &[f64], k: usize) -> Result<Vec<f64>> {
    let f = op.eval(u);
    if all_finite(&f) && all_finite(u) {
        Ok(f)
    } else {
        Err(Error::NonFinite { k, u: u.to_vec() })
    }
}

/// EG+ with a fixed extrapolation step `a` and update step `gamma * a`:
///
/// ```text
/// u_k       = ubar_k - a F(ubar_k)
/// ubar_{k+1} = ubar_k - gamma a F(u_k)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct EgPlusState {
    u_bar: Vec<f64>,
    a: f64,
    gamma: f64,
    k: usize,
    last_u: Option<Vec<f64>>,
}

impl EgPlusState {
    pub const INITIAL_ORACLE_CALLS: u64 = 0;

    pub fn new(op: &OperatorProblem, u0: Vec<f64>, a: f64, gamma: f64) -> Result<Self> {
        check_step(a)?;
        check_gamma(gamma)?;
        op.check_dim(&u0)?;
        Ok(Self {
            u_bar: u0,
            a,
            gamma,
            k: 0,
            last_u: None,
        })
    }

    pub fn u_bar(&self) -> &[f64] {
        &self.u_bar
    }

    /// Most recent extrapolated point `u_{k-1}`.
    pub fn last_u(&self) -> Option<&[f64]> {
        self.last_u.as_deref()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn step(&mut self, op: &OperatorProblem) -> Result<StepReport> {
        let k = self.k;
        let f_bar = eval_checked(op, &self.u_bar, k)?;
        let u = axpy(&self.u_bar, -self.a, &f_bar);
        let f_u = eval_checked(op, &u, k)?;
        let next = axpy(&self.u_bar, -self.gamma * self.a, &f_u);
        self.u_bar = next;
        self.k += 1;
        self.last_u = Some(u.clone());
        Ok(StepReport {
            k,
            rated_point: u,
            u_next: self.u_bar.clone(),
            field_norm_sq: norm_sq(&f_u),
            step_used: self.a,
            oracle_calls: 2,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PreviousPair {
    u: Vec<f64>,
    u_bar: Vec<f64>,
    f_u: Vec<f64>,
    f_bar: Vec<f64>,
}

/// EG+ whose step estimates the inverse local Lipschitz constant from the
/// previous pair of points:
///
/// ```text
/// a_k = min(a_{k-1}, tau ||u_{k-1} - ubar_{k-1}|| / ||F(u_{k-1}) - F(ubar_{k-1})||)
/// ```
///
/// A zero denominator keeps `a_k = a_{k-1}`. The field values of the previous
/// pair are reused, so each step costs two oracle calls.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveEgState {
    u_bar: Vec<f64>,
    prev: Option<PreviousPair>,
    a: f64,
    a0: f64,
    tau: f64,
    gamma: f64,
    k: usize,
    k0: Option<usize>,
}

impl AdaptiveEgState {
    pub const INITIAL_ORACLE_CALLS: u64 = 0;

    pub fn new(op: &OperatorProblem, u0: Vec<f64>, a0: f64, tau: f64, gamma: f64) -> Result<Self> {
        check_step(a0)?;
        check_tau(tau)?;
        check_gamma(gamma)?;
        op.check_dim(&u0)?;
        Ok(Self {
            u_bar: u0,
            prev: None,
            a: a0,
            a0,
            tau,
            gamma,
            k: 0,
            k0: None,
        })
    }

    pub fn u_bar(&self) -> &[f64] {
        &self.u_bar
    }

    /// Step size used by the most recent step (`a_0` before the first).
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// First index from which `a_i / a_{i+1} <= 1/tau` has held at every
    /// observed step. Provisional until the run ends.
    pub fn k0(&self) -> Option<usize> {
        self.k0
    }

    fn next_step_size(&self) -> f64 {
        let Some(p) = &self.prev else {
            return self.a0;
        };
        let df = dist(&p.f_u, &p.f_bar);
        if df > 0.0 {
            self.a.min(self.tau * dist(&p.u, &p.u_bar) / df)
        } else {
            self.a
        }
    }

    pub fn step(&mut self, op: &OperatorProblem) -> Result<StepReport> {
        let k = self.k;
        let a = self.next_step_size();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::NonFinite {
                k,
                u: self.u_bar.clone(),
            });
        }
        if k == 0 {
            self.k0 = Some(0);
        } else if self.tau * self.a > a {
            // a_{k-1} / a_k > 1/tau
            self.k0 = Some(k);
        }
        self.a = a;

        let f_bar = eval_checked(op, &self.u_bar, k)?;
        let u = axpy(&self.u_bar, -a, &f_bar);
        let f_u = eval_checked(op, &u, k)?;
        let next = axpy(&self.u_bar, -a * self.gamma, &f_u);
        let field_norm_sq = norm_sq(&f_u);
        let u_bar = std::mem::replace(&mut self.u_bar, next);
        self.prev = Some(PreviousPair {
            u: u.clone(),
            u_bar,
            f_u,
            f_bar,
        });
        self.k += 1;
        Ok(StepReport {
            k,
            rated_point: u,
            u_next: self.u_bar.clone(),
            field_norm_sq,
            step_used: a,
            oracle_calls: 2,
        })
    }
}
