//! Unbiased noisy oracle with isotropic Gaussian noise and the mini-batch
//! variant of OGDA+.
//!
//! The update only ever sees batch estimates `g~_k`; the exact field is
//! evaluated separately for the reported `||F(u_k)||^2`, which is what the
//! rate statement is about.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algorithms::{check_gamma, check_step, OgdaPlusState, StepReport};
use crate::error::{invalid, Error, Result};
use crate::operators::OperatorProblem;
use crate::vecops::{all_finite, norm_sq};

/// `F~(u, xi) = F(u) + sigma * eta`, `eta ~ N(0, I)`, so that
/// `E||F~ - F||^2 = d sigma^2`.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    base: OperatorProblem,
    sigma: f64,
    seed: u64,
    rng: ChaCha8Rng,
    sample_counter: u64,
}

impl StochasticOracle {
    pub fn new(base: OperatorProblem, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and nonnegative"));
        }
        Ok(Self {
            base,
            sigma,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sample_counter: 0,
        })
    }

    pub fn base(&self) -> &OperatorProblem {
        &self.base
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of stochastic samples drawn so far.
    pub fn sample_counter(&self) -> u64 {
        self.sample_counter
    }

    /// Mean of `batch` independent draws of `F~(u, xi)`.
    pub fn batch_estimate(&mut self, u: &[f64], batch: usize) -> Result<Vec<f64>> {
        if batch < 1 {
            return Err(invalid("batch", "must be at least 1"));
        }
        self.base.check_dim(u)?;
        let f = self.base.eval(u);
        let mut noise = vec![0.0; f.len()];
        for _ in 0..batch {
            for n in noise.iter_mut() {
                let eta: f64 = StandardNormal.sample(&mut self.rng);
                *n += eta;
            }
        }
        self.sample_counter += batch as u64;
        let scale = self.sigma / batch as f64;
        Ok(f.iter().zip(&noise).map(|(f, n)| f + scale * n).collect())
    }
}

/// Stochastic OGDA+: `u_{k+1} = u_k - a((1 + gamma) g~_k - g~_{k-1})` with
/// `g~_k` a batch estimate at `u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochOgdaState {
    inner: OgdaPlusState,
    batch: usize,
}

impl StochOgdaState {
    /// Draws `g~_{-1}` from a batch at `u_0`, costing `batch` oracle calls.
    pub fn new(
        oracle: &mut StochasticOracle,
        u0: Vec<f64>,
        a: f64,
        gamma: f64,
        batch: usize,
    ) -> Result<Self> {
        check_step(a)?;
        check_gamma(gamma)?;
        let g0 = oracle.batch_estimate(&u0, batch)?;
        if !all_finite(&g0) {
            return Err(Error::NonFinite { k: 0, u: u0 });
        }
        Ok(Self {
            inner: OgdaPlusState::from_parts(u0, g0, a, gamma),
            batch,
        })
    }

    pub fn u(&self) -> &[f64] {
        self.inner.u()
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn k(&self) -> usize {
        self.inner.k()
    }

    pub fn step(&mut self, oracle: &mut StochasticOracle) -> Result<StepReport> {
        let k = self.inner.k();
        let g = oracle.batch_estimate(self.inner.u(), self.batch)?;
        let exact = oracle.base().eval(self.inner.u());
        if !(all_finite(&g) && all_finite(&exact)) {
            return Err(Error::NonFinite {
                k,
                u: self.inner.u().to_vec(),
            });
        }
        let rated = self.inner.advance(g);
        Ok(StepReport {
            k,
            rated_point: rated,
            u_next: self.inner.u().to_vec(),
            field_norm_sq: norm_sq(&exact),
            step_used: self.inner.a(),
            oracle_calls: self.batch as u64,
        })
    }
}

/// Batch size `max(1, ceil(4 sigma^2 / (a L eps)))`, which brings the
/// estimator variance down to `a L eps / 4`.
///
/// Quotients within `1e-9` (relative) of an integer are rounded to it, so
/// that e.g. `4 / (1/3 * 0.01)` gives 1200 rather than 1201.
pub fn required_batch_size(sigma: f64, a: f64, lipschitz: f64, epsilon: f64) -> Result<u64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", "must be finite and nonnegative"));
    }
    for (name, v) in [("a", a), ("lipschitz", lipschitz), ("epsilon", epsilon)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, "must be positive"));
        }
    }
    let q = 4.0 * sigma * sigma / (a * lipschitz * epsilon);
    if !q.is_finite() || q > u64::MAX as f64 {
        return Err(invalid("epsilon", "required batch size overflows"));
    }
    let r = q.round();
    let b = if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        q.ceil()
    };
    Ok((b as u64).max(1))
}
