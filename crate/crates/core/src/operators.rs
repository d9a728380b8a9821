//! Operator abstraction `F: R^d -> R^d`, gradient fields of smooth min-max
//! objectives, and sampling estimates of the problem constants `L` and `rho`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::vecops::{dist, dot, norm, norm_sq, sub};

/// A deterministic vector field.
pub type Field = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Squared field norms below this are treated as stationary points when
/// estimating the weak Minty parameter.
pub const STATIONARY_NORM_SQ: f64 = 1e-14;

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid(
                "region",
                "bounds must be nonempty and of equal length",
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h))
        {
            return Err(invalid("region", "every side must satisfy lo < hi"));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h)
    }

    /// `n` uniform points. The sequence is prefix-stable: the first `m`
    /// points for a seed do not depend on `n >= m`.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.lo
                    .iter()
                    .zip(&self.hi)
                    .map(|(l, h)| rng.random_range(*l..*h))
                    .collect()
            })
            .collect()
    }
}

/// An operator `F` together with whatever problem constants are known.
#[derive(Clone)]
pub struct OperatorProblem {
    pub name: String,
    dim: usize,
    field: Field,
    /// Lipschitz constant `L` of `F`.
    pub lipschitz: Option<f64>,
    /// Weak Minty parameter `rho` w.r.t. `solution`.
    pub weak_minty_rho: Option<f64>,
    /// A zero of `F`.
    pub solution: Option<Vec<f64>>,
    /// `F` is declared monotone.
    pub monotone: bool,
    /// Where `weak_minty_rho` is known to hold, if not globally.
    pub rho_region: Option<Region>,
}

impl fmt::Debug for OperatorProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("weak_minty_rho", &self.weak_minty_rho)
            .field("solution", &self.solution)
            .field("monotone", &self.monotone)
            .field("rho_region", &self.rho_region)
            .finish_non_exhaustive()
    }
}

impl OperatorProblem {
    pub fn new<F>(name: impl Into<String>, dim: usize, field: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::from_field(name, dim, Arc::new(field))
    }

    pub fn from_field(name: impl Into<String>, dim: usize, field: Field) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Self {
            name: name.into(),
            dim,
            field,
            lipschitz: None,
            weak_minty_rho: None,
            solution: None,
            monotone: false,
            rho_region: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.weak_minty_rho = Some(rho);
        self
    }

    pub fn with_solution(mut self, u: Vec<f64>) -> Self {
        assert_eq!(u.len(), self.dim);
        self.solution = Some(u);
        self
    }

    pub fn with_monotone(mut self, monotone: bool) -> Self {
        self.monotone = monotone;
        self
    }

    pub fn with_rho_region(mut self, region: Region) -> Self {
        self.rho_region = Some(region);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// `F(u)`. Panics if `u` has the wrong dimension; solvers check this
    /// once up front via [`OperatorProblem::check_dim`].
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.dim, "point dimension does not match operator");
        (self.field)(u)
    }

    pub fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            })
        }
    }

    pub fn require_solution(&self) -> Result<&[f64]> {
        self.solution
            .as_deref()
            .ok_or_else(|| self.missing("solution"))
    }

    pub fn require_rho(&self) -> Result<f64> {
        self.weak_minty_rho
            .ok_or_else(|| self.missing("weak_minty_rho"))
    }

    pub fn require_lipschitz(&self) -> Result<f64> {
        self.lipschitz.ok_or_else(|| self.missing("lipschitz"))
    }

    pub(crate) fn missing(&self, field: &'static str) -> Error {
        Error::MissingMetadata {
            problem: self.name.clone(),
            field,
        }
    }
}

type Scalar2 = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type Grad2 = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth objective `f(x, y)` for `min_x max_y f(x, y)` with analytic
/// partial gradients.
#[derive(Clone)]
pub struct MinMaxObjective {
    pub name: String,
    pub dim_x: usize,
    pub dim_y: usize,
    value: Scalar2,
    grad_x: Grad2,
    grad_y: Grad2,
}

impl fmt::Debug for MinMaxObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MinMaxObjective")
            .field("name", &self.name)
            .field("dim_x", &self.dim_x)
            .field("dim_y", &self.dim_y)
            .finish_non_exhaustive()
    }
}

impl MinMaxObjective {
    pub fn new<V, GX, GY>(
        name: impl Into<String>,
        dim_x: usize,
        dim_y: usize,
        value: V,
        grad_x: GX,
        grad_y: GY,
    ) -> Self
    where
        V: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        GX: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        GY: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim_x > 0 && dim_y > 0);
        Self {
            name: name.into(),
            dim_x,
            dim_y,
            value: Arc::new(value),
            grad_x: Arc::new(grad_x),
            grad_y: Arc::new(grad_y),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim_x + self.dim_y
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.value)(x, y)
    }

    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.grad_x)(x, y)
    }

    pub fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.grad_y)(x, y)
    }

    fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.dim_x)
    }
}

/// The operator `F(x, y) = (grad_x f, -grad_y f)` of a min-max objective.
pub fn gradient_field(obj: &MinMaxObjective) -> OperatorProblem {
    let o = obj.clone();
    OperatorProblem::new(obj.name.clone(), obj.dim(), move |u| {
        let (x, y) = o.split(u);
        let mut out = o.grad_x(x, y);
        out.extend(o.grad_y(x, y).into_iter().map(|g| -g));
        out
    })
}

/// Result of comparing analytic gradients against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// `max_p ||g(p) - g_fd(p)|| / max(1, ||g(p)||)`.
    pub max_rel_error: f64,
    pub worst_point: usize,
}

/// Checks `grad_x` and `grad_y` against central differences of `value` at
/// every point (points are concatenated `(x, y)`).
pub fn finite_difference_check(
    obj: &MinMaxObjective,
    points: &[Vec<f64>],
    h: f64,
) -> Result<FdReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", "step must be positive"));
    }
    if points.is_empty() {
        return Err(invalid("points", "need at least one point"));
    }
    let mut report = FdReport {
        max_rel_error: 0.0,
        worst_point: 0,
    };
    for (i, p) in points.iter().enumerate() {
        if p.len() != obj.dim() {
            return Err(Error::DimensionMismatch {
                expected: obj.dim(),
                got: p.len(),
            });
        }
        let (x, y) = obj.split(p);
        let mut analytic = obj.grad_x(x, y);
        analytic.extend(obj.grad_y(x, y));
        let mut numeric = Vec::with_capacity(p.len());
        let mut probe = p.clone();
        for j in 0..p.len() {
            let orig = probe[j];
            probe[j] = orig + h;
            let (xp, yp) = obj.split(&probe);
            let fp = obj.value(xp, yp);
            probe[j] = orig - h;
            let (xm, ym) = obj.split(&probe);
            let fm = obj.value(xm, ym);
            probe[j] = orig;
            numeric.push((fp - fm) / (2.0 * h));
        }
        let err = norm(&sub(&analytic, &numeric)) / norm(&analytic).max(1.0);
        if err > report.max_rel_error {
            report = FdReport {
                max_rel_error: err,
                worst_point: i,
            };
        }
    }
    Ok(report)
}

/// Largest `||F(u) - F(v)|| / ||u - v||` over consecutive pairs of
/// `samples` uniform points in `region`. A lower bound on the local `L`;
/// nondecreasing in `samples` for a fixed seed.
pub fn estimate_lipschitz(
    op: &OperatorProblem,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    if region.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: region.dim(),
        });
    }
    let points = region.sample_points(samples, seed);
    let fields: Vec<Vec<f64>> = points.par_iter().map(|u| op.eval(u)).collect();
    let est = points
        .windows(2)
        .zip(fields.windows(2))
        .filter_map(|(p, f)| {
            let d = dist(&p[0], &p[1]);
            (d > 0.0).then(|| dist(&f[0], &f[1]) / d)
        })
        .fold(0.0, f64::max);
    Ok(est)
}

/// `-2 <F(u), u - u*> / ||F(u)||^2`, or `None` when `u` is (numerically)
/// stationary.
pub fn weak_minty_ratio(op: &OperatorProblem, solution: &[f64], u: &[f64]) -> Option<f64> {
    let f = op.eval(u);
    let nsq = norm_sq(&f);
    (nsq >= STATIONARY_NORM_SQ).then(|| -2.0 * dot(&f, &sub(u, solution)) / nsq)
}

/// Sampled lower bound on the smallest `rho` for which the weak Minty
/// condition holds on `region`.
pub fn estimate_weak_minty_rho(
    op: &OperatorProblem,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let solution = op.require_solution()?;
    if samples < 1 {
        return Err(invalid("samples", "need at least one sample"));
    }
    if region.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: region.dim(),
        });
    }
    let points = region.sample_points(samples, seed);
    let est = points
        .par_iter()
        .filter_map(|u| weak_minty_ratio(op, solution, u))
        .reduce(|| 0.0, f64::max);
    Ok(est.max(0.0))
}
