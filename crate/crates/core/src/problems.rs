//! Benchmark operators with their known constants and solutions.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::operators::{
    estimate_lipschitz, gradient_field, MinMaxObjective, OperatorProblem, Region,
};

/// Printed root of the reduced ratio game.
pub const RATIO_GAME_SOLUTION: [f64; 2] = [0.951941, 0.050485];

/// Lipschitz constant used for the ratio game experiments.
pub const RATIO_GAME_LIPSCHITZ: f64 = 5.0 / 3.0;

/// Approximate Forsaken stationary point, used as the Newton starting guess.
pub const FORSAKEN_APPROX_SOLUTION: [f64; 2] = [0.08, 0.4];

/// Local lower bound on the Forsaken weak Minty parameter near the solution.
pub const FORSAKEN_RHO_LOWER: f64 = 2.0 * 0.477761;

/// Weak Minty parameter valid on `||(x, y)||_inf <= 3/2`. The pointwise
/// ratio `-2<F(u), u-u*>/||F(u)||^2` peaks at about 3.041132 near
/// (-0.2581, 0.7917); this is that value rounded up.
pub const FORSAKEN_RHO: f64 = 3.0412;

/// Half-width of the box on which [`FORSAKEN_RHO`] holds.
pub const FORSAKEN_BOX: f64 = 1.5;

/// Default Polar Game parameter.
pub const POLAR_DEFAULT_A: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchmarkId {
    LowerBound,
    RatioGame,
    Forsaken,
    PolarGame,
    MonotoneQuadratic,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 5] = [
        BenchmarkId::LowerBound,
        BenchmarkId::RatioGame,
        BenchmarkId::Forsaken,
        BenchmarkId::PolarGame,
        BenchmarkId::MonotoneQuadratic,
    ];

    /// Stable CLI identifier.
    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkId::LowerBound => "lower-bound",
            BenchmarkId::RatioGame => "ratio-game",
            BenchmarkId::Forsaken => "forsaken",
            BenchmarkId::PolarGame => "polar-game",
            BenchmarkId::MonotoneQuadratic => "monotone-quadratic",
        }
    }

    /// Documented starting point for each problem.
    pub fn default_start(self, dim: usize) -> Vec<f64> {
        match self {
            BenchmarkId::LowerBound | BenchmarkId::PolarGame => vec![1.0, 1.0],
            BenchmarkId::Forsaken | BenchmarkId::RatioGame => vec![0.5, 0.5],
            BenchmarkId::MonotoneQuadratic => vec![1.0; dim],
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('_', "-");
        BenchmarkId::ALL
            .into_iter()
            .find(|id| id.as_str() == norm)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// A benchmark instance: its id, the parameters it was built from, and the
/// operator with metadata filled in.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub id: BenchmarkId,
    pub params: Vec<(&'static str, f64)>,
    pub problem: OperatorProblem,
}

/// `f(x, y) = xi*x*y + zeta/2 (x^2 - y^2)`.
pub fn lower_bound_objective(xi: f64, zeta: f64) -> MinMaxObjective {
    MinMaxObjective::new(
        "lower-bound",
        1,
        1,
        move |x, y| xi * x[0] * y[0] + 0.5 * zeta * (x[0] * x[0] - y[0] * y[0]),
        move |x, y| vec![xi * y[0] + zeta * x[0]],
        move |x, y| vec![xi * x[0] - zeta * y[0]],
    )
}

/// Lower-bound example: `F(x, y) = (zeta x + xi y, -xi x + zeta y)`, with
/// `L = sqrt(xi^2 + zeta^2)` and `rho = max(0, -2 zeta / (xi^2 + zeta^2))`.
pub fn lower_bound_problem(xi: f64, zeta: f64) -> Result<BenchmarkSpec> {
    if !(xi.is_finite() && zeta.is_finite()) {
        return Err(invalid("xi/zeta", "must be finite"));
    }
    if xi == 0.0 && zeta == 0.0 {
        return Err(invalid(
            "xi/zeta",
            "(xi, zeta) = (0, 0) gives the zero operator",
        ));
    }
    let sq = xi * xi + zeta * zeta;
    let problem = gradient_field(&lower_bound_objective(xi, zeta))
        .with_lipschitz(sq.sqrt())
        .with_rho((-2.0 * zeta / sq).max(0.0))
        .with_solution(vec![0.0, 0.0])
        .with_monotone(zeta >= 0.0);
    Ok(BenchmarkSpec {
        id: BenchmarkId::LowerBound,
        params: vec![("xi", xi), ("zeta", zeta)],
        problem,
    })
}

fn ratio_num_den(x: f64, y: f64) -> (f64, f64) {
    (-1.2 * x * y + 0.9 * y - 0.3, 0.4 * y + 0.1 * x + 0.4)
}

/// Ratio game value in the reduced parametrization `u = (x, 1-x, y, 1-y)`.
pub fn ratio_game_value(x: f64, y: f64) -> f64 {
    let (n, d) = ratio_num_den(x, y);
    n / d
}

pub fn ratio_game_objective() -> MinMaxObjective {
    MinMaxObjective::new(
        "ratio-game",
        1,
        1,
        |x, y| ratio_game_value(x[0], y[0]),
        |x, y| {
            let (n, d) = ratio_num_den(x[0], y[0]);
            vec![(-1.2 * y[0] * d - 0.1 * n) / (d * d)]
        },
        |x, y| {
            let (n, d) = ratio_num_den(x[0], y[0]);
            vec![((-1.2 * x[0] + 0.9) * d - 0.4 * n) / (d * d)]
        },
    )
}

/// Von Neumann ratio game with `R = [[-0.6, -0.3], [0.6, -0.3]]` and
/// `S = [[0.9, 0.5], [0.8, 0.4]]`, reduced to the two free coordinates.
pub fn ratio_game_problem() -> BenchmarkSpec {
    let problem = gradient_field(&ratio_game_objective())
        .with_lipschitz(RATIO_GAME_LIPSCHITZ)
        .with_solution(RATIO_GAME_SOLUTION.to_vec());
    BenchmarkSpec {
        id: BenchmarkId::RatioGame,
        params: Vec::new(),
        problem,
    }
}

/// `phi(z) = z^2/4 - z^4/2 + z^6/6`
pub fn forsaken_phi(z: f64) -> f64 {
    let z2 = z * z;
    z2 / 4.0 - z2 * z2 / 2.0 + z2 * z2 * z2 / 6.0
}

pub fn forsaken_dphi(z: f64) -> f64 {
    let z2 = z * z;
    z / 2.0 - 2.0 * z2 * z + z2 * z2 * z
}

fn forsaken_ddphi(z: f64) -> f64 {
    let z2 = z * z;
    0.5 - 6.0 * z2 + 5.0 * z2 * z2
}

/// `f(x, y) = x (y - 0.45) + phi(x) - phi(y)`
pub fn forsaken_objective() -> MinMaxObjective {
    MinMaxObjective::new(
        "forsaken",
        1,
        1,
        |x, y| x[0] * (y[0] - 0.45) + forsaken_phi(x[0]) - forsaken_phi(y[0]),
        |x, y| vec![y[0] - 0.45 + forsaken_dphi(x[0])],
        |x, y| vec![x[0] - forsaken_dphi(y[0])],
    )
}

/// Newton iteration on the Forsaken field from the approximate root.
fn forsaken_root() -> [f64; 2] {
    let [mut x, mut y] = FORSAKEN_APPROX_SOLUTION;
    for _ in 0..50 {
        let f0 = y - 0.45 + forsaken_dphi(x);
        let f1 = -x + forsaken_dphi(y);
        // J = [[phi''(x), 1], [-1, phi''(y)]]
        let (j00, j11) = (forsaken_ddphi(x), forsaken_ddphi(y));
        let det = j00 * j11 + 1.0;
        let dx = (j11 * f0 - f1) / det;
        let dy = (j00 * f1 + f0) / det;
        x -= dx;
        y -= dy;
        if dx.abs().max(dy.abs()) < 1e-16 {
            break;
        }
    }
    [x, y]
}

/// Forsaken problem. The solution is the Newton-polished root near
/// (0.08, 0.4); `rho` is valid on the box `||u||_inf <= 3/2` and `L` is a
/// sampled estimate on the same box.
pub fn forsaken_problem() -> BenchmarkSpec {
    let region = Region::cube(2, -FORSAKEN_BOX, FORSAKEN_BOX).expect("static box");
    let base = gradient_field(&forsaken_objective());
    let l = estimate_lipschitz(&base, &region, 10_000, 0).expect("valid sample count");
    let problem = base
        .with_lipschitz(l)
        .with_rho(FORSAKEN_RHO)
        .with_solution(forsaken_root().to_vec())
        .with_rho_region(region);
    BenchmarkSpec {
        id: BenchmarkId::Forsaken,
        params: Vec::new(),
        problem,
    }
}

/// `psi(x, y) = a/16 * x (-1 + x^2 + y^2)(-9 + 16 x^2 + 16 y^2)`
pub fn polar_psi(a: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    a / 16.0 * x * (-1.0 + r2) * (-9.0 + 16.0 * r2)
}

/// Polar Game `F(x, y) = (psi(x, y) - y, psi(y, x) + x)`.
pub fn polar_game_problem(a: f64) -> Result<BenchmarkSpec> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", "polar game parameter must be positive"));
    }
    let problem = OperatorProblem::new("polar-game", 2, move |u| {
        let (x, y) = (u[0], u[1]);
        vec![polar_psi(a, x, y) - y, polar_psi(a, y, x) + x]
    })
    .with_solution(vec![0.0, 0.0]);
    Ok(BenchmarkSpec {
        id: BenchmarkId::PolarGame,
        params: vec![("a", a)],
        problem,
    })
}

/// `F(u) = mu u` on `R^dim`.
pub fn monotone_quadratic_problem(mu: f64, dim: usize) -> Result<BenchmarkSpec> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", "must be positive"));
    }
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    let problem = OperatorProblem::new("monotone-quadratic", dim, move |u| {
        u.iter().map(|x| mu * x).collect()
    })
    .with_lipschitz(mu)
    .with_rho(0.0)
    .with_solution(vec![0.0; dim])
    .with_monotone(true);
    Ok(BenchmarkSpec {
        id: BenchmarkId::MonotoneQuadratic,
        params: vec![("mu", mu), ("dim", dim as f64)],
        problem,
    })
}
