//! wasm-bindgen glue for the browser demo. Every export works on plain
//! numbers and strings; the `*_impl` functions hold the logic so they can be
//! tested natively.

use minty::algorithms::{Algorithm, SolverConfig};
use minty::diagnostics::sign_grid;
use minty::problems::{
    forsaken_problem, lower_bound_problem, monotone_quadratic_problem, polar_game_problem,
    ratio_game_problem, BenchmarkId, BenchmarkSpec, POLAR_DEFAULT_A,
};
use minty::solve;
use wasm_bindgen::prelude::*;

/// Values per trajectory row: x, y, ||F||^2, step.
pub const ROW_WIDTH: usize = 4;

fn spec(problem: &str) -> Result<BenchmarkSpec, String> {
    let id: BenchmarkId = problem.parse().map_err(|e| format!("{e}"))?;
    let spec = match id {
        BenchmarkId::LowerBound => lower_bound_problem(3f64.sqrt(), -1.0),
        BenchmarkId::RatioGame => Ok(ratio_game_problem()),
        BenchmarkId::Forsaken => Ok(forsaken_problem()),
        BenchmarkId::PolarGame => polar_game_problem(POLAR_DEFAULT_A),
        BenchmarkId::MonotoneQuadratic => monotone_quadratic_problem(1.0, 2),
    };
    spec.map_err(|e| format!("{e}"))
}

pub fn trajectory_impl(
    problem: &str,
    algorithm: &str,
    a: f64,
    gamma: f64,
    x0: f64,
    y0: f64,
    iters: usize,
) -> Result<Vec<f64>, String> {
    let op = spec(problem)?.problem;
    let algorithm: Algorithm = algorithm.parse().map_err(|e| format!("{e}"))?;
    if algorithm == Algorithm::StochOgdaPlus {
        return Err("the demo only runs deterministic solvers".into());
    }
    let cfg = SolverConfig::new(algorithm, a, gamma)
        .with_iters(iters)
        .with_tau(0.99);
    let trace = solve(&op, &cfg, vec![x0, y0]).map_err(|e| format!("{e}"))?;
    let mut out = Vec::with_capacity(trace.len() * ROW_WIDTH);
    for r in trace.rows() {
        out.extend_from_slice(&[r.point[0], r.point[1], r.field_norm_sq, r.step]);
    }
    Ok(out)
}

pub fn sign_map_impl(
    problem: &str,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<i8>, String> {
    let op = spec(problem)?.problem;
    let g = sign_grid(&op, (x_lo, x_hi), (y_lo, y_hi), (nx, ny)).map_err(|e| format!("{e}"))?;
    Ok(g.values)
}

/// `[L, rho, x*, y*, x0, y0]`, NaN where unknown.
pub fn problem_info_impl(problem: &str) -> Result<Vec<f64>, String> {
    let spec = spec(problem)?;
    let op = &spec.problem;
    let s = op.solution.clone().unwrap_or_else(|| vec![f64::NAN; 2]);
    let u0 = spec.id.default_start(2);
    Ok(vec![
        op.lipschitz.unwrap_or(f64::NAN),
        op.weak_minty_rho.unwrap_or(f64::NAN),
        s[0],
        s[1],
        u0[0],
        u0[1],
    ])
}

/// Flat trajectory, `ROW_WIDTH` values per iterate.
#[wasm_bindgen]
pub fn trajectory(
    problem: &str,
    algorithm: &str,
    a: f64,
    gamma: f64,
    x0: f64,
    y0: f64,
    iters: usize,
) -> Result<Vec<f64>, JsError> {
    trajectory_impl(problem, algorithm, a, gamma, x0, y0, iters).map_err(|e| JsError::new(&e))
}

/// Row-major in y, values in {-1, 0, 1}.
#[wasm_bindgen]
pub fn sign_map(
    problem: &str,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<i8>, JsError> {
    sign_map_impl(problem, x_lo, x_hi, y_lo, y_hi, nx, ny).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn problem_info(problem: &str) -> Result<Vec<f64>, JsError> {
    problem_info_impl(problem).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_rows_follow_ogda_plus() {
        // hand-rolled OGDA+ on F(u) = u
        let (a, g) = (0.3, 0.5);
        let flat = trajectory_impl("monotone-quadratic", "ogda-plus", a, g, 1.0, -2.0, 5).unwrap();
        assert_eq!(flat.len() % ROW_WIDTH, 0);
        let (mut u, mut prev) = ([1.0f64, -2.0], [1.0f64, -2.0]);
        for row in flat.chunks(ROW_WIDTH) {
            assert!((row[0] - u[0]).abs() < 1e-15 && (row[1] - u[1]).abs() < 1e-15);
            assert!((row[2] - (u[0] * u[0] + u[1] * u[1])).abs() < 1e-14);
            assert_eq!(row[3], a);
            let next = [
                u[0] - a * ((1.0 + g) * u[0] - prev[0]),
                u[1] - a * ((1.0 + g) * u[1] - prev[1]),
            ];
            prev = u;
            u = next;
        }
    }

    #[test]
    fn adaptive_run_converges_on_forsaken() {
        let flat =
            trajectory_impl("forsaken", "adaptive-eg-plus", 0.5, 0.5, 0.5, 0.5, 10_000).unwrap();
        let last = &flat[flat.len() - ROW_WIDTH..];
        assert!(last[2] < 1e-10, "{last:?}");
    }

    #[test]
    fn sign_map_shape_and_values() {
        let v = sign_map_impl("ratio-game", 0.0, 1.0, 0.0, 1.0, 30, 20).unwrap();
        assert_eq!(v.len(), 600);
        assert!(v.contains(&-1) && v.contains(&1));
        let m = sign_map_impl("monotone-quadratic", -1.0, 1.0, -1.0, 1.0, 11, 11).unwrap();
        assert!(m.iter().all(|s| *s >= 0));
    }

    #[test]
    fn info_and_errors() {
        let info = problem_info_impl("lower-bound").unwrap();
        assert!((info[0] - 2.0).abs() < 1e-15 && (info[1] - 0.5).abs() < 1e-15);
        assert_eq!(&info[4..], &[1.0, 1.0]);
        assert!(problem_info_impl("nope").is_err());
        assert!(trajectory_impl("forsaken", "stoch-ogda-plus", 0.1, 0.5, 0.0, 0.0, 5).is_err());
        assert!(trajectory_impl("forsaken", "ogda-plus", -0.1, 0.5, 0.0, 0.0, 5).is_err());
        assert!(sign_map_impl("forsaken", 1.0, 0.0, 0.0, 1.0, 5, 5).is_err());
    }
}
