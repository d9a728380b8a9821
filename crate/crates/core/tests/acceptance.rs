//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use minty::algorithms::{validate_weak_minty_config, Algorithm, SolverConfig, Verdict};
use minty::diagnostics::{
    evaluate_certificate, sign_grid, weak_minty_residual, IterateTrace, RunStatus,
    CERTIFICATE_SLACK,
};
use minty::operators::Region;
use minty::problems::*;
use minty::stochastic::{required_batch_size, StochasticOracle};
use minty::{solve, OperatorProblem};

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn run(op: &OperatorProblem, cfg: &SolverConfig, u0: Vec<f64>) -> IterateTrace {
    solve(op, cfg, u0).expect("valid configuration")
}

/// Lower-bound example with xi = sqrt 3, zeta = -1.
fn lower_bound_separation() -> Outcome {
    let op = lower_bound_problem(3f64.sqrt(), -1.0).unwrap().problem;
    let l = op.lipschitz.unwrap();
    let mut eg_ok = true;
    let mut ogda_hits = Vec::new();
    let mut notes = Vec::new();
    for scale in [0.2, 0.35, 0.5] {
        let a = scale / l;
        for gamma in [0.5, 1.0] {
            let eg = SolverConfig::new(Algorithm::EgPlus, a, gamma)
                .with_iters(10_000)
                .with_tol(1e-6);
            let t = run(&op, &eg, vec![1.0, 1.0]);
            let initial = t.rows()[0].field_norm_sq;
            let never_improved = t.best_norm_sq().unwrap() >= initial;
            if !(t.diverged() || never_improved) || t.status() == RunStatus::Converged {
                eg_ok = false;
                notes.push(format!("EG+ improved at a={a}, gamma={gamma}"));
            }
            // ||F||^2 <= 1e-12 means tol = 1e-6
            let og = SolverConfig::new(Algorithm::OgdaPlus, a, gamma)
                .with_iters(10_000)
                .with_tol(1e-6);
            let t = run(&op, &og, vec![1.0, 1.0]);
            if t.status() == RunStatus::Converged {
                ogda_hits.push((a, gamma));
            } else {
                notes.push(format!("OGDA+ a={a} gamma={gamma}: {}", t.status()));
            }
        }
    }
    let pass = eg_ok && !ogda_hits.is_empty();
    outcome(
        pass,
        format!(
            "EG+ never converges: {eg_ok}; OGDA+ converging cells: {ogda_hits:?}; {}",
            notes.join("; ")
        ),
    )
}

/// Best-iterate bound `V0 / ((k+1) a g (a - rho))` re-derived here from the
/// raw trace, independently of the certificate code.
fn weak_minty_certificate() -> Outcome {
    // look for a PASS configuration on forsaken first
    let fk = forsaken_problem().problem;
    let l = fk.lipschitz.unwrap();
    let mut forsaken_pass = None;
    for i in 1..=40 {
        let a = i as f64 * 0.025 / l;
        for gamma in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9] {
            if validate_weak_minty_config(&fk, a, gamma).unwrap().verdict == Verdict::Pass {
                forsaken_pass = Some((a, gamma));
            }
        }
    }
    let (op, configs, label) = match forsaken_pass {
        Some((a, g)) => (fk, vec![(a, g)], "forsaken"),
        None => (
            lower_bound_problem(1.0, -0.05).unwrap().problem,
            vec![(0.3, 0.5), (0.2, 0.25), (0.12, 0.5), (0.5, 0.25)],
            "synthetic A = [[-0.05, 1], [-1, -0.05]] (forsaken has no PASS config)",
        ),
    };
    let (l, rho) = (op.lipschitz.unwrap(), op.weak_minty_rho.unwrap());
    let region = Region::cube(2, -3.0, 3.0).unwrap();
    let starts = region.sample_points(100, 2024);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for &(a, gamma) in &configs {
        if validate_weak_minty_config(&op, a, gamma).unwrap().verdict != Verdict::Pass {
            failures.push(format!("config a={a} gamma={gamma} is not PASS"));
            continue;
        }
        for u0 in &starts {
            let cfg = SolverConfig::new(Algorithm::OgdaPlus, a, gamma)
                .with_iters(500)
                .with_tol(1e-300);
            let t = run(&op, &cfg, u0.clone());
            if t.rows()
                .iter()
                .any(|r| r.point.iter().any(|x| x.abs() > 1.4))
                && label == "forsaken"
            {
                continue;
            }
            let f0 = op.eval(u0);
            let shifted: Vec<f64> = u0.iter().zip(&f0).map(|(u, f)| u + a * f).collect();
            let v0 = norm_sq(&shifted);
            let mut best = f64::INFINITY;
            for (k, r) in t.rows().iter().enumerate() {
                best = best.min(r.field_norm_sq);
                let bound = v0 / ((k + 1) as f64 * a * gamma * (a - rho));
                checked += 1;
                if best > bound * (1.0 + CERTIFICATE_SLACK) {
                    failures.push(format!("a={a} gamma={gamma} u0={u0:?} k={k}"));
                    break;
                }
            }
            let cert = evaluate_certificate(&t, &op, &cfg).unwrap();
            if !cert.applicable || cert.violations() != 0 {
                failures.push(format!("certificate disagrees at u0={u0:?}"));
            }
        }
    }
    let _ = l;
    outcome(
        failures.is_empty() && checked > 0,
        format!(
            "{label}: {checked} (k, run) bounds checked, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn monotone_certificate() -> Outcome {
    let op = monotone_quadratic_problem(1.0, 2).unwrap().problem;
    let l = op.lipschitz.unwrap();
    let cfg = SolverConfig::new(Algorithm::OgdaPlus, 0.3 / l, 1.0)
        .with_iters(1000)
        .with_tol(1e-300);
    let t = run(&op, &cfg, vec![1.0, 1.0]);
    let c = evaluate_certificate(&t, &op, &cfg).unwrap();
    let last_bound = *c.bound_at_k.last().unwrap();
    let last_best = *c.best_norm_sq.last().unwrap();
    let margin = last_bound / last_best;
    outcome(
        c.applicable && c.violations() == 0 && t.len() == 1000 && margin >= 10.0,
        format!(
            "theorem {:?}, {} rows, violations {}, bound/best at k=1000 = {margin:.3e}",
            c.theorem,
            t.len(),
            c.violations()
        ),
    )
}

fn adaptive_forsaken() -> Outcome {
    let op = forsaken_problem().problem;
    let l = op.lipschitz.unwrap();
    let cfg = SolverConfig::new(Algorithm::AdaptiveEgPlus, 0.5, 0.5)
        .with_tau(0.99)
        .with_iters(10_000);
    let t = run(&op, &cfg, vec![0.5, 0.5]);
    let d = dist(t.final_point(), &[0.08, 0.4]);
    let adaptive_ok = t.status() == RunStatus::Converged && d < 0.05;
    let mut fixed_fail = Vec::new();
    for alg in [Algorithm::EgPlus, Algorithm::OgdaPlus] {
        for scale in [1.0, 0.5, 0.25, 0.1] {
            for gamma in [0.5, 1.0] {
                let cfg = SolverConfig::new(alg, scale / l, gamma)
                    .with_iters(10_000)
                    .with_tol(1e-3);
                let t = run(&op, &cfg, vec![0.5, 0.5]);
                if t.status() == RunStatus::Converged {
                    fixed_fail.push(format!("{alg} a={}/L gamma={gamma}", scale));
                }
            }
        }
    }
    outcome(
        adaptive_ok && fixed_fail.is_empty(),
        format!(
            "adaptive: {} in {} steps, distance {d:.2e}, final step {:.4}; fixed-step methods reaching ||F|| <= 1e-3: {fixed_fail:?} (L = {l:.4})",
            t.status(),
            t.len(),
            t.final_step().unwrap()
        ),
    )
}

fn ratio_game() -> Outcome {
    let op = ratio_game_problem().problem;
    let mut details = Vec::new();
    let mut ok = true;
    for alg in [
        Algorithm::OgdaPlus,
        Algorithm::EgPlus,
        Algorithm::AdaptiveEgPlus,
    ] {
        let cfg = SolverConfig::new(alg, 0.33, 0.5).with_iters(10_000);
        let t = run(&op, &cfg, vec![0.5, 0.5]);
        let d = dist(t.final_point(), &RATIO_GAME_SOLUTION);
        ok &= t.status() == RunStatus::Converged && d <= 1e-3;
        details.push(format!("{alg}: {} k={} dist={d:.1e}", t.status(), t.len()));
    }
    let g = sign_grid(&op, (0.0, 1.0), (0.0, 1.0), (200, 200)).unwrap();
    let s = RATIO_GAME_SOLUTION;
    let near = g
        .cells()
        .filter(|(x, y, v)| *v == -1 && (x - s[0]).abs().max((y - s[1]).abs()) <= 0.02)
        .count();
    ok &= near > 0;
    details.push(format!("negative cells within 0.02: {near}"));
    outcome(ok, details.join("; "))
}

fn adaptive_step_law() -> Outcome {
    let benches = [
        (
            lower_bound_problem(3f64.sqrt(), -1.0).unwrap(),
            vec![1.0, 1.0],
        ),
        (ratio_game_problem(), vec![0.5, 0.5]),
        (forsaken_problem(), vec![0.5, 0.5]),
        (monotone_quadratic_problem(1.0, 2).unwrap(), vec![1.0, 1.0]),
        (
            monotone_quadratic_problem(4.0, 3).unwrap(),
            vec![1.0, 1.0, 1.0],
        ),
    ];
    let tau = 0.99;
    let mut ok = true;
    let mut details = Vec::new();
    for (spec, u0) in benches {
        let op = &spec.problem;
        let l = op.lipschitz.unwrap();
        for a0 in [0.1, 0.5, 1.0] {
            let cfg = SolverConfig::new(Algorithm::AdaptiveEgPlus, a0, 0.5)
                .with_tau(tau)
                .with_iters(2000)
                .with_tol(1e-12);
            let t = run(op, &cfg, u0.clone());
            let steps: Vec<f64> = t.rows().iter().map(|r| r.step).collect();
            let floor = a0.min(tau / l);
            let nonincreasing = steps.windows(2).all(|w| w[1] <= w[0]);
            let min = steps.iter().cloned().fold(f64::INFINITY, f64::min);
            let above = min >= floor * (1.0 - 1e-12);
            if !(nonincreasing && above) {
                ok = false;
                details.push(format!(
                    "{} a0={a0}: nonincreasing={nonincreasing} min={min} floor={floor}",
                    spec.id
                ));
            }
            if spec.id == BenchmarkId::LowerBound {
                let exact = steps[1..]
                    .iter()
                    .all(|a| (a - floor).abs() <= 1e-12 * floor);
                ok &= exact;
                if !exact {
                    details.push(format!(
                        "lower-bound a0={a0}: step not min(a0, tau/L) from k=1"
                    ));
                }
            }
        }
    }
    if details.is_empty() {
        details.push("all step sequences nonincreasing and above min(a0, tau/L)".into());
    }
    outcome(ok, details.join("; "))
}

fn stochastic_scaling() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    let op = forsaken_problem().problem;
    let det_cfg = SolverConfig::new(Algorithm::OgdaPlus, 0.05, 0.5)
        .with_iters(1000)
        .with_tol(1e-300);
    let sto_cfg = SolverConfig {
        algorithm: Algorithm::StochOgdaPlus,
        ..det_cfg.clone()
    };
    let a = run(&op, &det_cfg, vec![0.5, 0.5]);
    let b = run(&op, &sto_cfg, vec![0.5, 0.5]);
    let bitwise = a.rows().len() == b.rows().len()
        && a.rows().iter().zip(b.rows()).all(|(x, y)| {
            x.point
                .iter()
                .zip(&y.point)
                .all(|(p, q)| p.to_bits() == q.to_bits())
        });
    ok &= bitwise;
    details.push(format!("sigma=0 bitwise: {bitwise}"));

    let d = 3;
    let mq = monotone_quadratic_problem(1.0, d).unwrap().problem;
    let u = vec![0.4, -0.1, 1.0];
    let f = mq.eval(&u);
    let sigma = 0.8;
    for batch in [1usize, 10, 100] {
        let mut oracle = StochasticOracle::new(mq.clone(), sigma, 77 + batch as u64).unwrap();
        let trials = 10_000;
        let mut sq = 0.0;
        for _ in 0..trials {
            let g = oracle.batch_estimate(&u, batch).unwrap();
            sq += g
                .iter()
                .zip(&f)
                .map(|(g, f)| (g - f) * (g - f))
                .sum::<f64>();
        }
        let var = sq / trials as f64;
        let expect = d as f64 * sigma * sigma / batch as f64;
        let rel = (var - expect).abs() / expect;
        ok &= rel <= 0.1;
        details.push(format!("B={batch}: rel. var. error {rel:.3}"));
    }
    let mut doubling = true;
    for eps in [0.02, 0.01, 0.005, 1e-3] {
        let b1 = required_batch_size(1.0, 1.0 / 3.0, 1.0, eps).unwrap();
        let b2 = required_batch_size(1.0, 1.0 / 3.0, 1.0, eps / 2.0).unwrap();
        doubling &= b2 == 2 * b1;
    }
    ok &= doubling;
    details.push(format!("batch doubles when eps halves: {doubling}"));
    outcome(ok, details.join("; "))
}

fn residual_suite() -> Outcome {
    let fk = forsaken_problem().problem;
    let fk_min = Region::cube(2, -1.4, 1.4)
        .unwrap()
        .sample_points(1000, 8)
        .iter()
        .map(|u| weak_minty_residual(&fk, u).unwrap())
        .fold(f64::INFINITY, f64::min);
    let lb = lower_bound_problem(3f64.sqrt(), -1.0).unwrap().problem;
    let lb_max = Region::cube(2, -2.0, 2.0)
        .unwrap()
        .sample_points(1000, 9)
        .iter()
        .map(|u| weak_minty_residual(&lb, u).unwrap().abs())
        .fold(0.0, f64::max);
    let mq = monotone_quadratic_problem(1.0, 2).unwrap().problem;
    let mq_min = Region::cube(2, -3.0, 3.0)
        .unwrap()
        .sample_points(1000, 10)
        .iter()
        .map(|u| weak_minty_residual(&mq, u).unwrap())
        .fold(f64::INFINITY, f64::min);
    outcome(
        fk_min >= -1e-9 && lb_max <= 1e-10 && mq_min >= 0.0,
        format!("forsaken min {fk_min:.3e}; lower-bound max |r| {lb_max:.3e}; monotone min {mq_min:.3e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "lower-bound separation",
            Duration::from_secs(5),
            lower_bound_separation,
        ),
        (
            "weak Minty OGDA+ certificate",
            Duration::from_secs(1),
            weak_minty_certificate,
        ),
        (
            "monotone OGDA+ certificate",
            Duration::from_secs(1),
            monotone_certificate,
        ),
        (
            "adaptive EG+ on forsaken",
            Duration::from_secs(5),
            adaptive_forsaken,
        ),
        ("ratio game", Duration::from_secs(5), ratio_game),
        (
            "adaptive step-size law",
            Duration::from_secs(1),
            adaptive_step_law,
        ),
        (
            "stochastic reduction and scaling",
            Duration::from_secs(10),
            stochastic_scaling,
        ),
        (
            "weak Minty residuals",
            Duration::from_secs(1),
            residual_suite,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let in_time = took <= *limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.2}s, limit {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
