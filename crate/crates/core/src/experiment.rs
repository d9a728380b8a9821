//! Experiment runner behind the `minty` binary: configuration, single runs,
//! parameter sweeps, sign maps and configuration checks, with CSV output.
//!
//! Configuration is a flat set of `key = value` pairs. A config file holds
//! one pair per line (`#` starts a comment); command-line flags are applied
//! on top of it. Sweep axes are written `sweep.<key> = v1, v2, ...`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::algorithms::{ogda_step_size_bound, validate_weak_minty_config, SolverConfig, Validity};
use crate::diagnostics::{
    evaluate_certificate, fmt_real, sign_grid, IterateTrace, RateCertificate, RunStatus, SignGrid,
};
use crate::error::{Error, Result};
use crate::problems::{
    forsaken_problem, lower_bound_problem, monotone_quadratic_problem, polar_game_problem,
    ratio_game_problem, BenchmarkId, BenchmarkSpec, POLAR_DEFAULT_A,
};
use crate::solver::solve;

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "MINTY_OUT_DIR";

/// Keys that a sweep axis may range over.
pub const SWEEPABLE_KEYS: [&str; 12] = [
    "a", "gamma", "tau", "sigma", "batch", "iters", "tol", "seed", "xi", "zeta", "mu", "polar_a",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: BenchmarkId,
    pub xi: f64,
    pub zeta: f64,
    pub mu: f64,
    pub dim: usize,
    pub polar_a: f64,
    pub solver: SolverConfig,
    /// Starting point; the problem's documented default when `None`.
    pub u0: Option<Vec<f64>>,
    pub sweep: Vec<(String, Vec<f64>)>,
    /// Independent seeds per sweep cell.
    pub replicates: usize,
    pub write_traces: bool,
    /// File name prefix for outputs.
    pub name: String,
    pub lambda: Option<f64>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub resolution: (usize, usize),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: BenchmarkId::LowerBound,
            xi: 3f64.sqrt(),
            zeta: -1.0,
            mu: 1.0,
            dim: 2,
            polar_a: POLAR_DEFAULT_A,
            solver: SolverConfig::default(),
            u0: None,
            sweep: Vec::new(),
            replicates: 1,
            write_traces: true,
            name: "run".to_string(),
            lambda: None,
            x_range: None,
            y_range: None,
            resolution: (200, 200),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}`", value.trim())))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|s| parse_num::<f64>(key, s)).collect()
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    match parse_list(key, value)?[..] {
        [lo, hi] => Ok((lo, hi)),
        _ => Err(Error::Config(format!(
            "`{key}` needs two comma-separated numbers"
        ))),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "`{key}`: expected a boolean, got `{other}`"
        ))),
    }
}

fn finite(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("`{key}` must be finite")))
    }
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if let Some(axis) = key.strip_prefix("sweep.") {
            return self.add_sweep(axis, &parse_list(key, value)?);
        }
        match key {
            "problem" => self.problem = value.parse()?,
            "algorithm" => self.solver.algorithm = value.parse()?,
            "u0" => {
                let u = parse_list(key, value)?;
                for x in &u {
                    finite(key, *x)?;
                }
                self.u0 = Some(u);
            }
            "replicates" => self.replicates = parse_num(key, value)?,
            "write_traces" => self.write_traces = parse_bool(key, value)?,
            "name" => {
                let name = value.trim();
                if name.is_empty() || name.contains(['/', '\\']) {
                    return Err(Error::Config(format!("bad output name `{name}`")));
                }
                self.name = name.to_string();
            }
            "dim" => self.dim = parse_num(key, value)?,
            "lambda" => self.lambda = Some(finite(key, parse_num(key, value)?)?),
            "x_range" => self.x_range = Some(parse_pair(key, value)?),
            "y_range" => self.y_range = Some(parse_pair(key, value)?),
            "resolution" => {
                let v: Vec<usize> = value
                    .split(',')
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?;
                self.resolution = match v[..] {
                    [n] => (n, n),
                    [nx, ny] => (nx, ny),
                    _ => return Err(Error::Config("`resolution` is `n` or `nx,ny`".into())),
                };
            }
            _ => {
                let x: f64 = parse_num(key, value)?;
                self.set_numeric(key, x)?;
            }
        }
        Ok(())
    }

    /// Sets a sweepable key.
    pub fn set_numeric(&mut self, key: &str, x: f64) -> Result<()> {
        let x = finite(key, x)?;
        let whole = |x: f64| -> Result<u64> {
            if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
                Ok(x as u64)
            } else {
                Err(Error::Config(format!(
                    "`{key}` must be a nonnegative integer"
                )))
            }
        };
        match key {
            "a" | "a0" => self.solver.a = x,
            "gamma" => self.solver.gamma = x,
            "tau" => self.solver.tau = x,
            "sigma" => self.solver.sigma = x,
            "batch" => self.solver.batch = whole(x)? as usize,
            "iters" => self.solver.iters = whole(x)? as usize,
            "tol" => self.solver.tol = x,
            "seed" => self.solver.seed = whole(x)?,
            "divergence_threshold" => self.solver.divergence_threshold = x,
            "xi" => self.xi = x,
            "zeta" => self.zeta = x,
            "mu" => self.mu = x,
            "polar_a" => self.polar_a = x,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn add_sweep(&mut self, key: &str, values: &[f64]) -> Result<()> {
        let key = if key == "a0" { "a" } else { key };
        if !SWEEPABLE_KEYS.contains(&key) {
            return Err(Error::Config(format!("cannot sweep over `{key}`")));
        }
        if values.is_empty() {
            return Err(Error::Config(format!("sweep over `{key}` has no values")));
        }
        // later definitions of an axis replace earlier ones
        self.sweep.retain(|(k, _)| k != key);
        self.sweep.push((key.to_string(), values.to_vec()));
        Ok(())
    }

    /// Parses `key = value` lines.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn build_problem(&self) -> Result<BenchmarkSpec> {
        match self.problem {
            BenchmarkId::LowerBound => lower_bound_problem(self.xi, self.zeta),
            BenchmarkId::RatioGame => Ok(ratio_game_problem()),
            BenchmarkId::Forsaken => Ok(forsaken_problem()),
            BenchmarkId::PolarGame => polar_game_problem(self.polar_a),
            BenchmarkId::MonotoneQuadratic => monotone_quadratic_problem(self.mu, self.dim),
        }
    }

    pub fn start(&self) -> Vec<f64> {
        self.u0
            .clone()
            .unwrap_or_else(|| self.problem.default_start(self.dim))
    }

    fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("`replicates` must be at least 1".into()));
        }
        Ok(())
    }
}

/// One-line outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub status: RunStatus,
    pub best_norm_sq: f64,
    pub iterations: usize,
    pub oracle_calls: u64,
    pub final_step: f64,
    pub final_u: Vec<f64>,
    /// `(applicable, violations)` when the problem has a known solution.
    pub certificate: Option<(bool, usize)>,
}

impl RunSummary {
    fn from_run(trace: &IterateTrace, cert: Option<&RateCertificate>, a: f64) -> Self {
        Self {
            status: trace.status(),
            best_norm_sq: trace.best_norm_sq().unwrap_or(f64::NAN),
            iterations: trace.len(),
            oracle_calls: trace.total_oracle_calls(),
            final_step: trace.final_step().unwrap_or(a),
            final_u: trace.final_point().to_vec(),
            certificate: cert.map(|c| (c.applicable, c.violations())),
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "status={} best_norm_sq={} iterations={} oracle_calls={} final_step={} final_u=",
            self.status,
            fmt_real(self.best_norm_sq),
            self.iterations,
            self.oracle_calls,
            fmt_real(self.final_step)
        );
        let u: Vec<String> = self.final_u.iter().map(|x| fmt_real(*x)).collect();
        s.push_str(&u.join(","));
        match self.certificate {
            Some((true, v)) => {
                let _ = write!(s, " certificate_violations={v}");
            }
            Some((false, _)) => s.push_str(" certificate=not_applicable"),
            None => {}
        }
        s
    }
}

pub struct RunArtifacts {
    pub trace: IterateTrace,
    pub certificate: Option<RateCertificate>,
    pub summary: RunSummary,
}

pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let spec = config.build_problem()?;
    let op = &spec.problem;
    let trace = solve(op, &config.solver, config.start())?;
    let certificate = if op.solution.is_some() && !trace.is_empty() {
        Some(evaluate_certificate(&trace, op, &config.solver)?)
    } else {
        None
    };
    let summary = RunSummary::from_run(&trace, certificate.as_ref(), config.solver.a);
    Ok(RunArtifacts {
        trace,
        certificate,
        summary,
    })
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<stem>_trace.csv` and, when applicable, `<stem>_certificate.csv`.
pub fn write_run(artifacts: &RunArtifacts, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let trace_path = dir.join(format!("{stem}_trace.csv"));
    write_atomic(&trace_path, &artifacts.trace.to_csv())?;
    written.push(trace_path);
    if let Some(cert) = artifacts.certificate.as_ref().filter(|c| c.applicable) {
        let path = dir.join(format!("{stem}_certificate.csv"));
        write_atomic(&path, &cert.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

/// One cell of a sweep, averaged over its replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub values: Vec<f64>,
    pub runs: Vec<RunSummary>,
}

impl SweepCell {
    /// Common status of all replicates, or `mixed`.
    pub fn status(&self) -> &'static str {
        let first = self.runs[0].status;
        if self.runs.iter().all(|r| r.status == first) {
            first.as_str()
        } else {
            "mixed"
        }
    }

    pub fn converged(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.status == RunStatus::Converged)
            .count()
    }

    fn mean(&self, f: impl Fn(&RunSummary) -> f64) -> f64 {
        self.runs.iter().map(f).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_best_norm_sq(&self) -> f64 {
        self.mean(|r| r.best_norm_sq)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub keys: Vec<String>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    /// Keys first, then `runs,converged,status` and replicate means.
    pub fn to_csv(&self) -> String {
        let mut out = self.keys.join(",");
        out.push_str(",runs,converged,status,best_norm_sq,iterations,oracle_calls,final_step\n");
        for c in &self.cells {
            for v in &c.values {
                let _ = write!(out, "{},", fmt_real(*v));
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.runs.len(),
                c.converged(),
                c.status(),
                fmt_real(c.mean_best_norm_sq()),
                fmt_real(c.mean(|r| r.iterations as f64)),
                fmt_real(c.mean(|r| r.oracle_calls as f64)),
                fmt_real(c.mean(|r| r.final_step)),
            );
        }
        out
    }
}

/// Seed of replicate `r` of cell `cell`: the base seed offset by the flat run
/// index, so a one-cell, one-replicate sweep reuses the base seed.
pub fn cell_seed(base: u64, cell: usize, replicates: usize, r: usize) -> u64 {
    base.wrapping_add((cell * replicates + r) as u64)
}

fn cartesian(axes: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, (_, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

fn cell_stem(name: &str, cell: usize, replicates: usize, r: usize) -> String {
    if replicates == 1 {
        format!("{name}_cell{cell:04}")
    } else {
        format!("{name}_cell{cell:04}_rep{r:03}")
    }
}

/// Runs every cell of the Cartesian product of the sweep axes in parallel.
///
/// With `out = Some(dir)` each run's trace is written as soon as it finishes
/// and the merged table goes to `<name>_sweep.csv`.
pub fn sweep(config: &ExperimentConfig, out: Option<&Path>) -> Result<SweepTable> {
    if config.sweep.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one `sweep.<key>` axis".into(),
        ));
    }
    config.validate()?;
    let keys: Vec<String> = config.sweep.iter().map(|(k, _)| k.clone()).collect();
    let grid = cartesian(&config.sweep);
    let reps = config.replicates;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut cells: Vec<SweepCell> = grid
        .into_par_iter()
        .enumerate()
        .map(|(index, values)| -> Result<SweepCell> {
            let mut cell_cfg = config.clone();
            cell_cfg.sweep.clear();
            for (k, v) in keys.iter().zip(&values) {
                cell_cfg.set_numeric(k, *v)?;
            }
            let base_seed = cell_cfg.solver.seed;
            let mut runs = Vec::with_capacity(reps);
            for r in 0..reps {
                cell_cfg.solver.seed = cell_seed(base_seed, index, reps, r);
                let artifacts = run(&cell_cfg)?;
                if let (Some(dir), true) = (out, config.write_traces) {
                    write_run(&artifacts, dir, &cell_stem(&config.name, index, reps, r))?;
                }
                runs.push(artifacts.summary);
            }
            Ok(SweepCell {
                index,
                values,
                runs,
            })
        })
        .collect::<Result<_>>()?;
    cells.sort_by(|a, b| {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let table = SweepTable { keys, cells };
    if let Some(dir) = out {
        write_atomic(
            &dir.join(format!("{}_sweep.csv", config.name)),
            &table.to_csv(),
        )?;
    }
    Ok(table)
}

fn default_ranges(id: BenchmarkId) -> ((f64, f64), (f64, f64)) {
    match id {
        BenchmarkId::RatioGame => ((0.0, 1.0), (0.0, 1.0)),
        BenchmarkId::Forsaken => ((-1.5, 1.5), (-1.5, 1.5)),
        _ => ((-2.0, 2.0), (-2.0, 2.0)),
    }
}

pub fn signmap(config: &ExperimentConfig) -> Result<SignGrid> {
    let spec = config.build_problem()?;
    let (dx, dy) = default_ranges(config.problem);
    sign_grid(
        &spec.problem,
        config.x_range.unwrap_or(dx),
        config.y_range.unwrap_or(dy),
        config.resolution,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub validity: Validity,
    /// `(lambda, bound)` when `lambda` was given.
    pub step_size_bound: Option<(f64, f64)>,
    pub lipschitz: f64,
}

impl ValidationReport {
    pub fn line(&self) -> String {
        let v = &self.validity;
        let mut s = format!(
            "verdict={} rho_margin={} step_margin={} step_bound={} lipschitz={}",
            v.verdict,
            fmt_real(v.rho_margin),
            fmt_real(v.step_margin),
            fmt_real(v.step_bound),
            fmt_real(self.lipschitz)
        );
        if let Some((lambda, b)) = self.step_size_bound {
            let _ = write!(
                s,
                " lambda={} ogda_step_size_bound={}",
                fmt_real(lambda),
                fmt_real(b)
            );
        }
        s
    }
}

pub fn validate(config: &ExperimentConfig) -> Result<ValidationReport> {
    let spec = config.build_problem()?;
    let op = &spec.problem;
    let validity = validate_weak_minty_config(op, config.solver.a, config.solver.gamma)?;
    let step_size_bound = match config.lambda {
        Some(l) => Some((l, ogda_step_size_bound(config.solver.gamma, l)?)),
        None => None,
    };
    Ok(ValidationReport {
        validity,
        step_size_bound,
        lipschitz: op.require_lipschitz()?,
    })
}

/// `--out`, else `$MINTY_OUT_DIR`, else the working directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// `true` for errors caused by the configuration rather than the system.
pub fn is_config_error(e: &Error) -> bool {
    !matches!(e, Error::Io(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Algorithm;

    #[test]
    fn text_config_and_override() {
        let mut c = ExperimentConfig::default();
        c.apply_text(
            "# comment\nproblem = monotone-quadratic\nalgorithm=eg-plus\na = 0.2 # inline\n\
             u0 = 1, 2\nsweep.gamma = 0.5, 0.25\n",
        )
        .unwrap();
        assert_eq!(c.problem, BenchmarkId::MonotoneQuadratic);
        assert_eq!(c.solver.algorithm, Algorithm::EgPlus);
        assert_eq!(c.solver.a, 0.2);
        assert_eq!(c.u0, Some(vec![1.0, 2.0]));
        assert_eq!(c.sweep, vec![("gamma".to_string(), vec![0.5, 0.25])]);
        c.set("a0", "0.7").unwrap();
        assert_eq!(c.solver.a, 0.7);
    }

    #[test]
    fn config_errors() {
        let mut c = ExperimentConfig::default();
        assert!(matches!(
            c.set("problem", "nope"),
            Err(Error::UnknownProblem(_))
        ));
        assert!(matches!(
            c.set("algorithm", "sgd"),
            Err(Error::UnknownAlgorithm(_))
        ));
        assert!(c.set("a", "inf").is_err());
        assert!(c.set("a", "x").is_err());
        assert!(c.set("batch", "1.5").is_err());
        assert!(c.set("colour", "1").is_err());
        assert!(c.set("sweep.u0", "1").is_err());
        assert!(c.apply_text("a 0.1").is_err());
    }

    #[test]
    fn cartesian_order() {
        let axes = vec![
            ("a".into(), vec![1.0, 2.0]),
            ("b".into(), vec![3.0, 4.0, 5.0]),
        ];
        let g = cartesian(&axes);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![1.0, 3.0]);
        assert_eq!(g[1], vec![1.0, 4.0]);
        assert_eq!(g[5], vec![2.0, 5.0]);
    }

    #[test]
    fn seeds_are_distinct_per_run() {
        let mut seen: Vec<u64> = (0..4)
            .flat_map(|c| (0..3).map(move |r| cell_seed(7, c, 3, r)))
            .collect();
        assert_eq!(cell_seed(7, 0, 1, 0), 7);
        seen.dedup();
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn empty_sweep_rejected() {
        assert!(sweep(&ExperimentConfig::default(), None).is_err());
        let mut c = ExperimentConfig::default();
        assert!(c.add_sweep("gamma", &[]).is_err());
    }

    #[test]
    fn summary_line_fields() {
        let mut c = ExperimentConfig {
            problem: BenchmarkId::MonotoneQuadratic,
            ..Default::default()
        };
        c.solver.a = 0.3;
        c.solver.gamma = 1.0;
        let line = run(&c).unwrap().summary.line();
        for field in [
            "status=converged",
            "best_norm_sq=",
            "iterations=",
            "oracle_calls=",
        ] {
            assert!(line.contains(field), "{line}");
        }
        assert!(line.contains("final_step=") && line.contains("certificate_violations=0"));
    }
}
