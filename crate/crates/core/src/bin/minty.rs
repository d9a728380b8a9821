use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use minty::experiment::{
    is_config_error, resolve_out_dir, run, signmap, sweep, validate, write_atomic, write_run,
    ExperimentConfig, OUT_DIR_ENV,
};
use minty::{Error, Result};

#[derive(Parser)]
#[command(
    name = "minty",
    version,
    about = "Solvers for weak Minty variational inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its trace and certificate.
    Run(Common),
    /// Run the Cartesian product of `--sweep` axes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axis as `key=v1,v2,...`; repeatable.
        #[arg(long = "sweep", value_name = "KEY=VALUES", allow_hyphen_values = true)]
        axes: Vec<String>,
        #[arg(long)]
        replicates: Option<String>,
        /// Only write the merged table.
        #[arg(long)]
        no_traces: bool,
    },
    /// Write the sign grid of <F(u), u - u*> for a planar problem.
    Signmap {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
        x_range: Option<String>,
        #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
        y_range: Option<String>,
        /// `n` or `nx,ny`.
        #[arg(long)]
        resolution: Option<String>,
    },
    /// Check an OGDA+ configuration against the weak Minty rate conditions.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also report the OGDA+ step-size bound for this lambda.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Initial step for adaptive EG+; same as --a.
    #[arg(long, allow_hyphen_values = true)]
    a0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    batch: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    iters: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Comma-separated starting point.
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dim: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    polar_a: Option<String>,
    /// Output file prefix.
    #[arg(long)]
    name: Option<String>,
    /// Any other key as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{kv}`")))?;
            cfg.set(k, v)?;
        }
        let flags = [
            ("problem", &self.problem),
            ("algorithm", &self.algorithm),
            ("a", &self.a),
            ("a0", &self.a0),
            ("gamma", &self.gamma),
            ("tau", &self.tau),
            ("sigma", &self.sigma),
            ("batch", &self.batch),
            ("iters", &self.iters),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("u0", &self.u0),
            ("xi", &self.xi),
            ("zeta", &self.zeta),
            ("mu", &self.mu),
            ("dim", &self.dim),
            ("polar_a", &self.polar_a),
            ("name", &self.name),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        resolve_out_dir(self.out.clone())
    }
}

fn apply(cfg: &mut ExperimentConfig, key: &str, value: &Option<String>) -> Result<()> {
    match value {
        Some(v) => cfg.set(key, v),
        None => Ok(()),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let artifacts = run(&cfg)?;
            for path in write_run(&artifacts, &common.out_dir(), &cfg.name)? {
                eprintln!("wrote {}", path.display());
            }
            println!("{}", artifacts.summary.line());
        }
        Command::Sweep {
            common,
            axes,
            replicates,
            no_traces,
        } => {
            let mut cfg = common.config()?;
            for axis in &axes {
                let (k, v) = axis.split_once('=').ok_or_else(|| {
                    Error::Config(format!("--sweep expects key=values, got `{axis}`"))
                })?;
                cfg.set(&format!("sweep.{}", k.trim()), v)?;
            }
            apply(&mut cfg, "replicates", &replicates)?;
            if no_traces {
                cfg.write_traces = false;
            }
            let dir = common.out_dir();
            let table = sweep(&cfg, Some(&dir))?;
            eprintln!(
                "wrote {}",
                dir.join(format!("{}_sweep.csv", cfg.name)).display()
            );
            print!("{}", table.to_csv());
        }
        Command::Signmap {
            common,
            x_range,
            y_range,
            resolution,
        } => {
            let mut cfg = common.config()?;
            apply(&mut cfg, "x_range", &x_range)?;
            apply(&mut cfg, "y_range", &y_range)?;
            apply(&mut cfg, "resolution", &resolution)?;
            let grid = signmap(&cfg)?;
            let dir = common.out_dir();
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}_signmap.csv", cfg.name));
            write_atomic(&path, &grid.to_csv())?;
            eprintln!("wrote {}", path.display());
            println!(
                "cells={} negative={} zero={} positive={}",
                grid.values.len(),
                grid.count(-1),
                grid.count(0),
                grid.count(1)
            );
        }
        Command::Validate { common, lambda } => {
            let mut cfg = common.config()?;
            apply(&mut cfg, "lambda", &lambda)?;
            println!("{}", validate(&cfg)?.line());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
