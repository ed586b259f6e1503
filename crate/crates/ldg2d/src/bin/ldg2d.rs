//! Thin command-line front end over the library drivers.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ldg2d::config::{self, RunConfig};
use ldg2d::Error;

#[derive(Parser)]
#[command(
    name = "ldg2d",
    version,
    about = "Reduced 2D Landau-de Gennes equilibria on rectangles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; unset flags fall back to the config
/// file and then to the built-in defaults.
#[derive(Args, Clone)]
struct Common {
    /// TOML config file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    /// Anchoring mode: dirichlet | robin.
    #[arg(long)]
    bc_mode: Option<String>,
    /// Dirichlet corner-mismatch width.
    #[arg(long)]
    d: Option<f64>,
    /// Robin anchoring strength.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(v) = self.a {
            cfg.a = v;
        }
        if let Some(v) = self.b {
            cfg.b = v;
        }
        if let Some(v) = self.h {
            cfg.h = v;
        }
        if let Some(v) = &self.bc_mode {
            cfg.bc.mode = v.clone();
        }
        if let Some(v) = self.d {
            cfg.bc.d = v;
        }
        if let Some(v) = self.tau {
            cfg.bc.tau = v;
        }
        if let Some(v) = self.eps {
            cfg.epsilon = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.rng_seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        cfg
    }

    fn build(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        Ok(self.apply(base))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample an analytic limit profile on the grid.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// strong | weak | theta.
        #[arg(long, default_value = "strong")]
        mode: String,
        /// Theta state: D1 | D2 | R1..R4 | nontrivial.
        #[arg(long, default_value = "D1")]
        state: String,
    },
    /// Newton-solve an equilibrium from a named seed.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "D1")]
        seed: String,
    },
    /// Steepest-descent relaxation with snapshots.
    Relax {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "nontrivial")]
        seed: String,
        /// Explicit time step (0 = stability-bound default).
        #[arg(long, default_value_t = 0.0)]
        dt: f64,
        #[arg(long, default_value_t = 1e-8)]
        stop_tol: f64,
        #[arg(long, default_value_t = 10000)]
        snap_every: usize,
        #[arg(long, default_value_t = 5000000)]
        max_steps: usize,
    },
    /// Pseudo-arclength continuation over an epsilon range.
    Continue {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "D1")]
        seed: String,
        /// Range `start:stop`; the seed is polished at `start`.
        #[arg(long)]
        eps_range: String,
        #[arg(long, default_value_t = 3000)]
        max_points: usize,
    },
    /// Classify a field CSV and report its defect set.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
    },
    /// Fan a command out over a list of parameter values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Subcommand to run: solve | relax | continue | analytic.
        #[arg(long)]
        cmd: String,
        /// Config key to vary: epsilon | a | tau | d.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "D1")]
        seed: String,
        #[arg(long)]
        eps_range: Option<String>,
        /// strong | weak | theta (for `--cmd analytic`).
        #[arg(long, default_value = "strong")]
        mode: String,
    },
}

fn dispatch(cmd: &Command) -> Result<serde_json::Value, Error> {
    match cmd {
        Command::Analytic {
            common,
            mode,
            state,
        } => {
            let mut cfg = common.build()?;
            cfg.mode = mode.clone();
            cfg.state = state.clone();
            config::run_analytic(&cfg)
        }
        Command::Solve { common, seed } => {
            let mut cfg = common.build()?;
            cfg.seed = seed.clone();
            config::run_solve(&cfg)
        }
        Command::Relax {
            common,
            seed,
            dt,
            stop_tol,
            snap_every,
            max_steps,
        } => {
            let mut cfg = common.build()?;
            cfg.seed = seed.clone();
            cfg.dt = *dt;
            cfg.stop_tol = *stop_tol;
            cfg.snap_every = *snap_every;
            cfg.max_steps = *max_steps;
            config::run_relax(&cfg)
        }
        Command::Continue {
            common,
            seed,
            eps_range,
            max_points,
        } => {
            let mut cfg = common.build()?;
            cfg.seed = seed.clone();
            cfg.eps_range = Some(eps_range.clone());
            cfg.max_points = *max_points;
            config::run_continue(&cfg)
        }
        Command::Classify { common, field } => {
            let mut cfg = common.build()?;
            cfg.field = Some(field.clone());
            config::run_classify(&cfg)
        }
        Command::Sweep {
            common,
            cmd,
            param,
            values,
            seed,
            eps_range,
            mode,
        } => {
            let base = {
                let mut cfg = common.build()?;
                cfg.seed = seed.clone();
                cfg.eps_range = eps_range.clone();
                cfg.mode = mode.clone();
                cfg
            };
            let vals: Vec<f64> = values
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Config(format!("--values: {e}")))?;
            use rayon::prelude::*;
            let results: Vec<_> = vals
                .par_iter()
                .map(|&v| {
                    let mut cfg = base.clone();
                    match param.as_str() {
                        "epsilon" => cfg.epsilon = v,
                        "a" => cfg.a = v,
                        "tau" => cfg.bc.tau = v,
                        "d" => cfg.bc.d = v,
                        other => {
                            return Err(Error::Config(format!("unknown sweep param `{other}`")))
                        }
                    }
                    cfg.out = base.out.join(format!("{param}_{v}"));
                    let r = match cmd.as_str() {
                        "solve" => config::run_solve(&cfg)?,
                        "relax" => config::run_relax(&cfg)?,
                        "continue" => config::run_continue(&cfg)?,
                        "analytic" => config::run_analytic(&cfg)?,
                        other => return Err(Error::Config(format!("unknown sweep cmd `{other}`"))),
                    };
                    Ok(serde_json::json!({ "value": v, "results": r }))
                })
                .collect::<Result<_, Error>>()?;
            Ok(serde_json::json!({ "sweep": results }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(results) => {
            println!("{}", serde_json::to_string_pretty(&results).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = match e {
                Error::Config(_)
                | Error::InvalidDomain(_)
                | Error::InvalidGrid(_)
                | Error::InvalidBoundary(_)
                | Error::FieldFormat(_)
                | Error::Io(_) => 2u8,
                _ => 3u8,
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "exit": code })
            );
            ExitCode::from(code)
        }
    }
}
