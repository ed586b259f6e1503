//! Run configuration, deterministic manifests and the command drivers
//! behind the `ldg2d` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundarySpec, ThetaState};
use crate::classify::{classify, detect_defects, vertex_degrees, ClassifyOptions};
use crate::continuation::{
    continue_branch, seed_library, write_branch_csv, ProblemSetup, StepPolicy,
};
use crate::energy::EnergyParams;
use crate::grid::{Grid, QField, RectDomain, ThetaField};
use crate::limits::{limit_strong_q, theta_harmonic, WeakLimit};
use crate::solve::{gradient_flow, newton_solve, smallest_eigenvalue_with, FlowOptions};
use crate::{Error, Result};

/// Flat key-value run configuration. A TOML file provides the base
/// values; command-line flags override individual keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Domain width and height.
    pub a: f64,
    pub b: f64,
    /// Target grid spacing.
    pub h: f64,
    /// `bc.mode` in {dirichlet, robin}.
    pub bc: BcConfig,
    pub epsilon: f64,
    /// Continuation range `start:stop`.
    pub eps_range: Option<String>,
    /// Seed field: `D1..R4`, `limit`, `nontrivial`, `uniform:<q11>,<q12>`
    /// or `file:<path>`.
    pub seed: String,
    /// Analytic mode: strong | weak | theta.
    pub mode: String,
    /// Theta state for `analytic --mode theta`.
    pub state: String,
    /// Input field CSV for `classify`.
    pub field: Option<PathBuf>,
    pub out: PathBuf,
    pub rng_seed: u64,
    /// Gradient-flow step; 0 selects the stability-bound default.
    pub dt: f64,
    pub stop_tol: f64,
    pub snap_every: usize,
    pub max_steps: usize,
    /// Robin-series truncation.
    pub n_roots: usize,
    /// Newton tolerance.
    pub tol: f64,
    pub max_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BcConfig {
    pub mode: String,
    pub d: f64,
    pub tau: f64,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig {
            mode: "dirichlet".into(),
            d: 0.03,
            tau: 5.0,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: 1.0,
            b: 1.0,
            h: 1.0 / 64.0,
            bc: BcConfig::default(),
            epsilon: 1.0,
            eps_range: None,
            seed: "D1".into(),
            mode: "strong".into(),
            state: "D1".into(),
            field: None,
            out: PathBuf::from("out"),
            rng_seed: 0,
            dt: 0.0,
            stop_tol: 1e-8,
            snap_every: 10_000,
            max_steps: 5_000_000,
            n_roots: 400,
            tol: 1e-10,
            max_points: 3000,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::with_spacing(RectDomain::new(self.a, self.b)?, self.h)
    }

    pub fn boundary(&self) -> Result<BoundarySpec> {
        match self.bc.mode.as_str() {
            "dirichlet" => Ok(BoundarySpec::Dirichlet { d: self.bc.d }),
            "robin" => Ok(BoundarySpec::Robin { tau: self.bc.tau }),
            other => Err(Error::Config(format!("unknown bc.mode `{other}`"))),
        }
    }

    pub fn params(&self) -> Result<EnergyParams> {
        EnergyParams::new(self.epsilon, self.boundary()?)
    }

    pub fn eps_range_parsed(&self) -> Result<(f64, f64)> {
        let s = self
            .eps_range
            .as_ref()
            .ok_or_else(|| Error::Config("eps_range is required for continuation".into()))?;
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("eps_range `{s}` is not `start:stop`")))?;
        let lo: f64 = lo
            .parse()
            .map_err(|e| Error::Config(format!("eps_range: {e}")))?;
        let hi: f64 = hi
            .parse()
            .map_err(|e| Error::Config(format!("eps_range: {e}")))?;
        Ok((lo, hi))
    }

    /// Build the initial field named by `seed`.
    pub fn seed_field(&self, grid: Grid) -> Result<QField> {
        let (a, b) = (self.a, self.b);
        let named_theta = |consts: [f64; 4]| -> Result<QField> {
            let th = ThetaField::from_fn(grid, |x, y| {
                theta_harmonic(consts, a, b, x, y, 1e-9).expect("series evaluation")
            });
            Ok(th.lift())
        };
        let mut field = match self.seed.as_str() {
            "D1" => named_theta(ThetaState::D1.constants())?,
            "D2" => named_theta(ThetaState::D2.constants())?,
            "R1" => named_theta(ThetaState::R1.constants())?,
            "R2" => named_theta(ThetaState::R2.constants())?,
            "R3" => named_theta(ThetaState::R3.constants())?,
            "R4" => named_theta(ThetaState::R4.constants())?,
            "nontrivial" => named_theta(crate::boundary::nontrivial_constants())?,
            "limit" => QField::from_fn(grid, |x, y| {
                limit_strong_q(x, y, a, b, self.bc.d, 1e-10).expect("series evaluation")
            }),
            other => {
                if let Some(rest) = other.strip_prefix("uniform:") {
                    let (u, v) = rest
                        .split_once(',')
                        .ok_or_else(|| Error::Config(format!("seed `{other}`")))?;
                    let u: f64 = u.parse().map_err(|e| Error::Config(format!("seed: {e}")))?;
                    let v: f64 = v.parse().map_err(|e| Error::Config(format!("seed: {e}")))?;
                    QField::uniform(grid, u, v)
                } else if let Some(path) = other.strip_prefix("file:") {
                    QField::load_csv(path)?
                } else {
                    return Err(Error::Config(format!("unknown seed `{other}`")));
                }
            }
        };
        let sys = crate::system::System::new(grid, self.params()?)?;
        sys.impose_trace(&mut field);
        Ok(field)
    }
}

/// Manifest written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub wall_time_s: f64,
    pub results: serde_json::Value,
}

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    started: Instant,
    results: serde_json::Value,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        wall_time_s: started.elapsed().as_secs_f64(),
        results,
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// `analytic`: sample the requested limit profile on the grid.
pub fn run_analytic(cfg: &RunConfig) -> Result<serde_json::Value> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let (a, b) = (cfg.a, cfg.b);
    std::fs::create_dir_all(&cfg.out)?;
    let (field, label) = match cfg.mode.as_str() {
        "strong" => {
            let f = QField::from_fn(grid, |x, y| {
                limit_strong_q(x, y, a, b, cfg.bc.d, 1e-10).expect("series evaluation")
            });
            (f, "strong".to_string())
        }
        "weak" => {
            let wl = WeakLimit::new(a, b, cfg.bc.tau, cfg.n_roots)?;
            let f = QField::from_fn(grid, |x, y| (wl.q11(x, y), 0.0));
            (f, format!("weak tau={}", cfg.bc.tau))
        }
        "theta" => {
            let consts = match cfg.state.as_str() {
                "D1" => ThetaState::D1.constants(),
                "D2" => ThetaState::D2.constants(),
                "R1" => ThetaState::R1.constants(),
                "R2" => ThetaState::R2.constants(),
                "R3" => ThetaState::R3.constants(),
                "R4" => ThetaState::R4.constants(),
                "nontrivial" => crate::boundary::nontrivial_constants(),
                other => return Err(Error::Config(format!("unknown theta state `{other}`"))),
            };
            let th = ThetaField::from_fn(grid, |x, y| {
                theta_harmonic(consts, a, b, x, y, 1e-9).expect("series evaluation")
            });
            (th.lift(), format!("theta {}", cfg.state))
        }
        other => return Err(Error::Config(format!("unknown analytic mode `{other}`"))),
    };
    let csv = cfg.out.join("field.csv");
    field.save_csv(&csv)?;
    let (ci, cj) = (grid.nx / 2, grid.ny / 2);
    let results = serde_json::json!({
        "mode": label,
        "field_csv": "field.csv",
        "center_q11": field.q11[grid.idx(ci, cj)],
        "nx": grid.nx,
        "ny": grid.ny,
    });
    write_manifest(&cfg.out, "analytic", cfg, started, results.clone())?;
    Ok(results)
}

/// `solve`: Newton from the configured seed, then stability and class.
pub fn run_solve(cfg: &RunConfig) -> Result<serde_json::Value> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let init = cfg.seed_field(grid)?;
    let (q, report) = newton_solve(&init, &p, cfg.tol, 100)?;
    if !report.converged {
        return Err(Error::NonConvergence {
            iterations: report.iterations,
            residual: report.final_residual_norm,
        });
    }
    std::fs::create_dir_all(&cfg.out)?;
    q.save_csv(cfg.out.join("field.csv"))?;
    let (lambda, _) = smallest_eigenvalue_with(&q, &p, 1e-8, 1e-5)?;
    let class = classify(&q, &ClassifyOptions::for_problem(&grid, &p.bc));
    let results = serde_json::json!({
        "report": report,
        "lambda_min": lambda,
        "class": class.label.name(),
        "stable": lambda > 0.0,
        "field_csv": "field.csv",
    });
    write_manifest(&cfg.out, "solve", cfg, started, results.clone())?;
    Ok(results)
}

/// `relax`: steepest-descent relaxation with snapshots and defect log.
pub fn run_relax(cfg: &RunConfig) -> Result<serde_json::Value> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let init = cfg.seed_field(grid)?;
    let opts = FlowOptions {
        dt: if cfg.dt > 0.0 { Some(cfg.dt) } else { None },
        stop_tol: cfg.stop_tol,
        snap_every: cfg.snap_every,
        max_steps: cfg.max_steps,
    };
    let traj = gradient_flow(&init, &p, &opts)?;
    traj.export(&cfg.out)?;
    // Per-snapshot defect reports.
    let mut defect_log = Vec::new();
    for snap in &traj.snapshots {
        let d = detect_defects(&snap.field, None);
        defect_log.push(serde_json::json!({
            "time": snap.time,
            "points": d.points,
            "lines": d.lines.len(),
        }));
    }
    let vd = if cfg.seed == "nontrivial" {
        Some(vertex_degrees(crate::boundary::nontrivial_constants())?)
    } else {
        None
    };
    std::fs::write(
        cfg.out.join("defects.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "snapshots": defect_log,
            "vertex_degrees": vd.map(|v| v.omega.to_vec()),
        }))?,
    )?;
    let results = serde_json::json!({
        "terminal_class": traj.terminal_class.label.name(),
        "steps": traj.steps,
        "final_residual_norm": traj.final_residual_norm,
        "snapshots": traj.snapshots.len(),
    });
    write_manifest(&cfg.out, "relax", cfg, started, results.clone())?;
    Ok(results)
}

/// `continue`: polish the seed at the range start, trace the branch,
/// export the branch CSV and the transition table.
pub fn run_continue(cfg: &RunConfig) -> Result<serde_json::Value> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let setup = ProblemSetup {
        grid,
        bc: cfg.boundary()?,
    };
    let (lo, hi) = cfg.eps_range_parsed()?;
    let policy = StepPolicy {
        newton_tol: cfg.tol,
        max_points: cfg.max_points,
        ..StepPolicy::default()
    };
    let eps0 = lo;
    let mut cfg_seed = cfg.clone();
    cfg_seed.epsilon = eps0;
    let init = cfg_seed.seed_field(grid)?;
    let (q, report) = newton_solve(&init, &setup.params(eps0), cfg.tol, 100)?;
    if !report.converged {
        return Err(Error::SeedNotConverged(report.final_residual_norm));
    }
    let seed_pt = crate::continuation::make_branch_point(&setup, eps0, q, &policy)?;
    let branch = continue_branch(&seed_pt, &setup, (lo, hi), &policy)?;
    std::fs::create_dir_all(&cfg.out)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(cfg.out.join("branch.csv"))?);
    write_branch_csv(&branch, &mut f)?;
    drop(f);
    let table =
        crate::continuation::transition_parameters(&setup, &[branch.clone()], &[], 1e-3, &policy)?;
    std::fs::write(
        cfg.out.join("transitions.json"),
        serde_json::to_string_pretty(&table)?,
    )?;
    let results = serde_json::json!({
        "points": branch.points.len(),
        "terminated": branch.terminated,
        "transitions": table,
        "folds": branch.folds,
        "branch_csv": "branch.csv",
    });
    write_manifest(&cfg.out, "continue", cfg, started, results.clone())?;
    Ok(results)
}

/// `classify`: label a field dump.
pub fn run_classify(cfg: &RunConfig) -> Result<serde_json::Value> {
    let started = Instant::now();
    let path = cfg
        .field
        .as_ref()
        .ok_or_else(|| Error::Config("classify requires --field <csv>".into()))?;
    let q = QField::load_csv(path)?;
    let class = classify(&q, &ClassifyOptions::for_problem(&q.grid, &cfg.boundary()?));
    let defects = detect_defects(&q, None);
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(
        cfg.out.join("defects.json"),
        serde_json::to_string_pretty(&defects.report_json(None))?,
    )?;
    let results = serde_json::json!({
        "class": class.label.name(),
        "confidence": class.confidence,
        "points": defects.points,
        "lines": defects.lines.len(),
    });
    write_manifest(&cfg.out, "classify", cfg, started, results.clone())?;
    Ok(results)
}

/// `seeds`: polish the seed library at both regime endpoints (used by the
/// sweep driver and the examples; exposed for completeness).
pub fn run_seed_library(
    cfg: &RunConfig,
    eps_small: f64,
    eps_large: f64,
) -> Result<serde_json::Value> {
    let started = Instant::now();
    let setup = ProblemSetup {
        grid: cfg.grid()?,
        bc: cfg.boundary()?,
    };
    let policy = StepPolicy {
        newton_tol: cfg.tol,
        ..StepPolicy::default()
    };
    let lib = seed_library(&setup, eps_small, eps_large, &policy)?;
    let results = serde_json::json!({
        "seeds": lib.seeds.iter().map(|s| serde_json::json!({
            "name": s.name,
            "epsilon": s.point.epsilon,
            "class": s.point.class.label.name(),
            "stable": s.point.lambda_min > 0.0,
            "energy": s.point.energy,
        })).collect::<Vec<_>>(),
        "failed": lib.failed.len(),
    });
    write_manifest(&cfg.out, "seeds", cfg, started, results.clone())?;
    Ok(results)
}
