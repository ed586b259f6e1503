//! Newton equilibrium solves, explicit gradient-flow relaxation and the
//! smallest-eigenvalue stability test.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify, ClassifyOptions, SolutionClass};
use crate::energy::EnergyParams;
use crate::grid::QField;
use crate::system::System;
use crate::{Error, Result};

/// Residual level below which a field counts as a converged equilibrium
/// for the stability test.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;

/// Outcome of a Newton solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub energy: f64,
}

/// Damped Newton iteration on the Euler-Lagrange system with a
/// backtracking line search on the residual max norm.
///
/// Returns the final field with `converged = false` (rather than an
/// error) when the iteration stalls; hard failures such as a singular
/// linearisation are errors.
pub fn newton_solve(
    init: &QField,
    p: &EnergyParams,
    tol: f64,
    max_iter: usize,
) -> Result<(QField, SolverReport)> {
    let sys = System::new(init.grid, *p)?;
    sys.check_dirichlet(init)?;
    let mut q = init.clone();
    let mut scratch = Vec::new();
    let mut band = sys.new_band();
    let mut r_norm = sys.residual_norm(&q);
    let mut iterations = 0usize;

    while r_norm > tol && iterations < max_iter {
        band.reset();
        sys.assemble_shifted_hessian(&q, 0.0, &mut band);
        let rhs = sys.neg_grad_packed(&q, &mut scratch);
        let ipiv = band.lu_factor()?;
        let mut delta = rhs;
        band.lu_solve(&ipiv, &mut delta);

        // Backtracking on the residual norm.
        let mut lambda = 1.0f64;
        let mut accepted = false;
        let base = sys.pack(&q);
        let mut trial = q.clone();
        for _ in 0..30 {
            let stepped: Vec<f64> = base
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + lambda * d)
                .collect();
            sys.unpack_into(&stepped, &mut trial);
            let trial_norm = sys.residual_norm(&trial);
            if trial_norm.is_finite() && trial_norm <= (1.0 - 1e-4 * lambda) * r_norm {
                q = trial.clone();
                r_norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        if !accepted {
            return Ok((
                q.clone(),
                SolverReport {
                    converged: false,
                    iterations,
                    final_residual_norm: r_norm,
                    energy: sys.energy_quadrature(&q),
                },
            ));
        }
    }

    Ok((
        q.clone(),
        SolverReport {
            converged: r_norm <= tol,
            iterations,
            final_residual_norm: r_norm,
            energy: sys.energy_quadrature(&q),
        },
    ))
}

/// [`newton_solve`] that turns a stalled iteration into
/// [`Error::NonConvergence`].
pub fn newton_solve_strict(
    init: &QField,
    p: &EnergyParams,
    tol: f64,
    max_iter: usize,
) -> Result<(QField, SolverReport)> {
    let (q, rep) = newton_solve(init, p, tol, max_iter)?;
    if !rep.converged {
        return Err(Error::NonConvergence {
            iterations: rep.iterations,
            residual: rep.final_residual_norm,
        });
    }
    Ok((q, rep))
}

/// Options for [`gradient_flow`]. `dt = None` uses the largest stable
/// explicit step; explicit values are clamped to the stability bound.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub dt: Option<f64>,
    pub stop_tol: f64,
    pub snap_every: usize,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            dt: None,
            stop_tol: 1e-8,
            snap_every: 10_000,
            max_steps: 5_000_000,
        }
    }
}

/// One recorded state of a relaxation.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: QField,
    pub energy: f64,
}

/// Steepest-descent history with the terminal classification.
#[derive(Debug, Clone)]
pub struct RelaxationTrajectory {
    pub snapshots: Vec<Snapshot>,
    pub terminal_class: SolutionClass,
    pub steps: usize,
    pub final_residual_norm: f64,
}

impl RelaxationTrajectory {
    /// Write one CSV per snapshot plus a `trajectory.json` manifest.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut names = Vec::new();
        for (n, snap) in self.snapshots.iter().enumerate() {
            let name = format!("snap_{n:06}.csv");
            snap.field.save_csv(dir.join(&name))?;
            names.push(name);
        }
        let manifest = serde_json::json!({
            "times": self.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
            "energies": self.snapshots.iter().map(|s| s.energy).collect::<Vec<_>>(),
            "terminal_class": self.terminal_class,
            "steps": self.steps,
            "final_residual_norm": self.final_residual_norm,
            "snapshots": names,
        });
        std::fs::write(
            dir.join("trajectory.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }
}

/// Largest stable explicit Euler step for the 5-point scheme: the
/// linearisation is bounded by `4/hx^2 + 4/hy^2` from the Laplacian plus
/// at most `10/eps^2` from the bulk potential while `|Q|` stays near 1.
pub fn stable_dt(grid: &crate::grid::Grid, epsilon: f64) -> f64 {
    let lap = 4.0 / (grid.hx * grid.hx) + 4.0 / (grid.hy * grid.hy);
    let bulk = 10.0 / (epsilon * epsilon);
    0.9 * 2.0 / (lap + bulk)
}

/// Explicit steepest-descent relaxation `Q <- Q + dt * residual(Q)`,
/// recording snapshots and halving `dt` if the energy rises over three
/// consecutive checks (up to ten times, then [`Error::StepUnstable`]).
pub fn gradient_flow(
    init: &QField,
    p: &EnergyParams,
    opts: &FlowOptions,
) -> Result<RelaxationTrajectory> {
    let sys = System::new(init.grid, *p)?;
    sys.check_dirichlet(init)?;
    if let Some(dt) = opts.dt {
        if dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
    }
    let dt_cap = stable_dt(&init.grid, p.epsilon);
    let mut dt = opts.dt.unwrap_or(dt_cap).min(dt_cap);

    let mut q = init.clone();
    let mut r = QField::zeros(init.grid);
    let mut scratch = Vec::new();
    let n = init.grid.n_nodes();

    let mut snapshots = Vec::new();
    let mut time = 0.0;
    let mut last_energy = sys.energy_quadrature(&q);
    snapshots.push(Snapshot {
        time,
        field: q.clone(),
        energy: last_energy,
    });

    const ENERGY_CHECK_EVERY: usize = 16;
    let mut rises = 0usize;
    let mut halvings = 0usize;
    let mut step = 0usize;
    let mut r_norm;

    loop {
        sys.residual_into(&q, &mut r, &mut scratch);
        r_norm = 0.0f64;
        for k in 0..n {
            r_norm = r_norm.max(r.q11[k].abs()).max(r.q12[k].abs());
        }
        if r_norm <= opts.stop_tol || step >= opts.max_steps {
            break;
        }
        for k in 0..n {
            q.q11[k] += dt * r.q11[k];
            q.q12[k] += dt * r.q12[k];
        }
        step += 1;
        time += dt;

        if step % ENERGY_CHECK_EVERY == 0 {
            let e = sys.energy_quadrature(&q);
            if e > last_energy + 1e-12 * (1.0 + last_energy.abs()) {
                rises += 1;
                if rises >= 3 {
                    halvings += 1;
                    if halvings > 10 {
                        return Err(Error::StepUnstable(rises));
                    }
                    dt *= 0.5;
                    rises = 0;
                }
            } else {
                rises = 0;
            }
            last_energy = e;
        }
        if step % opts.snap_every == 0 {
            snapshots.push(Snapshot {
                time,
                field: q.clone(),
                energy: sys.energy_quadrature(&q),
            });
        }
    }

    // Terminal state (unless the last snapshot is already current).
    if step > 0 && snapshots.last().map(|s| s.time) != Some(time) {
        snapshots.push(Snapshot {
            time,
            field: q.clone(),
            energy: sys.energy_quadrature(&q),
        });
    }
    let terminal_class = classify(&q, &ClassifyOptions::for_problem(&init.grid, &p.bc));
    Ok(RelaxationTrajectory {
        snapshots,
        terminal_class,
        steps: step,
        final_residual_norm: r_norm,
    })
}

/// Uniform per-node perturbation of the interior, bounded by `magnitude`
/// in the max norm. Boundary nodes are untouched.
pub fn perturb_interior(field: &QField, magnitude: f64, rng: &mut impl Rng) -> QField {
    let g = field.grid;
    let mut out = field.clone();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            out.q11[k] += magnitude * (2.0 * rng.gen::<f64>() - 1.0);
            out.q12[k] += magnitude * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    out
}

/// Smallest eigenvalue of the second variation at an equilibrium, with
/// its eigenvector normalised to unit discrete L2 norm. Positive means
/// locally stable.
///
/// Spectrum slicing by banded LDL^T inertia counts brackets the
/// eigenvalue with certainty (the quadratic form is bounded below by
/// `-1/eps^2` in the L2 pairing), then shifted inverse iteration refines
/// the pair inside the certified bracket.
pub fn smallest_eigenvalue(field: &QField, p: &EnergyParams, tol: f64) -> Result<(f64, QField)> {
    smallest_eigenvalue_with(field, p, tol, EQUILIBRIUM_TOL)
}

pub fn smallest_eigenvalue_with(
    field: &QField,
    p: &EnergyParams,
    tol: f64,
    equil_tol: f64,
) -> Result<(f64, QField)> {
    smallest_eigenvalue_hinted(field, p, tol, equil_tol, None)
}

/// Variant taking a warm-start guess for the eigenvalue (e.g. from the
/// previous point of a continuation branch), which shrinks the inertia
/// bisection to a few factorisations.
pub fn smallest_eigenvalue_hinted(
    field: &QField,
    p: &EnergyParams,
    tol: f64,
    equil_tol: f64,
    hint: Option<f64>,
) -> Result<(f64, QField)> {
    let sys = System::new(field.grid, *p)?;
    let r_norm = sys.residual_norm(field);
    if r_norm > equil_tol {
        return Err(Error::NotAnEquilibrium {
            residual: r_norm,
            tol: equil_tol,
        });
    }
    let n = sys.dof.n;
    let mdiag = sys.mass_diag();

    let mut kmat = sys.new_sym_band();
    sys.assemble_shifted_hessian(field, 0.0, &mut kmat);

    let matvec = |x: &[f64], y: &mut Vec<f64>| {
        y.resize(n, 0.0);
        System::sym_matvec(&kmat, x, y);
    };
    let m_ip = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&mdiag)
            .map(|((u, v), m)| u * v * m)
            .sum()
    };

    // Deterministic start vector.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d92d);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nrm = m_ip(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut kx = Vec::new();
    matvec(&x, &mut kx);
    let rq0 = m_ip_free(&x, &kx);

    let count_below = |sigma: f64| -> Result<usize> {
        let mut shifted = sys.new_sym_band();
        sys.assemble_shifted_hessian(field, sigma, &mut shifted);
        match shifted.ldlt() {
            Ok(f) => Ok(f.negatives),
            Err(_) => {
                // Nudge the shift off the breakdown point.
                let mut shifted = sys.new_sym_band();
                sys.assemble_shifted_hessian(
                    field,
                    sigma + 1e-10 * (1.0 + sigma.abs()),
                    &mut shifted,
                );
                Ok(shifted.ldlt()?.negatives)
            }
        }
    };

    // Certified bracket: count(lo) = 0 by the potential bound, and the
    // Rayleigh quotient sits at or above the smallest eigenvalue.
    let lo_cert = -1.05 / (p.epsilon * p.epsilon) - 0.1;
    let hi_cert = rq0 + 1e-9 * (1.0 + rq0.abs());
    let (mut lo, mut hi) = match hint {
        Some(l) => {
            let half = 0.3 * l.abs() + 0.05;
            ((l - half).max(lo_cert), (l + half).min(hi_cert))
        }
        None => (lo_cert, hi_cert),
    };
    // Repair the bracket if the hint was off.
    for _ in 0..8 {
        if count_below(lo)? == 0 {
            break;
        }
        lo = (2.0 * lo - hi).max(lo_cert);
        if lo <= lo_cert {
            lo = lo_cert;
            break;
        }
    }
    if count_below(lo)? != 0 {
        for _ in 0..8 {
            lo = 2.0 * lo - hi;
            if count_below(lo)? == 0 {
                break;
            }
        }
    }
    for _ in 0..8 {
        if count_below(hi)? >= 1 {
            break;
        }
        hi = (2.0 * hi - lo).min(hi_cert);
        if hi >= hi_cert {
            hi = hi_cert;
            break;
        }
    }

    // Bisect to a relative width; inverse iteration does the rest.
    for _ in 0..80 {
        let width_target = (0.05 * lo.abs().max(hi.abs())).max(5e-3);
        if hi - lo <= width_target {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(mid)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Shifted inverse iteration from the low end of the bracket.
    let mut rho = 0.5 * (lo + hi);
    for _round in 0..4 {
        let sigma = lo;
        let mut shifted = sys.new_band();
        sys.assemble_shifted_hessian(field, sigma, &mut shifted);
        let ipiv = shifted.lu_factor()?;
        let mut converged = false;
        for _it in 0..120 {
            let mut b: Vec<f64> = x.iter().zip(&mdiag).map(|(v, m)| v * m).collect();
            shifted.lu_solve(&ipiv, &mut b);
            let nrm = m_ip(&b, &b).sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                break;
            }
            b.iter_mut().for_each(|v| *v /= nrm);
            x = b;
            matvec(&x, &mut kx);
            rho = m_ip_free(&x, &kx);
            // Pencil residual in the inverse-mass norm.
            let mut res2 = 0.0;
            for k in 0..n {
                let r = kx[k] - rho * mdiag[k] * x[k];
                res2 += r * r / mdiag[k];
            }
            if res2.sqrt() <= tol * rho.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if converged {
            break;
        }
        // Narrow the bracket and retry with a closer shift.
        for _ in 0..6 {
            if hi - lo <= 1e-13 * (1.0 + rho.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if count_below(mid)? == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    let mut vec = QField::zeros(field.grid);
    sys.unpack_into(&x, &mut vec);
    let l2 = crate::energy::l2_inner(&vec, &vec).sqrt();
    if l2 > 0.0 {
        vec.q11.iter_mut().for_each(|v| *v /= l2);
        vec.q12.iter_mut().for_each(|v| *v /= l2);
    }
    Ok((rho, vec))
}

/// Plain dot product (the Rayleigh numerator `x . K x` pairs the packed
/// vector with an already mass-free matvec).
fn m_ip_free(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundarySpec;
    use crate::grid::{Grid, RectDomain};
    use crate::limits::limit_strong_q;

    fn grid(a: f64, h: f64) -> Grid {
        Grid::with_spacing(RectDomain::new(a, 1.0).unwrap(), h).unwrap()
    }

    fn limit_lift(g: Grid, d: f64) -> QField {
        QField::from_fn(g, |x, y| {
            limit_strong_q(x, y, g.domain.a(), g.domain.b(), d, 1e-11).unwrap()
        })
    }

    #[test]
    fn newton_converges_from_analytic_limit_at_large_eps() {
        let g = grid(1.0, 1.0 / 32.0);
        let p = EnergyParams::new(5.0, BoundarySpec::Dirichlet { d: 0.03 }).unwrap();
        let init = limit_lift(g, 0.03);
        let (q, rep) = newton_solve(&init, &p, 1e-10, 20).unwrap();
        assert!(rep.converged, "residual {:.2e}", rep.final_residual_norm);
        assert!(rep.iterations <= 10, "iterations {}", rep.iterations);
        // Fixed point: re-solving from the solution costs nothing.
        let (_, rep2) = newton_solve(&q, &p, 1e-10, 20).unwrap();
        assert!(rep2.converged);
        assert!(rep2.iterations <= 1);
    }

    #[test]
    fn newton_quadratic_convergence_near_root() {
        // Residual norms along the iteration contract at least
        // quadratically once in the basin.
        let g = grid(1.0, 1.0 / 24.0);
        let p = EnergyParams::new(2.0, BoundarySpec::Dirichlet { d: 0.03 }).unwrap();
        let init = limit_lift(g, 0.03);
        let mut norms = Vec::new();
        let mut q = init;
        for _ in 0..6 {
            let (next, rep) = newton_solve(&q, &p, 1e-15, 1).unwrap();
            norms.push(rep.final_residual_norm);
            q = next;
            if rep.final_residual_norm < 1e-13 {
                break;
            }
        }
        // Find a consecutive triple in the superlinear regime.
        let mut quadratic_seen = false;
        for w in norms.windows(2) {
            if w[0] < 1e-2 && w[1] > 1e-15 {
                quadratic_seen |= w[1] <= 10.0 * w[0] * w[0];
            }
        }
        assert!(quadratic_seen, "norms: {norms:?}");
    }

    #[test]
    fn robin_mode_newton_retains_the_square_cross() {
        let g = grid(1.0, 1.0 / 24.0);
        let p = EnergyParams::new(5.0, BoundarySpec::Robin { tau: 3.0 }).unwrap();
        let init = QField::uniform(g, 0.1, 0.0);
        let (q, rep) = newton_solve(&init, &p, 1e-10, 40).unwrap();
        assert!(rep.converged);
        // The Robin solution is free on the boundary: it stays bounded
        // and keeps the diagonal nodal lines of the square.
        assert!(q.s2().iter().all(|&v| v <= 1.0 + 1e-6));
        for t in 1..g.nx - 1 {
            assert!(q.q11[g.idx(t, t)].abs() < 1e-8, "diagonal node {t}");
            assert!(q.q12[g.idx(t, t)].abs() < 1e-8);
        }
        // Weak anchoring pulls the boundary short of the full trace.
        let k_mid_bottom = g.idx(g.nx / 2, 0);
        assert!(q.q11[k_mid_bottom] > 0.2 && q.q11[k_mid_bottom] < 1.0);
    }

    #[test]
    fn gradient_flow_monotone_and_stationary_on_equilibria() {
        let g = grid(1.0, 1.0 / 16.0);
        let p = EnergyParams::new(0.8, BoundarySpec::Dirichlet { d: 0.06 }).unwrap();
        let init = limit_lift(g, 0.06);
        let opts = FlowOptions {
            dt: None,
            stop_tol: 1e-8,
            snap_every: 200,
            max_steps: 400_000,
        };
        let traj = gradient_flow(&init, &p, &opts).unwrap();
        assert!(traj.final_residual_norm <= 1e-8);
        for w in traj.snapshots.windows(2) {
            assert!(
                w[1].energy <= w[0].energy + 1e-10 * (1.0 + w[0].energy.abs()),
                "energy rose: {} -> {}",
                w[0].energy,
                w[1].energy
            );
        }
        // Re-feeding the terminal state stops immediately.
        let terminal = traj.snapshots.last().unwrap().field.clone();
        let again = gradient_flow(&terminal, &p, &opts).unwrap();
        assert_eq!(again.steps, 0);
        assert_eq!(again.snapshots.len(), 1);
        assert_eq!(again.terminal_class.label, traj.terminal_class.label);
    }

    #[test]
    fn smallest_eigenvalue_flips_sign_across_the_cross_instability() {
        let d = 0.03;
        let g = grid(1.0, 1.0 / 32.0);
        // Large eps: unique stable state.
        let p_hi = EnergyParams::new(5.0, BoundarySpec::Dirichlet { d }).unwrap();
        let (q_hi, rep) = newton_solve(&limit_lift(g, d), &p_hi, 1e-10, 30).unwrap();
        assert!(rep.converged);
        let (lam_hi, vec_hi) = smallest_eigenvalue(&q_hi, &p_hi, 1e-8).unwrap();
        assert!(lam_hi > 0.0, "lambda at eps=5: {lam_hi}");

        // Rayleigh identity: lambda = <v, -H v> in the L2 pairing.
        let hv = crate::energy::hessian_apply(&q_hi, &p_hi, &vec_hi).unwrap();
        let rq = -crate::energy::l2_inner(&vec_hi, &hv) / crate::energy::l2_inner(&vec_hi, &vec_hi);
        assert!(
            (rq - lam_hi).abs() <= 1e-8 * lam_hi.abs().max(1.0),
            "rayleigh {rq} vs {lam_hi}"
        );
        // Eigenpair residual.
        let mut worst = 0.0f64;
        let gnodes = &g;
        for j in 1..gnodes.ny - 1 {
            for i in 1..gnodes.nx - 1 {
                let k = gnodes.idx(i, j);
                worst = worst
                    .max((-hv.q11[k] - lam_hi * vec_hi.q11[k]).abs())
                    .max((-hv.q12[k] - lam_hi * vec_hi.q12[k]).abs());
            }
        }
        assert!(
            worst <= 1e-6 * lam_hi.abs().max(1.0),
            "residual {worst:.2e}"
        );

        // Small eps: the cross state is unstable. Continue the solution
        // down in eps by re-solving.
        let mut q = q_hi;
        let mut eps = 5.0f64;
        while eps > 0.06 {
            eps = (eps * 0.5).max(0.05);
            let p = EnergyParams::new(eps, BoundarySpec::Dirichlet { d }).unwrap();
            let (next, rep) = newton_solve(&q, &p, 1e-10, 40).unwrap();
            assert!(rep.converged, "eps={eps}");
            q = next;
        }
        let p_lo = EnergyParams::new(0.05, BoundarySpec::Dirichlet { d }).unwrap();
        let (lam_lo, _) = smallest_eigenvalue(&q, &p_lo, 1e-8).unwrap();
        assert!(lam_lo < 0.0, "lambda at eps=0.05: {lam_lo}");
    }

    #[test]
    fn eigenvalue_requires_an_equilibrium() {
        let g = grid(1.0, 1.0 / 16.0);
        let p = EnergyParams::new(1.0, BoundarySpec::Dirichlet { d: 0.03 }).unwrap();
        let mut q = limit_lift(g, 0.03);
        // Far from equilibrium at eps = 1.
        for v in q.q11.iter_mut() {
            *v *= 0.3;
        }
        let sys_err = smallest_eigenvalue(&q, &p, 1e-8);
        assert!(matches!(sys_err, Err(Error::NotAnEquilibrium { .. })));
    }

    #[test]
    fn ten_perturbed_starts_reach_one_field_at_large_eps() {
        let g = grid(1.0, 1.0 / 16.0);
        let d = 0.03;
        let p = EnergyParams::new(5.0, BoundarySpec::Dirichlet { d }).unwrap();
        let (reference, rep) = newton_solve(&limit_lift(g, d), &p, 1e-10, 30).unwrap();
        assert!(rep.converged);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let init = perturb_interior(&reference, 0.3, &mut rng);
            let (q, rep) = newton_solve(&init, &p, 1e-10, 60).unwrap();
            assert!(rep.converged, "trial {trial}");
            assert!(
                q.max_dist(&reference) <= 1e-6,
                "trial {trial}: dist {:.2e}",
                q.max_dist(&reference)
            );
        }
    }
}
