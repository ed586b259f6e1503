//! Pseudo-arclength continuation of equilibrium branches in epsilon,
//! stability tagging, transition extraction and the seed library.

use std::io::Write;

use serde::Serialize;

use crate::boundary::{BoundarySpec, ThetaState};
use crate::classify::{classify, ClassLabel, ClassifyOptions, SolutionClass};
use crate::energy::{branch_diagnostics, EnergyParams};
use crate::grid::{Grid, QField, ThetaField};
use crate::limits::{limit_strong_q, theta_harmonic};
use crate::solve::{newton_solve, smallest_eigenvalue_hinted};
use crate::system::System;
use crate::{Error, Result};

/// Stability-tagged class, displayed as `sD1`, `uBD2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedClass {
    pub label: ClassLabel,
    pub stable: bool,
}

impl std::fmt::Display for TaggedClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.label == ClassLabel::Unknown {
            f.write_str("Unknown")
        } else {
            write!(f, "{}{}", if self.stable { "s" } else { "u" }, self.label)
        }
    }
}

/// A converged equilibrium on a branch with its stability and the plotted
/// diagnostics.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub epsilon: f64,
    pub field: QField,
    pub energy: f64,
    pub lambda_min: f64,
    pub class: SolutionClass,
    pub m11: f64,
    pub m12: f64,
    pub int_q12_sq: f64,
}

impl BranchPoint {
    pub fn tagged(&self) -> TaggedClass {
        TaggedClass {
            label: self.class.label,
            stable: self.lambda_min > 0.0,
        }
    }
}

/// A recorded change of tagged class between consecutive accepted points.
#[derive(Debug, Clone)]
pub struct Transition {
    pub epsilon: f64,
    pub from: TaggedClass,
    pub to: TaggedClass,
    /// Index of the first point carrying the new class.
    pub after_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// Left the requested epsilon range.
    RangeEnd,
    /// Corrector kept failing after the allowed step halvings.
    EndPoint,
    /// Stopped on a fold by policy.
    Fold,
    /// Point budget exhausted.
    MaxPoints,
}

/// An epsilon-ordered traversal of one solution branch.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub transitions: Vec<Transition>,
    /// Epsilon values of detected folds (tangent reversals).
    pub folds: Vec<f64>,
    pub terminated: Termination,
}

/// What to do when the branch reaches a fold (the tangent's epsilon
/// component reverses).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldPolicy {
    /// Follow the physical pathway of a slow epsilon ramp: attempt a
    /// Newton jump just past the fold and accept it if the landing state
    /// is close (a first-order structural transition); otherwise the
    /// pathway cannot be continued and the branch ends there.
    PathwayJump,
    /// Record the fold and keep tracing the branch through it.
    PassThrough,
    /// Terminate at the fold.
    Stop,
}

/// Step-control and tolerance policy for [`continue_branch`].
#[derive(Debug, Clone, Copy)]
pub struct StepPolicy {
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Corrector iterations allowed per step.
    pub max_corrector: usize,
    /// Consecutive easy accepts before the step doubles.
    pub easy_accepts: usize,
    /// Consecutive failed halvings before declaring an end point.
    pub endpoint_halvings: usize,
    pub newton_tol: f64,
    pub eig_tol: f64,
    pub max_points: usize,
    pub fold_policy: FoldPolicy,
    /// Relative L2 distance cap for accepting a fold jump.
    pub jump_accept_dist: f64,
    /// Step cap while the epsilon motion is collapsing (fold zone), so
    /// the points just before a first-order jump resolve the branch.
    pub ds_fold_zone: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            ds0: 0.01,
            ds_min: 1e-5,
            ds_max: 0.05,
            max_corrector: 5,
            easy_accepts: 2,
            endpoint_halvings: 6,
            newton_tol: 1e-10,
            eig_tol: 1e-8,
            max_points: 3000,
            fold_policy: FoldPolicy::PathwayJump,
            jump_accept_dist: 0.35,
            ds_fold_zone: 0.01,
        }
    }
}

/// Problem context shared by the continuation operations.
#[derive(Debug, Clone, Copy)]
pub struct ProblemSetup {
    pub grid: Grid,
    pub bc: BoundarySpec,
}

impl ProblemSetup {
    pub fn params(&self, epsilon: f64) -> EnergyParams {
        EnergyParams {
            epsilon,
            bc: self.bc,
        }
    }

    fn classify_opts(&self) -> ClassifyOptions {
        ClassifyOptions::for_problem(&self.grid, &self.bc)
    }
}

/// Build a [`BranchPoint`] from a converged field, re-verifying the
/// residual independently of the solver that produced it.
pub fn make_branch_point(
    setup: &ProblemSetup,
    epsilon: f64,
    field: QField,
    policy: &StepPolicy,
) -> Result<BranchPoint> {
    make_branch_point_hinted(setup, epsilon, field, policy, None)
}

pub(crate) fn make_branch_point_hinted(
    setup: &ProblemSetup,
    epsilon: f64,
    field: QField,
    policy: &StepPolicy,
    lambda_hint: Option<f64>,
) -> Result<BranchPoint> {
    let p = setup.params(epsilon);
    let sys = System::new(setup.grid, p)?;
    let r = sys.residual_norm(&field);
    if r > 10.0 * policy.newton_tol {
        return Err(Error::NotAnEquilibrium {
            residual: r,
            tol: 10.0 * policy.newton_tol,
        });
    }
    let energy = sys.energy_quadrature(&field);
    let (lambda_min, _) =
        smallest_eigenvalue_hinted(&field, &p, policy.eig_tol, 1e-5, lambda_hint)?;
    let class = classify(&field, &setup.classify_opts());
    let (m11, m12, int_q12_sq) = branch_diagnostics(&field);
    Ok(BranchPoint {
        epsilon,
        field,
        energy,
        lambda_min,
        class,
        m11,
        m12,
        int_q12_sq,
    })
}

/// Packed continuation state `(field dofs, epsilon)`.
struct AugVec {
    x: Vec<f64>,
    eps: f64,
}

/// L2-weighted inner product on the augmented space.
fn aug_ip(a: &AugVec, b: &AugVec, mdiag: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.x.len() {
        s += 0.25 * mdiag[k] * a.x[k] * b.x[k];
    }
    s + a.eps * b.eps
}

/// Pseudo-arclength continuation from a converged seed toward the far end
/// of `eps_range`, recording stability transitions, folds and the
/// termination cause.
pub fn continue_branch(
    seed: &BranchPoint,
    setup: &ProblemSetup,
    eps_range: (f64, f64),
    policy: &StepPolicy,
) -> Result<Branch> {
    let (eps_lo, eps_hi) = (eps_range.0.min(eps_range.1), eps_range.0.max(eps_range.1));
    if seed.epsilon < eps_lo - 1e-12 || seed.epsilon > eps_hi + 1e-12 {
        return Err(Error::Config(format!(
            "seed epsilon {} outside range [{eps_lo}, {eps_hi}]",
            seed.epsilon
        )));
    }
    {
        let sys = System::new(setup.grid, setup.params(seed.epsilon))?;
        let r = sys.residual_norm(&seed.field);
        if r > 100.0 * policy.newton_tol {
            return Err(Error::SeedNotConverged(r));
        }
    }
    // Continue toward the farther range end.
    let dir: f64 = if eps_hi - seed.epsilon >= seed.epsilon - eps_lo {
        1.0
    } else {
        -1.0
    };

    let sys0 = System::new(setup.grid, setup.params(seed.epsilon))?;
    let mdiag = sys0.mass_diag();

    let mut branch = Branch {
        points: vec![seed.clone()],
        transitions: Vec::new(),
        folds: Vec::new(),
        terminated: Termination::RangeEnd,
    };

    let mut u = AugVec {
        x: sys0.pack(&seed.field),
        eps: seed.epsilon,
    };
    let mut tangent = initial_tangent(setup, &seed.field, seed.epsilon, dir, &mdiag)?;
    let mut ds = policy.ds0;
    let mut easy = 0usize;
    let mut halvings = 0usize;
    let mut lambda_hint = Some(seed.lambda_min);

    'outer: while branch.points.len() < policy.max_points {
        // Predict (with the step capped inside the fold zone).
        let ds_eff = if tangent.eps.abs() < 0.05 {
            ds.min(policy.ds_fold_zone)
        } else {
            ds
        };
        let pred = AugVec {
            x: u.x
                .iter()
                .zip(&tangent.x)
                .map(|(a, t)| a + ds_eff * t)
                .collect(),
            eps: u.eps + ds_eff * tangent.eps,
        };
        // Correct.
        match correct(setup, &pred, &tangent, &mdiag, policy) {
            Ok(Some(corr)) => {
                halvings = 0;
                // Range-end handling: land exactly on the boundary.
                if corr.eps > eps_hi + 1e-9 || corr.eps < eps_lo - 1e-9 {
                    let eps_end = corr.eps.clamp(eps_lo, eps_hi);
                    if let Some(pt) = natural_point(setup, &u.x, eps_end, policy, lambda_hint)? {
                        push_point(&mut branch, pt);
                    }
                    branch.terminated = Termination::RangeEnd;
                    break 'outer;
                }
                let secant = secant_tangent(&u, &corr, &mdiag);
                if std::env::var_os("LDG2D_TRACE").is_some() {
                    eprintln!(
                        "trace: u.eps={:.6} corr.eps={:.6} t.eps={:+.3e} s.eps={:+.3e} ds={:.3e}",
                        u.eps, corr.eps, tangent.eps, secant.eps, ds
                    );
                }
                // Anticipate a fold while the tip is still clean: when the
                // epsilon motion collapses, probe for the first-order jump
                // before the corrector can hop onto the mirror lobe.
                if policy.fold_policy == FoldPolicy::PathwayJump
                    && tangent.eps.abs() >= 4e-3
                    && secant.eps.abs() <= (0.5 * tangent.eps.abs()).min(0.02)
                {
                    let ahead = if tangent.eps > 0.0 { 1.0 } else { -1.0 };
                    let tip = branch.points.last().unwrap();
                    let tip_label = tip.class.label;
                    if let Some(jumped) =
                        try_fold_jump(setup, tip, ahead, eps_lo, eps_hi, policy, lambda_hint)?
                    {
                        if jumped.class.label != tip_label {
                            branch.folds.push(tip.epsilon);
                            let sys = System::new(setup.grid, setup.params(jumped.epsilon))?;
                            u = AugVec {
                                x: sys.pack(&jumped.field),
                                eps: jumped.epsilon,
                            };
                            lambda_hint = Some(jumped.lambda_min);
                            push_point(&mut branch, jumped);
                            tangent = initial_tangent(
                                setup,
                                &branch.points.last().unwrap().field,
                                u.eps,
                                ahead,
                                &mdiag,
                            )?;
                            ds = policy.ds0;
                            easy = 0;
                            continue 'outer;
                        }
                    }
                }
                // Fold: the epsilon component of the traversal reverses.
                if secant.eps * tangent.eps < 0.0 && tangent.eps.abs() > 1e-4 {
                    branch.folds.push(u.eps);
                    match policy.fold_policy {
                        FoldPolicy::PathwayJump => {
                            let ahead = if tangent.eps > 0.0 { 1.0 } else { -1.0 };
                            if let Some(jumped) = try_fold_jump(
                                setup,
                                branch.points.last().unwrap(),
                                ahead,
                                eps_lo,
                                eps_hi,
                                policy,
                                lambda_hint,
                            )? {
                                let sys = System::new(setup.grid, setup.params(jumped.epsilon))?;
                                u = AugVec {
                                    x: sys.pack(&jumped.field),
                                    eps: jumped.epsilon,
                                };
                                lambda_hint = Some(jumped.lambda_min);
                                push_point(&mut branch, jumped);
                                tangent = initial_tangent(
                                    setup,
                                    &branch.points.last().unwrap().field,
                                    u.eps,
                                    ahead,
                                    &mdiag,
                                )?;
                                ds = policy.ds0;
                                easy = 0;
                                continue 'outer;
                            }
                            // No nearby solution past the fold: the pathway
                            // cannot be continued in this direction.
                            branch.terminated = Termination::EndPoint;
                            break 'outer;
                        }
                        FoldPolicy::Stop => {
                            branch.terminated = Termination::Fold;
                            break 'outer;
                        }
                        FoldPolicy::PassThrough => {}
                    }
                }
                // Accept; the secant orientation follows the curve through
                // folds without extra bookkeeping.
                let mut field = QField::zeros(setup.grid);
                let sys = System::new(setup.grid, setup.params(corr.eps))?;
                sys.unpack_into(&corr.x, &mut field);
                sys.impose_trace(&mut field);
                let pt = make_branch_point_hinted(setup, corr.eps, field, policy, lambda_hint)?;
                lambda_hint = Some(pt.lambda_min);
                push_point(&mut branch, pt);
                tangent = secant;
                u = corr;
                easy += 1;
                if easy >= policy.easy_accepts {
                    ds = (2.0 * ds).min(policy.ds_max);
                    easy = 0;
                }
            }
            Ok(None) | Err(Error::SingularLinearization { .. }) => {
                easy = 0;
                ds *= 0.5;
                halvings += 1;
                if halvings >= policy.endpoint_halvings && ds < policy.ds_min {
                    branch.terminated = Termination::EndPoint;
                    break 'outer;
                }
                if ds < policy.ds_min {
                    ds = policy.ds_min;
                }
            }
            Err(e) => return Err(e),
        }
        if branch.points.len() >= policy.max_points {
            branch.terminated = Termination::MaxPoints;
        }
    }
    Ok(branch)
}

fn push_point(branch: &mut Branch, pt: BranchPoint) {
    let prev = branch.points.last().map(|p| p.tagged());
    let tagged = pt.tagged();
    if let Some(prev) = prev {
        if prev != tagged {
            branch.transitions.push(Transition {
                epsilon: 0.5 * (branch.points.last().unwrap().epsilon + pt.epsilon),
                from: prev,
                to: tagged,
                after_index: branch.points.len(),
            });
        }
    }
    branch.points.push(pt);
}

/// Tangent from the linearised system at a point: solve `K z = -dG/deps`
/// and normalise `(z, 1)` toward `dir`.
fn initial_tangent(
    setup: &ProblemSetup,
    field: &QField,
    eps: f64,
    dir: f64,
    mdiag: &[f64],
) -> Result<AugVec> {
    let sys = System::new(setup.grid, setup.params(eps))?;
    let mut band = sys.new_band();
    sys.assemble_shifted_hessian(field, 0.0, &mut band);
    let b = sys.grad_eps_derivative_packed(field);
    let mut z: Vec<f64> = b.iter().map(|v| -v).collect();
    match band.lu_factor() {
        Ok(ipiv) => band.lu_solve(&ipiv, &mut z),
        Err(_) => z.fill(0.0), // singular at a bifurcation: fall back to pure-eps tangent
    }
    let mut t = AugVec { x: z, eps: 1.0 };
    let n = aug_ip(&t, &t, mdiag).sqrt();
    t.x.iter_mut().for_each(|v| *v /= n);
    t.eps /= n;
    if t.eps * dir < 0.0 {
        t.x.iter_mut().for_each(|v| *v = -*v);
        t.eps = -t.eps;
    }
    Ok(t)
}

fn secant_tangent(prev: &AugVec, next: &AugVec, mdiag: &[f64]) -> AugVec {
    let mut t = AugVec {
        x: next.x.iter().zip(&prev.x).map(|(a, b)| a - b).collect(),
        eps: next.eps - prev.eps,
    };
    let n = aug_ip(&t, &t, mdiag).sqrt();
    if n > 0.0 {
        t.x.iter_mut().for_each(|v| *v /= n);
        t.eps /= n;
    }
    t
}

/// Newton corrector for the bordered system (residual + arclength
/// constraint), solved by block elimination with two banded solves per
/// iteration.
fn correct(
    setup: &ProblemSetup,
    pred: &AugVec,
    tangent: &AugVec,
    mdiag: &[f64],
    policy: &StepPolicy,
) -> Result<Option<AugVec>> {
    let mut cur = AugVec {
        x: pred.x.clone(),
        eps: pred.eps,
    };
    let mut field = QField::zeros(setup.grid);
    let mut scratch = Vec::new();
    for _it in 0..policy.max_corrector {
        if !(cur.eps.is_finite() && cur.eps > 1e-6) {
            return Ok(None);
        }
        let sys = System::new(setup.grid, setup.params(cur.eps))?;
        sys.unpack_into(&cur.x, &mut field);
        sys.impose_trace(&mut field);
        let r_norm = sys.residual_norm(&field);
        let gap = AugVec {
            x: cur.x.iter().zip(&pred.x).map(|(a, b)| a - b).collect(),
            eps: cur.eps - pred.eps,
        };
        let constraint = aug_ip(&gap, tangent, mdiag);
        if r_norm <= policy.newton_tol && constraint.abs() <= 1e-10 {
            return Ok(Some(cur));
        }
        let mut band = sys.new_band();
        sys.assemble_shifted_hessian(&field, 0.0, &mut band);
        let ipiv = match band.lu_factor() {
            Ok(p) => p,
            Err(_) => return Ok(None),
        };
        let mut z1 = sys.neg_grad_packed(&field, &mut scratch);
        band.lu_solve(&ipiv, &mut z1);
        let mut z2: Vec<f64> = sys
            .grad_eps_derivative_packed(&field)
            .iter()
            .map(|v| -v)
            .collect();
        band.lu_solve(&ipiv, &mut z2);
        // Solve the bordered 2x2 reduction for (delta_x, delta_eps):
        // delta_x = z1 + delta_eps z2, and the constraint row
        // <gap + delta, t> = 0.
        let t_dot_z1: f64 = (0..z1.len())
            .map(|k| 0.25 * mdiag[k] * tangent.x[k] * z1[k])
            .sum();
        let t_dot_z2: f64 = (0..z2.len())
            .map(|k| 0.25 * mdiag[k] * tangent.x[k] * z2[k])
            .sum();
        let denom = t_dot_z2 + tangent.eps;
        if denom.abs() < 1e-14 {
            return Ok(None);
        }
        let delta_eps = -(constraint + t_dot_z1) / denom;
        if !delta_eps.is_finite() {
            return Ok(None);
        }
        for k in 0..cur.x.len() {
            cur.x[k] += z1[k] + delta_eps * z2[k];
        }
        cur.eps += delta_eps;
    }
    // Final check after the iteration cap.
    let sys = System::new(setup.grid, setup.params(cur.eps))?;
    sys.unpack_into(&cur.x, &mut field);
    sys.impose_trace(&mut field);
    if sys.residual_norm(&field) <= policy.newton_tol {
        return Ok(Some(cur));
    }
    Ok(None)
}

/// Plain Newton solve at a fixed epsilon from packed data.
fn natural_point(
    setup: &ProblemSetup,
    x: &[f64],
    eps: f64,
    policy: &StepPolicy,
    hint: Option<f64>,
) -> Result<Option<BranchPoint>> {
    let sys = System::new(setup.grid, setup.params(eps))?;
    let mut field = QField::zeros(setup.grid);
    sys.unpack_into(x, &mut field);
    sys.impose_trace(&mut field);
    let (q, rep) = newton_solve(&field, &setup.params(eps), policy.newton_tol, 30)?;
    if !rep.converged {
        return Ok(None);
    }
    Ok(Some(make_branch_point_hinted(setup, eps, q, policy, hint)?))
}

/// Relative L2 distance between two fields.
fn rel_l2_dist(a: &QField, b: &QField) -> f64 {
    let g = &a.grid;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let w = g.quad_weight(i, j);
            num += w * ((a.q11[k] - b.q11[k]).powi(2) + (a.q12[k] - b.q12[k]).powi(2));
            den += w * (b.q11[k].powi(2) + b.q12[k].powi(2));
        }
    }
    (num / den.max(1e-300)).sqrt()
}

/// After a fold at the branch tip, try to continue the physical pathway:
/// Newton at epsilon just past the fold, seeded from the tip field (also
/// with its `q12` damped, which guides the solve onto an adjacent
/// boundary-distortion branch when one absorbs the fold). Accepted only
/// when the landing solution is close to the tip, i.e. a genuine
/// first-order jump rather than an escape to an unrelated state.
fn try_fold_jump(
    setup: &ProblemSetup,
    tip: &BranchPoint,
    ahead: f64,
    eps_lo: f64,
    eps_hi: f64,
    policy: &StepPolicy,
    hint: Option<f64>,
) -> Result<Option<BranchPoint>> {
    for step in [2e-3, 5e-3] {
        let eps_target = (tip.epsilon + ahead * step).clamp(eps_lo, eps_hi);
        if (eps_target - tip.epsilon).abs() < 1e-9 {
            return Ok(None);
        }
        // The q12-zeroed candidate comes first: every first-order
        // transition in this family lands on a boundary-distortion branch,
        // and zeroing q12 keeps the Newton solve on that invariant
        // subspace.
        for damp in [0.0, 0.5, 1.0] {
            let mut init = tip.field.clone();
            if damp < 1.0 {
                let g = &setup.grid;
                for j in 1..g.ny - 1 {
                    for i in 1..g.nx - 1 {
                        init.q12[g.idx(i, j)] *= damp;
                    }
                }
            }
            let (q, rep) = newton_solve(&init, &setup.params(eps_target), policy.newton_tol, 40)?;
            if !rep.converged {
                continue;
            }
            let rel = rel_l2_dist(&q, &tip.field);
            if rel <= policy.jump_accept_dist {
                return Ok(Some(make_branch_point_hinted(
                    setup, eps_target, q, policy, hint,
                )?));
            }
        }
    }
    Ok(None)
}

/// Named seed candidates: harmonic-angle lifts of the six reference
/// states and the strong-anchoring limit profile.
fn seed_candidates(setup: &ProblemSetup) -> Result<Vec<(String, QField)>> {
    let g = setup.grid;
    let (a, b) = (g.domain.a(), g.domain.b());
    let mut out = Vec::new();
    for state in ThetaState::all() {
        let c = state.constants();
        let th = ThetaField::from_fn(g, |x, y| {
            theta_harmonic(c, a, b, x, y, 1e-9).expect("series evaluation")
        });
        out.push((state.name().to_string(), th.lift()));
    }
    let d = match setup.bc {
        BoundarySpec::Dirichlet { d } => d,
        BoundarySpec::Robin { .. } => 0.0,
    };
    let limit = QField::from_fn(g, |x, y| {
        limit_strong_q(x, y, a, b, d, 1e-10).expect("series")
    });
    out.push(("limit".to_string(), limit));
    for (_, f) in out.iter_mut() {
        let sys = System::new(g, setup.params(1.0))?;
        sys.impose_trace(f);
    }
    Ok(out)
}

/// A polished seed with the candidate name it came from.
#[derive(Debug, Clone)]
pub struct Seed {
    pub name: String,
    pub point: BranchPoint,
}

#[derive(Debug, Clone)]
pub struct SeedFailure {
    pub name: String,
    pub epsilon: f64,
    pub residual: f64,
}

#[derive(Debug)]
pub struct SeedLibrary {
    pub seeds: Vec<Seed>,
    pub failed: Vec<SeedFailure>,
}

impl SeedLibrary {
    pub fn at_epsilon(&self, eps: f64) -> impl Iterator<Item = &Seed> {
        self.seeds
            .iter()
            .filter(move |s| (s.point.epsilon - eps).abs() < 1e-12)
    }
}

/// Newton-polish the candidate lifts at both regime endpoints and merge
/// duplicates (same field to 1e-6 in the max norm).
pub fn seed_library(
    setup: &ProblemSetup,
    eps_small: f64,
    eps_large: f64,
    policy: &StepPolicy,
) -> Result<SeedLibrary> {
    if eps_small > 0.05 {
        return Err(Error::Config(format!(
            "eps_small={eps_small} outside the small-epsilon seeding regime (<= 0.05)"
        )));
    }
    if eps_large < 2.0 {
        return Err(Error::Config(format!(
            "eps_large={eps_large} outside the large-epsilon seeding regime (>= 2)"
        )));
    }
    let candidates = seed_candidates(setup)?;
    let mut seeds: Vec<Seed> = Vec::new();
    let mut failed = Vec::new();
    for &eps in &[eps_small, eps_large] {
        for (name, init) in &candidates {
            let p = setup.params(eps);
            match newton_solve(init, &p, policy.newton_tol, 60) {
                Ok((q, rep)) if rep.converged => {
                    let duplicate = seeds.iter().any(|s| {
                        (s.point.epsilon - eps).abs() < 1e-12 && s.point.field.max_dist(&q) <= 1e-6
                    });
                    if !duplicate {
                        match make_branch_point(setup, eps, q, policy) {
                            Ok(point) => seeds.push(Seed {
                                name: format!("{name}@{eps}"),
                                point,
                            }),
                            Err(_) => failed.push(SeedFailure {
                                name: name.clone(),
                                epsilon: eps,
                                residual: rep.final_residual_norm,
                            }),
                        }
                    }
                }
                Ok((_, rep)) => failed.push(SeedFailure {
                    name: name.clone(),
                    epsilon: eps,
                    residual: rep.final_residual_norm,
                }),
                Err(_) => failed.push(SeedFailure {
                    name: name.clone(),
                    epsilon: eps,
                    residual: f64::INFINITY,
                }),
            }
        }
    }
    Ok(SeedLibrary { seeds, failed })
}

/// One extracted transition parameter.
#[derive(Debug, Clone, Serialize)]
pub struct NamedTransition {
    pub name: String,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

/// Extract and refine every recorded transition to the requested epsilon
/// resolution, plus an `end` entry for every branch that terminated at an
/// end point. Errors if a `required` name is absent.
pub fn transition_parameters(
    setup: &ProblemSetup,
    branches: &[Branch],
    required: &[&str],
    resolution: f64,
    policy: &StepPolicy,
) -> Result<Vec<NamedTransition>> {
    let g = setup.grid;
    let (a, b, h) = (g.domain.a(), g.domain.b(), g.hx.max(g.hy));
    let mut out: Vec<NamedTransition> = Vec::new();
    for branch in branches {
        for tr in &branch.transitions {
            let name = format!("{}->{}", tr.from, tr.to);
            let lo = &branch.points[tr.after_index - 1];
            let hi = &branch.points[tr.after_index];
            let eps = refine_transition(setup, lo, hi, resolution, policy)?;
            if let Some(existing) = out.iter_mut().find(|t| t.name == name) {
                // Keep the earliest crossing of a repeated name.
                if eps < existing.epsilon {
                    existing.epsilon = eps;
                }
            } else {
                out.push(NamedTransition {
                    name,
                    epsilon: eps,
                    a,
                    b,
                    h,
                });
            }
        }
        if branch.terminated == Termination::EndPoint {
            let eps_end = branch
                .points
                .iter()
                .map(|p| p.epsilon)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(NamedTransition {
                name: "end".to_string(),
                epsilon: eps_end,
                a,
                b,
                h,
            });
        }
    }
    for name in required {
        if !out.iter().any(|t| t.name == *name) {
            return Err(Error::MissingTransition((*name).to_string()));
        }
    }
    Ok(out)
}

/// Bisect the transition epsilon between two bracketing branch points:
/// Newton from the bracket field at the midpoint epsilon, classify, pick
/// the side whose tagged class matches.
fn refine_transition(
    setup: &ProblemSetup,
    lo_pt: &BranchPoint,
    hi_pt: &BranchPoint,
    resolution: f64,
    policy: &StepPolicy,
) -> Result<f64> {
    let from = lo_pt.tagged();
    let mut lo = lo_pt.epsilon;
    let mut hi = hi_pt.epsilon;
    let mut lo_field = lo_pt.field.clone();
    let mut hi_field = hi_pt.field.clone();
    while (hi - lo).abs() > resolution {
        let mid = 0.5 * (lo + hi);
        let init = if (mid - lo).abs() < (mid - hi).abs() {
            &lo_field
        } else {
            &hi_field
        };
        let (q, rep) = newton_solve(init, &setup.params(mid), policy.newton_tol, 40)?;
        if !rep.converged {
            // Treat corrector death as the far side of the bracket.
            hi = mid;
            continue;
        }
        let p = setup.params(mid);
        let (lam, _) = smallest_eigenvalue_hinted(&q, &p, policy.eig_tol, 1e-5, None)?;
        let tagged = TaggedClass {
            label: classify(&q, &setup.classify_opts()).label,
            stable: lam > 0.0,
        };
        if tagged == from {
            lo = mid;
            lo_field = q;
        } else {
            hi = mid;
            hi_field = q;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Branch CSV: `eps,energy,lambda_min,class,m11,m12,int_q12_sq`.
pub fn write_branch_csv(branch: &Branch, w: &mut impl Write) -> Result<()> {
    writeln!(w, "eps,energy,lambda_min,class,m11,m12,int_q12_sq")?;
    for pt in &branch.points {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            pt.epsilon,
            pt.energy,
            pt.lambda_min,
            pt.tagged(),
            pt.m11,
            pt.m12,
            pt.int_q12_sq
        )?;
    }
    Ok(())
}
