//! Tangent boundary data: the trapezoidal Dirichlet trace and weak
//! (Robin) anchoring parameters.

use crate::grid::Grid;
use crate::{Error, Result};

/// Anchoring mode on the rectangle edges.
///
/// Dirichlet pins `(Q11, Q12)` to the trapezoidal trace with corner
/// mismatch half-width `d`; Robin penalises the deviation with reduced
/// strength `tau` and leaves the boundary free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    Dirichlet { d: f64 },
    Robin { tau: f64 },
}

impl BoundarySpec {
    /// Validate against a domain. `strict` applies the tighter
    /// `d < min(a/4, b/4)` bound used by the limit-profile statements;
    /// the general bound is `d < min(a/2, b/2)`.
    pub fn validate(&self, a: f64, b: f64, strict: bool) -> Result<()> {
        match *self {
            BoundarySpec::Dirichlet { d } => {
                let cap = if strict {
                    a.min(b) / 4.0
                } else {
                    a.min(b) / 2.0
                };
                if !(d > 0.0 && d < cap) {
                    return Err(Error::InvalidBoundary(format!(
                        "mismatch width d={d} outside (0, {cap}) for domain {a} x {b}"
                    )));
                }
            }
            BoundarySpec::Robin { tau } => {
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::InvalidBoundary(format!(
                        "anchoring strength tau={tau} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Trapezoidal ramp `T_d(t) = min(t/d, 1, (1-t)/d)` on `[0, 1]`.
pub fn trapezoid(t: f64, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidBoundary(format!("t={t} outside [0, 1]")));
    }
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::InvalidBoundary(format!(
            "ramp width d={d} outside (0, 1/2)"
        )));
    }
    Ok((t / d).min(1.0).min((1.0 - t) / d))
}

/// Boundary trace arrays over all grid nodes; interior entries are zero
/// and never read.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

/// The tangent Dirichlet data: `(+T_{d/a}(x/a), 0)` on the horizontal
/// edges, `(-T_{d/b}(y/b), 0)` on the vertical edges; corners vanish
/// consistently from either formula.
pub fn dirichlet_trace(grid: &Grid, d: f64) -> Result<BoundaryTrace> {
    let (a, b) = (grid.domain.a(), grid.domain.b());
    BoundarySpec::Dirichlet { d }.validate(a, b, false)?;
    let n = grid.n_nodes();
    let mut g1 = vec![0.0; n];
    let g2 = vec![0.0; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !grid.is_boundary(i, j) {
                continue;
            }
            let k = grid.idx(i, j);
            g1[k] = if j == 0 || j == grid.ny - 1 {
                trapezoid(grid.x(i) / a, d / a)?
            } else {
                -trapezoid(grid.y(j) / b, d / b)?
            };
        }
    }
    Ok(BoundaryTrace { g1, g2 })
}

/// Constant director-angle boundary data per edge: `d1` on `y=0`, `d2` on
/// `x=a`, `d3` on `y=b`, `d4` on `x=0`. Corner nodes take the average of
/// the two adjacent edges.
pub fn theta_trace(grid: &Grid, d1: f64, d2: f64, d3: f64, d4: f64) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = vec![0.0; grid.n_nodes()];
    for j in 0..ny {
        for i in 0..nx {
            if !grid.is_boundary(i, j) {
                continue;
            }
            let bottom = j == 0;
            let top = j == ny - 1;
            let left = i == 0;
            let right = i == nx - 1;
            out[grid.idx(i, j)] = match (bottom, right, top, left) {
                (true, true, _, _) => 0.5 * (d1 + d2),
                (true, _, _, true) => 0.5 * (d1 + d4),
                (_, true, true, _) => 0.5 * (d2 + d3),
                (_, _, true, true) => 0.5 * (d3 + d4),
                (true, _, _, _) => d1,
                (_, true, _, _) => d2,
                (_, _, true, _) => d3,
                (_, _, _, true) => d4,
                _ => unreachable!(),
            };
        }
    }
    out
}

/// Overwrite the boundary nodes of a field with the trapezoidal Dirichlet
/// trace.
pub fn impose_dirichlet_trace(field: &mut crate::grid::QField, d: f64) -> Result<()> {
    let grid = field.grid;
    let tr = dirichlet_trace(&grid, d)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_boundary(i, j) {
                let k = grid.idx(i, j);
                field.q11[k] = tr.g1[k];
                field.q12[k] = tr.g2[k];
            }
        }
    }
    Ok(())
}

/// Edge constants of the six reference director states.
///
/// Horizontal edges carry multiples of pi, vertical edges odd multiples
/// of pi/2; the corner defects are the minimal +-1/4 turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaState {
    D1,
    D2,
    R1,
    R2,
    R3,
    R4,
}

impl ThetaState {
    pub fn constants(self) -> [f64; 4] {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            ThetaState::D1 => [0.0, FRAC_PI_2, 0.0, FRAC_PI_2],
            ThetaState::D2 => [0.0, -FRAC_PI_2, 0.0, -FRAC_PI_2],
            ThetaState::R1 => [0.0, -FRAC_PI_2, -PI, -FRAC_PI_2],
            ThetaState::R2 => [0.0, FRAC_PI_2, PI, FRAC_PI_2],
            ThetaState::R3 => [0.0, -FRAC_PI_2, 0.0, FRAC_PI_2],
            ThetaState::R4 => [0.0, FRAC_PI_2, 0.0, -FRAC_PI_2],
        }
    }

    pub fn all() -> [ThetaState; 6] {
        [
            ThetaState::D1,
            ThetaState::D2,
            ThetaState::R1,
            ThetaState::R2,
            ThetaState::R3,
            ThetaState::R4,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            ThetaState::D1 => "D1",
            ThetaState::D2 => "D2",
            ThetaState::R1 => "R1",
            ThetaState::R2 => "R2",
            ThetaState::R3 => "R3",
            ThetaState::R4 => "R4",
        }
    }
}

/// Edge constants of the non-trivial-topology seed: a 5/4-degree defect
/// at the origin, -3/4 at the opposite corner, -1/4 at the other two.
pub fn nontrivial_constants() -> [f64; 4] {
    use std::f64::consts::{FRAC_PI_2, PI};
    [0.0, FRAC_PI_2, 2.0 * PI, 2.0 * PI + FRAC_PI_2]
}
