//! Reduced two-dimensional Landau-de Gennes model on rectangles.
//!
//! The crate computes nematic equilibria of the rescaled Ginzburg-Landau
//! energy for the two-component Q-tensor `(Q11, Q12)` on `[0,a] x [0,b]`
//! with tangent boundary conditions, and provides the surrounding study
//! machinery:
//!
//! * finite-difference energy, Euler-Lagrange residual and Hessian
//!   ([`energy`]),
//! * damped Newton solves, explicit gradient-flow relaxation and a
//!   smallest-eigenvalue stability test ([`solve`]),
//! * closed-form limit profiles for both asymptotic regimes: the
//!   large-epsilon Laplace limit (strong and weak anchoring) and the
//!   small-epsilon harmonic director angle ([`limits`]),
//! * pseudo-arclength continuation of solution branches in epsilon with
//!   stability tagging and transition extraction ([`continuation`]),
//! * solution classification (diagonal, rotated, boundary-distortion,
//!   cross states) and defect detection ([`classify`]).
//!
//! Each major capability has a runnable example under `examples/`; the
//! `ldg2d` binary exposes the same operations as subcommands with
//! reproducible run manifests.

pub mod band;
pub mod boundary;
pub mod classify;
pub mod config;
pub mod continuation;
pub mod energy;
pub mod error;
pub mod grid;
pub mod limits;
pub mod solve;
pub(crate) mod system;

pub use boundary::BoundarySpec;
pub use classify::{ClassLabel, DefectSet, SolutionClass, VertexDegrees};
pub use continuation::{Branch, BranchPoint, FoldPolicy, StepPolicy, Termination};
pub use energy::EnergyParams;
pub use error::Error;
pub use grid::{Grid, QField, RectDomain, ThetaField};
pub use solve::{RelaxationTrajectory, SolverReport};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
