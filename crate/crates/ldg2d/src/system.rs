//! Discrete machinery behind the public energy and solver operations:
//! unknown packing, gradient/Hessian assembly and banded layouts.
//!
//! The discrete energy is built from quadratic pieces (squared edge
//! differences, trapezoidal bulk quadrature, boundary anchoring lines) so
//! that its exact gradient is the 5-point Euler-Lagrange residual scaled
//! by the nodal quadrature weight. That consistency is what makes the
//! smallest-Hessian-eigenvalue stability test meaningful.

use crate::band::{BandMatrix, SymBandMatrix};
use crate::boundary::{dirichlet_trace, BoundarySpec, BoundaryTrace};
use crate::energy::EnergyParams;
use crate::grid::{Grid, QField};
use crate::{Error, Result};

/// Which nodes carry unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DofMode {
    /// Dirichlet: interior nodes only.
    Interior,
    /// Robin: every node.
    AllNodes,
}

/// Maps node/component pairs to packed unknown indices with the short
/// grid axis innermost, keeping the band width independent of the long
/// axis.
pub(crate) struct DofMap {
    pub mode: DofMode,
    i0: usize,
    j0: usize,
    ni: usize,
    nj: usize,
    fast_is_j: bool,
    fast: usize,
    pub n: usize,
    pub half_band: usize,
}

impl DofMap {
    pub fn new(grid: Grid, mode: DofMode) -> Self {
        let (i0, j0, ni, nj) = match mode {
            DofMode::Interior => (1, 1, grid.nx - 2, grid.ny - 2),
            DofMode::AllNodes => (0, 0, grid.nx, grid.ny),
        };
        let fast_is_j = nj <= ni;
        let fast = if fast_is_j { nj } else { ni };
        let slow = if fast_is_j { ni } else { nj };
        DofMap {
            mode,
            i0,
            j0,
            ni,
            nj,
            fast_is_j,
            fast,
            n: 2 * fast * slow,
            half_band: 2 * fast + 1,
        }
    }

    #[inline]
    pub fn holds(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i < self.i0 + self.ni && j >= self.j0 && j < self.j0 + self.nj
    }

    /// Packed index of component `c` at node `(i, j)`.
    #[inline]
    pub fn dof(&self, i: usize, j: usize, c: usize) -> usize {
        debug_assert!(self.holds(i, j) && c < 2);
        let (s, f) = if self.fast_is_j {
            (i - self.i0, j - self.j0)
        } else {
            (j - self.j0, i - self.i0)
        };
        (s * self.fast + f) * 2 + c
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i0, j0, ni, nj) = (self.i0, self.j0, self.ni, self.nj);
        (j0..j0 + nj).flat_map(move |j| (i0..i0 + ni).map(move |i| (i, j)))
    }
}

/// Sink abstraction so one assembly routine fills either the pivoted-LU
/// band layout or the symmetric band layout.
pub(crate) trait MatSink {
    fn add_sym(&mut self, i: usize, j: usize, v: f64);
}

impl MatSink for BandMatrix {
    #[inline]
    fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, v);
        if i != j {
            self.add(j, i, v);
        }
    }
}

impl MatSink for SymBandMatrix {
    #[inline]
    fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.add(hi, lo, v);
    }
}

/// One boundary-value problem instance: grid, parameters and the
/// precomputed boundary trace.
pub(crate) struct System {
    pub grid: Grid,
    pub params: EnergyParams,
    pub dof: DofMap,
    /// Dirichlet trace for the trapezoidal data, or the sharp (d -> 0)
    /// tangent data that the Robin anchoring penalises.
    pub trace: BoundaryTrace,
}

/// Sharp tangent data for weak anchoring: +1 on horizontal edges, -1 on
/// vertical edges, 0 at the four corners, second component zero.
fn sharp_trace(grid: &Grid) -> BoundaryTrace {
    let n = grid.n_nodes();
    let mut g1 = vec![0.0; n];
    let g2 = vec![0.0; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !grid.is_boundary(i, j) {
                continue;
            }
            let corner = (i == 0 || i == grid.nx - 1) && (j == 0 || j == grid.ny - 1);
            g1[grid.idx(i, j)] = if corner {
                0.0
            } else if j == 0 || j == grid.ny - 1 {
                1.0
            } else {
                -1.0
            };
        }
    }
    BoundaryTrace { g1, g2 }
}

impl System {
    pub fn new(grid: Grid, params: EnergyParams) -> Result<Self> {
        params.validate(&grid)?;
        let (mode, trace) = match params.bc {
            BoundarySpec::Dirichlet { d } => (DofMode::Interior, dirichlet_trace(&grid, d)?),
            BoundarySpec::Robin { .. } => (DofMode::AllNodes, sharp_trace(&grid)),
        };
        Ok(System {
            grid,
            params,
            dof: DofMap::new(grid, mode),
            trace,
        })
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.params.bc, BoundarySpec::Dirichlet { .. })
    }

    /// Max deviation of the field boundary from the Dirichlet trace.
    pub fn boundary_mismatch(&self, field: &QField) -> (f64, usize, usize) {
        let g = &self.grid;
        let mut worst = (0.0f64, 0usize, 0usize);
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !g.is_boundary(i, j) {
                    continue;
                }
                let k = g.idx(i, j);
                let dev = (field.q11[k] - self.trace.g1[k])
                    .abs()
                    .max((field.q12[k] - self.trace.g2[k]).abs());
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        worst
    }

    pub fn check_dirichlet(&self, field: &QField) -> Result<()> {
        if !self.is_dirichlet() {
            return Ok(());
        }
        let (dev, i, j) = self.boundary_mismatch(field);
        if dev > 1e-12 {
            return Err(Error::BoundaryMismatch { max_dev: dev, i, j });
        }
        Ok(())
    }

    /// Impose the Dirichlet trace on a field (no-op in Robin mode).
    pub fn impose_trace(&self, field: &mut QField) {
        if !self.is_dirichlet() {
            return;
        }
        let g = &self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if g.is_boundary(i, j) {
                    let k = g.idx(i, j);
                    field.q11[k] = self.trace.g1[k];
                    field.q12[k] = self.trace.g2[k];
                }
            }
        }
    }

    /// Raw trapezoidal quadrature of the free energy (no boundary
    /// validation).
    pub fn energy_quadrature(&self, field: &QField) -> f64 {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let eps2_inv = self.params.epsilon.powi(-2);
        let (q11, q12) = (&field.q11, &field.q12);

        let mut e = 0.0;
        // Bulk potential.
        for j in 0..ny {
            for i in 0..nx {
                let k = g.idx(i, j);
                let u = q11[k] * q11[k] + q12[k] * q12[k];
                e += g.quad_weight(i, j) * eps2_inv * (u - 1.0) * (u - 1.0);
            }
        }
        // Elastic terms, coefficient 2 per component (see module docs).
        let cx = 2.0 * g.hy / g.hx;
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            for i in 0..nx - 1 {
                let k = g.idx(i, j);
                let d11 = q11[k + 1] - q11[k];
                let d12 = q12[k + 1] - q12[k];
                e += cx * wy * (d11 * d11 + d12 * d12);
            }
        }
        let cy = 2.0 * g.hx / g.hy;
        for j in 0..ny - 1 {
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let k = g.idx(i, j);
                let d11 = q11[k + nx] - q11[k];
                let d12 = q12[k + nx] - q12[k];
                e += cy * wx * (d11 * d11 + d12 * d12);
            }
        }
        // Weak anchoring line integral.
        if let BoundarySpec::Robin { tau } = self.params.bc {
            for j in 0..ny {
                for i in 0..nx {
                    if !g.is_boundary(i, j) {
                        continue;
                    }
                    let k = g.idx(i, j);
                    let d1 = q11[k] - self.trace.g1[k];
                    let d2 = q12[k] - self.trace.g2[k];
                    e += 2.0 * tau * self.line_weight(i, j) * (d1 * d1 + d2 * d2);
                }
            }
        }
        e - 32.0 / 27.0 * eps2_inv * g.domain.area()
    }

    /// Trapezoidal line weight of a boundary node (sums over the edges the
    /// node lies on, so corners pick up both).
    #[inline]
    fn line_weight(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let mut w = 0.0;
        if j == 0 || j == g.ny - 1 {
            w += if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 } * g.hx;
        }
        if i == 0 || i == g.nx - 1 {
            w += if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 } * g.hy;
        }
        w
    }

    /// Gradient of the discrete energy accumulated into `(g1, g2)` over
    /// all nodes.
    pub fn grad_energy_into(&self, field: &QField, g1: &mut [f64], g2: &mut [f64]) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let eps2_inv = self.params.epsilon.powi(-2);
        let (q11, q12) = (&field.q11, &field.q12);
        g1.fill(0.0);
        g2.fill(0.0);

        for j in 0..ny {
            for i in 0..nx {
                let k = g.idx(i, j);
                let u = q11[k] * q11[k] + q12[k] * q12[k];
                let c = g.quad_weight(i, j) * eps2_inv * 4.0 * (u - 1.0);
                g1[k] += c * q11[k];
                g2[k] += c * q12[k];
            }
        }
        let cx = 2.0 * g.hy / g.hx;
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            let a = 2.0 * cx * wy;
            for i in 0..nx - 1 {
                let k = g.idx(i, j);
                let d11 = q11[k + 1] - q11[k];
                let d12 = q12[k + 1] - q12[k];
                g1[k] -= a * d11;
                g1[k + 1] += a * d11;
                g2[k] -= a * d12;
                g2[k + 1] += a * d12;
            }
        }
        let cy = 2.0 * g.hx / g.hy;
        for j in 0..ny - 1 {
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let a = 2.0 * cy * wx;
                let k = g.idx(i, j);
                let d11 = q11[k + nx] - q11[k];
                let d12 = q12[k + nx] - q12[k];
                g1[k] -= a * d11;
                g1[k + nx] += a * d11;
                g2[k] -= a * d12;
                g2[k + nx] += a * d12;
            }
        }
        if let BoundarySpec::Robin { tau } = self.params.bc {
            for j in 0..ny {
                for i in 0..nx {
                    if !g.is_boundary(i, j) {
                        continue;
                    }
                    let k = g.idx(i, j);
                    let w = 4.0 * tau * self.line_weight(i, j);
                    g1[k] += w * (q11[k] - self.trace.g1[k]);
                    g2[k] += w * (q12[k] - self.trace.g2[k]);
                }
            }
        }
    }

    /// Euler-Lagrange residual (negative energy gradient over the nodal
    /// quadrature weight). Boundary entries are zero in Dirichlet mode.
    pub fn residual_into(&self, field: &QField, out: &mut QField, scratch: &mut Vec<f64>) {
        let g = &self.grid;
        let n = g.n_nodes();
        if self.is_dirichlet() {
            // Fused interior stencil, used heavily by the gradient flow.
            let (nx, ny) = (g.nx, g.ny);
            let ax = 1.0 / (g.hx * g.hx);
            let ay = 1.0 / (g.hy * g.hy);
            let eps2_inv = self.params.epsilon.powi(-2);
            let (q11, q12) = (&field.q11, &field.q12);
            out.q11.fill(0.0);
            out.q12.fill(0.0);
            for j in 1..ny - 1 {
                let row = j * nx;
                for i in 1..nx - 1 {
                    let k = row + i;
                    let u = q11[k] * q11[k] + q12[k] * q12[k];
                    let c = eps2_inv * (u - 1.0);
                    out.q11[k] = ax * (q11[k - 1] + q11[k + 1] - 2.0 * q11[k])
                        + ay * (q11[k - nx] + q11[k + nx] - 2.0 * q11[k])
                        - c * q11[k];
                    out.q12[k] = ax * (q12[k - 1] + q12[k + 1] - 2.0 * q12[k])
                        + ay * (q12[k - nx] + q12[k + nx] - 2.0 * q12[k])
                        - c * q12[k];
                }
            }
        } else {
            scratch.resize(2 * n, 0.0);
            let (s1, s2) = scratch.split_at_mut(n);
            self.grad_energy_into(field, s1, s2);
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let k = g.idx(i, j);
                    let w = 4.0 * g.quad_weight(i, j);
                    out.q11[k] = -s1[k] / w;
                    out.q12[k] = -s2[k] / w;
                }
            }
        }
    }

    /// Directional derivative of the residual at `field` along `v`.
    pub fn hessian_apply(&self, field: &QField, v: &QField) -> QField {
        let g = &self.grid;
        let n = g.n_nodes();
        // Linear part: run the gradient loops on v with the anchoring
        // offset removed, then add the bulk linearisation correction.
        let lin = System {
            grid: self.grid,
            params: self.params,
            dof: DofMap::new(self.grid, self.dof.mode),
            trace: BoundaryTrace {
                g1: vec![0.0; n],
                g2: vec![0.0; n],
            },
        };
        let mut h1 = vec![0.0; n];
        let mut h2 = vec![0.0; n];
        // Elastic + anchor are linear in v. The bulk loop inside
        // grad_energy_into is the gradient of the quartic at v, so replace
        // it: subtract it and add the true linearisation at `field`.
        lin.grad_energy_into(v, &mut h1, &mut h2);
        let eps2_inv = self.params.epsilon.powi(-2);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                let w = g.quad_weight(i, j) * eps2_inv;
                let uv = v.q11[k] * v.q11[k] + v.q12[k] * v.q12[k];
                // Remove gradient-of-quartic evaluated at v.
                h1[k] -= w * 4.0 * (uv - 1.0) * v.q11[k];
                h2[k] -= w * 4.0 * (uv - 1.0) * v.q12[k];
                // Add second derivative at field applied to v.
                let u = field.q11[k] * field.q11[k] + field.q12[k] * field.q12[k];
                let qdotv = field.q11[k] * v.q11[k] + field.q12[k] * v.q12[k];
                h1[k] += w * (4.0 * (u - 1.0) * v.q11[k] + 8.0 * qdotv * field.q11[k]);
                h2[k] += w * (4.0 * (u - 1.0) * v.q12[k] + 8.0 * qdotv * field.q12[k]);
            }
        }
        let mut out = QField::zeros(*g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                if self.is_dirichlet() && g.is_boundary(i, j) {
                    continue;
                }
                let k = g.idx(i, j);
                let w = 4.0 * g.quad_weight(i, j);
                out.q11[k] = -h1[k] / w;
                out.q12[k] = -h2[k] / w;
            }
        }
        out
    }

    /// Max norm of the residual over unknown nodes.
    pub fn residual_norm(&self, field: &QField) -> f64 {
        let mut r = QField::zeros(self.grid);
        let mut scratch = Vec::new();
        self.residual_into(field, &mut r, &mut scratch);
        r.q11
            .iter()
            .chain(r.q12.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Pack the unknown components of a field.
    pub fn pack(&self, field: &QField) -> Vec<f64> {
        let mut v = vec![0.0; self.dof.n];
        for (i, j) in self.dof.nodes() {
            let k = self.grid.idx(i, j);
            v[self.dof.dof(i, j, 0)] = field.q11[k];
            v[self.dof.dof(i, j, 1)] = field.q12[k];
        }
        v
    }

    /// Scatter packed unknowns back into a field.
    pub fn unpack_into(&self, v: &[f64], field: &mut QField) {
        for (i, j) in self.dof.nodes() {
            let k = self.grid.idx(i, j);
            field.q11[k] = v[self.dof.dof(i, j, 0)];
            field.q12[k] = v[self.dof.dof(i, j, 1)];
        }
    }

    /// Negative energy gradient in packed form (Newton right-hand side).
    pub fn neg_grad_packed(&self, field: &QField, scratch: &mut Vec<f64>) -> Vec<f64> {
        let n = self.grid.n_nodes();
        scratch.resize(2 * n, 0.0);
        let (s1, s2) = scratch.split_at_mut(n);
        self.grad_energy_into(field, s1, s2);
        let mut rhs = vec![0.0; self.dof.n];
        for (i, j) in self.dof.nodes() {
            let k = self.grid.idx(i, j);
            rhs[self.dof.dof(i, j, 0)] = -s1[k];
            rhs[self.dof.dof(i, j, 1)] = -s2[k];
        }
        rhs
    }

    /// d(energy gradient)/d(epsilon) in packed form, for the bordered
    /// continuation system.
    pub fn grad_eps_derivative_packed(&self, field: &QField) -> Vec<f64> {
        let eps = self.params.epsilon;
        let c = -8.0 / (eps * eps * eps);
        let mut out = vec![0.0; self.dof.n];
        for (i, j) in self.dof.nodes() {
            let k = self.grid.idx(i, j);
            let w = self.grid.quad_weight(i, j);
            let u = field.q11[k] * field.q11[k] + field.q12[k] * field.q12[k];
            out[self.dof.dof(i, j, 0)] = c * w * (u - 1.0) * field.q11[k];
            out[self.dof.dof(i, j, 1)] = c * w * (u - 1.0) * field.q12[k];
        }
        out
    }

    /// Diagonal of the mass scaling `4 W` pairing the Hessian with the
    /// discrete L2 metric.
    pub fn mass_diag(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dof.n];
        for (i, j) in self.dof.nodes() {
            let w = 4.0 * self.grid.quad_weight(i, j);
            m[self.dof.dof(i, j, 0)] = w;
            m[self.dof.dof(i, j, 1)] = w;
        }
        m
    }

    /// Assemble the energy Hessian minus `shift` times the mass diagonal.
    pub fn assemble_shifted_hessian<S: MatSink>(&self, field: &QField, shift: f64, sink: &mut S) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let eps2_inv = self.params.epsilon.powi(-2);
        let dof = &self.dof;

        // Bulk second derivative blocks and shift.
        for (i, j) in dof.nodes() {
            let k = g.idx(i, j);
            let w = g.quad_weight(i, j);
            let (a, b) = (field.q11[k], field.q12[k]);
            let u = a * a + b * b;
            let d0 = dof.dof(i, j, 0);
            let d1 = dof.dof(i, j, 1);
            sink.add_sym(
                d0,
                d0,
                w * (eps2_inv * (4.0 * (u - 1.0) + 8.0 * a * a) - 4.0 * shift),
            );
            sink.add_sym(
                d1,
                d1,
                w * (eps2_inv * (4.0 * (u - 1.0) + 8.0 * b * b) - 4.0 * shift),
            );
            sink.add_sym(d1, d0, w * eps2_inv * 8.0 * a * b);
        }
        // Elastic couplings.
        let cx = 2.0 * g.hy / g.hx;
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            let a = 2.0 * cx * wy;
            for i in 0..nx - 1 {
                let l = dof.holds(i, j);
                let r = dof.holds(i + 1, j);
                for c in 0..2 {
                    if l {
                        sink.add_sym(dof.dof(i, j, c), dof.dof(i, j, c), a);
                    }
                    if r {
                        sink.add_sym(dof.dof(i + 1, j, c), dof.dof(i + 1, j, c), a);
                    }
                    if l && r {
                        sink.add_sym(dof.dof(i + 1, j, c), dof.dof(i, j, c), -a);
                    }
                }
            }
        }
        let cy = 2.0 * g.hx / g.hy;
        for j in 0..ny - 1 {
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let a = 2.0 * cy * wx;
                let lo = dof.holds(i, j);
                let hi = dof.holds(i, j + 1);
                for c in 0..2 {
                    if lo {
                        sink.add_sym(dof.dof(i, j, c), dof.dof(i, j, c), a);
                    }
                    if hi {
                        sink.add_sym(dof.dof(i, j + 1, c), dof.dof(i, j + 1, c), a);
                    }
                    if lo && hi {
                        sink.add_sym(dof.dof(i, j + 1, c), dof.dof(i, j, c), -a);
                    }
                }
            }
        }
        // Anchoring diagonal.
        if let BoundarySpec::Robin { tau } = self.params.bc {
            for j in 0..ny {
                for i in 0..nx {
                    if !g.is_boundary(i, j) {
                        continue;
                    }
                    let w = 4.0 * tau * self.line_weight(i, j);
                    for c in 0..2 {
                        let d = dof.dof(i, j, c);
                        sink.add_sym(d, d, w);
                    }
                }
            }
        }
    }

    pub fn new_band(&self) -> BandMatrix {
        BandMatrix::zeros(self.dof.n, self.dof.half_band, self.dof.half_band)
    }

    pub fn new_sym_band(&self) -> SymBandMatrix {
        SymBandMatrix::zeros(self.dof.n, self.dof.half_band)
    }

    /// Symmetric band matvec `y = K x` for the assembled Hessian.
    pub fn sym_matvec(kmat: &SymBandMatrix, x: &[f64], y: &mut [f64]) {
        let n = kmat.n;
        let kl = kmat.kl;
        y.fill(0.0);
        for j in 0..n {
            let diag = kmat.get(j, j);
            y[j] += diag * x[j];
            let i_end = (j + kl).min(n - 1);
            for i in (j + 1)..=i_end {
                let v = kmat.get(i, j);
                if v != 0.0 {
                    y[i] += v * x[j];
                    y[j] += v * x[i];
                }
            }
        }
    }
}
