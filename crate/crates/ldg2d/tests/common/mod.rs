//! Finite-difference reference solvers used as independent oracles for
//! the separated-series evaluators. Plain conjugate gradients on the
//! 5-point quadratic forms; nothing here touches the series code.
//!
//! Shared by several integration-test targets, so not every target uses
//! every solver.
#![allow(dead_code)]

/// Solve the Laplace equation on `[0,a] x [0,b]` with Dirichlet data
/// given by `bc(x, y)` on the boundary, `n_per_unit` intervals per unit
/// length. Returns (nx, ny, values at all nodes).
pub fn laplace_dirichlet(
    a: f64,
    b: f64,
    n_per_unit: usize,
    bc: impl Fn(f64, f64) -> f64,
) -> (usize, usize, Vec<f64>) {
    let nx = (a * n_per_unit as f64).round() as usize + 1;
    let ny = (b * n_per_unit as f64).round() as usize + 1;
    let hx = a / (nx - 1) as f64;
    let hy = b / (ny - 1) as f64;
    let idx = |i: usize, j: usize| j * nx + i;

    let mut u = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                u[idx(i, j)] = bc(i as f64 * hx, j as f64 * hy);
            }
        }
    }
    // CG on interior unknowns for -lap u = 0 with the boundary moved to
    // the right-hand side.
    let (mi, mj) = (nx - 2, ny - 2);
    let n = mi * mj;
    let dof = |i: usize, j: usize| (j - 1) * mi + (i - 1);
    let ax = 1.0 / (hx * hx);
    let ay = 1.0 / (hy * hy);
    let apply = |x: &[f64], y: &mut [f64]| {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let c = x[dof(i, j)];
                let l = if i > 1 { x[dof(i - 1, j)] } else { 0.0 };
                let r = if i < nx - 2 { x[dof(i + 1, j)] } else { 0.0 };
                let d = if j > 1 { x[dof(i, j - 1)] } else { 0.0 };
                let t = if j < ny - 2 { x[dof(i, j + 1)] } else { 0.0 };
                y[dof(i, j)] = 2.0 * (ax + ay) * c - ax * (l + r) - ay * (d + t);
            }
        }
    };
    let mut rhs = vec![0.0; n];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let mut s = 0.0;
            if i == 1 {
                s += ax * u[idx(0, j)];
            }
            if i == nx - 2 {
                s += ax * u[idx(nx - 1, j)];
            }
            if j == 1 {
                s += ay * u[idx(i, 0)];
            }
            if j == ny - 2 {
                s += ay * u[idx(i, ny - 1)];
            }
            rhs[dof(i, j)] = s;
        }
    }
    let x = cg(apply, &rhs, 1e-12, 40 * nx.max(ny));
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            u[idx(i, j)] = x[dof(i, j)];
        }
    }
    (nx, ny, u)
}

/// Solve `lap u = 0` with Robin conditions `tau u + du/dnu = tau g` where
/// `g = 1` on the top edge `y = b` and `g = 0` on the other three edges
/// (the weak-anchoring building-block problem), via CG on the quadratic
/// form with trapezoidal boundary quadrature.
pub fn laplace_robin_top(a: f64, b: f64, n_per_unit: usize, tau: f64) -> (usize, usize, Vec<f64>) {
    let nx = (a * n_per_unit as f64).round() as usize + 1;
    let ny = (b * n_per_unit as f64).round() as usize + 1;
    let hx = a / (nx - 1) as f64;
    let hy = b / (ny - 1) as f64;
    let idx = |i: usize, j: usize| j * nx + i;
    let n = nx * ny;

    // Boundary line weight of a node (trapezoid rule per edge).
    let line_w = |i: usize, j: usize| -> f64 {
        let mut w = 0.0;
        if j == 0 || j == ny - 1 {
            w += if i == 0 || i == nx - 1 { 0.5 } else { 1.0 } * hx;
        }
        if i == 0 || i == nx - 1 {
            w += if j == 0 || j == ny - 1 { 0.5 } else { 1.0 } * hy;
        }
        w
    };
    // Top-edge data weight (corners carry half from the membership rule).
    let g_w = |i: usize, j: usize| -> f64 {
        if j == ny - 1 {
            (if i == 0 || i == nx - 1 { 0.5 } else { 1.0 }) * hx
        } else {
            0.0
        }
    };

    let apply = move |x: &[f64], y: &mut [f64]| {
        y.fill(0.0);
        // Gradient of 1/2 sum w (du)^2 over edges.
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            let c = wy * hy / hx;
            for i in 0..nx - 1 {
                let k = idx(i, j);
                let d = c * (x[k + 1] - x[k]);
                y[k] -= d;
                y[k + 1] += d;
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let c = wx * hx / hy;
                let k = idx(i, j);
                let d = c * (x[k + nx] - x[k]);
                y[k] -= d;
                y[k + nx] += d;
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let w = line_w(i, j);
                if w > 0.0 {
                    let k = idx(i, j);
                    y[k] += tau * w * x[k];
                }
            }
        }
    };
    let mut rhs = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            rhs[idx(i, j)] = tau * g_w(i, j);
        }
    }
    let u = cg(apply, &rhs, 1e-12, 60 * nx.max(ny));
    (nx, ny, u)
}

/// Richardson-extrapolated Dirichlet solve: combines the `n_per_unit`
/// and `n_per_unit / 2` grids at the shared (coarse) nodes, cancelling
/// the O(h^2) truncation term of the 5-point scheme.
pub fn laplace_dirichlet_rich(
    a: f64,
    b: f64,
    n_per_unit: usize,
    bc: impl Fn(f64, f64) -> f64 + Copy,
) -> (usize, usize, Vec<f64>) {
    let (fx, _fy, uf) = laplace_dirichlet(a, b, n_per_unit, bc);
    let (cx, cy, uc) = laplace_dirichlet(a, b, n_per_unit / 2, bc);
    let mut out = vec![0.0; cx * cy];
    for j in 0..cy {
        for i in 0..cx {
            let fine = uf[(2 * j) * fx + 2 * i];
            out[j * cx + i] = fine + (fine - uc[j * cx + i]) / 3.0;
        }
    }
    (cx, cy, out)
}

/// Jacobi-free conjugate gradients for an SPD operator.
fn cg(apply: impl Fn(&[f64], &mut [f64]), rhs: &[f64], rel_tol: f64, max_iter: usize) -> Vec<f64> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let mut rr = dot(&r, &r);
    let rr0 = rr.max(1e-300);
    for _ in 0..max_iter {
        if rr <= rel_tol * rel_tol * rr0 {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    x
}

/// Deterministic interior sample points for oracle comparisons.
pub fn sample_nodes(nx: usize, ny: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let i = 2 + (next() as usize) % (nx - 4);
        let j = 2 + (next() as usize) % (ny - 4);
        if !out.contains(&(i, j)) {
            out.push((i, j));
        }
    }
    out
}
