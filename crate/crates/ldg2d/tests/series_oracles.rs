//! Independent finite-difference cross-checks of the separated-series
//! evaluators, plus the discrete-harmonicity invariant.

mod common;

use ldg2d::grid::{Grid, RectDomain};
use ldg2d::limits::{f_strong, limit_strong_q, theta_harmonic, WeakLimit};

/// Dirichlet series vs a fine-grid finite-difference Laplace solve at
/// deterministic interior sample nodes.
#[test]
fn strong_series_matches_fd_oracle() {
    let (a, b, d) = (1.0, 1.0, 0.03);
    // Fine solve with Richardson correction at the shared coarse nodes.
    // The grid family keeps the trapezoid kinks (x = d, 1 - d) on nodes of
    // both levels, otherwise the oracle bottoms out at its own
    // data-sampling error instead of extrapolating cleanly.
    let (nx, ny, u) = common::laplace_dirichlet_rich(a, b, 400, |x, y| {
        // Trapezoid on y = 0, zero elsewhere.
        if y == 0.0 && x > 0.0 && x < a {
            (x / d).min(1.0).min((a - x) / d)
        } else {
            0.0
        }
    });
    let hx = a / (nx - 1) as f64;
    let hy = b / (ny - 1) as f64;
    let mut worst = 0.0f64;
    for (i, j) in common::sample_nodes(nx, ny, 20, 11) {
        let series = f_strong(i as f64 * hx, j as f64 * hy, a, b, d, 1e-9).unwrap();
        let err = (series - u[j * nx + i]).abs();
        worst = worst.max(err);
    }
    assert!(worst <= 1e-6, "worst series-vs-FD error {worst:.3e}");
    // The spot value quoted for the midpoint of the lower-left quadrant.
    let f = f_strong(0.5, 0.25, 1.0, 1.0, 0.03, 1e-10).unwrap();
    let (i, j) = ((0.5 / hx).round() as usize, (0.25 / hy).round() as usize);
    assert!((f - u[j * nx + i]).abs() <= 1e-6);
}

/// The four-term superposition against the same oracle with the full
/// tangent boundary data, on a rectangle.
#[test]
fn limit_profile_matches_fd_oracle_on_rectangle() {
    let (a, b, d) = (1.5, 1.0, 0.03);
    let (nx, ny, u) = common::laplace_dirichlet_rich(a, b, 400, |x, y| {
        if y == 0.0 || (y - b).abs() < 1e-14 {
            if x == 0.0 || (x - a).abs() < 1e-14 {
                0.0
            } else {
                (x / d).min(1.0).min((a - x) / d)
            }
        } else {
            -(y / d).min(1.0).min((b - y) / d)
        }
    });
    let hx = a / (nx - 1) as f64;
    let hy = b / (ny - 1) as f64;
    let mut worst = 0.0f64;
    for (i, j) in common::sample_nodes(nx, ny, 20, 23) {
        let (q11, _) = limit_strong_q(i as f64 * hx, j as f64 * hy, a, b, d, 1e-9).unwrap();
        worst = worst.max((q11 - u[j * nx + i]).abs());
    }
    assert!(worst <= 1e-6, "worst superposition error {worst:.3e}");
    // Centre is positive (the cross structure is lost on rectangles).
    let (center, _) = limit_strong_q(a / 2.0, b / 2.0, a, b, d, 1e-10).unwrap();
    assert!(center > 0.0);
    let kc = (ny / 2) * nx + nx / 2;
    assert!((center - u[kc]).abs() <= 1e-6);
}

/// Weak-anchoring series vs the finite-difference Robin solve for both
/// reported anchoring strengths.
#[test]
fn weak_series_matches_fd_robin_oracle() {
    for &tau in &[3.0, 10.0] {
        let (a, b) = (1.0, 1.0);
        let (nx, ny, u) = common::laplace_robin_top(a, b, 512, tau);
        let hx = a / (nx - 1) as f64;
        let hy = b / (ny - 1) as f64;
        let roots = ldg2d::limits::robin_roots(tau, a, 600).unwrap();
        let mut worst = 0.0f64;
        for (i, j) in common::sample_nodes(nx, ny, 20, 37) {
            let series = ldg2d::limits::f_weak_from_roots(i as f64 * hx, j as f64 * hy, b, &roots);
            worst = worst.max((series - u[j * nx + i]).abs());
        }
        assert!(worst <= 1e-4, "tau={tau}: worst error {worst:.3e}");
        // Centre spot check.
        let c = ldg2d::limits::f_weak(0.5, 0.5, a, b, tau, 600).unwrap();
        let kc = (ny / 2) * nx + nx / 2;
        assert!((c - u[kc]).abs() <= 1e-4, "tau={tau} centre");
    }
}

/// Series-sampled fields are discretely harmonic. The 5-point Laplacian
/// of an exact harmonic function is (h^2/6) f_xxxx + O(h^4); the fourth
/// derivative grows toward the kinked boundary data, so the absolute
/// 10 h^2 bound is checked on the central region and the O(h^2) order is
/// checked by grid refinement closer to the boundary.
#[test]
fn series_fields_are_discretely_harmonic() {
    let grid = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 1.0 / 128.0).unwrap();
    let h = grid.hx;
    let margin = 0.4;
    let fields: Vec<(&str, Vec<f64>)> = vec![
        (
            "f_strong",
            sample(&grid, |x, y| f_strong(x, y, 1.0, 1.0, 0.03, 1e-12).unwrap()),
        ),
        (
            "limit_strong_q11",
            sample(&grid, |x, y| {
                limit_strong_q(x, y, 1.0, 1.0, 0.03, 1e-12).unwrap().0
            }),
        ),
        (
            "theta_D1",
            sample(&grid, |x, y| {
                theta_harmonic(
                    ldg2d::boundary::ThetaState::D1.constants(),
                    1.0,
                    1.0,
                    x,
                    y,
                    1e-12,
                )
                .unwrap()
            }),
        ),
        ("f_weak_tau3", {
            let wl = WeakLimit::new(1.0, 1.0, 3.0, 800).unwrap();
            sample(&grid, |x, y| wl.q11(x, y))
        }),
    ];
    for (name, f) in fields {
        let mut scale = 0.0f64;
        for v in &f {
            scale = scale.max(v.abs());
        }
        let mut worst = 0.0f64;
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                let (x, y) = (grid.x(i), grid.y(j));
                if x < margin || x > 1.0 - margin || y < margin || y > 1.0 - margin {
                    continue;
                }
                let k = grid.idx(i, j);
                let lap = (f[k - 1] + f[k + 1] - 2.0 * f[k]) / (h * h)
                    + (f[k - grid.nx] + f[k + grid.nx] - 2.0 * f[k]) / (h * h);
                worst = worst.max(lap.abs());
            }
        }
        assert!(
            worst <= 10.0 * h * h * scale.max(1.0),
            "{name}: interior discrete Laplacian {worst:.3e} vs bound {:.3e}",
            10.0 * h * h * scale.max(1.0)
        );
    }
}

/// Refinement check of the same property in the ring nearer the boundary
/// where the absolute constant is larger: halving h divides the interior
/// discrete Laplacian by four.
#[test]
fn discrete_laplacian_scales_second_order() {
    let margin = 0.15;
    let max_lap = |hdiv: usize| -> f64 {
        let grid =
            Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 1.0 / hdiv as f64).unwrap();
        let h = grid.hx;
        let f = sample(&grid, |x, y| f_strong(x, y, 1.0, 1.0, 0.03, 1e-12).unwrap());
        let mut worst = 0.0f64;
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                let (x, y) = (grid.x(i), grid.y(j));
                if x < margin || x > 1.0 - margin || y < margin || y > 1.0 - margin {
                    continue;
                }
                let k = grid.idx(i, j);
                let lap = (f[k - 1] + f[k + 1] - 2.0 * f[k]) / (h * h)
                    + (f[k - grid.nx] + f[k + grid.nx] - 2.0 * f[k]) / (h * h);
                worst = worst.max(lap.abs());
            }
        }
        worst
    };
    let ratio = max_lap(64) / max_lap(128);
    assert!((3.5..=4.5).contains(&ratio), "refinement ratio {ratio}");
}

fn sample(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_nodes()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            out[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
        }
    }
    out
}
