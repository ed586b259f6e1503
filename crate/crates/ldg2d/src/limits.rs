//! Closed-form limit profiles: the large-epsilon Laplace limits under
//! strong (Dirichlet) and weak (Robin) anchoring, and the small-epsilon
//! harmonic director-angle solutions.
//!
//! All series are evaluated in exponentially stable form (no bare `sinh`
//! ratios) with running tail bounds. Near an inhomogeneous edge, where the
//! direct expansion decays slowly, the evaluator switches to the
//! complementary representation obtained from the identity
//! `f(x,y;a,b) + f(x,b-y;a,b) + f(y,x;b,a) + f(y,a-x;b,a) = 1`
//! satisfied by the sharp-data harmonic building block.

use crate::{Error, Result};

const KMAX: usize = 200_000;

/// Truncation report for a series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTruncation {
    pub kmax: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    f: f64,
    fx: f64,
    fy: f64,
    terms: usize,
    tail: f64,
}

/// Direct separated series for the harmonic function with trapezoidal
/// data `T_{d/a}(x/a)` on `y = 0` (sharp data for `d = 0`) and zero on the
/// other three edges. Interior points only; decay scale is `y/a`.
fn direct_series(x: f64, y: f64, a: f64, b: f64, d: f64, tol: f64, grad: bool) -> Result<Eval> {
    debug_assert!(x > 0.0 && x < a && y > 0.0 && y < b);
    let pi = std::f64::consts::PI;
    let wx = pi * x / a;
    let wy = pi * y / a;
    let wby = pi * (b - y) / a;
    let wb = pi * b / a;

    // Incremental factors for k -> k + 2.
    let r1 = (-2.0 * wy).exp();
    let r2 = (-4.0 * wby).exp();
    let r3 = (-4.0 * wb).exp();
    let (s2, c2) = (2.0 * wx).sin_cos();

    // k = 1 values.
    let mut e1 = (-wy).exp();
    let mut e2 = (-2.0 * wby).exp();
    let mut e3 = (-2.0 * wb).exp();
    let (mut sk, mut ck) = wx.sin_cos();

    let cb = 1.0 / (1.0 - (-2.0 * wb).exp());
    let geo = 1.0 / (1.0 - r1); // sum of e^{-k pi y/a} over odd k steps

    let mut out = Eval {
        f: 0.0,
        fx: 0.0,
        fy: 0.0,
        terms: 0,
        tail: f64::INFINITY,
    };
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let coeff = if d == 0.0 {
            4.0 / (kf * pi)
        } else {
            let z = kf * pi * d / a;
            4.0 * z.sin() / (kf * kf * pi * pi * d / a)
        };
        let denom = 1.0 / (1.0 - e3);
        let rk = e1 * (1.0 - e2) * denom;
        out.f += coeff * sk * rk;
        if grad {
            let w = kf * pi / a;
            out.fx += coeff * w * ck * rk;
            out.fy -= coeff * sk * w * e1 * (1.0 + e2) * denom;
        }
        out.terms = k;

        // Tail bound for the next odd index onward.
        let kn = kf + 2.0;
        let e1n = e1 * r1;
        let cmax = (4.0 / (kn * pi)).min(if d > 0.0 {
            4.0 * a / (kn * kn * pi * pi * d)
        } else {
            f64::INFINITY
        });
        let tail_f = cb * cmax * e1n * geo;
        let tail_g = if grad {
            2.0 * cb * (4.0 / a) * e1n * geo
        } else {
            0.0
        };
        out.tail = tail_f.max(tail_g);
        if out.tail <= tol {
            return Ok(out);
        }
        if k + 2 > KMAX {
            return Err(Error::ToleranceUnreachable {
                tol,
                kmax: KMAX,
                tail: out.tail,
            });
        }

        // Advance k by 2.
        e1 *= r1;
        e2 *= r2;
        e3 *= r3;
        let sn = sk * c2 + ck * s2;
        let cn = ck * c2 - sk * s2;
        sk = sn;
        ck = cn;
        k += 2;
        if k % 512 == 1 {
            // Resynchronise the incremental rotation.
            let (s, c) = (kf + 2.0).mul_add(wx, 0.0).sin_cos();
            sk = s;
            ck = c;
        }
    }
}

/// Evaluate the sharp-data (`d -> 0`) building block with its gradient,
/// selecting the best-converging representation.
fn sharp_f_grad(x: f64, y: f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64, f64)> {
    debug_assert!(x > 0.0 && x < a && y > 0.0 && y < b);
    let s_direct = y / a;
    let s_ident = (b - y) / a;
    let s_ident = s_ident.min(x / b).min((a - x) / b);
    if s_direct >= s_ident {
        let e = direct_series(x, y, a, b, 0.0, tol, true)?;
        Ok((e.f, e.fx, e.fy))
    } else {
        let ea = direct_series(x, b - y, a, b, 0.0, tol / 3.0, true)?;
        let eb = direct_series(y, x, b, a, 0.0, tol / 3.0, true)?;
        let ec = direct_series(y, a - x, b, a, 0.0, tol / 3.0, true)?;
        Ok((
            1.0 - ea.f - eb.f - ec.f,
            -ea.fx + (-eb.fy) + ec.fy,
            ea.fy + (-eb.fx) + (-ec.fx),
        ))
    }
}

fn near(v: f64, target: f64, scale: f64) -> bool {
    (v - target).abs() <= 1e-13 * (1.0 + scale.abs())
}

/// Harmonic function on `[0,a] x [0,b]` with trapezoidal data on `y = 0`
/// and zero on the other edges; `d = 0` selects the sharp-data limit.
pub fn f_strong_with_info(
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    d: f64,
    tol: f64,
) -> Result<(f64, SeriesTruncation)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidDomain(format!("a={a}, b={b}")));
    }
    if d < 0.0 || (d > 0.0 && d >= a / 2.0) {
        return Err(Error::InvalidBoundary(format!(
            "ramp width d={d} outside [0, a/2) for a={a}"
        )));
    }
    if x < -1e-12 || x > a + 1e-12 || y < -1e-12 || y > b + 1e-12 {
        return Err(Error::InvalidDomain(format!(
            "point ({x}, {y}) outside [0,{a}] x [0,{b}]"
        )));
    }
    let exact = |v: f64| {
        (
            v,
            SeriesTruncation {
                kmax: 0,
                tail_bound: 0.0,
            },
        )
    };
    if near(y, b, b) || near(x, 0.0, a) || near(x, a, a) {
        // Homogeneous edges (corners of y=0 included: the trace vanishes
        // there from either side).
        return Ok(exact(0.0));
    }
    if near(y, 0.0, b) {
        let t = x / a;
        let v = if d == 0.0 {
            1.0
        } else {
            (t / (d / a)).min(1.0).min((1.0 - t) / (d / a))
        };
        return Ok(exact(v));
    }
    if d == 0.0 {
        let s_direct = y / a;
        let s_ident = ((b - y) / a).min(x / b).min((a - x) / b);
        if s_direct < s_ident {
            let ea = direct_series(x, b - y, a, b, 0.0, tol / 3.0, false)?;
            let eb = direct_series(y, x, b, a, 0.0, tol / 3.0, false)?;
            let ec = direct_series(y, a - x, b, a, 0.0, tol / 3.0, false)?;
            let terms = ea.terms.max(eb.terms).max(ec.terms);
            return Ok((
                1.0 - ea.f - eb.f - ec.f,
                SeriesTruncation {
                    kmax: terms,
                    tail_bound: ea.tail + eb.tail + ec.tail,
                },
            ));
        }
    }
    let e = direct_series(x, y, a, b, d, tol, false)?;
    Ok((
        e.f,
        SeriesTruncation {
            kmax: e.terms,
            tail_bound: e.tail,
        },
    ))
}

pub fn f_strong(x: f64, y: f64, a: f64, b: f64, d: f64, tol: f64) -> Result<f64> {
    f_strong_with_info(x, y, a, b, d, tol).map(|(v, _)| v)
}

/// Large-epsilon strong-anchoring limit profile: `Q12 = 0` identically and
/// `Q11` is the four-term superposition of [`f_strong`] evaluations.
pub fn limit_strong_q(x: f64, y: f64, a: f64, b: f64, d: f64, tol: f64) -> Result<(f64, f64)> {
    let t = tol / 4.0;
    let q11 = f_strong(x, y, a, b, d, t)? - f_strong(y, a - x, b, a, d, t)?
        + f_strong(x, b - y, a, b, d, t)?
        - f_strong(y, x, b, a, d, t)?;
    Ok((q11, 0.0))
}

/// Positive roots of `tan(p a) = 2 tau p / (p^2 - tau^2)`.
///
/// Root `k` (zero-based) is the unique solution of
/// `p a - 2 atan(tau / p) = k pi` in `(k pi / a, (k+1) pi / a)`.
#[derive(Debug, Clone)]
pub struct RobinRoots {
    pub tau: f64,
    pub a: f64,
    pub roots: Vec<f64>,
}

pub fn robin_roots(tau: f64, a: f64, n_roots: usize) -> Result<RobinRoots> {
    if !(tau > 0.0 && a > 0.0) {
        return Err(Error::InvalidBoundary(format!(
            "tau={tau}, a={a} must be positive"
        )));
    }
    let pi = std::f64::consts::PI;
    let g = |p: f64, k: f64| p * a - 2.0 * (tau / p).atan() - k * pi;
    let mut roots = Vec::with_capacity(n_roots);
    for k in 0..n_roots {
        let kf = k as f64;
        let mut lo = kf * pi / a;
        let mut hi = (kf + 1.0) * pi / a;
        if k == 0 {
            lo = 1e-300;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if g(mid, kf) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut p = 0.5 * (lo + hi);
        for _ in 0..4 {
            let gp = a + 2.0 * tau / (p * p + tau * tau);
            p -= g(p, kf) / gp;
        }
        roots.push(p);
    }
    Ok(RobinRoots { tau, a, roots })
}

impl RobinRoots {
    /// Residual of root `k` in the stable rearranged form
    /// `p a - k pi - 2 atan(tau / p)`.
    pub fn stable_residual(&self, k: usize) -> f64 {
        let pi = std::f64::consts::PI;
        self.roots[k] * self.a - k as f64 * pi - 2.0 * (self.tau / self.roots[k]).atan()
    }
}

/// Weak-anchoring harmonic building block: `lap f = 0` with
/// `tau f - f_y = 0` on `y=0`, `tau f + f_y = tau` on `y=b`,
/// `tau f - f_x = 0` on `x=0`, `tau f + f_x = 0` on `x=a`.
pub fn f_weak_from_roots(x: f64, y: f64, b: f64, roots: &RobinRoots) -> f64 {
    let (tau, a) = (roots.tau, roots.a);
    let mut f = 0.0;
    for (k, &p) in roots.roots.iter().enumerate() {
        let ek = 2.0 / (p * p * a + tau * tau * a + 2.0 * tau);
        let xk = p * (p * x).cos() + tau * (p * x).sin();
        // Coefficient with the removable resonance at p = tau handled via
        // cos(p a) (p^2 + tau^2) = (-1)^k (p^2 - tau^2) at the roots.
        let ck = if (p * p - tau * tau).abs() <= 1e-6 * (p * p + tau * tau) {
            (if k % 2 == 0 { 2.0 } else { 0.0 }) / p
        } else {
            ((p * a).cos() * (p * p + tau * tau) + (p * p - tau * tau)) / (p * (p * p - tau * tau))
        };
        // Stable form of (p cosh(p y) + tau sinh(p y)) /
        // ((p^2+tau^2) sinh(p b) + 2 tau p cosh(p b)).
        let em = (-p * (b - y)).exp();
        let e2y = (-2.0 * p * y).exp();
        let e2b = (-2.0 * p * b).exp();
        let yk = em * (p * (1.0 + e2y) + tau * (1.0 - e2y))
            / ((p * p + tau * tau) * (1.0 - e2b) + 2.0 * tau * p * (1.0 + e2b));
        f += ek * xk * tau * ck * tau * yk;
    }
    f
}

pub fn f_weak(x: f64, y: f64, a: f64, b: f64, tau: f64, n_roots: usize) -> Result<f64> {
    let roots = robin_roots(tau, a, n_roots)?;
    Ok(f_weak_from_roots(x, y, b, &roots))
}

/// Weak-anchoring limit profile on `[0,a] x [0,b]`; precomputes the root
/// sets for both edge lengths.
pub struct WeakLimit {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    roots_a: RobinRoots,
    roots_b: RobinRoots,
}

impl WeakLimit {
    pub fn new(a: f64, b: f64, tau: f64, n_roots: usize) -> Result<Self> {
        Ok(Self {
            a,
            b,
            tau,
            roots_a: robin_roots(tau, a, n_roots)?,
            roots_b: robin_roots(tau, b, n_roots)?,
        })
    }

    /// `Q11` of the weak-anchoring limit; `Q12` vanishes identically.
    pub fn q11(&self, x: f64, y: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        f_weak_from_roots(x, b - y, b, &self.roots_a) - f_weak_from_roots(y, x, a, &self.roots_b)
            + f_weak_from_roots(x, y, b, &self.roots_a)
            - f_weak_from_roots(y, a - x, a, &self.roots_b)
    }
}

pub fn limit_weak_q11(x: f64, y: f64, a: f64, b: f64, tau: f64, n_roots: usize) -> Result<f64> {
    Ok(WeakLimit::new(a, b, tau, n_roots)?.q11(x, y))
}

/// Harmonic director angle with constant edge data `d1` (y=0), `d2` (x=a),
/// `d3` (y=b), `d4` (x=0); sharp-corner (`d -> 0`) superposition.
pub fn theta_harmonic(consts: [f64; 4], a: f64, b: f64, x: f64, y: f64, tol: f64) -> Result<f64> {
    let [d1, d2, d3, d4] = consts;
    // Edge and corner values match the discrete trace convention.
    let on_b = near(y, 0.0, b);
    let on_t = near(y, b, b);
    let on_l = near(x, 0.0, a);
    let on_r = near(x, a, a);
    match (on_b, on_r, on_t, on_l) {
        (true, true, _, _) => return Ok(0.5 * (d1 + d2)),
        (true, _, _, true) => return Ok(0.5 * (d1 + d4)),
        (_, true, true, _) => return Ok(0.5 * (d2 + d3)),
        (_, _, true, true) => return Ok(0.5 * (d3 + d4)),
        (true, _, _, _) => return Ok(d1),
        (_, true, _, _) => return Ok(d2),
        (_, _, true, _) => return Ok(d3),
        (_, _, _, true) => return Ok(d4),
        _ => {}
    }
    let scale = d1.abs() + d2.abs() + d3.abs() + d4.abs() + 1e-300;
    let t = tol / scale;
    Ok(d1 * f_strong(x, y, a, b, 0.0, t)?
        + d2 * f_strong(y, a - x, b, a, 0.0, t)?
        + d3 * f_strong(x, b - y, a, b, 0.0, t)?
        + d4 * f_strong(y, x, b, a, 0.0, t)?)
}

/// Gradient of [`theta_harmonic`] at an interior point.
pub fn theta_harmonic_grad(
    consts: [f64; 4],
    a: f64,
    b: f64,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let [d1, d2, d3, d4] = consts;
    let scale = d1.abs() + d2.abs() + d3.abs() + d4.abs() + 1e-300;
    let t = tol / scale;
    let mut gx = 0.0;
    let mut gy = 0.0;
    if d1 != 0.0 {
        let (_, fx, fy) = sharp_f_grad(x, y, a, b, t)?;
        gx += d1 * fx;
        gy += d1 * fy;
    }
    if d2 != 0.0 {
        let (_, fx, fy) = sharp_f_grad(y, a - x, b, a, t)?;
        gx -= d2 * fy;
        gy += d2 * fx;
    }
    if d3 != 0.0 {
        let (_, fx, fy) = sharp_f_grad(x, b - y, a, b, t)?;
        gx += d3 * fx;
        gy -= d3 * fy;
    }
    if d4 != 0.0 {
        let (_, fx, fy) = sharp_f_grad(y, x, b, a, t)?;
        gx += d4 * fy;
        gy += d4 * fx;
    }
    Ok((gx, gy))
}

/// One cutoff level of the regularised Dirichlet-energy comparison.
#[derive(Debug, Clone, Copy)]
pub struct RhoEnergies {
    pub rho: f64,
    pub e_d1: f64,
    pub e_r3: f64,
}

/// Quadrant Dirichlet energy `int |grad theta|^2 / 4` of the harmonic
/// angle with the given edge constants, excluding disks of radius `rho`
/// around the four rectangle corners (midpoint quadrature on a mesh graded
/// toward the corners).
pub fn theta_quadrant_energy(consts: [f64; 4], a: f64, b: f64, rho: f64, tol: f64) -> Result<f64> {
    let cells = energy_cells(consts, a, b, rho.min(1e-3), tol)?;
    Ok(cells
        .iter()
        .filter(|c| c.corner_dist >= rho)
        .map(|c| c.value)
        .sum::<f64>()
        / 4.0)
}

struct EnergyCell {
    corner_dist: f64,
    value: f64,
}

/// 1D node set graded geometrically toward 0 and `len`.
fn graded_axis(len: f64, rho_min: f64, n_coarse: usize) -> Vec<f64> {
    let mut pts = Vec::new();
    for i in 0..=n_coarse {
        pts.push(len * i as f64 / n_coarse as f64);
    }
    let mut s = len / n_coarse as f64 / 2.0;
    while s > rho_min / 4.0 {
        pts.push(s);
        pts.push(len - s);
        s /= 2.0;
    }
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    pts.dedup_by(|p, q| (*p - *q).abs() < 1e-15 * len);
    pts
}

fn energy_cells(
    consts: [f64; 4],
    a: f64,
    b: f64,
    rho_min: f64,
    tol: f64,
) -> Result<Vec<EnergyCell>> {
    let xs = graded_axis(a, rho_min, 96);
    let ys = graded_axis(b, rho_min, ((96.0 * b / a).round() as usize).max(32));
    let corners = [(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)];
    let mut cells = Vec::with_capacity((xs.len() - 1) * (ys.len() - 1));
    for jw in ys.windows(2) {
        for iw in xs.windows(2) {
            let (x0, x1, y0, y1) = (iw[0], iw[1], jw[0], jw[1]);
            let (xc, yc) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let dist = corners
                .iter()
                .map(|&(cx, cy)| ((xc - cx).powi(2) + (yc - cy).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            let (gx, gy) = theta_harmonic_grad(consts, a, b, xc, yc, tol)?;
            cells.push(EnergyCell {
                corner_dist: dist,
                value: (gx * gx + gy * gy) * (x1 - x0) * (y1 - y0),
            });
        }
    }
    Ok(cells)
}

/// Regularised quadrant Dirichlet energies of the diagonal (D1) and
/// vertical-rotation (R3) harmonic angles for the cutoff sweep
/// `rho in {1e-1, 1e-2, 1e-3}`. The absolute values diverge
/// logarithmically as `rho -> 0`; the ordering is cutoff-stable.
pub fn dirichlet_energy_compare(a: f64, b: f64, tol: f64) -> Result<Vec<RhoEnergies>> {
    use crate::boundary::ThetaState;
    let rhos = [1e-1, 1e-2, 1e-3];
    let d1 = energy_cells(ThetaState::D1.constants(), a, b, rhos[2], tol)?;
    let r3 = energy_cells(ThetaState::R3.constants(), a, b, rhos[2], tol)?;
    let sum = |cells: &[EnergyCell], rho: f64| -> f64 {
        cells
            .iter()
            .filter(|c| c.corner_dist >= rho)
            .map(|c| c.value)
            .sum::<f64>()
            / 4.0
    };
    Ok(rhos
        .iter()
        .map(|&rho| RhoEnergies {
            rho,
            e_d1: sum(&d1, rho),
            e_r3: sum(&r3, rho),
        })
        .collect())
}
