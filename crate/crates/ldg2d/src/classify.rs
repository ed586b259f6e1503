//! Labels equilibria (diagonal, rotated, boundary-distortion, cross),
//! detects low-order regions and computes director winding numbers.

use serde::Serialize;

use crate::boundary::BoundarySpec;
use crate::grid::QField;
use crate::{Error, Result};

/// Geometric solution class. The stable/unstable prefix is carried
/// separately by the branch machinery (it comes from the Hessian, not
/// from the field shape).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    D1,
    D2,
    R1,
    R2,
    R3,
    R4,
    BD1,
    BD2,
    WORS,
    Unknown,
}

impl ClassLabel {
    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::D1 => "D1",
            ClassLabel::D2 => "D2",
            ClassLabel::R1 => "R1",
            ClassLabel::R2 => "R2",
            ClassLabel::R3 => "R3",
            ClassLabel::R4 => "R4",
            ClassLabel::BD1 => "BD1",
            ClassLabel::BD2 => "BD2",
            ClassLabel::WORS => "WORS",
            ClassLabel::Unknown => "Unknown",
        }
    }

    pub fn is_trivial_topology(self) -> bool {
        matches!(
            self,
            ClassLabel::D1
                | ClassLabel::D2
                | ClassLabel::R1
                | ClassLabel::R2
                | ClassLabel::R3
                | ClassLabel::R4
        )
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classification outcome with the margin of the deciding test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolutionClass {
    pub label: ClassLabel,
    pub confidence: f64,
}

impl SolutionClass {
    fn unknown() -> Self {
        SolutionClass {
            label: ClassLabel::Unknown,
            confidence: 0.0,
        }
    }
}

/// Tolerances and probe placement for [`classify`].
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Relative max-norm threshold on interior `q12` for the BD family
    /// (scaled by the interior maximum of `s`).
    pub bd_tol: f64,
    /// Distance of the edge probes from the boundary.
    pub probe_offset: f64,
}

impl ClassifyOptions {
    /// Probe offset `max(3h, 2d)` keeps the probes outside the boundary
    /// ramp region.
    pub fn for_problem(field_grid: &crate::grid::Grid, bc: &BoundarySpec) -> Self {
        let h = field_grid.hx.max(field_grid.hy);
        let d = match bc {
            BoundarySpec::Dirichlet { d } => *d,
            BoundarySpec::Robin { .. } => 0.0,
        };
        ClassifyOptions {
            bd_tol: 1e-3,
            probe_offset: (3.0 * h).max(2.0 * d),
        }
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            bd_tol: 1e-3,
            probe_offset: 0.06,
        }
    }
}

/// Director-angle change along a straight node path, accumulated with
/// nematic (mod pi) wrapping. Returns `None` if the order parameter drops
/// below `s_floor` anywhere on the path.
fn theta_change_along(
    field: &QField,
    path: impl Iterator<Item = usize>,
    s_floor: f64,
) -> Option<f64> {
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    for k in path {
        let (a, b) = (field.q11[k], field.q12[k]);
        if (a * a + b * b).sqrt() < s_floor {
            return None;
        }
        let phi = b.atan2(a);
        if let Some(p) = prev {
            let mut d = phi - p;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d <= -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        prev = Some(phi);
    }
    Some(total / 2.0)
}

/// Decision tree over normalised probes: boundary-distortion states by
/// the interior `q12` magnitude, then rotated states by the pi-rotation
/// of the director between opposite edges, then the diagonal pair by the
/// centre sign.
pub fn classify(field: &QField, opts: &ClassifyOptions) -> SolutionClass {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    if nx < 5 || ny < 5 {
        return SolutionClass::unknown();
    }

    let mut s_max = 0.0f64;
    let mut q12_max = 0.0f64;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = g.idx(i, j);
            let s = (field.q11[k] * field.q11[k] + field.q12[k] * field.q12[k]).sqrt();
            s_max = s_max.max(s);
            q12_max = q12_max.max(field.q12[k].abs());
        }
    }
    if s_max <= 0.0 || !s_max.is_finite() {
        return SolutionClass::unknown();
    }

    let (ci, cj) = (nx / 2, ny / 2);
    let center_q11 = field.q11[g.idx(ci, cj)];
    let center_q12 = field.q12[g.idx(ci, cj)];
    let bd_abs = opts.bd_tol * s_max;

    if q12_max <= bd_abs {
        // BD family: the director is axis-aligned everywhere.
        let margin = (bd_abs - q12_max) / bd_abs;
        if g.domain.is_square() && center_q11.abs() <= bd_abs {
            return SolutionClass {
                label: ClassLabel::WORS,
                confidence: margin.min((bd_abs - center_q11.abs()) / bd_abs),
            };
        }
        if center_q11.abs() <= bd_abs {
            // Centre-zero BD on a rectangle: surfaced as an anomaly.
            return SolutionClass::unknown();
        }
        let label = if center_q11 > 0.0 {
            ClassLabel::BD2
        } else {
            ClassLabel::BD1
        };
        return SolutionClass {
            label,
            confidence: margin.min(center_q11.abs() / s_max),
        };
    }

    // Probe offsets in node counts. The unwrap paths must stay readable
    // across incipient nodal lines (where s drops to the q12 amplitude
    // scale), so the floor sits well below the BD threshold.
    let oi = ((opts.probe_offset / g.hx).ceil() as usize).clamp(1, nx / 2 - 1);
    let oj = ((opts.probe_offset / g.hy).ceil() as usize).clamp(1, ny / 2 - 1);
    let s_floor = 0.05 * bd_abs;

    let vert = theta_change_along(field, (oj..=ny - 1 - oj).map(|j| g.idx(ci, j)), s_floor);
    let horiz = theta_change_along(field, (oi..=nx - 1 - oi).map(|i| g.idx(i, cj)), s_floor);
    let (vert, horiz) = match (vert, horiz) {
        (Some(v), Some(h)) => (v, h),
        _ => return SolutionClass::unknown(),
    };

    let half_pi = std::f64::consts::FRAC_PI_2;
    let v_rot = vert.abs() > half_pi;
    let h_rot = horiz.abs() > half_pi;
    match (v_rot, h_rot) {
        (true, true) => SolutionClass::unknown(),
        (true, false) => SolutionClass {
            label: if vert > 0.0 {
                ClassLabel::R2
            } else {
                ClassLabel::R1
            },
            confidence: (vert.abs() / std::f64::consts::PI).min(1.0),
        },
        (false, true) => SolutionClass {
            label: if horiz > 0.0 {
                ClassLabel::R4
            } else {
                ClassLabel::R3
            },
            confidence: (horiz.abs() / std::f64::consts::PI).min(1.0),
        },
        (false, false) => {
            // Diagonal pair: the signed moment m12 = avg (x+y) q12 is
            // sign-definite for D1/D2 and stays readable arbitrarily close
            // to the merge with the BD branch. The centre value breaks a
            // tie when the moment is at noise level.
            let (_, m12, _) = crate::energy::branch_diagnostics(field);
            let m12n = m12 / (s_max * (g.domain.a() + g.domain.b()));
            let sign_src = if m12n.abs() > 1e-12 { m12n } else { center_q12 };
            if sign_src == 0.0 {
                return SolutionClass::unknown();
            }
            SolutionClass {
                label: if sign_src > 0.0 {
                    ClassLabel::D1
                } else {
                    ClassLabel::D2
                },
                confidence: (center_q12.abs() / s_max).max(m12n.abs().min(1.0)),
            }
        }
    }
}

/// An isolated low-order point with its director winding.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointDefect {
    pub x: f64,
    pub y: f64,
    /// Director winding in half-integer units (+-1/2, ...).
    pub winding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Left,
    Right,
    Bottom,
    Top,
    DiagMain,
    DiagAnti,
    Region,
}

/// An extended low-order feature (line or blob) with its bounding box.
#[derive(Debug, Clone, Serialize)]
pub struct LineFeature {
    #[serde(rename = "edge_or_diagonal")]
    pub kind: LineKind,
    /// `[xmin, ymin, xmax, ymax]`.
    pub bbox: [f64; 4],
}

/// Low-order structure of a field: isolated wound points, extended
/// line/region features, and the raw mask.
#[derive(Debug, Clone)]
pub struct DefectSet {
    pub points: Vec<PointDefect>,
    pub lines: Vec<LineFeature>,
    pub low_order_mask: Vec<bool>,
}

impl DefectSet {
    pub fn report_json(&self, vertex_degrees: Option<&VertexDegrees>) -> serde_json::Value {
        serde_json::json!({
            "points": self.points,
            "lines": self.lines,
            "vertex_degrees": vertex_degrees.map(|v| v.omega.to_vec()),
        })
    }
}

/// Connected components of the `s^2 < threshold` mask; small interior
/// components get a winding from a surrounding loop, everything else is
/// reported as a line/region feature. `threshold = None` uses
/// `0.1 * max interior s^2`.
pub fn detect_defects(field: &QField, threshold: Option<f64>) -> DefectSet {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let s2 = field.s2();
    let thr = threshold.unwrap_or_else(|| {
        let mut m = 0.0f64;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                m = m.max(s2[g.idx(i, j)]);
            }
        }
        0.1 * m
    });
    let mask: Vec<bool> = s2.iter().map(|&v| v < thr).collect();

    let mut seen = vec![false; mask.len()];
    let mut points = Vec::new();
    let mut lines = Vec::new();
    let mut stack = Vec::new();

    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        // Flood fill one component. 8-connectivity keeps diagonal nodal
        // lines (which step corner-to-corner on the lattice) in one piece.
        let mut nodes = Vec::new();
        let (mut i_min, mut i_max, mut j_min, mut j_max) = (nx, 0usize, ny, 0usize);
        let mut touches_boundary = false;
        stack.push(start);
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = (k % nx, k / nx);
            nodes.push(k);
            i_min = i_min.min(i);
            i_max = i_max.max(i);
            j_min = j_min.min(j);
            j_max = j_max.max(j);
            touches_boundary |= g.is_boundary(i, j);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    let kk = jj as usize * nx + ii as usize;
                    if mask[kk] && !seen[kk] {
                        seen[kk] = true;
                        stack.push(kk);
                    }
                }
            }
        }
        let bbox = [g.x(i_min), g.y(j_min), g.x(i_max), g.y(j_max)];
        let extent = (i_max - i_min).max(j_max - j_min);

        // Small interior component with a nonzero winding: a point defect.
        let small = !touches_boundary && extent <= (nx.max(ny)) / 4;
        if small {
            if let Some(w) = loop_winding(field, &mask, i_min, i_max, j_min, j_max) {
                if w.abs() >= 0.25 {
                    let (mut cx, mut cy) = (0.0, 0.0);
                    for &k in &nodes {
                        cx += g.x(k % nx);
                        cy += g.y(k / nx);
                    }
                    points.push(PointDefect {
                        x: cx / nodes.len() as f64,
                        y: cy / nodes.len() as f64,
                        winding: w,
                    });
                    continue;
                }
                // Unwound dip: falls through to the feature classifier.
            }
        }
        lines.extend(line_feature(g, &nodes, bbox, i_min, i_max, j_min, j_max));
    }

    DefectSet {
        points,
        lines,
        low_order_mask: mask,
    }
}

/// Winding of the Q-vector field around the rectangle ring two cells
/// outside `[i0, i1] x [j0, j1]`, halved to director units. `None` when
/// the ring leaves the grid interior or crosses the low-order mask.
fn loop_winding(
    field: &QField,
    mask: &[bool],
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
) -> Option<f64> {
    let g = &field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let pad = 2usize;
    if i0 < pad + 1 || j0 < pad + 1 || i1 + pad + 1 >= nx || j1 + pad + 1 >= ny {
        return None;
    }
    let (li, ri) = (i0 - pad, i1 + pad);
    let (lj, rj) = (j0 - pad, j1 + pad);
    // Anticlockwise ring.
    let mut ring: Vec<usize> = Vec::new();
    for i in li..=ri {
        ring.push(g.idx(i, lj));
    }
    for j in lj + 1..=rj {
        ring.push(g.idx(ri, j));
    }
    for i in (li..ri).rev() {
        ring.push(g.idx(i, rj));
    }
    for j in (lj + 1..rj).rev() {
        ring.push(g.idx(li, j));
    }
    ring.push(g.idx(li, lj));
    if ring.iter().any(|&k| mask[k]) {
        return None;
    }
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    for &k in &ring {
        let phi = field.q12[k].atan2(field.q11[k]);
        if let Some(p) = prev {
            let mut d = phi - p;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d <= -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        prev = Some(phi);
    }
    let n_vec = (total / (2.0 * std::f64::consts::PI)).round();
    Some(n_vec / 2.0)
}

/// Classify an extended component: a thin long strip parallel to an axis
/// is an edge line (named after the nearer edge pair), a component that
/// carries one or both rectangle diagonals is a diagonal line, anything
/// else a region. The cross state emits one feature per diagonal.
fn line_feature(
    g: &crate::grid::Grid,
    nodes: &[usize],
    bbox: [f64; 4],
    i_min: usize,
    i_max: usize,
    j_min: usize,
    j_max: usize,
) -> Vec<LineFeature> {
    let (nx, ny) = (g.nx, g.ny);
    let w = i_max - i_min;
    let h = j_max - j_min;
    let thin = |extent: usize, axis_n: usize| extent <= (axis_n / 6).max(4);
    let long = |extent: usize, axis_n: usize| extent * 10 >= axis_n * 6;
    if thin(w, nx) && long(h, ny) {
        let xc = 0.5 * (g.x(i_min) + g.x(i_max));
        return vec![LineFeature {
            kind: if xc < g.domain.a() / 2.0 {
                LineKind::Left
            } else {
                LineKind::Right
            },
            bbox,
        }];
    }
    if thin(h, ny) && long(w, nx) {
        let yc = 0.5 * (g.y(j_min) + g.y(j_max));
        return vec![LineFeature {
            kind: if yc < g.domain.b() / 2.0 {
                LineKind::Bottom
            } else {
                LineKind::Top
            },
            bbox,
        }];
    }
    // Diagonal coverage: the component (dilated by one cell) must carry
    // most of a diagonal's nodes.
    let dilated: std::collections::HashSet<(i64, i64)> = nodes
        .iter()
        .flat_map(|&k| {
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            (-1..=1).flat_map(move |dj| (-1..=1).map(move |di| (i + di, j + dj)))
        })
        .collect();
    let m = nx.min(ny) - 1;
    let count_diag = |anti: bool| -> usize {
        (0..=m)
            .filter(|&t| {
                let i = (t * (nx - 1)) / m;
                let j = if anti {
                    ny - 1 - (t * (ny - 1)) / m
                } else {
                    (t * (ny - 1)) / m
                };
                dilated.contains(&(i as i64, j as i64))
            })
            .count()
    };
    let mut out = Vec::new();
    if count_diag(false) * 10 >= (m + 1) * 7 {
        out.push(LineFeature {
            kind: LineKind::DiagMain,
            bbox,
        });
    }
    if count_diag(true) * 10 >= (m + 1) * 7 {
        out.push(LineFeature {
            kind: LineKind::DiagAnti,
            bbox,
        });
    }
    if out.is_empty() {
        out.push(LineFeature {
            kind: LineKind::Region,
            bbox,
        });
    }
    out
}

/// Quarter-integer corner degrees of a tangent director field, ordered
/// `(0,0), (a,0), (a,b), (0,b)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VertexDegrees {
    pub omega: [f64; 4],
}

impl VertexDegrees {
    /// Excess charge `(|n| - 1)/2` expelled when the corner relaxes to a
    /// trivial +-1/4 vertex; `omega = n/4`.
    pub fn excess_charge(omega: f64) -> f64 {
        ((4.0 * omega).round().abs() - 1.0) / 2.0
    }
}

/// Corner degrees from the edge constants: the director turns by the
/// difference of the adjacent edge angles along the anticlockwise arc
/// inside the domain.
pub fn vertex_degrees(consts: [f64; 4]) -> Result<VertexDegrees> {
    let [d1, d2, d3, d4] = consts;
    let pi = std::f64::consts::PI;
    let is_mult = |v: f64, of: f64, offset: f64| {
        ((v - offset) / of - ((v - offset) / of).round()).abs() < 1e-9
    };
    for (v, name) in [(d1, "d1"), (d3, "d3")] {
        if !is_mult(v, pi, 0.0) {
            return Err(Error::InvalidBoundary(format!(
                "{name}={v} is not a multiple of pi (horizontal tangent condition)"
            )));
        }
    }
    for (v, name) in [(d2, "d2"), (d4, "d4")] {
        if !is_mult(v, pi, pi / 2.0) {
            return Err(Error::InvalidBoundary(format!(
                "{name}={v} is not an odd multiple of pi/2 (vertical tangent condition)"
            )));
        }
    }
    let two_pi = 2.0 * pi;
    let omega = [
        (d4 - d1) / two_pi,
        (d1 - d2) / two_pi,
        (d2 - d3) / two_pi,
        (d3 - d4) / two_pi,
    ];
    for &w in &omega {
        let n = (4.0 * w).round() as i64;
        if n % 2 == 0 {
            return Err(Error::InvalidBoundary(format!(
                "corner degree {w} is not an odd quarter-integer"
            )));
        }
    }
    Ok(VertexDegrees { omega })
}
