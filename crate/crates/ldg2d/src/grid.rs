//! Rescaled rectangular domain, uniform grid and nodal field containers.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::Error;
use crate::Result;

/// The rescaled rectangle `[0, a] x [0, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain {
    a: f64,
    b: f64,
}

impl RectDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "side lengths must be positive and finite, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Aspect ratio `delta = a / b`.
    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }

    pub fn is_square(&self) -> bool {
        (self.a - self.b).abs() <= 1e-12 * self.b.max(self.a)
    }
}

/// Uniform tensor-product grid on a [`RectDomain`].
///
/// Node `(i, j)` sits at `(i * hx, j * hy)`; the flat index is `j * nx + i`,
/// so dumps are row-major in `j` then `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub domain: RectDomain,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    /// Build the grid whose spacing is closest to `h` (node counts rounded
    /// to the nearest integer, boundary nodes included).
    pub fn with_spacing(domain: RectDomain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {h}"
            )));
        }
        if h > domain.a.min(domain.b) / 2.0 {
            return Err(Error::InvalidGrid(format!(
                "spacing {h} too coarse for domain {} x {}",
                domain.a, domain.b
            )));
        }
        let nx = (domain.a / h).round() as usize + 1;
        let ny = (domain.b / h).round() as usize + 1;
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "grid needs at least 3 nodes per axis, got {nx} x {ny}"
            )));
        }
        Ok(Self {
            domain,
            nx,
            ny,
            hx: domain.a / (nx - 1) as f64,
            hy: domain.b / (ny - 1) as f64,
        })
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Trapezoidal quadrature weight of node `(i, j)`, `hx*hy` scaled by
    /// 1/2 per boundary axis.
    #[inline]
    pub fn quad_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy * self.hx * self.hy
    }
}

/// The two scalar components of the reduced Q-tensor on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QField {
    pub grid: Grid,
    pub q11: Vec<f64>,
    pub q12: Vec<f64>,
}

impl QField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_nodes();
        Self {
            grid,
            q11: vec![0.0; n],
            q12: vec![0.0; n],
        }
    }

    pub fn uniform(grid: Grid, q11: f64, q12: f64) -> Self {
        let n = grid.n_nodes();
        Self {
            grid,
            q11: vec![q11; n],
            q12: vec![q12; n],
        }
    }

    /// Sample a pointwise map `(x, y) -> (q11, q12)` on all nodes.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (a, b) = f(grid.x(i), grid.y(j));
                let k = grid.idx(i, j);
                out.q11[k] = a;
                out.q12[k] = b;
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.q11
            .iter()
            .chain(self.q12.iter())
            .all(|v| v.is_finite())
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_dist(&self, other: &QField) -> f64 {
        self.q11
            .iter()
            .zip(&other.q11)
            .chain(self.q12.iter().zip(&other.q12))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `s^2 = q11^2 + q12^2`, equal to `tr(Q^2)/2` for the traceless
    /// symmetric representation.
    pub fn s2(&self) -> Vec<f64> {
        self.q11
            .iter()
            .zip(&self.q12)
            .map(|(a, b)| a * a + b * b)
            .collect()
    }

    /// Write the standard field dump: header `x,y,q11,q12,s2`, one row per
    /// node, row-major in `j` then `i`, 17 significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        let mut line = String::with_capacity(128);
        writeln!(w, "x,y,q11,q12,s2")?;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                let (a, b) = (self.q11[k], self.q12[k]);
                line.clear();
                let _ = write!(
                    line,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    g.x(i),
                    g.y(j),
                    a,
                    b,
                    a * a + b * b
                );
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)
    }

    /// Read a field dump produced by [`QField::write_csv`]. The grid is
    /// reconstructed from the coordinate columns.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = BufReader::new(std::fs::File::open(path)?);
        let mut lines = f.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::FieldFormat("empty file".into()))??;
        if header.trim() != "x,y,q11,q12,s2" {
            return Err(Error::FieldFormat(format!("unexpected header: {header}")));
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut q11 = Vec::new();
        let mut q12 = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::FieldFormat(format!(
                    "row {}: expected 5 columns",
                    ln + 2
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::FieldFormat(format!("row {}: {e}", ln + 2)))
            };
            xs.push(parse(cols[0])?);
            ys.push(parse(cols[1])?);
            q11.push(parse(cols[2])?);
            q12.push(parse(cols[3])?);
        }
        if xs.is_empty() {
            return Err(Error::FieldFormat("no data rows".into()));
        }
        // First row block shares y = ys[0]; its length is nx.
        let mut nx = 0;
        for &y in &ys {
            if (y - ys[0]).abs() <= 1e-14 * (1.0 + ys[0].abs()) {
                nx += 1;
            } else {
                break;
            }
        }
        if nx < 3 || xs.len() % nx != 0 {
            return Err(Error::FieldFormat(format!(
                "cannot infer grid shape from {} rows",
                xs.len()
            )));
        }
        let ny = xs.len() / nx;
        if ny < 3 {
            return Err(Error::FieldFormat(format!("only {ny} rows of nodes")));
        }
        let a = xs[nx - 1];
        let b = ys[xs.len() - 1];
        let domain = RectDomain::new(a, b)?;
        let grid = Grid {
            domain,
            nx,
            ny,
            hx: a / (nx - 1) as f64,
            hy: b / (ny - 1) as f64,
        };
        Ok(Self { grid, q11, q12 })
    }
}

/// Director-angle field (radians) on grid nodes.
#[derive(Debug, Clone)]
pub struct ThetaField {
    pub grid: Grid,
    pub theta: Vec<f64>,
}

impl ThetaField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            theta: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                out.theta[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        out
    }

    /// Unit-order lift `Q = (cos 2 theta, sin 2 theta)`.
    pub fn lift(&self) -> QField {
        let mut q = QField::zeros(self.grid);
        for (k, &t) in self.theta.iter().enumerate() {
            q.q11[k] = (2.0 * t).cos();
            q.q12[k] = (2.0 * t).sin();
        }
        q
    }
}

/// Decompose a Q-field into director angle and scalar order.
///
/// `theta = atan2(q12, q11) / 2`, `s = sqrt(q11^2 + q12^2)`. Nodes with
/// `s <= 1e-12` get `theta = 0` by convention and are flagged in the mask.
pub fn q_to_theta_s(field: &QField) -> (ThetaField, Vec<f64>, Vec<bool>) {
    let n = field.grid.n_nodes();
    let mut theta = ThetaField::zeros(field.grid);
    let mut s = vec![0.0; n];
    let mut degenerate = vec![false; n];
    for k in 0..n {
        let (a, b) = (field.q11[k], field.q12[k]);
        let sk = (a * a + b * b).sqrt();
        s[k] = sk;
        if sk <= 1e-12 {
            degenerate[k] = true;
            theta.theta[k] = 0.0;
        } else {
            theta.theta[k] = b.atan2(a) / 2.0;
        }
    }
    (theta, s, degenerate)
}

/// Per-node `s^2` field; see [`QField::s2`].
pub fn s2_field(field: &QField) -> Vec<f64> {
    field.s2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spacing_reproduces_reference_node_counts() {
        let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 1.0 / 64.0).unwrap();
        assert_eq!((g.nx, g.ny), (65, 65));
        assert!((g.hx - 1.0 / 64.0).abs() < 1e-15);
        assert!((g.hy - 1.0 / 64.0).abs() < 1e-15);

        let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!((g.nx, g.ny), (3, 3));

        let g = Grid::with_spacing(RectDomain::new(1.5, 1.0).unwrap(), 1.0 / 64.0).unwrap();
        assert_eq!((g.nx, g.ny), (97, 65));

        let g = Grid::with_spacing(RectDomain::new(1.25, 1.0).unwrap(), 1.0 / 64.0).unwrap();
        assert_eq!((g.nx, g.ny), (81, 65));
    }

    #[test]
    fn spacing_rejects_bad_input() {
        let d = RectDomain::new(1.0, 1.0).unwrap();
        assert!(Grid::with_spacing(d, 0.0).is_err());
        assert!(Grid::with_spacing(d, -0.1).is_err());
        assert!(Grid::with_spacing(d, 0.5001).is_err());
        assert!(RectDomain::new(-1.0, 1.0).is_err());
        assert!(RectDomain::new(1.0, 0.0).is_err());
    }

    #[test]
    fn theta_s_reference_values() {
        let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 0.5).unwrap();
        let cases = [
            ((1.0, 0.0), (0.0, 1.0)),
            ((0.0, 1.0), (std::f64::consts::FRAC_PI_4, 1.0)),
            ((-1.0, 0.0), (std::f64::consts::FRAC_PI_2, 1.0)),
        ];
        for ((a, b), (t_ref, s_ref)) in cases {
            let f = QField::uniform(g, a, b);
            let (theta, s, mask) = q_to_theta_s(&f);
            assert!((theta.theta[0] - t_ref).abs() < 1e-15, "({a},{b})");
            assert!((s[0] - s_ref).abs() < 1e-15);
            assert!(!mask[0]);
        }
        // Zero field: flagged, theta set to 0.
        let f = QField::zeros(g);
        let (theta, s, mask) = q_to_theta_s(&f);
        assert!(mask.iter().all(|&m| m));
        assert!(theta.theta.iter().all(|&t| t == 0.0));
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn s2_reference_values() {
        let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 0.25).unwrap();
        assert!(s2_field(&QField::uniform(g, 1.0, 0.0))
            .iter()
            .all(|&v| v == 1.0));
        assert!(s2_field(&QField::zeros(g)).iter().all(|&v| v == 0.0));
        let v = s2_field(&QField::uniform(g, 0.6, 0.8));
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Grid::with_spacing(RectDomain::new(1.5, 1.0).unwrap(), 0.25).unwrap();
        let f = QField::from_fn(g, |x, y| ((x * 3.1 + 0.2).sin(), (y * 2.7).cos() * 0.3));
        let dir = std::env::temp_dir().join("ldg2d_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        f.save_csv(&path).unwrap();
        let g2 = QField::load_csv(&path).unwrap();
        assert_eq!(g2.grid.nx, g.nx);
        assert_eq!(g2.grid.ny, g.ny);
        assert_eq!(g2.q11, f.q11);
        assert_eq!(g2.q12, f.q12);
    }

    proptest! {
        /// Lifting the (theta, s) decomposition reproduces the field where
        /// the order parameter is away from zero.
        #[test]
        fn decomposition_round_trip(vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 9)) {
            let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 0.5).unwrap();
            let mut f = QField::zeros(g);
            for (k, (a, b)) in vals.into_iter().enumerate() {
                f.q11[k] = a;
                f.q12[k] = b;
            }
            let (theta, s, mask) = q_to_theta_s(&f);
            for k in 0..9 {
                if s[k] > 1e-12 {
                    prop_assert!(!mask[k]);
                    let r11 = s[k] * (2.0 * theta.theta[k]).cos();
                    let r12 = s[k] * (2.0 * theta.theta[k]).sin();
                    prop_assert!((r11 - f.q11[k]).abs() <= 1e-12 * s[k]);
                    prop_assert!((r12 - f.q12[k]).abs() <= 1e-12 * s[k]);
                }
            }
        }

        /// s^2 is unchanged under the gauge theta -> theta + pi.
        #[test]
        fn s2_gauge_invariance(t in -3.2f64..3.2, s in 0.0f64..2.0) {
            let g = Grid::with_spacing(RectDomain::new(1.0, 1.0).unwrap(), 0.5).unwrap();
            let f1 = QField::uniform(g, s * (2.0 * t).cos(), s * (2.0 * t).sin());
            let tp = t + std::f64::consts::PI;
            let f2 = QField::uniform(g, s * (2.0 * tp).cos(), s * (2.0 * tp).sin());
            let (a, b) = (s2_field(&f1), s2_field(&f2));
            for k in 0..a.len() {
                prop_assert!((a[k] - b[k]).abs() <= 1e-12 * (1.0 + a[k]));
            }
        }
    }
}
