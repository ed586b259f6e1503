//! Strong-anchoring limit profiles: the cross state on the square and
//! its replacement by edge-localised nodal lines on a rectangle.
//!
//! ```text
//! cargo run --release --example analytic_profiles
//! ```

use ldg2d::grid::{Grid, QField, RectDomain};
use ldg2d::limits::limit_strong_q;

fn main() -> ldg2d::Result<()> {
    let d = 0.03;
    let out = std::path::Path::new("target/example-out/analytic_profiles");
    std::fs::create_dir_all(out)?;

    for (a, name) in [(1.0, "square"), (1.5, "rect_1p5")] {
        let grid = Grid::with_spacing(RectDomain::new(a, 1.0)?, 1.0 / 64.0)?;
        let field = QField::from_fn(grid, |x, y| {
            limit_strong_q(x, y, a, 1.0, d, 1e-11).expect("series evaluation")
        });
        let path = out.join(format!("{name}.csv"));
        field.save_csv(&path)?;

        let (center, _) = limit_strong_q(a / 2.0, 0.5, a, 1.0, d, 1e-12)?;
        println!("{a} x 1: centre Q11 = {center:+.6}  ({})", path.display());
    }

    // The diagonal nodal lines exist only on the square.
    println!("\nQ11 along the main diagonal:  square      1.5 x 1");
    for &t in &[0.125, 0.25, 0.375, 0.5] {
        let (sq, _) = limit_strong_q(t, t, 1.0, 1.0, d, 1e-12)?;
        let (rc, _) = limit_strong_q(1.5 * t, t, 1.5, 1.0, d, 1e-12)?;
        println!("  t = {t:.3}   {sq:+.2e}   {rc:+.6}");
    }

    // Centre value versus anisotropy: zero at a = 1, growing with a.
    println!("\ncentre Q11 versus aspect ratio:");
    for &a in &[1.0, 1.1, 1.25, 1.5, 2.0] {
        let (c, _) = limit_strong_q(a / 2.0, 0.5, a, 1.0, d, 1e-12)?;
        println!("  a = {a:<4} -> {c:+.6}");
    }
    Ok(())
}
