//! Gradient-flow relaxation of a non-trivial topology: a 5/4-degree
//! corner defect sheds its excess charge as +-1/2 defects and the field
//! settles into a trivial state whose identity depends on epsilon.
//!
//! ```text
//! cargo run --release --example relaxation
//! ```

use ldg2d::boundary::{impose_dirichlet_trace, nontrivial_constants, BoundarySpec};
use ldg2d::classify::{detect_defects, vertex_degrees, VertexDegrees};
use ldg2d::energy::EnergyParams;
use ldg2d::grid::{Grid, RectDomain, ThetaField};
use ldg2d::limits::theta_harmonic;
use ldg2d::solve::{gradient_flow, FlowOptions};

fn main() -> ldg2d::Result<()> {
    let d = 0.03;
    let consts = nontrivial_constants();
    let degrees = vertex_degrees(consts)?;
    println!("seed corner degrees {:?}", degrees.omega);
    println!(
        "excess charge at the 5/4 vertex: {} half-defects to expel",
        VertexDegrees::excess_charge(degrees.omega[0])
    );

    let grid = Grid::with_spacing(RectDomain::new(1.0, 1.0)?, 1.0 / 32.0)?;
    let theta0 = ThetaField::from_fn(grid, |x, y| {
        theta_harmonic(consts, 1.0, 1.0, x, y, 1e-9).expect("series evaluation")
    });

    for &eps in &[0.4, 0.05] {
        let mut init = theta0.lift();
        impose_dirichlet_trace(&mut init, d)?;
        let p = EnergyParams::new(eps, BoundarySpec::Dirichlet { d })?;
        let opts = FlowOptions {
            dt: None,
            stop_tol: 1e-8,
            snap_every: 250,
            max_steps: 2_000_000,
        };
        let traj = gradient_flow(&init, &p, &opts)?;
        println!(
            "\nepsilon = {eps}: {} steps -> {}  (energy {:+.4})",
            traj.steps,
            traj.terminal_class.label,
            traj.snapshots.last().unwrap().energy
        );
        // Walk the recorded snapshots and report the moving defects.
        for snap in traj.snapshots.iter().step_by(2) {
            let defects = detect_defects(&snap.field, None);
            let points: Vec<String> = defects
                .points
                .iter()
                .map(|p| format!("{:+.1} at ({:.2},{:.2})", p.winding, p.x, p.y))
                .collect();
            println!(
                "  t = {:7.4}  E = {:+9.3}  lines {:>2}  points [{}]",
                snap.time,
                snap.energy,
                defects.lines.len(),
                points.join(", ")
            );
        }
        let out = std::path::PathBuf::from(format!("target/example-out/relaxation_eps{eps}"));
        traj.export(&out)?;
        println!("  snapshots written to {}", out.display());
    }
    Ok(())
}
