//! Newton equilibria and the smallest-eigenvalue stability test: the
//! cross state is the unique stable equilibrium at large epsilon and
//! loses stability as epsilon decreases.
//!
//! ```text
//! cargo run --release --example equilibrium_and_stability
//! ```

use ldg2d::boundary::BoundarySpec;
use ldg2d::classify::{classify, ClassifyOptions};
use ldg2d::energy::EnergyParams;
use ldg2d::grid::{Grid, QField, RectDomain};
use ldg2d::limits::limit_strong_q;
use ldg2d::solve::{newton_solve, smallest_eigenvalue};

fn main() -> ldg2d::Result<()> {
    let d = 0.03;
    let grid = Grid::with_spacing(RectDomain::new(1.0, 1.0)?, 1.0 / 64.0)?;
    let bc = BoundarySpec::Dirichlet { d };
    let opts = ClassifyOptions::for_problem(&grid, &bc);

    // Seed Newton with the analytic limit profile.
    let mut q = QField::from_fn(grid, |x, y| {
        limit_strong_q(x, y, 1.0, 1.0, d, 1e-11).expect("series evaluation")
    });

    println!(" epsilon   iters   residual    energy      lambda_min   class");
    for &eps in &[5.0, 2.0, 1.0, 0.5, 0.3, 0.22, 0.2, 0.1] {
        let p = EnergyParams::new(eps, bc)?;
        let (next, rep) = newton_solve(&q, &p, 1e-10, 40)?;
        if !rep.converged {
            println!(" {eps:<8} did not converge");
            break;
        }
        q = next;
        let (lam, _) = smallest_eigenvalue(&q, &p, 1e-8)?;
        let class = classify(&q, &opts);
        println!(
            " {eps:<8} {:>5}   {:.2e}   {:+10.4}  {lam:+.4e}   {}{}",
            rep.iterations,
            rep.final_residual_norm,
            rep.energy,
            if lam > 0.0 { "s" } else { "u" },
            class.label
        );
    }
    println!("\nthe cross state persists at every epsilon but its smallest");
    println!("Hessian eigenvalue changes sign near 0.216 on this grid.");
    Ok(())
}
