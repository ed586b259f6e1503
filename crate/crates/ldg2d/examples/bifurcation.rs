//! Pseudo-arclength continuation of the three rectangle pathways and
//! extraction of the structural-transition parameters.
//!
//! Runs at h = 1/32 so the whole diagram takes tens of seconds; the
//! acceptance suite repeats it at h = 1/64.
//!
//! ```text
//! cargo run --release --example bifurcation
//! ```

use ldg2d::boundary::{impose_dirichlet_trace, BoundarySpec, ThetaState};
use ldg2d::continuation::{
    continue_branch, make_branch_point, transition_parameters, write_branch_csv, ProblemSetup,
    StepPolicy,
};
use ldg2d::grid::{Grid, RectDomain, ThetaField};
use ldg2d::limits::theta_harmonic;
use ldg2d::solve::newton_solve;

fn main() -> ldg2d::Result<()> {
    let (a, d) = (1.5, 0.03);
    let setup = ProblemSetup {
        grid: Grid::with_spacing(RectDomain::new(a, 1.0)?, 1.0 / 32.0)?,
        bc: BoundarySpec::Dirichlet { d },
    };
    let policy = StepPolicy::default();
    let out = std::path::Path::new("target/example-out/bifurcation");
    std::fs::create_dir_all(out)?;

    let mut branches = Vec::new();
    for state in [ThetaState::D1, ThetaState::R3, ThetaState::R2] {
        let consts = state.constants();
        let th = ThetaField::from_fn(setup.grid, |x, y| {
            theta_harmonic(consts, a, 1.0, x, y, 1e-9).expect("series evaluation")
        });
        let mut init = th.lift();
        impose_dirichlet_trace(&mut init, d)?;
        let (q, rep) = newton_solve(&init, &setup.params(0.02), 1e-10, 80)?;
        assert!(rep.converged);
        let seed = make_branch_point(&setup, 0.02, q, &policy)?;
        let branch = continue_branch(&seed, &setup, (0.02, 0.3), &policy)?;
        println!(
            "{} pathway: {} points, terminated {:?}",
            state.name(),
            branch.points.len(),
            branch.terminated
        );
        for tr in &branch.transitions {
            println!("    {} -> {} near eps = {:.4}", tr.from, tr.to, tr.epsilon);
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(
            out.join(format!("branch_{}.csv", state.name())),
        )?);
        write_branch_csv(&branch, &mut f)?;
        branches.push(branch);
    }

    let table = transition_parameters(&setup, &branches, &[], 1e-3, &policy)?;
    println!("\nrefined transition parameters (a = {a}):");
    for t in &table {
        println!("  {:<14} eps = {:.4}", t.name, t.epsilon);
    }
    std::fs::write(
        out.join("transitions.json"),
        serde_json::to_string_pretty(&table).expect("serialise"),
    )?;
    println!(
        "\nbranch CSVs and the transition table are in {}",
        out.display()
    );
    Ok(())
}
