//! Small-epsilon limit: harmonic director angles for the six reference
//! boundary tables, and the regularised Dirichlet-energy comparison that
//! ranks the diagonal states below the rotated ones.
//!
//! ```text
//! cargo run --release --example harmonic_angles
//! ```

use ldg2d::boundary::ThetaState;
use ldg2d::classify::vertex_degrees;
use ldg2d::limits::{dirichlet_energy_compare, theta_harmonic};

fn main() -> ldg2d::Result<()> {
    let (a, b) = (1.5, 1.0);
    println!("centre angle of each reference state on {a} x {b}:");
    for state in ThetaState::all() {
        let c = state.constants();
        let theta = theta_harmonic(c, a, b, a / 2.0, b / 2.0, 1e-10)?;
        let omega = vertex_degrees(c)?;
        println!(
            "  {:>2}: theta(centre) = {theta:+.4} rad, corner degrees {:?}",
            state.name(),
            omega.omega
        );
    }

    // Quadrant Dirichlet energies with the corner cutoff sweep: the
    // absolute values diverge logarithmically, the ordering does not move.
    for &aa in &[1.0, 1.5] {
        println!("\nregularised quadrant energies on {aa} x 1:");
        for re in dirichlet_energy_compare(aa, 1.0, 1e-8)? {
            println!(
                "  rho = {:<6} E(D1) = {:8.4}   E(R3) = {:8.4}   (D1 lower by {:.4})",
                re.rho,
                re.e_d1,
                re.e_r3,
                re.e_r3 - re.e_d1
            );
        }
    }
    Ok(())
}
