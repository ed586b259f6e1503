//! Weak (Robin) anchoring on the square: the cross structure survives at
//! finite anchoring strength and sharpens as the strength grows.
//!
//! ```text
//! cargo run --release --example weak_anchoring
//! ```

use ldg2d::limits::{limit_strong_q, robin_roots, WeakLimit};

fn main() -> ldg2d::Result<()> {
    // Roots of tan(p a) = 2 tau p / (p^2 - tau^2) drive the series.
    let rr = robin_roots(3.0, 1.0, 6)?;
    println!("first roots at tau = 3:");
    for (k, p) in rr.roots.iter().enumerate() {
        println!(
            "  p_{k} = {p:.12}   stable residual {:+.1e}",
            rr.stable_residual(k)
        );
    }

    // Weaker anchoring means a more diffuse cross.
    println!("\nQ11 at (0.4, 0.5) on the square:");
    for &tau in &[3.0, 10.0, 30.0] {
        let wl = WeakLimit::new(1.0, 1.0, tau, 400)?;
        println!("  tau = {tau:<4} -> {:+.6}", wl.q11(0.4, 0.5));
    }

    // The diagonals stay nodal for every anchoring strength on the square.
    let wl = WeakLimit::new(1.0, 1.0, 10.0, 400)?;
    println!("\ndiagonal values at tau = 10:");
    for &t in &[0.2, 0.35, 0.5] {
        println!(
            "  Q11({t}, {t}) = {:+.1e},  Q11({t}, {:.2}) = {:+.1e}",
            wl.q11(t, t),
            1.0 - t,
            wl.q11(t, 1.0 - t)
        );
    }

    // Large anchoring recovers the Dirichlet limit pointwise.
    println!("\nRobin -> Dirichlet recovery at (0.3, 0.4):");
    let (strong, _) = limit_strong_q(0.3, 0.4, 1.0, 1.0, 0.0, 1e-11)?;
    for &tau in &[10.0, 100.0, 1000.0] {
        let weak = WeakLimit::new(1.0, 1.0, tau, 400)?.q11(0.3, 0.4);
        println!(
            "  tau = {tau:<6} weak {weak:+.6} vs sharp Dirichlet {strong:+.6} (diff {:+.1e})",
            weak - strong
        );
    }

    // On a rectangle the cross is gone even with strong anchoring.
    let wr = WeakLimit::new(1.5, 1.0, 10.0, 400)?;
    println!(
        "\nrectangle 1.5 x 1, tau = 10: centre Q11 = {:+.6}",
        wr.q11(0.75, 0.5)
    );
    Ok(())
}
