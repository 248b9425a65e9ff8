//! Eigenvalues of a thin L-shaped network. The lowest one sits below the
//! channel threshold: the bend traps a mode.

use fibernet::continuum::{network_eigenvalues_2d, EigenOptions, JunctionGeometry, LeadEnd};

fn main() -> fibernet::Result<()> {
    let g = JunctionGeometry::l_bend(LeadEnd::Closed(1.0))?;
    let eps = 0.1;
    let h = eps / 16.0;
    let spec = network_eigenvalues_2d(&g, eps, h, 5, &EigenOptions::default())?;
    // eigenvalues come rescaled to unit width, so the mesh counts as h / eps
    let r = h / eps;
    let mu0 = 4.0 / (r * r) * (std::f64::consts::PI * r / 2.0).sin().powi(2);
    println!("{} unknowns, grid threshold {:.8}", spec.unknowns, mu0);
    for (l, r) in spec.eigenvalues.iter().zip(&spec.residuals) {
        println!("{l:.10}  residual {r:.1e}{}", if *l < mu0 { "  (trapped)" } else { "" });
    }
    Ok(())
}
