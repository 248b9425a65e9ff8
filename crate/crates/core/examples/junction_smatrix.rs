//! Scattering matrix of a T-shaped junction from the 2D Helmholtz solver.

use fibernet::continuum::{junction_smatrix, JunctionGeometry};

fn main() -> fibernet::Result<()> {
    let pi2 = std::f64::consts::PI.powi(2);
    let g = JunctionGeometry::t_junction(2.0)?;
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let sol = junction_smatrix(&g, 2.5 * pi2, h, 8)?;
        let d = &sol.diagnostics;
        println!(
            "h = 1/{:<3} unknowns {:6}  |t11| {:.6} |t12| {:.6} |t13| {:.6}  unitarity {:.1e}",
            (1.0 / h) as usize,
            d.unknowns,
            sol.matrix[(0, 0)].norm(),
            sol.matrix[(1, 0)].norm(),
            sol.matrix[(2, 0)].norm(),
            d.unitarity
        );
    }
    Ok(())
}
