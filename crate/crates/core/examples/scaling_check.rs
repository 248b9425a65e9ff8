//! Scale invariance of the junction matrix: shrinking the geometry and the
//! grid together changes nothing; shrinking only the geometry costs one
//! grid refinement level.

use fibernet::continuum::{scaling_invariance_check, JunctionGeometry, JunctionOptions};

fn main() -> fibernet::Result<()> {
    let pi2 = std::f64::consts::PI.powi(2);
    let g = JunctionGeometry::t_junction(2.0)?;
    for n in [32.0, 64.0] {
        let r = scaling_invariance_check(&g, 2.5 * pi2, 0.5, &JunctionOptions::new(1.0 / n))?;
        println!("h = 1/{n}: grid-exact {:.2e}, unscaled {:.2e}", r.grid_exact, r.unscaled);
    }
    Ok(())
}
