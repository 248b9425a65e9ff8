//! Mode-0 profile along each lead: plane-wave fit and evanescent decay of the
//! remainder.

use fibernet::continuum::{fit_mode0, junction_smatrix, mode0_profile, JunctionGeometry};

fn main() -> fibernet::Result<()> {
    let pi2 = std::f64::consts::PI.powi(2);
    let lambda = 2.5 * pi2;
    let g = JunctionGeometry::t_junction(2.0)?;
    let sol = junction_smatrix(&g, lambda, 1.0 / 64.0, 8)?;
    let field = &sol.fields[0];
    println!("incident along lead {}", field.incident);
    for id in field.lead_ids() {
        let p = mode0_profile(field, &id)?;
        let fit = fit_mode0(&p, 1.0)?;
        println!(
            "lead {id}: out {:.6} in {:.6} fit error {:.1e} log-slope {:.3} (rate {:.3})",
            fit.outgoing,
            fit.incoming,
            fit.max_error,
            p.log_residual_slope(0.5, 2.0)?,
            -(4.0 * pi2 - lambda).sqrt()
        );
    }
    Ok(())
}
