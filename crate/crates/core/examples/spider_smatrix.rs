//! A spider scatters exactly like its vertex: the Kirchhoff matrix comes back
//! as the network S-matrix for every λ in the band.

use fibernet::assembly::SpectralContext;
use fibernet::graph::spider;
use fibernet::spectral::network_smatrix;
use fibernet::VertexCondition;

fn main() -> fibernet::Result<()> {
    let pi2 = std::f64::consts::PI.powi(2);
    let g = spider(pi2, 4.0 * pi2, VertexCondition::Kirchhoff { degree: 3 })?;
    for lambda in [1.5 * pi2, 2.5 * pi2, 3.5 * pi2] {
        let s = network_smatrix(&g, &SpectralContext::new(&g, lambda, 0.1)?)?;
        println!("lambda = {lambda:.4}  unitarity {:.1e}", s.report.unitarity);
        for j in 0..3 {
            let row: Vec<String> = (0..3).map(|p| format!("{:+.6}", s.matrix[(j, p)].re)).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
