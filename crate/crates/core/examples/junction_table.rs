//! Tabulate a junction over the band, write the table and reuse it as the
//! vertex of a graph.

use fibernet::assembly::SpectralContext;
use fibernet::continuum::{discrete_thresholds, tabulate_junction, JunctionGeometry, JunctionOptions};
use fibernet::graph::spider;
use fibernet::spectral::network_smatrix;
use fibernet::vertex::load_table;
use fibernet::VertexCondition;

fn main() -> fibernet::Result<()> {
    let g = JunctionGeometry::t_junction(2.0)?;
    let h = 1.0 / 32.0;
    let (mu0, mu1) = discrete_thresholds(&g, &JunctionOptions::new(h))?;
    let lambdas: Vec<f64> = (1..20).map(|i| mu0 + (mu1 - mu0) * i as f64 / 20.0).collect();
    let tab = tabulate_junction(&g, &lambdas, h, 8)?;
    let path = std::env::temp_dir().join("t_junction_table.json");
    tab.write(&path)?;
    println!("wrote {} entries to {}", lambdas.len(), path.display());

    let table = load_table(&path)?;
    let graph = spider(mu0, mu1, VertexCondition::Tabulated(table))?;
    let mid = 0.5 * (lambdas[9] + lambdas[10]);
    let s = network_smatrix(&graph, &SpectralContext::new(&graph, mid, 0.1)?)?;
    // interpolated between nodes, so only approximately unitary
    println!("between nodes: unitarity {:.2e}", s.report.unitarity);
    Ok(())
}
