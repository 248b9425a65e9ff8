//! Eigenvalues of a Kirchhoff star loaded from a graph file.

use std::path::Path;

use fibernet::graph::load_graph;
use fibernet::spectral::{find_eigenvalues, SearchOptions};

fn main() -> fibernet::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/star.json");
    let g = load_graph(&path)?;
    let eps = 0.1;
    let top = g.lambda0 + eps * eps * 60.0;
    let list = find_eigenvalues(&g, eps, (g.lambda0, top), SearchOptions::default())?;
    println!("{:>14} {:>10} {:>5} {:>10}", "lambda", "k", "mult", "sigma_min");
    for e in &list.eigenvalues {
        println!("{:14.10} {:10.6} {:5} {:10.2e}", e.lambda, e.k, e.multiplicity, e.sigma_min);
    }
    // equal legs: k = π/2 (simple), π (double), 3π/2, ...
    Ok(())
}
