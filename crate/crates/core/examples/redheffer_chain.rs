//! Two two-port junctions joined by a finite edge. The graph S-matrix is
//! compared with the star product of the junction matrices.

use std::path::Path;

use faer::c64;
use fibernet::assembly::SpectralContext;
use fibernet::graph::{load_graph, VertexKind};
use fibernet::spectral::network_smatrix;
use fibernet::VertexCondition;

fn main() -> fibernet::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/chain.json");
    let g = load_graph(&path)?;
    let t: Vec<_> = g
        .vertices
        .iter()
        .map(|v| match &v.kind {
            VertexKind::Junction(VertexCondition::Constant(m)) => m.clone(),
            _ => unreachable!("chain.json has two constant junctions"),
        })
        .collect();
    let l = g.edges[g.edge_index("mid").unwrap()].length;
    let eps = 0.2;
    for lambda in [12.0, 20.0, 28.0, 36.0] {
        let ctx = SpectralContext::new(&g, lambda, eps)?;
        let s = network_smatrix(&g, &ctx)?.matrix;
        let phi = (ctx.k * c64::new(0.0, l)).exp();
        let (a, b) = (&t[0], &t[1]);
        let den = c64::new(1.0, 0.0) - a[(1, 1)] * phi * b[(0, 0)] * phi;
        let transmit = b[(1, 0)] * phi * a[(1, 0)] / den;
        println!(
            "lambda {lambda:5.1}: |t| graph {:.12}  star product {:.12}",
            s[(1, 0)].norm(),
            transmit.norm()
        );
    }
    Ok(())
}
