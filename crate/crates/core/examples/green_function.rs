//! Green function on a star: value table, reciprocity and the source jump.

use fibernet::assembly::{green_solve, Point, Side, SpectralContext};
use fibernet::graph::star;
use fibernet::{FreeEndBc, VertexCondition};

fn main() -> fibernet::Result<()> {
    let pi2 = std::f64::consts::PI.powi(2);
    let g = star(pi2, 4.0 * pi2, VertexCondition::Kirchhoff { degree: 3 }, &[1.0, 0.7, 1.3], FreeEndBc::Neumann)?;
    let eps = 0.2;
    let ctx = SpectralContext::new(&g, pi2 + 3.0, eps)?;
    let src = Point { edge: 0, t: 0.4 };
    let field = green_solve(&g, &ctx, src)?;

    for e in 0..g.edge_count() {
        let l = g.edges[e].length;
        let vals: Vec<String> = (0..=4)
            .map(|i| format!("{:+.4}", field.value(Point { edge: e, t: l * i as f64 / 4.0 }).re))
            .collect();
        println!("edge {}: {}", g.edges[e].id, vals.join(" "));
    }

    let other = Point { edge: 2, t: 0.9 };
    let back = green_solve(&g, &ctx, other)?;
    println!("g(x, y) = {:.12}", field.value(other));
    println!("g(y, x) = {:.12}", back.value(src));
    let jump = field.derivative(src, Side::Above) - field.derivative(src, Side::Below);
    println!("eps^2 * jump = {:.12}", jump * (eps * eps));
    Ok(())
}
