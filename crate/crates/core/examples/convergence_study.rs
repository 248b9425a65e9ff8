//! 2D eigenvalues of a bounded L-bend against the graph model built from the
//! tabulated junction, plus the solver's own order on a straight channel.

use fibernet::continuum::{
    convergence_study, straight_channel_order, ConvergenceOptions, JunctionGeometry, LeadEnd,
};

fn main() -> fibernet::Result<()> {
    let network = JunctionGeometry::l_bend(LeadEnd::Closed(1.0))?;
    let report = convergence_study(&network, &ConvergenceOptions::default())?;
    println!("graph search tolerance {:.2e}", report.search_tolerance);
    for r in &report.rows {
        println!(
            "eps {:5.3} #{}: 2D {:.10} graph {:.10} distance {:.2e}",
            r.epsilon, r.index, r.lambda_2d, r.lambda_graph, r.distance
        );
    }
    println!("strictly decreasing: {}", report.strictly_decreasing());
    let rich = straight_channel_order(0.1, 10, 3)?;
    println!("straight channel orders {:.3?}", rich.orders);
    Ok(())
}
