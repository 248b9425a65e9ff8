//! Near the threshold: classify the junction, compute the limiting spectrum
//! and watch the rescaled eigenvalues of a λ-dependent family converge.

use std::f64::consts::PI;

use faer::{c64, Mat};
use fibernet::graph::star;
use fibernet::spectral::SearchOptions;
use fibernet::threshold::{classify_limit, eps_family, ThresholdProblem};
use fibernet::vertex::{Table, ThresholdOptions};
use fibernet::{FreeEndBc, VertexCondition};

fn main() -> fibernet::Result<()> {
    let (l0, l1) = (PI * PI, 4.0 * PI * PI);
    // eigenbasis of the Kirchhoff matrix; phases drift linearly with λ
    let s = 1.0 / 3f64.sqrt();
    let (a, b) = (1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt());
    let q = [[s, a, b], [s, -a, b], [s, 0.0, -2.0 * b]];
    let lambdas: Vec<f64> = (0..=300).map(|i| l0 + 0.01 * i as f64).collect();
    let matrices = lambdas
        .iter()
        .map(|l| {
            let ph = [0.03 * (l - l0), PI - 0.02 * (l - l0), PI];
            Mat::from_fn(3, 3, |i, j| {
                (0..3)
                    .map(|n| c64::from_polar(q[i][n] * q[j][n], ph[n]))
                    .fold(c64::new(0.0, 0.0), |x, y| x + y)
            })
        })
        .collect();
    let table = Table::new(3, l0, lambdas, matrices)?;
    let g = star(l0, l1, VertexCondition::Tabulated(table), &[1.0, 1.3, 0.7], FreeEndBc::Dirichlet)?;

    let problem = ThresholdProblem::new(&g, ThresholdOptions::default())?;
    let report = classify_limit(&problem);
    println!("label {:?}, k = {}", report.label, report.junctions[0].k);

    let fam = eps_family(&g, &[0.2, 0.1, 0.05, 0.025], 3, SearchOptions::default())?;
    println!("limits {:?}", fam.limits);
    for (row, dev) in fam.rows.iter().zip(fam.deviations()) {
        println!("eps {:6.3}: deviations {:?}", row.epsilon, dev);
    }
    println!("fitted orders {:?}", fam.fitted_orders());
    Ok(())
}
