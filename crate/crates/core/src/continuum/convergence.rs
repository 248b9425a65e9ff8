//! Bounded networks against their graph model.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{self, FreeEndBc};
use crate::spectral::{self, SearchOptions};
use crate::vertex::{self, VertexCondition};

use super::eigen::{domain_eigenvalues, network_eigenvalues_2d, EigenOptions};
use super::geometry::{JunctionGeometry, Lead, LeadEnd, WallBc};
use super::scattering::{
    discrete_thresholds, tabulate_junction_with, JunctionOptions, TabulatedJunction,
};

#[derive(Debug, Clone)]
pub struct ConvergenceOptions {
    pub eps_list: Vec<f64>,
    /// Cells across a channel; the 2D grid uses `h = ε / points_per_width`.
    pub points_per_width: usize,
    /// 2D eigenvalues compared per `ε`.
    pub count: usize,
    /// Junction table nodes at `λ = λ0^h + κ²` for `κ` on this uniform grid.
    pub kappa_min: f64,
    pub kappa_step: f64,
    pub kappa_max: f64,
    pub truncation: f64,
    pub n_modes: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            eps_list: vec![0.2, 0.1, 0.05],
            points_per_width: 16,
            count: 3,
            kappa_min: 0.005,
            kappa_step: 0.005,
            kappa_max: 1.5,
            truncation: 2.0,
            n_modes: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub index: usize,
    pub lambda_2d: f64,
    pub residual: f64,
    /// Nearest graph eigenvalue, `NaN` if the graph has none in range.
    pub lambda_graph: f64,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Thresholds of the grid channel, used by the graph model.
    pub thresholds: (f64, f64),
    pub table: TabulatedJunction,
    /// Relative singularity tolerance used for the graph search.
    pub search_tolerance: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Distances of the `index`-th eigenvalue in the order of `eps_list`.
    pub fn distances(&self, index: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.index == index)
            .map(|r| r.distance)
            .collect()
    }

    /// True if every tracked eigenvalue gets strictly closer to the graph
    /// spectrum along the `ε` list.
    pub fn strictly_decreasing(&self) -> bool {
        let indices: Vec<usize> = {
            let mut v: Vec<usize> = self.rows.iter().map(|r| r.index).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        indices.iter().all(|&i| {
            let d = self.distances(i);
            d.iter().all(|x| x.is_finite()) && d.windows(2).all(|w| w[1] < w[0])
        })
    }
}

/// Open-lead version of a bounded single-junction network.
fn junction_of(network: &JunctionGeometry, truncation: f64) -> Result<JunctionGeometry> {
    let leads = network
        .leads
        .iter()
        .map(|l| Lead {
            end: LeadEnd::Truncated(truncation.max(2.0 * l.width)),
            ..l.clone()
        })
        .collect();
    JunctionGeometry::new(network.rectangles.clone(), network.wall, leads)
}

/// Compares the lowest 2D eigenvalues above the channel threshold with the
/// graph model built from the tabulated junction matrix of the same grid.
pub fn convergence_study(
    network: &JunctionGeometry,
    options: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    if network.leads.is_empty() || network.leads.iter().any(|l| l.end.is_open()) {
        return Err(Error::Unsupported(
            "network needs closed channels only".into(),
        ));
    }
    if options.eps_list.is_empty() || options.count == 0 {
        return Err(Error::OutOfRange(
            "need a nonempty epsilon list and count".into(),
        ));
    }
    let width = network.leads[0].width;
    let junction = junction_of(network, options.truncation)?;
    let mut jopts = JunctionOptions::new(width / options.points_per_width as f64);
    jopts.n_modes = options.n_modes;
    let (mu0, mu1) = discrete_thresholds(&junction, &jopts)?;
    let mut lambdas = Vec::new();
    let mut kappa = options.kappa_min;
    while kappa <= options.kappa_max + 1e-12 && mu0 + kappa * kappa < mu1 {
        lambdas.push(mu0 + kappa * kappa);
        kappa += options.kappa_step;
    }
    let table = tabulate_junction_with(&junction, &lambdas, &jopts)?;
    let (tmin, tmax) = table.table.range();
    // linear interpolation breaks unitarity between nodes, so graph roots
    // are only near-singular; accept minima at that level
    let mut midpoint_defect = 0.0f64;
    for w in table.table.lambdas.windows(2) {
        let t = table.table.interpolate(0.5 * (w[0] + w[1]))?;
        midpoint_defect = midpoint_defect.max(vertex::unitarity_deviation(&t)?);
    }
    let search = SearchOptions {
        tolerance: SearchOptions::default()
            .tolerance
            .max(10.0 * midpoint_defect),
        ..SearchOptions::default()
    };
    let tip = match network.wall {
        WallBc::Dirichlet => FreeEndBc::Dirichlet,
        WallBc::Neumann => FreeEndBc::Neumann,
    };
    let lengths: Vec<f64> = network.leads.iter().map(|l| l.end.length()).collect();
    let model = graph::star(
        mu0,
        mu1,
        VertexCondition::Tabulated(table.table.clone()),
        &lengths,
        tip,
    )?;

    let per_eps = options
        .eps_list
        .par_iter()
        .map(|&eps| -> Result<Vec<ConvergenceRow>> {
            let h = eps / options.points_per_width as f64;
            let eig = EigenOptions {
                shift: Some(mu0),
                ..EigenOptions::default()
            };
            let spec = network_eigenvalues_2d(network, eps, h, options.count, &eig)?;
            // the graph model exists only on the tabulated range
            let to_k = |l: f64| (l - mu0).sqrt() / eps;
            let domain = (to_k(tmin), to_k(tmax));
            let graph_eigs =
                spectral::find_eigenvalues_in_k(&model, eps, domain, domain, search)?.flattened();
            Ok(spec
                .eigenvalues
                .iter()
                .zip(&spec.residuals)
                .filter(|(l, _)| **l > mu0)
                .take(options.count)
                .enumerate()
                .map(|(index, (&l2d, &res))| {
                    let nearest = graph_eigs
                        .iter()
                        .copied()
                        .min_by(|a, b| (a - l2d).abs().total_cmp(&(b - l2d).abs()));
                    let lg = nearest.unwrap_or(f64::NAN);
                    ConvergenceRow {
                        epsilon: eps,
                        index,
                        lambda_2d: l2d,
                        residual: res,
                        lambda_graph: lg,
                        distance: if l2d > tmax {
                            f64::NAN
                        } else {
                            (l2d - lg).abs()
                        },
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        thresholds: (mu0, mu1),
        table,
        search_tolerance: search.tolerance,
        rows: per_eps.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone)]
pub struct RichardsonReport {
    pub exact: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    /// `log2(|e_h| / |e_{h/2}|)` per eigenvalue.
    pub orders: Vec<f64>,
}

/// Observed order of the 2D solver on a straight Dirichlet channel of axis
/// length 1 and width `ε`, whose eigenvalues are `π² + ε²π²m²`.
pub fn straight_channel_order(
    epsilon: f64,
    points_per_width: usize,
    count: usize,
) -> Result<RichardsonReport> {
    let rect = JunctionGeometry::new(
        vec![[0.0, 0.0, 1.0 / epsilon, 1.0]],
        WallBc::Dirichlet,
        vec![],
    )?;
    let pi2 = std::f64::consts::PI.powi(2);
    let exact: Vec<f64> = (1..=count)
        .map(|m| pi2 + epsilon * epsilon * pi2 * (m * m) as f64)
        .collect();
    let run = |p: usize| {
        domain_eigenvalues(
            &rect,
            epsilon,
            epsilon,
            epsilon / p as f64,
            count,
            &EigenOptions::default(),
        )
        .map(|s| s.eigenvalues)
    };
    let coarse = run(points_per_width)?;
    let fine = run(2 * points_per_width)?;
    if coarse.len() < count || fine.len() < count {
        return Err(Error::Numerical("fewer eigenvalues than requested".into()));
    }
    let orders = (0..count)
        .map(|i| ((coarse[i] - exact[i]).abs() / (fine[i] - exact[i]).abs()).log2())
        .collect();
    Ok(RichardsonReport {
        exact,
        coarse,
        fine,
        orders,
    })
}
