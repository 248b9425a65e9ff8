//! The regime `λ = λ0 + μ ε²` near the bottom of the continuous spectrum.
//!
//! With `T_v` frozen at `λ0`, the vertex conditions split into
//! `P ς(0) = 0` and `P⊥ ς'(0) = 0`, where `P` and `P⊥` project onto the
//! `−1` and `+1` eigenspaces of `T_v(λ0)`. The limiting spectrum `{μ_j}` is
//! that of `−d²/dt²` on the graph with these conditions. For `ε > 0` the
//! rescaled graph eigenvalues `μ_j(ε) = (λ_j(ε) − λ0)/ε²` approach it.

use faer::Mat;

use crate::assembly::{assemble, free_end_block, Block};
use crate::error::{Error, Result};
use crate::graph::{FreeEndBc, MetricGraph, Orientation, VertexKind};
use crate::linalg::{self, c, CMat};
use crate::spectral::{self, scan_roots, SearchOptions};
use crate::vertex::{
    threshold_decomposition, to_complex, ThresholdClass, ThresholdDecomposition, ThresholdOptions,
};

#[derive(Debug, Clone)]
pub struct ThresholdProblem {
    pub graph: MetricGraph,
    /// Decomposition of `T_v(λ0)` for every junction, `None` for free ends.
    pub decompositions: Vec<Option<ThresholdDecomposition>>,
}

impl ThresholdProblem {
    pub fn new(graph: &MetricGraph, options: ThresholdOptions) -> Result<Self> {
        let decompositions = graph
            .vertices
            .iter()
            .map(|v| match &v.kind {
                VertexKind::Junction(cond) => threshold_decomposition(cond, graph.lambda0, options)
                    .map(Some)
                    .map_err(|e| Error::Decomposition(format!("vertex `{}`: {e}", v.id))),
                VertexKind::FreeEnd(_) => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThresholdProblem {
            graph: graph.clone(),
            decompositions,
        })
    }

    /// Free-end condition of the `ε = 0` problem: Robin with `α > 0`
    /// becomes Dirichlet, `α = 0` is Neumann.
    fn limit_bc(bc: FreeEndBc) -> FreeEndBc {
        match bc {
            FreeEndBc::Robin(a) if a > 0.0 => FreeEndBc::Dirichlet,
            FreeEndBc::Robin(_) => FreeEndBc::Neumann,
            other => other,
        }
    }

    fn blocks(&self) -> Vec<Block> {
        self.graph
            .vertices
            .iter()
            .zip(&self.decompositions)
            .map(|(v, dec)| match (&v.kind, dec) {
                (VertexKind::FreeEnd(bc), _) => {
                    free_end_block(Self::limit_bc(*bc), c(1.0, 0.0), 1.0)
                }
                (VertexKind::Junction(_), Some(d)) => (to_complex(&d.p), to_complex(&d.p_perp)),
                (VertexKind::Junction(_), None) => {
                    unreachable!("junctions always carry a decomposition")
                }
            })
            .collect()
    }

    /// The limiting system matrix at `q = √μ > 0`.
    pub fn matrix(&self, q: f64) -> CMat {
        assemble(&self.graph, c(q, 0.0), &self.blocks()).matrix
    }

    /// Multiplicity of `μ = 0`: the dimension of piecewise-linear functions
    /// `ς_e = c_e + d_e t` satisfying every limiting vertex condition.
    pub fn zero_mode_multiplicity(&self) -> Result<usize> {
        let g = &self.graph;
        let n = 2 * g.edges.len();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (vi, (v, dec)) in g.vertices.iter().zip(&self.decompositions).enumerate() {
            // value and s-derivative of channel j as linear forms in (c, d)
            let forms: Vec<(Vec<f64>, Vec<f64>)> = v
                .order
                .iter()
                .map(|&e| {
                    let lc = g.local_coordinate(e, vi).expect("validated incidence");
                    let mut val = vec![0.0; n];
                    let mut der = vec![0.0; n];
                    val[2 * e] = 1.0;
                    match lc.orientation {
                        Orientation::Forward => der[2 * e + 1] = 1.0,
                        Orientation::Reversed => {
                            val[2 * e + 1] = lc.length;
                            der[2 * e + 1] = -1.0;
                        }
                    }
                    (val, der)
                })
                .collect();
            let (x, y): (Mat<f64>, Mat<f64>) = match (&v.kind, dec) {
                (VertexKind::FreeEnd(bc), _) => match Self::limit_bc(*bc) {
                    FreeEndBc::Dirichlet => (Mat::from_fn(1, 1, |_, _| 1.0), Mat::zeros(1, 1)),
                    _ => (Mat::zeros(1, 1), Mat::from_fn(1, 1, |_, _| 1.0)),
                },
                (_, Some(d)) => (d.p.clone(), d.p_perp.clone()),
                _ => unreachable!(),
            };
            for i in 0..v.degree() {
                let mut r1 = vec![0.0; n];
                let mut r2 = vec![0.0; n];
                for (j, (val, der)) in forms.iter().enumerate() {
                    for col in 0..n {
                        r1[col] += x[(i, j)] * val[col];
                        r2[col] += y[(i, j)] * der[col];
                    }
                }
                rows.push(r1);
                rows.push(r2);
            }
        }
        if n == 0 {
            return Ok(0);
        }
        let m = Mat::from_fn(rows.len(), n, |i, j| c(rows[i][j], 0.0));
        let sv = linalg::singular_values(&m)?;
        let cutoff = 1e-10 * sv.first().copied().unwrap_or(0.0).max(1.0);
        let rank = sv.iter().filter(|&&s| s > cutoff).count();
        Ok(n - rank)
    }
}

/// The `count` smallest limiting eigenvalues `μ_j`, ascending, repeated by
/// multiplicity.
pub fn limiting_eigenvalues(
    problem: &ThresholdProblem,
    count: usize,
    options: SearchOptions,
) -> Result<Vec<f64>> {
    let g = &problem.graph;
    if !g.is_bounded() {
        return Err(Error::Unsupported(
            "limiting eigenvalues need a bounded graph".into(),
        ));
    }
    if count == 0 {
        return Err(Error::OutOfRange("count must be at least 1".into()));
    }
    let mut mus: Vec<f64> = vec![0.0; problem.zero_mode_multiplicity()?];
    let lmax = g.max_length();
    let total: f64 = g.edges.iter().map(|e| e.length).sum();
    let step = 1.0 / (options.points_per_unit * lmax);
    let blocks = problem.blocks();
    let eval = |q: f64| Ok(assemble(g, c(q, 0.0), &blocks).matrix);

    let mut lo = step;
    let mut hi = std::f64::consts::PI * (count as f64 + 1.0) / total + std::f64::consts::PI / lmax;
    let mut found: Vec<spectral::Root> = Vec::new();
    while mus.len() + found.iter().map(|r| r.multiplicity).sum::<usize>() < count {
        let roots = scan_roots(
            lo,
            hi,
            step,
            (0.5 * step, f64::INFINITY),
            options.tolerance,
            eval,
        )?;
        for r in roots {
            if found.last().is_some_and(|l| (r.k - l.k).abs() < 1e-9) {
                continue;
            }
            found.push(r);
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::Numerical(
                "limiting spectrum search did not find enough eigenvalues".into(),
            ));
        }
    }
    for r in found {
        mus.extend(std::iter::repeat(r.k * r.k).take(r.multiplicity));
    }
    mus.sort_by(f64::total_cmp);
    mus.truncate(count);
    Ok(mus)
}

#[derive(Debug, Clone)]
pub struct EpsRow {
    pub epsilon: f64,
    /// `μ_j(ε)` aligned with [`EpsFamily::limits`].
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EpsFamily {
    /// `μ_j`, repeated by multiplicity.
    pub limits: Vec<f64>,
    pub rows: Vec<EpsRow>,
}

impl EpsFamily {
    /// `|μ_j(ε) − μ_j|` per row.
    pub fn deviations(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.mu.iter()
                    .zip(&self.limits)
                    .map(|(a, b)| (a - b).abs())
                    .collect()
            })
            .collect()
    }

    /// Least-squares slope of `log|μ_j(ε) − μ_j|` against `log ε` for each `j`.
    pub fn fitted_orders(&self) -> Vec<f64> {
        let dev = self.deviations();
        (0..self.limits.len())
            .map(|j| {
                let pts: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .zip(&dev)
                    .map(|(r, d)| (r.epsilon.ln(), d[j].max(1e-300).ln()))
                    .collect();
                fit_slope(&pts)
            })
            .collect()
    }
}

pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Rescaled graph eigenvalues for each `ε`, matched to the limiting ones.
pub fn eps_family(
    graph: &MetricGraph,
    eps_list: &[f64],
    count: usize,
    options: SearchOptions,
) -> Result<EpsFamily> {
    eps_family_with(graph, eps_list, count, options, ThresholdOptions::default())
}

pub fn eps_family_with(
    graph: &MetricGraph,
    eps_list: &[f64],
    count: usize,
    options: SearchOptions,
    threshold_options: ThresholdOptions,
) -> Result<EpsFamily> {
    let problem = ThresholdProblem::new(graph, threshold_options)?;
    let limits = limiting_eigenvalues(&problem, count, options)?;
    let q_top = limits.last().copied().unwrap_or(0.0).sqrt();
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let delta = options.exclusion * (graph.lambda1 - graph.lambda0);
            let k_floor = delta.sqrt() / eps;
            let k_ceiling =
                ((graph.lambda1 - graph.lambda0) * (1.0 - options.exclusion)).sqrt() / eps;
            let k_hi = (1.2 * q_top + 1.0).min(k_ceiling);
            let list = spectral::find_eigenvalues_in_k(
                graph,
                eps,
                (k_floor, k_hi),
                (k_floor, k_ceiling),
                options,
            )?;
            let values: Vec<f64> = list
                .eigenvalues
                .iter()
                .flat_map(|e| std::iter::repeat(e.k * e.k).take(e.multiplicity))
                .collect();
            let zero_modes = limits.iter().filter(|&&m| m == 0.0).count();
            let mut pool = vec![0.0; zero_modes];
            pool.extend(values);
            Ok(EpsRow {
                epsilon: eps,
                mu: match_to_limits(&limits, pool, eps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsFamily { limits, rows })
}

/// Assigns to each cluster of equal limits its `m` nearest candidates.
fn match_to_limits(limits: &[f64], mut pool: Vec<f64>, eps: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(limits.len());
    let mut i = 0;
    while i < limits.len() {
        let mu = limits[i];
        let tol = 1e-8 * mu.abs().max(1.0);
        let m = limits[i..]
            .iter()
            .take_while(|&&x| (x - mu).abs() <= tol)
            .count();
        if pool.len() < m {
            return Err(Error::Ambiguous(format!(
                "eps = {eps}: only {} candidates left for the limit mu = {mu} of multiplicity {m}",
                pool.len()
            )));
        }
        pool.sort_by(|a, b| (a - mu).abs().total_cmp(&(b - mu).abs()));
        if pool.len() > m {
            let dm = (pool[m - 1] - mu).abs();
            let dn = (pool[m] - mu).abs();
            if (dn - dm).abs() <= 1e-12 * mu.abs().max(1.0) && (pool[m] - pool[m - 1]).abs() > 1e-12
            {
                return Err(Error::Ambiguous(format!(
                    "eps = {eps}: {} and {} are equally close to mu = {mu}",
                    pool[m - 1],
                    pool[m]
                )));
            }
        }
        let mut chosen: Vec<f64> = pool.drain(..m).collect();
        chosen.sort_by(f64::total_cmp);
        out.extend(chosen);
        i += m;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitLabel {
    Kirchhoff,
    Dirichlet,
    Mixed,
    NoJunctions,
}

#[derive(Debug, Clone)]
pub struct JunctionClass {
    pub vertex: String,
    pub degree: usize,
    pub k: usize,
    pub class: ThresholdClass,
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub junctions: Vec<JunctionClass>,
    pub label: LimitLabel,
}

pub fn classify_limit(problem: &ThresholdProblem) -> LimitReport {
    let junctions: Vec<JunctionClass> = problem
        .graph
        .vertices
        .iter()
        .zip(&problem.decompositions)
        .filter_map(|(v, d)| {
            d.as_ref().map(|d| JunctionClass {
                vertex: v.id.clone(),
                degree: d.degree,
                k: d.k,
                class: d.classification.clone(),
            })
        })
        .collect();
    let label = if junctions.is_empty() {
        LimitLabel::NoJunctions
    } else if junctions
        .iter()
        .all(|j| matches!(j.class, ThresholdClass::KirchhoffType { .. }))
    {
        LimitLabel::Kirchhoff
    } else if junctions
        .iter()
        .all(|j| j.class == ThresholdClass::DirichletType)
    {
        LimitLabel::Dirichlet
    } else {
        LimitLabel::Mixed
    };
    LimitReport { junctions, label }
}
