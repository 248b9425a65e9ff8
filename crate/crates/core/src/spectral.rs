//! Eigenvalues of bounded graphs, scattering solutions and network
//! scattering matrices of graphs with leads, and the spider Green function
//! written in the scattering basis.

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::assembly::{
    self, assemble, check_nonsingular, graph_blocks, AmplitudeField, Point, SecularSystem,
    SpectralContext, SINGULARITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexKind};
use crate::linalg::{self, c, CMat};
use crate::vertex;

const I: c64 = c64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Scan points per unit of `k · max(l_e)`.
    pub points_per_unit: f64,
    /// Exclusion around `λ0` and `λ1`, as a fraction of `λ1 − λ0`.
    pub exclusion: f64,
    /// Relative singularity tolerance on `σ_min / ‖M‖₂`.
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            points_per_unit: 2000.0,
            exclusion: 1e-6,
            tolerance: SINGULARITY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub k: f64,
    pub multiplicity: usize,
    pub sigma_min: f64,
    /// `‖M‖₂` at the eigenvalue.
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct EigenvalueList {
    pub eigenvalues: Vec<Eigenvalue>,
    pub interval: (f64, f64),
    pub epsilon: f64,
}

impl EigenvalueList {
    /// Eigenvalues repeated by multiplicity.
    pub fn flattened(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity))
            .collect()
    }
}

/// A root of `σ_min(M(k))` found by [`scan_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub k: f64,
    pub multiplicity: usize,
    pub sigma_min: f64,
    pub norm: f64,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

fn sigma_min(m: &CMat) -> Result<f64> {
    Ok(linalg::singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Scans `σ_min(M(k))` on a uniform grid over `[lo, hi]` (extended by one
/// step where `domain` allows), refines every local minimum by golden
/// section and keeps those with `σ_min ≤ tol · ‖M‖₂`.
pub(crate) fn scan_roots<F>(
    lo: f64,
    hi: f64,
    step: f64,
    domain: (f64, f64),
    tol: f64,
    eval: F,
) -> Result<Vec<Root>>
where
    F: Fn(f64) -> Result<CMat> + Sync,
{
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let start = (lo - step).max(domain.0);
    let end = (hi + step).min(domain.1);
    let n = ((end - start) / step).ceil().max(2.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| start + (end - start) * i as f64 / n as f64)
        .collect();
    let s: Vec<f64> = grid
        .par_iter()
        .map(|&k| eval(k).and_then(|m| sigma_min(&m)))
        .collect::<Result<_>>()?;

    let brackets: Vec<(f64, f64)> = (1..n)
        .filter(|&i| {
            s[i] <= s[i - 1]
                && s[i] <= s[i + 1]
                && !(s[i] == s[i - 1] && i > 1 && s[i - 1] <= s[i - 2])
        })
        .map(|i| (grid[i - 1], grid[i + 1]))
        .collect();

    let mut roots: Vec<Root> = brackets
        .par_iter()
        .map(|&(a, b)| -> Result<Option<Root>> {
            let k = golden_section(a, b, |k| eval(k).and_then(|m| sigma_min(&m)))?;
            let sv = linalg::singular_values(&eval(k)?)?;
            let norm = sv[0];
            let cutoff = tol * norm;
            let smin = *sv.last().unwrap();
            if smin > cutoff || k < lo || k > hi {
                return Ok(None);
            }
            let multiplicity = sv.iter().filter(|&&x| x <= cutoff).count();
            Ok(Some(Root {
                k,
                multiplicity,
                sigma_min: smin,
                norm,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    roots.sort_by(|a, b| a.k.total_cmp(&b.k));
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last_mut() {
            Some(last) if (r.k - last.k).abs() < 1e-9 => {
                last.multiplicity = last.multiplicity.max(r.multiplicity);
                if r.sigma_min < last.sigma_min {
                    last.k = r.k;
                    last.sigma_min = r.sigma_min;
                    last.norm = r.norm;
                }
            }
            _ => out.push(r),
        }
    }
    Ok(out)
}

fn golden_section<F>(mut a: f64, mut b: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let width = |a: f64, b: f64| 1e-12f64.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > width(a, b) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

/// Eigenvalues of a bounded graph in `[lambda_min, lambda_max] ⊂ (λ0, λ1)`.
pub fn find_eigenvalues(
    graph: &MetricGraph,
    epsilon: f64,
    interval: (f64, f64),
    options: SearchOptions,
) -> Result<EigenvalueList> {
    let (l0, l1) = (graph.lambda0, graph.lambda1);
    let (lmin, lmax) = interval;
    if !(lmin >= l0 && lmax <= l1 && lmin <= lmax) {
        return Err(Error::OutOfRange(format!(
            "interval [{lmin}, {lmax}] is not inside ({l0}, {l1})"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let delta = options.exclusion * (l1 - l0);
    let lo = lmin.max(l0 + delta);
    let hi = lmax.min(l1 - delta);
    let to_k = |l: f64| (l - l0).max(0.0).sqrt() / epsilon;
    let domain = (to_k(l0 + delta), to_k(l1 - delta));
    let mut list = find_eigenvalues_in_k(graph, epsilon, (to_k(lo), to_k(hi)), domain, options)?;
    list.interval = interval;
    Ok(list)
}

/// As [`find_eigenvalues`] with the search interval given in `k`; scan
/// points never leave `domain`.
pub fn find_eigenvalues_in_k(
    graph: &MetricGraph,
    epsilon: f64,
    k_interval: (f64, f64),
    domain: (f64, f64),
    options: SearchOptions,
) -> Result<EigenvalueList> {
    if !graph.is_bounded() {
        return Err(Error::Unsupported(
            "graph has leads; eigenvalues are only searched on bounded graphs (use the scattering matrix)".into(),
        ));
    }
    let lmax = graph.max_length();
    let step = 1.0 / (options.points_per_unit * lmax);
    let roots = scan_roots(
        k_interval.0,
        k_interval.1,
        step,
        domain,
        options.tolerance,
        |k| {
            let ctx = SpectralContext::from_k(graph, k, epsilon)?;
            Ok(assembly::build_system(graph, &ctx)?.matrix)
        },
    )?;
    let l0 = graph.lambda0;
    Ok(EigenvalueList {
        eigenvalues: roots
            .into_iter()
            .map(|r| Eigenvalue {
                lambda: l0 + epsilon * epsilon * r.k * r.k,
                k: r.k,
                multiplicity: r.multiplicity,
                sigma_min: r.sigma_min,
                norm: r.norm,
            })
            .collect(),
        interval: (
            l0 + epsilon * epsilon * k_interval.0.powi(2),
            l0 + epsilon * epsilon * k_interval.1.powi(2),
        ),
        epsilon,
    })
}

fn null_field(
    graph: &MetricGraph,
    system: &SecularSystem,
    v: &[c64],
    epsilon: f64,
) -> AmplitudeField {
    let zeros = vec![c(0.0, 0.0); graph.edges.len()];
    let mut field = AmplitudeField::from_solution(graph, system, v, &zeros);
    field.epsilon = epsilon;
    let n = field.l2_norm_squared().sqrt();
    if n > 0.0 {
        field.scale(c(1.0 / n, 0.0));
    }
    field
}

/// Unit-norm eigenfunction at an eigenvalue returned by [`find_eigenvalues`].
pub fn eigenfunction(graph: &MetricGraph, epsilon: f64, lambda: f64) -> Result<AmplitudeField> {
    Ok(eigenfunctions(graph, epsilon, lambda)?.remove(0))
}

/// Unit-norm basis of the eigenspace (not orthogonalized in `L²`).
pub fn eigenfunctions(
    graph: &MetricGraph,
    epsilon: f64,
    lambda: f64,
) -> Result<Vec<AmplitudeField>> {
    let ctx = SpectralContext::new(graph, lambda, epsilon)?;
    let system = assembly::build_system(graph, &ctx)?;
    let sv = system.singular_values()?;
    let norm = sv[0];
    let smin = *sv.last().unwrap();
    let cutoff = SINGULARITY_TOLERANCE * norm;
    if smin > cutoff {
        return Err(Error::Numerical(format!(
            "lambda = {lambda} is not an eigenvalue (sigma_min = {smin:.3e}, ||M|| = {norm:.3e})"
        )));
    }
    let vecs = linalg::null_vectors(&system.matrix, cutoff)?;
    Ok(vecs
        .iter()
        .map(|v| null_field(graph, &system, v, epsilon))
        .collect())
}

// ---------------------------------------------------------------------------
// Scattering.

fn lead_position(graph: &MetricGraph, edge: usize) -> Result<usize> {
    graph
        .leads()
        .iter()
        .position(|&e| e == edge)
        .ok_or_else(|| {
            let id = graph
                .edges
                .get(edge)
                .map(|e| e.id.clone())
                .unwrap_or(format!("#{edge}"));
            Error::invariant("edge", id, "is not an infinite edge")
        })
}

/// Solves with unit incoming amplitude on each lead in `incident`.
fn scattering_fields(
    graph: &MetricGraph,
    ctx: &SpectralContext,
    incident: &[usize],
) -> Result<Vec<AmplitudeField>> {
    if graph.lead_count() == 0 {
        return Err(Error::Unsupported("graph has no leads".into()));
    }
    for &p in incident {
        lead_position(graph, p)?;
    }
    let blocks = graph_blocks(graph, ctx)?;
    let system = assemble(graph, ctx.k, &blocks);
    check_nonsingular(&system, ctx.lambda.re)?;
    let n = system.size();
    let mut rhs = Mat::<c64>::zeros(n, incident.len());
    for (col, &p) in incident.iter().enumerate() {
        let v = graph.edges[p].start;
        let ch = graph.vertices[v]
            .order
            .iter()
            .position(|&e| e == p)
            .expect("incident");
        let row0 = system
            .rows
            .iter()
            .position(|r| r.vertex == v)
            .expect("vertex rows");
        let (x, y) = &blocks[v];
        for i in 0..graph.vertices[v].degree() {
            rhs[(row0 + i, col)] = -(x[(i, ch)] - I * y[(i, ch)]);
        }
    }
    let sol = linalg::solve_many(&system.matrix, &rhs);
    Ok(incident
        .iter()
        .enumerate()
        .map(|(col, &p)| {
            let x: Vec<c64> = (0..n).map(|i| sol[(i, col)]).collect();
            let mut inc = vec![c(0.0, 0.0); graph.edges.len()];
            inc[p] = c(1.0, 0.0);
            let mut f = AmplitudeField::from_solution(graph, &system, &x, &inc);
            f.epsilon = ctx.epsilon;
            f
        })
        .collect())
}

/// The solution with incoming `e^{−ikt}` on lead `p` and outgoing waves elsewhere.
pub fn scattering_solution(
    graph: &MetricGraph,
    ctx: &SpectralContext,
    p: usize,
) -> Result<AmplitudeField> {
    Ok(scattering_fields(graph, ctx, &[p])?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrixReport {
    /// `‖S S* − I‖₂`.
    pub unitarity: f64,
    /// `‖S − Sᵀ‖₂`.
    pub asymmetry: f64,
    /// `‖Im S‖₂`.
    pub imaginary: f64,
    /// `‖S Sᵀ − I‖₂`.
    pub orthogonality: f64,
}

#[derive(Debug, Clone)]
pub struct NetworkSMatrix {
    /// `S[(j, p)]`: outgoing amplitude on lead `j` for unit incidence on lead `p`.
    pub matrix: CMat,
    /// Edge index of each lead, in matrix order.
    pub leads: Vec<usize>,
    pub lambda: f64,
    pub epsilon: f64,
    pub report: SMatrixReport,
}

pub fn network_smatrix(graph: &MetricGraph, ctx: &SpectralContext) -> Result<NetworkSMatrix> {
    let leads = graph.leads();
    let fields = scattering_fields(graph, ctx, &leads)?;
    let m = leads.len();
    let s = Mat::from_fn(m, m, |j, p| fields[p].edges[leads[j]].a);
    let report = SMatrixReport {
        unitarity: vertex::unitarity_deviation(&s)?,
        asymmetry: vertex::asymmetry(&s)?,
        imaginary: vertex::imaginary_part_norm(&s)?,
        orthogonality: vertex::orthogonality_deviation(&s)?,
    };
    Ok(NetworkSMatrix {
        matrix: s,
        leads,
        lambda: ctx.lambda.re,
        epsilon: ctx.epsilon,
        report,
    })
}

/// Green function of a spider in the scattering basis, with its expansion
/// coefficient.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringGreen {
    pub value: c64,
    /// Coefficient `c` of `ψ_{j0}` in `g = c ψ_{j0}` near the junction.
    pub coefficient: c64,
}

pub fn is_spider(graph: &MetricGraph) -> bool {
    graph.vertices.len() == 1
        && matches!(graph.vertices[0].kind, VertexKind::Junction(_))
        && graph.edges.iter().all(|e| e.is_infinite())
}

/// For a source at `τ` on lead `j0`, `g = c ψ_{j0}` on `[0, τ)` of the
/// source lead and on every other lead, and `g = c (e^{−2ikτ} + S_{j0 j0}) e^{ikt}`
/// beyond the source, with `c = i e^{ikτ} / (2 k ε²)`.
pub fn green_via_scattering(
    graph: &MetricGraph,
    ctx: &SpectralContext,
    source: Point,
    target: Point,
) -> Result<ScatteringGreen> {
    if !is_spider(graph) {
        return Err(Error::Unsupported(
            "the scattering expansion needs a spider graph".into(),
        ));
    }
    if ctx.k.norm() == 0.0 {
        return Err(Error::OutOfRange(
            "lambda = lambda0 is a branch point".into(),
        ));
    }
    if !(source.t > 0.0) {
        return Err(Error::invariant(
            "edge",
            graph.edges[source.edge].id.clone(),
            "source must be interior",
        ));
    }
    let j0 = source.edge;
    let psi = scattering_solution(graph, ctx, j0)?;
    let k = ctx.k;
    let e2 = ctx.epsilon * ctx.epsilon;
    let coefficient = I * (I * k * source.t).exp() / (k * e2 * 2.0);
    let value = if target.edge == j0 && target.t > source.t {
        let s00 = psi.edges[j0].a;
        coefficient * ((-I * k * source.t * 2.0).exp() + s00) * (I * k * target.t).exp()
    } else {
        coefficient * psi.value(target.edge, target.t)
    };
    Ok(ScatteringGreen { value, coefficient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{segment, spider, star, FreeEndBc};
    use crate::vertex::{kirchhoff_matrix, to_complex, VertexCondition};
    use std::f64::consts::PI;

    #[test]
    fn single_edge_spectrum() {
        let l0 = PI * PI;
        let g = segment(
            l0,
            4.0 * l0,
            1.0,
            FreeEndBc::Dirichlet,
            FreeEndBc::Dirichlet,
        )
        .unwrap();
        let eps = 0.1;
        let list = find_eigenvalues(
            &g,
            eps,
            (l0, l0 + eps * eps * PI * PI * 30.0),
            SearchOptions::default(),
        )
        .unwrap();
        assert_eq!(list.eigenvalues.len(), 5);
        for (m, e) in list.eigenvalues.iter().enumerate() {
            let exact = l0 + eps * eps * PI * PI * ((m + 1) * (m + 1)) as f64;
            assert!((e.lambda - exact).abs() <= 1e-10 * exact);
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn empty_interval() {
        let g = segment(0.0, 100.0, 1.0, FreeEndBc::Dirichlet, FreeEndBc::Dirichlet).unwrap();
        let list = find_eigenvalues(&g, 1.0, (1.0, 9.0), SearchOptions::default()).unwrap();
        assert!(list.eigenvalues.is_empty());
    }

    #[test]
    fn rejects_leads_and_bad_intervals() {
        let g = spider(0.0, 10.0, VertexCondition::Kirchhoff { degree: 3 }).unwrap();
        assert!(matches!(
            find_eigenvalues(&g, 1.0, (1.0, 2.0), SearchOptions::default()),
            Err(Error::Unsupported(_))
        ));
        let s = segment(0.0, 10.0, 1.0, FreeEndBc::Dirichlet, FreeEndBc::Dirichlet).unwrap();
        assert!(find_eigenvalues(&s, 1.0, (-1.0, 2.0), SearchOptions::default()).is_err());
    }

    #[test]
    fn eigenfunction_of_single_edge() {
        let g = segment(0.0, 100.0, 2.0, FreeEndBc::Dirichlet, FreeEndBc::Dirichlet).unwrap();
        let lambda = (PI / 2.0).powi(2);
        let f = eigenfunction(&g, 1.0, lambda).unwrap();
        let t = 0.7;
        let v = f.value(0, t);
        let exact = (2.0f64 / 2.0).sqrt() * (PI * t / 2.0).sin();
        assert!((v.norm() - exact).abs() < 1e-9);
    }

    #[test]
    fn spider_reproduces_its_vertex_matrix() {
        let t = to_complex(&kirchhoff_matrix(3).unwrap());
        let g = spider(1.0, 5.0, VertexCondition::Constant(t.clone())).unwrap();
        for &l in &[1.5, 3.0, 0.2] {
            let s = network_smatrix(&g, &SpectralContext::new(&g, l, 0.3).unwrap()).unwrap();
            assert!(linalg::max_abs(&linalg::sub(&s.matrix, &t)) < 1e-13);
        }
    }

    #[test]
    fn transparent_chain_is_pure_transmission() {
        // lead0 -- v0 --(l)-- v1 -- lead1, both vertices transparent
        use crate::graph::{Edge, Vertex, VertexKind};
        let l = 0.8;
        let vertices = vec![
            Vertex {
                id: "v0".into(),
                kind: VertexKind::Junction(VertexCondition::Kirchhoff { degree: 2 }),
                order: vec![0, 2],
            },
            Vertex {
                id: "v1".into(),
                kind: VertexKind::Junction(VertexCondition::Kirchhoff { degree: 2 }),
                order: vec![1, 2],
            },
        ];
        let edges = vec![
            Edge {
                id: "in".into(),
                start: 0,
                end: None,
                length: f64::INFINITY,
            },
            Edge {
                id: "out".into(),
                start: 1,
                end: None,
                length: f64::INFINITY,
            },
            Edge {
                id: "mid".into(),
                start: 0,
                end: Some(1),
                length: l,
            },
        ];
        let g = MetricGraph::new(0.0, 10.0, vertices, edges).unwrap();
        let ctx = SpectralContext::new(&g, 2.0, 1.0).unwrap();
        let s = network_smatrix(&g, &ctx).unwrap();
        let phase = (I * ctx.k * l).exp();
        assert!(s.matrix[(0, 0)].norm() < 1e-14);
        assert!((s.matrix[(1, 0)] - phase).norm() < 1e-14);
        assert!((s.matrix[(0, 1)] - phase).norm() < 1e-14);
    }

    #[test]
    fn star_neumann_spectrum_has_double_eigenvalues() {
        let g = star(
            0.0,
            400.0,
            VertexCondition::Kirchhoff { degree: 3 },
            &[1.0; 3],
            FreeEndBc::Neumann,
        )
        .unwrap();
        let list = find_eigenvalues(&g, 1.0, (0.5, 30.0), SearchOptions::default()).unwrap();
        // cos(kl) = 0 gives a two-dimensional eigenspace, sin(kl) = 0 the symmetric mode
        let ks: Vec<(f64, usize)> = list
            .eigenvalues
            .iter()
            .map(|e| (e.k, e.multiplicity))
            .collect();
        assert_eq!(ks.len(), 3, "{ks:?}");
        assert!((ks[0].0 - PI / 2.0).abs() < 1e-9 && ks[0].1 == 2);
        assert!((ks[1].0 - PI).abs() < 1e-9 && ks[1].1 == 1);
        assert!((ks[2].0 - 1.5 * PI).abs() < 1e-9 && ks[2].1 == 2);
    }
}
