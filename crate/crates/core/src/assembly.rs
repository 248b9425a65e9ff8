//! The plane-wave linear system of a metric graph, its secular determinant,
//! and point-source Green functions.
//!
//! Unknowns: a finite edge `e` of length `l` contributes `a_e` (outgoing from
//! its start vertex) and `b̃_e = b_e e^{−ikl}` (outgoing from its end vertex);
//! a lead contributes its outgoing amplitude `a_e` only. With this scaling
//! every matrix entry has modulus at most one for `Im k ≥ 0`, so the system
//! stays well conditioned below the threshold where `e^{−ikl}` grows.
//!
//! Each vertex contributes `deg(v)` rows `X ς(0) + Y ς'(0)/k = 0` in its
//! local coordinate; writing `ς = A e^{iks} + B e^{−iks}` the coefficients on
//! the outgoing `A` and incoming `B` are `X + iY` and `X − iY`.

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{FreeEndBc, MetricGraph, Orientation, VertexKind};
use crate::linalg::{self, c, CMat};
use crate::vertex::{scattering_rows, VertexCondition};

/// `σ_min(M) ≤ SINGULARITY_TOLERANCE · ‖M‖₂` marks a spectral point.
pub const SINGULARITY_TOLERANCE: f64 = 1e-8;

const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Spectral parameter with its longitudinal wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct SpectralContext {
    pub lambda: c64,
    pub epsilon: f64,
    /// `√(λ − λ0)/ε` on the branch `Im k ≥ 0`.
    pub k: c64,
}

impl SpectralContext {
    pub fn new(graph: &MetricGraph, lambda: f64, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(lambda < graph.lambda1) {
            return Err(Error::OutOfRange(format!(
                "lambda = {lambda} is not below lambda1 = {}",
                graph.lambda1
            )));
        }
        let d = lambda - graph.lambda0;
        let k = if d >= 0.0 {
            c(d.sqrt() / epsilon, 0.0)
        } else {
            c(0.0, (-d).sqrt() / epsilon)
        };
        Ok(SpectralContext {
            lambda: c(lambda, 0.0),
            epsilon,
            k,
        })
    }

    /// Complex `λ` with `Im λ > 0`; only λ-independent vertex data is allowed.
    pub fn complex(graph: &MetricGraph, lambda: c64, epsilon: f64) -> Result<Self> {
        if lambda.im == 0.0 {
            return Self::new(graph, lambda.re, epsilon);
        }
        check_epsilon(epsilon)?;
        if !(lambda.im > 0.0) {
            return Err(Error::OutOfRange(format!(
                "complex lambda needs Im > 0, got {lambda}"
            )));
        }
        let k = (lambda - c(graph.lambda0, 0.0)).sqrt() / epsilon;
        Ok(SpectralContext { lambda, epsilon, k })
    }

    /// Real `k > 0`, i.e. `λ = λ0 + ε² k²`.
    pub fn from_k(graph: &MetricGraph, k: f64, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let lambda = graph.lambda0 + epsilon * epsilon * k * k;
        if !(lambda < graph.lambda1) {
            return Err(Error::OutOfRange(format!(
                "k = {k} maps to lambda = {lambda}, not below lambda1 = {}",
                graph.lambda1
            )));
        }
        Ok(SpectralContext {
            lambda: c(lambda, 0.0),
            epsilon,
            k: c(k, 0.0),
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    /// `a_e`.
    Outgoing,
    /// `b_e e^{−ik l_e}` on a finite edge.
    ScaledIncoming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMeta {
    pub edge: usize,
    pub coefficient: Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowMeta {
    pub vertex: usize,
    /// Position in the vertex's channel order.
    pub channel: usize,
}

/// Row blocks `(X, Y)` of one vertex.
pub(crate) type Block = (CMat, CMat);

#[derive(Debug, Clone)]
pub struct SecularSystem {
    pub k: c64,
    /// Column-scaled matrix, `entry = base · e^{ik·shift}`.
    pub matrix: CMat,
    pub base: CMat,
    pub shift: Mat<f64>,
    pub rows: Vec<RowMeta>,
    pub columns: Vec<ColumnMeta>,
    /// `Π_finite e^{−ik l_e}`, the factor relating `det(matrix)` to `D`.
    pub phase: c64,
    /// Column index of each edge's first unknown.
    pub edge_column: Vec<usize>,
}

impl SecularSystem {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `D(λ, ε)` in the unscaled `(a_e, b_e)` unknowns.
    pub fn determinant(&self) -> c64 {
        linalg::determinant(&self.matrix) * self.phase
    }

    /// The system in the unscaled unknowns `(a_e, b_e)`; entries carry
    /// `e^{iks}` with `s ∈ {0, l_e, −l_e}`.
    pub fn unscaled_matrix(&self, graph: &MetricGraph) -> CMat {
        let mut m = self.matrix.clone();
        for (j, col) in self.columns.iter().enumerate() {
            if col.coefficient == Coefficient::ScaledIncoming {
                let f = (-I * self.k * graph.edges[col.edge].length).exp();
                for i in 0..m.nrows() {
                    m[(i, j)] *= f;
                }
            }
        }
        m
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        linalg::singular_values(&self.matrix)
    }
}

/// `(X, Y)` blocks of every vertex at the given context.
pub(crate) fn graph_blocks(graph: &MetricGraph, ctx: &SpectralContext) -> Result<Vec<Block>> {
    graph
        .vertices
        .iter()
        .map(|v| match &v.kind {
            VertexKind::FreeEnd(bc) => Ok(free_end_block(*bc, ctx.k, ctx.epsilon)),
            VertexKind::Junction(cond) => {
                let t = evaluate_condition(cond, ctx, graph.lambda1)?;
                Ok(scattering_rows(&t))
            }
        })
        .collect()
}

fn evaluate_condition(cond: &VertexCondition, ctx: &SpectralContext, lambda1: f64) -> Result<CMat> {
    if ctx.lambda.im != 0.0 && !cond.is_constant() {
        return Err(Error::Unsupported(
            "tabulated vertex data cannot be evaluated at complex lambda".into(),
        ));
    }
    cond.evaluate(ctx.lambda.re, lambda1)
}

/// Scalar rows of a free end. Robin uses the outward derivative `−∂_s`:
/// `α ς − ε k (ς'/k) = 0`, normalized by `α + ε|k|`.
pub(crate) fn free_end_block(bc: FreeEndBc, k: c64, epsilon: f64) -> Block {
    let (x, y) = match bc {
        FreeEndBc::Dirichlet => (c(1.0, 0.0), c(0.0, 0.0)),
        FreeEndBc::Neumann => (c(0.0, 0.0), c(1.0, 0.0)),
        FreeEndBc::Robin(alpha) => {
            let n = alpha + epsilon * k.norm();
            if n == 0.0 {
                (c(0.0, 0.0), c(1.0, 0.0))
            } else {
                (c(alpha / n, 0.0), -k * (epsilon / n))
            }
        }
    };
    (Mat::from_fn(1, 1, |_, _| x), Mat::from_fn(1, 1, |_, _| y))
}

/// Assembles the column-scaled system from per-vertex row blocks.
pub(crate) fn assemble(graph: &MetricGraph, k: c64, blocks: &[Block]) -> SecularSystem {
    let mut columns = Vec::new();
    let mut edge_column = Vec::with_capacity(graph.edges.len());
    let mut phase = c(1.0, 0.0);
    for (e, edge) in graph.edges.iter().enumerate() {
        edge_column.push(columns.len());
        columns.push(ColumnMeta {
            edge: e,
            coefficient: Coefficient::Outgoing,
        });
        if !edge.is_infinite() {
            columns.push(ColumnMeta {
                edge: e,
                coefficient: Coefficient::ScaledIncoming,
            });
            phase *= (-I * k * edge.length).exp();
        }
    }
    let n = columns.len();
    let mut base = Mat::<c64>::zeros(n, n);
    let mut shift = Mat::<f64>::zeros(n, n);
    let mut rows = Vec::with_capacity(n);
    for (vi, v) in graph.vertices.iter().enumerate() {
        let (x, y) = &blocks[vi];
        let row0 = rows.len();
        for ch in 0..v.degree() {
            rows.push(RowMeta {
                vertex: vi,
                channel: ch,
            });
        }
        for (j, &e) in v.order.iter().enumerate() {
            let edge = &graph.edges[e];
            let col = edge_column[e];
            // (column of A, column of B if it is an unknown, shift on B)
            let (ca, cb) = if edge.is_infinite() {
                (col, None)
            } else {
                match graph
                    .local_coordinate(e, vi)
                    .expect("validated incidence")
                    .orientation
                {
                    Orientation::Forward => (col, Some(col + 1)),
                    Orientation::Reversed => (col + 1, Some(col)),
                }
            };
            for i in 0..v.degree() {
                let alpha = x[(i, j)] + I * y[(i, j)];
                let beta = x[(i, j)] - I * y[(i, j)];
                base[(row0 + i, ca)] += alpha;
                if let Some(cb) = cb {
                    base[(row0 + i, cb)] += beta;
                    shift[(row0 + i, cb)] = edge.length;
                }
            }
        }
    }
    let matrix = Mat::from_fn(n, n, |i, j| {
        let s = shift[(i, j)];
        if s == 0.0 {
            base[(i, j)]
        } else {
            base[(i, j)] * (I * k * s).exp()
        }
    });
    SecularSystem {
        k,
        matrix,
        base,
        shift,
        rows,
        columns,
        phase,
        edge_column,
    }
}

pub fn build_system(graph: &MetricGraph, ctx: &SpectralContext) -> Result<SecularSystem> {
    let blocks = graph_blocks(graph, ctx)?;
    Ok(assemble(graph, ctx.k, &blocks))
}

pub fn secular_determinant(graph: &MetricGraph, ctx: &SpectralContext) -> Result<c64> {
    Ok(build_system(graph, ctx)?.determinant())
}

/// Smallest singular value of the system matrix.
pub fn singularity_proximity(graph: &MetricGraph, ctx: &SpectralContext) -> Result<f64> {
    let s = build_system(graph, ctx)?.singular_values()?;
    Ok(s.last().copied().unwrap_or(f64::INFINITY))
}

/// `σ_min` of the system at each λ; runs in parallel.
pub fn proximity_sweep(graph: &MetricGraph, lambdas: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    lambdas
        .par_iter()
        .map(|&l| singularity_proximity(graph, &SpectralContext::new(graph, l, epsilon)?))
        .collect()
}

/// Errors with [`Error::SpectralPoint`] if `M` is numerically singular.
pub(crate) fn check_nonsingular(system: &SecularSystem, lambda: f64) -> Result<()> {
    let s = system.singular_values()?;
    let norm = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin <= SINGULARITY_TOLERANCE * norm {
        return Err(Error::SpectralPoint {
            lambda,
            sigma_min: smin,
            norm,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fields.

/// Plane-wave coefficients of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeAmplitude {
    pub a: c64,
    /// Finite edge: `b e^{−ikl}`. Lead: the prescribed incoming amplitude.
    pub b: c64,
    pub length: f64,
}

impl EdgeAmplitude {
    pub fn is_infinite(&self) -> bool {
        self.length.is_infinite()
    }

    /// Incoming amplitude `b` of `b e^{−ikt}`.
    pub fn incoming(&self, k: c64) -> c64 {
        if self.is_infinite() {
            self.b
        } else {
            self.b * (I * k * self.length).exp()
        }
    }

    pub fn value(&self, k: c64, t: f64) -> c64 {
        if self.is_infinite() {
            self.a * (I * k * t).exp() + self.b * (-I * k * t).exp()
        } else {
            self.a * (I * k * t).exp() + self.b * (I * k * (self.length - t)).exp()
        }
    }

    pub fn derivative(&self, k: c64, t: f64) -> c64 {
        if self.is_infinite() {
            I * k * (self.a * (I * k * t).exp() - self.b * (-I * k * t).exp())
        } else {
            I * k * (self.a * (I * k * t).exp() - self.b * (I * k * (self.length - t)).exp())
        }
    }
}

/// A solution `a e^{ikt} + b e^{−ikt}` on every edge.
#[derive(Debug, Clone)]
pub struct AmplitudeField {
    pub k: c64,
    pub epsilon: f64,
    pub edges: Vec<EdgeAmplitude>,
}

impl AmplitudeField {
    pub(crate) fn from_solution(
        graph: &MetricGraph,
        system: &SecularSystem,
        x: &[c64],
        incident: &[c64],
    ) -> Self {
        let edges = graph
            .edges
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let col = system.edge_column[e];
                if edge.is_infinite() {
                    EdgeAmplitude {
                        a: x[col],
                        b: incident[e],
                        length: edge.length,
                    }
                } else {
                    EdgeAmplitude {
                        a: x[col],
                        b: x[col + 1],
                        length: edge.length,
                    }
                }
            })
            .collect();
        AmplitudeField {
            k: system.k,
            epsilon: 0.0,
            edges,
        }
    }

    pub fn value(&self, edge: usize, t: f64) -> c64 {
        self.edges[edge].value(self.k, t)
    }

    pub fn derivative(&self, edge: usize, t: f64) -> c64 {
        self.edges[edge].derivative(self.k, t)
    }

    /// `Σ_e ∫ |ς_e|²` in closed form; leads are excluded.
    pub fn l2_norm_squared(&self) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        for e in self.edges.iter().filter(|e| !e.is_infinite()) {
            let l = e.length;
            let a = e.a;
            let bt = e.b; // ς = a e^{ikt} + bt e^{ik(l−t)}
                          // |a|² ∫|e^{ikt}|² + |bt|² ∫|e^{ik(l−t)}|² + 2 Re[a conj(bt) ∫ e^{ikt} conj(e^{ik(l−t)})]
            let kr = k.re;
            let ki = k.im;
            let int_decay = |rate: f64| {
                if rate.abs() < 1e-14 {
                    l
                } else {
                    (1.0 - (-rate * l).exp()) / rate
                }
            };
            let ia = int_decay(2.0 * ki);
            let ib = ia; // same by symmetry t → l − t
                         // e^{ikt} conj(e^{ik(l−t)}) = e^{−ki l} e^{i kr (2t − l)}
            let cross = {
                let f = (-ki * l).exp();
                if kr.abs() * l < 1e-12 {
                    c(f * l, 0.0)
                } else {
                    let w = 2.0 * kr;
                    // ∫_0^l e^{i kr (2t − l)} dt = 2 sin(kr l)/(2 kr)
                    c(f * 2.0 * (kr * l).sin() / w, 0.0)
                }
            };
            total += a.norm_sqr() * ia + bt.norm_sqr() * ib + 2.0 * (a * bt.conj() * cross).re;
        }
        total
    }

    pub fn scale(&mut self, s: c64) {
        for e in &mut self.edges {
            e.a *= s;
            if !e.is_infinite() {
                e.b *= s;
            }
        }
    }
}

/// Residual `max |row|` of the vertex rows of `system` applied to `field`.
pub fn vertex_residual(system: &SecularSystem, field: &AmplitudeField) -> f64 {
    let n = system.size();
    let mut x = vec![c(0.0, 0.0); n];
    for (e, amp) in field.edges.iter().enumerate() {
        let col = system.edge_column[e];
        x[col] = amp.a;
        if !amp.is_infinite() {
            x[col + 1] = amp.b;
        }
    }
    let mut r = 0.0f64;
    for i in 0..n {
        let mut s = c(0.0, 0.0);
        for j in 0..n {
            s += system.matrix[(i, j)] * x[j];
        }
        r = r.max(s.norm());
    }
    r
}

// ---------------------------------------------------------------------------
// Green function.

/// A point on the graph: edge index and edge coordinate `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub edge: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Green function `g(·, ξ)` for a fixed source `ξ`.
#[derive(Debug, Clone)]
pub struct GreenEvaluation {
    pub source: Point,
    pub field: AmplitudeField,
}

impl GreenEvaluation {
    fn particular(&self, t: f64) -> (c64, c64) {
        // sin(k(t − τ))/(ε² k) for t < τ, zero beyond.
        let k = self.field.k;
        let e2 = self.field.epsilon * self.field.epsilon;
        let x = k * (t - self.source.t);
        (x.sin() / (k * e2), x.cos() / e2)
    }

    pub fn value(&self, p: Point) -> c64 {
        let mut v = self.field.value(p.edge, p.t);
        if p.edge == self.source.edge && p.t < self.source.t {
            v += self.particular(p.t).0;
        }
        v
    }

    /// `dg/dt`; at the source the one-sided limit selected by `side`.
    pub fn derivative(&self, p: Point, side: Side) -> c64 {
        let mut v = self.field.derivative(p.edge, p.t);
        let below = p.t < self.source.t || (p.t == self.source.t && side == Side::Below);
        if p.edge == self.source.edge && below {
            v += self.particular(p.t).1;
        }
        v
    }
}

pub fn green_solve(
    graph: &MetricGraph,
    ctx: &SpectralContext,
    source: Point,
) -> Result<GreenEvaluation> {
    let edge = graph
        .edges
        .get(source.edge)
        .ok_or_else(|| Error::invariant("edge", format!("#{}", source.edge), "no such edge"))?;
    if !(source.t > 0.0 && source.t < edge.length) {
        return Err(Error::invariant(
            "edge",
            edge.id.clone(),
            format!("source at t = {} is not interior", source.t),
        ));
    }
    let blocks = graph_blocks(graph, ctx)?;
    let system = assemble(graph, ctx.k, &blocks);
    check_nonsingular(&system, ctx.lambda.re)?;

    let k = ctx.k;
    let e2 = ctx.epsilon * ctx.epsilon;
    let tau = source.t;
    let p0 = -(k * tau).sin() / (k * e2);
    let dp0 = (k * tau).cos() / (k * e2);
    let v = edge.start;
    let ch = graph.vertices[v]
        .order
        .iter()
        .position(|&e| e == source.edge)
        .expect("incident");
    let row0 = system
        .rows
        .iter()
        .position(|r| r.vertex == v)
        .expect("vertex rows");
    let (x, y) = &blocks[v];
    let mut rhs = vec![c(0.0, 0.0); system.size()];
    for i in 0..graph.vertices[v].degree() {
        rhs[row0 + i] = -(x[(i, ch)] * p0 + y[(i, ch)] * dp0);
    }
    let sol = linalg::solve(&system.matrix, &rhs);
    let incident = vec![c(0.0, 0.0); graph.edges.len()];
    let mut field = AmplitudeField::from_solution(graph, &system, &sol, &incident);
    field.epsilon = ctx.epsilon;
    Ok(GreenEvaluation { source, field })
}

pub fn green_function(
    graph: &MetricGraph,
    ctx: &SpectralContext,
    source: Point,
    target: Point,
) -> Result<c64> {
    let g = green_solve(graph, ctx, source)?;
    let e = graph
        .edges
        .get(target.edge)
        .ok_or_else(|| Error::invariant("edge", format!("#{}", target.edge), "no such edge"))?;
    if !(target.t >= 0.0 && target.t <= e.length) {
        return Err(Error::invariant(
            "edge",
            e.id.clone(),
            format!("target t = {} off the edge", target.t),
        ));
    }
    Ok(g.value(target))
}
