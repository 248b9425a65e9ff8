//! Metric graphs: vertices with gluing data, edges with lengths and a stored
//! orientation, and the JSON document format.
//!
//! Every finite edge carries a single coordinate `t ∈ [0, l]` with `t = 0`
//! at its start vertex. Vertex conditions are written in the vertex-local
//! coordinate `s`, which is `t` at the start vertex and `l − t` at the end
//! vertex (see [`MetricGraph::local_coordinate`]).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vertex::{
    self, matrix_from_pairs, matrix_to_pairs, Table, TableDocument, VertexCondition,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeEndBc {
    Dirichlet,
    Neumann,
    /// `ε ∂_n ς + α ς = 0` with the outward normal derivative, `α ≥ 0`.
    Robin(f64),
}

#[derive(Debug, Clone)]
pub enum VertexKind {
    FreeEnd(FreeEndBc),
    Junction(VertexCondition),
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    /// Incident edge indices in channel order.
    pub order: Vec<usize>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.order.len()
    }

    pub fn is_junction(&self) -> bool {
        matches!(self.kind, VertexKind::Junction(_))
    }

    pub fn condition(&self) -> Option<&VertexCondition> {
        match &self.kind {
            VertexKind::Junction(c) => Some(c),
            VertexKind::FreeEnd(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub start: usize,
    pub end: Option<usize>,
    /// `f64::INFINITY` for leads.
    pub length: f64,
}

impl Edge {
    pub fn is_infinite(&self) -> bool {
        self.end.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The vertex sits at `t = 0`; `s = t`.
    Forward,
    /// The vertex sits at `t = l`; `s = l − t`.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCoordinate {
    pub orientation: Orientation,
    pub length: f64,
}

impl LocalCoordinate {
    /// Vertex-local coordinate of the edge point `t`.
    pub fn to_local(&self, t: f64) -> f64 {
        match self.orientation {
            Orientation::Forward => t,
            Orientation::Reversed => self.length - t,
        }
    }

    pub fn to_edge(&self, s: f64) -> f64 {
        self.to_local(s)
    }
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    pub lambda0: f64,
    pub lambda1: f64,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl MetricGraph {
    /// Validates and builds a graph from already-resolved parts.
    pub fn new(
        lambda0: f64,
        lambda1: f64,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let g = MetricGraph {
            lambda0,
            lambda1,
            vertices,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn lead_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_infinite()).count()
    }

    pub fn is_bounded(&self) -> bool {
        self.lead_count() == 0
    }

    pub fn leads(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].is_infinite())
            .collect()
    }

    pub fn junctions(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].is_junction())
            .collect()
    }

    pub fn max_length(&self) -> f64 {
        self.edges
            .iter()
            .filter(|e| !e.is_infinite())
            .map(|e| e.length)
            .fold(0.0, f64::max)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn local_coordinate(&self, edge: usize, vertex: usize) -> Result<LocalCoordinate> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::invariant("edge", format!("#{edge}"), "no such edge"))?;
        let orientation = if e.start == vertex {
            Orientation::Forward
        } else if e.end == Some(vertex) {
            Orientation::Reversed
        } else {
            let vid = self
                .vertices
                .get(vertex)
                .map(|v| v.id.clone())
                .unwrap_or(format!("#{vertex}"));
            return Err(Error::invariant(
                "edge",
                e.id.clone(),
                format!("vertex `{vid}` is not an endpoint"),
            ));
        };
        Ok(LocalCoordinate {
            orientation,
            length: e.length,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda1.is_finite() && self.lambda0 < self.lambda1) {
            return Err(Error::Schema(format!(
                "need finite lambda0 < lambda1, got {} and {}",
                self.lambda0, self.lambda1
            )));
        }
        let nv = self.vertices.len();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (i, e) in self.edges.iter().enumerate() {
            if e.start >= nv || e.end.is_some_and(|v| v >= nv) {
                return Err(Error::invariant(
                    "edge",
                    e.id.clone(),
                    "references a missing vertex",
                ));
            }
            match e.end {
                Some(end) => {
                    if end == e.start {
                        return Err(Error::invariant(
                            "edge",
                            e.id.clone(),
                            "endpoints must be distinct",
                        ));
                    }
                    if !(e.length > 0.0 && e.length.is_finite()) {
                        return Err(Error::invariant(
                            "edge",
                            e.id.clone(),
                            format!("length must be positive, got {}", e.length),
                        ));
                    }
                    incident[e.start].push(i);
                    incident[end].push(i);
                }
                None => {
                    if e.length != f64::INFINITY {
                        return Err(Error::invariant(
                            "edge",
                            e.id.clone(),
                            "an edge without end must be infinite",
                        ));
                    }
                    incident[e.start].push(i);
                }
            }
        }
        for (vi, v) in self.vertices.iter().enumerate() {
            let mut sorted = v.order.clone();
            sorted.sort_unstable();
            let mut expect = incident[vi].clone();
            expect.sort_unstable();
            if sorted != expect {
                return Err(Error::invariant(
                    "vertex",
                    v.id.clone(),
                    "channel order must list every incident edge exactly once",
                ));
            }
            match &v.kind {
                VertexKind::FreeEnd(bc) => {
                    if v.degree() != 1 {
                        return Err(Error::invariant(
                            "vertex",
                            v.id.clone(),
                            format!("free end has degree {}, expected 1", v.degree()),
                        ));
                    }
                    if let FreeEndBc::Robin(alpha) = bc {
                        if !(*alpha >= 0.0 && alpha.is_finite()) {
                            return Err(Error::invariant(
                                "vertex",
                                v.id.clone(),
                                "robin alpha must be >= 0",
                            ));
                        }
                    }
                }
                VertexKind::Junction(cond) => {
                    if v.degree() < 2 {
                        return Err(Error::invariant(
                            "vertex",
                            v.id.clone(),
                            format!("junction has degree {}, expected >= 2", v.degree()),
                        ));
                    }
                    if cond.degree() != v.degree() {
                        return Err(Error::invariant(
                            "vertex",
                            v.id.clone(),
                            format!(
                                "scattering matrix is {0}x{0} but the vertex has degree {1}",
                                cond.degree(),
                                v.degree()
                            ),
                        ));
                    }
                }
            }
        }
        let mut seen = HashMap::new();
        for v in &self.vertices {
            if seen.insert(("v", v.id.as_str()), ()).is_some() {
                return Err(Error::invariant("vertex", v.id.clone(), "duplicate id"));
            }
        }
        for e in &self.edges {
            if seen.insert(("e", e.id.as_str()), ()).is_some() {
                return Err(Error::invariant("edge", e.id.clone(), "duplicate id"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Document format.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub lambda0: f64,
    pub lambda1: f64,
    pub vertices: Vec<VertexDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDocument {
    FreeEnd,
    Junction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcDocument {
    Dirichlet,
    Neumann,
    Robin(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableRef {
    Path(String),
    Inline(TableDocument),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionDocument {
    Kirchhoff,
    Matrix(Vec<Vec<[f64; 2]>>),
    Table(TableRef),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDocument {
    pub id: String,
    pub kind: KindDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionDocument>,
    pub order: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthDocument {
    Finite(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: String,
    pub start: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
    pub length: LengthDocument,
}

/// Parses a graph document. Table paths are resolved against `base_dir`.
pub fn parse_graph(document: &str, base_dir: Option<&Path>) -> Result<MetricGraph> {
    let doc: GraphDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    from_document(doc, base_dir)
}

pub fn load_graph(path: &Path) -> Result<MetricGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, path.parent())
}

pub fn from_document(doc: GraphDocument, base_dir: Option<&Path>) -> Result<MetricGraph> {
    let vertex_ids: HashMap<&str, usize> = doc
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id.as_str(), i))
        .collect();
    let edge_ids: HashMap<&str, usize> = doc
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();

    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let start = *vertex_ids.get(e.start.as_str()).ok_or_else(|| {
            Error::invariant(
                "edge",
                e.id.clone(),
                format!("unknown start vertex `{}`", e.start),
            )
        })?;
        let end = match &e.end {
            Some(id) => Some(*vertex_ids.get(id.as_str()).ok_or_else(|| {
                Error::invariant("edge", e.id.clone(), format!("unknown end vertex `{id}`"))
            })?),
            None => None,
        };
        let length = match &e.length {
            LengthDocument::Finite(l) => *l,
            LengthDocument::Keyword(s) if s == "inf" => f64::INFINITY,
            LengthDocument::Keyword(s) => {
                return Err(Error::Schema(format!(
                    "edge `{}`: length must be a number or \"inf\", got \"{s}\"",
                    e.id
                )))
            }
        };
        if end.is_none() && length.is_finite() {
            return Err(Error::invariant(
                "edge",
                e.id.clone(),
                "finite edge needs an end vertex",
            ));
        }
        if end.is_some() && !length.is_finite() {
            return Err(Error::invariant(
                "edge",
                e.id.clone(),
                "infinite edge must not have an end vertex",
            ));
        }
        edges.push(Edge {
            id: e.id.clone(),
            start,
            end,
            length,
        });
    }

    let mut vertices = Vec::with_capacity(doc.vertices.len());
    for v in &doc.vertices {
        let order = v
            .order
            .iter()
            .map(|id| {
                edge_ids.get(id.as_str()).copied().ok_or_else(|| {
                    Error::invariant(
                        "vertex",
                        v.id.clone(),
                        format!("unknown edge `{id}` in order"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = match v.kind {
            KindDocument::FreeEnd => {
                if v.condition.is_some() {
                    return Err(Error::Schema(format!(
                        "free end `{}` must not carry a condition",
                        v.id
                    )));
                }
                let bc = match v.bc {
                    Some(BcDocument::Dirichlet) => FreeEndBc::Dirichlet,
                    Some(BcDocument::Neumann) => FreeEndBc::Neumann,
                    Some(BcDocument::Robin(a)) => FreeEndBc::Robin(a),
                    None => {
                        return Err(Error::Schema(format!(
                            "free end `{}` is missing `bc`",
                            v.id
                        )))
                    }
                };
                VertexKind::FreeEnd(bc)
            }
            KindDocument::Junction => {
                if v.bc.is_some() {
                    return Err(Error::Schema(format!(
                        "junction `{}` must not carry `bc`",
                        v.id
                    )));
                }
                let cond = match &v.condition {
                    Some(ConditionDocument::Kirchhoff) => VertexCondition::Kirchhoff {
                        degree: order.len(),
                    },
                    Some(ConditionDocument::Matrix(rows)) => VertexCondition::Constant(
                        matrix_from_pairs(rows)
                            .map_err(|e| Error::invariant("vertex", v.id.clone(), e.to_string()))?,
                    ),
                    Some(ConditionDocument::Table(TableRef::Path(p))) => {
                        let path = match base_dir {
                            Some(b) => b.join(p),
                            None => PathBuf::from(p),
                        };
                        let mut table = vertex::load_table(&path)?;
                        table.source = Some(PathBuf::from(p));
                        VertexCondition::Tabulated(table)
                    }
                    Some(ConditionDocument::Table(TableRef::Inline(t))) => {
                        VertexCondition::Tabulated(t.clone().into_table()?)
                    }
                    None => {
                        return Err(Error::Schema(format!(
                            "junction `{}` is missing `condition`",
                            v.id
                        )))
                    }
                };
                VertexKind::Junction(cond)
            }
        };
        vertices.push(Vertex {
            id: v.id.clone(),
            kind,
            order,
        });
    }
    MetricGraph::new(doc.lambda0, doc.lambda1, vertices, edges)
}

pub fn to_document(graph: &MetricGraph) -> GraphDocument {
    let vertices = graph
        .vertices
        .iter()
        .map(|v| {
            let order = v.order.iter().map(|&e| graph.edges[e].id.clone()).collect();
            match &v.kind {
                VertexKind::FreeEnd(bc) => VertexDocument {
                    id: v.id.clone(),
                    kind: KindDocument::FreeEnd,
                    bc: Some(match *bc {
                        FreeEndBc::Dirichlet => BcDocument::Dirichlet,
                        FreeEndBc::Neumann => BcDocument::Neumann,
                        FreeEndBc::Robin(a) => BcDocument::Robin(a),
                    }),
                    condition: None,
                    order,
                },
                VertexKind::Junction(cond) => VertexDocument {
                    id: v.id.clone(),
                    kind: KindDocument::Junction,
                    bc: None,
                    condition: Some(match cond {
                        VertexCondition::Kirchhoff { .. } => ConditionDocument::Kirchhoff,
                        VertexCondition::Constant(m) => {
                            ConditionDocument::Matrix(matrix_to_pairs(m))
                        }
                        VertexCondition::Tabulated(t) => ConditionDocument::Table(table_ref(t)),
                    }),
                    order,
                },
            }
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgeDocument {
            id: e.id.clone(),
            start: graph.vertices[e.start].id.clone(),
            end: e.end.map(|v| graph.vertices[v].id.clone()),
            length: if e.is_infinite() {
                LengthDocument::Keyword("inf".into())
            } else {
                LengthDocument::Finite(e.length)
            },
        })
        .collect();
    GraphDocument {
        lambda0: graph.lambda0,
        lambda1: graph.lambda1,
        vertices,
        edges,
    }
}

fn table_ref(t: &Table) -> TableRef {
    match &t.source {
        Some(p) => TableRef::Path(p.to_string_lossy().into_owned()),
        None => TableRef::Inline(TableDocument::from_table(t)),
    }
}

pub fn serialize_graph(graph: &MetricGraph) -> String {
    serde_json::to_string_pretty(&to_document(graph)).expect("graph documents always serialize")
}

/// Field-by-field structural equality, including matrix entries.
pub fn graphs_equal(a: &MetricGraph, b: &MetricGraph) -> bool {
    a.lambda0 == b.lambda0
        && a.lambda1 == b.lambda1
        && a.edges == b.edges
        && a.vertices.len() == b.vertices.len()
        && a.vertices.iter().zip(&b.vertices).all(|(x, y)| {
            x.id == y.id
                && x.order == y.order
                && match (&x.kind, &y.kind) {
                    (VertexKind::FreeEnd(p), VertexKind::FreeEnd(q)) => p == q,
                    (VertexKind::Junction(p), VertexKind::Junction(q)) => conditions_equal(p, q),
                    _ => false,
                }
        })
}

fn conditions_equal(a: &VertexCondition, b: &VertexCondition) -> bool {
    match (a, b) {
        (VertexCondition::Kirchhoff { degree: p }, VertexCondition::Kirchhoff { degree: q }) => {
            p == q
        }
        (VertexCondition::Constant(p), VertexCondition::Constant(q)) => {
            matrix_to_pairs(p) == matrix_to_pairs(q)
        }
        (VertexCondition::Tabulated(p), VertexCondition::Tabulated(q)) => {
            p.degree == q.degree
                && p.lambda0 == q.lambda0
                && p.lambdas == q.lambdas
                && p.matrices
                    .iter()
                    .zip(&q.matrices)
                    .all(|(x, y)| matrix_to_pairs(x) == matrix_to_pairs(y))
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Builders used by examples and tests.

/// Star with one junction and `lengths.len()` finite edges ending in free ends.
pub fn star(
    lambda0: f64,
    lambda1: f64,
    condition: VertexCondition,
    lengths: &[f64],
    tip: FreeEndBc,
) -> Result<MetricGraph> {
    let d = lengths.len();
    let mut vertices = vec![Vertex {
        id: "c".into(),
        kind: VertexKind::Junction(condition),
        order: (0..d).collect(),
    }];
    let mut edges = Vec::with_capacity(d);
    for (j, &l) in lengths.iter().enumerate() {
        vertices.push(Vertex {
            id: format!("tip{j}"),
            kind: VertexKind::FreeEnd(tip),
            order: vec![j],
        });
        edges.push(Edge {
            id: format!("e{j}"),
            start: 0,
            end: Some(j + 1),
            length: l,
        });
    }
    MetricGraph::new(lambda0, lambda1, vertices, edges)
}

/// Spider: one junction with `d` leads.
pub fn spider(lambda0: f64, lambda1: f64, condition: VertexCondition) -> Result<MetricGraph> {
    let d = condition.degree();
    let vertices = vec![Vertex {
        id: "c".into(),
        kind: VertexKind::Junction(condition),
        order: (0..d).collect(),
    }];
    let edges = (0..d)
        .map(|j| Edge {
            id: format!("lead{j}"),
            start: 0,
            end: None,
            length: f64::INFINITY,
        })
        .collect();
    MetricGraph::new(lambda0, lambda1, vertices, edges)
}

/// Single finite edge between two free ends.
pub fn segment(
    lambda0: f64,
    lambda1: f64,
    length: f64,
    left: FreeEndBc,
    right: FreeEndBc,
) -> Result<MetricGraph> {
    let vertices = vec![
        Vertex {
            id: "a".into(),
            kind: VertexKind::FreeEnd(left),
            order: vec![0],
        },
        Vertex {
            id: "b".into(),
            kind: VertexKind::FreeEnd(right),
            order: vec![0],
        },
    ];
    let edges = vec![Edge {
        id: "e".into(),
        start: 0,
        end: Some(1),
        length,
    }];
    MetricGraph::new(lambda0, lambda1, vertices, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = r#"{
        "lambda0": 9.8696, "lambda1": 39.478,
        "vertices": [
            {"id": "c", "kind": "junction", "condition": "kirchhoff", "order": ["e1", "e2", "e3"]},
            {"id": "a", "kind": "free_end", "bc": "dirichlet", "order": ["e1"]},
            {"id": "b", "kind": "free_end", "bc": "neumann", "order": ["e2"]},
            {"id": "d", "kind": "free_end", "bc": {"robin": 0.5}, "order": ["e3"]}
        ],
        "edges": [
            {"id": "e1", "start": "c", "end": "a", "length": 1.0},
            {"id": "e2", "start": "c", "end": "b", "length": 1.0},
            {"id": "e3", "start": "d", "end": "c", "length": 1.0}
        ]
    }"#;

    #[test]
    fn parses_star() {
        let g = parse_graph(STAR, None).unwrap();
        assert_eq!((g.edge_count(), g.lead_count()), (3, 0));
        assert!(matches!(g.vertices[3].kind, VertexKind::FreeEnd(FreeEndBc::Robin(a)) if a == 0.5));
    }

    #[test]
    fn segment_without_junction_is_valid() {
        let doc = r#"{"lambda0": 1, "lambda1": 4,
            "vertices": [{"id": "a", "kind": "free_end", "bc": "dirichlet", "order": ["e"]},
                         {"id": "b", "kind": "free_end", "bc": "dirichlet", "order": ["e"]}],
            "edges": [{"id": "e", "start": "a", "end": "b", "length": 2}]}"#;
        let g = parse_graph(doc, None).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.junctions().is_empty());
    }

    #[test]
    fn size_mismatch_names_the_vertex() {
        let doc = r#"{"lambda0": 1, "lambda1": 4,
            "vertices": [{"id": "hub", "kind": "junction",
                          "condition": {"matrix": [[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]},
                          "order": ["e", "f"]},
                         {"id": "a", "kind": "free_end", "bc": "dirichlet", "order": ["e"]},
                         {"id": "b", "kind": "free_end", "bc": "dirichlet", "order": ["f"]}],
            "edges": [{"id": "e", "start": "hub", "end": "a", "length": 1},
                      {"id": "f", "start": "hub", "end": "b", "length": 1}]}"#;
        let err = parse_graph(doc, None).unwrap_err();
        assert!(
            matches!(&err, Error::Invariant { id, .. } if id == "hub"),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let no_l0 = STAR.replace("\"lambda0\": 9.8696,", "");
        assert!(matches!(parse_graph(&no_l0, None), Err(Error::Schema(_))));
        let neg = STAR.replace(
            "\"length\": 1.0}\n        ]",
            "\"length\": -1.0}\n        ]",
        );
        assert!(matches!(
            parse_graph(&neg, None),
            Err(Error::Invariant { .. })
        ));
        let unknown = STAR.replace("\"dirichlet\"", "\"sticky\"");
        assert!(matches!(parse_graph(&unknown, None), Err(Error::Schema(_))));
        let swapped = STAR.replace("\"lambda1\": 39.478", "\"lambda1\": 1.0");
        assert!(parse_graph(&swapped, None).is_err());
    }

    #[test]
    fn degree_one_junction_rejected() {
        let doc = r#"{"lambda0": 1, "lambda1": 4,
            "vertices": [{"id": "j", "kind": "junction", "condition": {"matrix": [[[1,0]]]}, "order": ["e"]},
                         {"id": "a", "kind": "free_end", "bc": "dirichlet", "order": ["e"]}],
            "edges": [{"id": "e", "start": "j", "end": "a", "length": 1}]}"#;
        assert!(matches!(parse_graph(doc, None), Err(Error::Invariant { id, .. }) if id == "j"));
    }

    #[test]
    fn local_coordinates() {
        let g = parse_graph(STAR, None).unwrap();
        let e3 = g.edge_index("e3").unwrap();
        let d = g.vertex_index("d").unwrap();
        let c = g.vertex_index("c").unwrap();
        let a = g.local_coordinate(e3, d).unwrap();
        let b = g.local_coordinate(e3, c).unwrap();
        assert_eq!(a.orientation, Orientation::Forward);
        assert_eq!(b.orientation, Orientation::Reversed);
        assert_eq!(a.to_local(0.3) + b.to_local(0.3), 1.0);
        assert!(g
            .local_coordinate(e3, g.vertex_index("a").unwrap())
            .is_err());

        let sp = spider(1.0, 4.0, VertexCondition::Kirchhoff { degree: 3 }).unwrap();
        let lc = sp.local_coordinate(0, 0).unwrap();
        assert_eq!(lc.orientation, Orientation::Forward);
        assert_eq!(lc.to_local(5.0), 5.0);
    }

    #[test]
    fn round_trip() {
        let g = parse_graph(STAR, None).unwrap();
        let text = serialize_graph(&g);
        let h = parse_graph(&text, None).unwrap();
        assert!(graphs_equal(&g, &h));
        assert_eq!(text, serialize_graph(&h));
    }
}
