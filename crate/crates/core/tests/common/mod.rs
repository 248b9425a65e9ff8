//! Random graphs and vertex data shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use faer::{c64, Mat};
use fibernet::graph::{Edge, Vertex, VertexKind};
use fibernet::linalg::CMat;
use fibernet::{FreeEndBc, MetricGraph, VertexCondition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const LAMBDA0: f64 = PI * PI;
pub const LAMBDA1: f64 = 4.0 * PI * PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Real orthogonal matrix from Gram-Schmidt on uniform entries.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Mat<f64> {
    loop {
        let mut q = Mat::<f64>::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let dot: f64 = (0..d).map(|r| q[(r, i)] * q[(r, j)]).sum();
                for r in 0..d {
                    q[(r, j)] -= dot * q[(r, i)];
                }
            }
            let n: f64 = (0..d).map(|r| q[(r, j)].powi(2)).sum::<f64>().sqrt();
            if n < 1e-3 {
                ok = false;
                break;
            }
            for r in 0..d {
                q[(r, j)] /= n;
            }
        }
        if ok {
            return q;
        }
    }
}

/// `Q diag(e^{iθ}) Qᵀ`: symmetric and unitary for any phases.
pub fn symmetric_unitary(q: &Mat<f64>, phases: &[f64]) -> CMat {
    let d = q.nrows();
    Mat::from_fn(d, d, |i, j| {
        (0..d)
            .map(|n| c64::new(phases[n].cos(), phases[n].sin()) * (q[(i, n)] * q[(j, n)]))
            .fold(c64::new(0.0, 0.0), |a, b| a + b)
    })
}

/// Random symmetric unitary matrix; real orthogonal (phases 0 or π) if `real`.
pub fn random_vertex_matrix(rng: &mut ChaCha8Rng, d: usize, real: bool) -> CMat {
    let q = random_orthogonal(rng, d);
    let phases: Vec<f64> = (0..d)
        .map(|_| {
            if real {
                if rng.gen_bool(0.5) {
                    0.0
                } else {
                    PI
                }
            } else {
                rng.gen_range(0.0..2.0 * PI)
            }
        })
        .collect();
    symmetric_unitary(&q, &phases)
}

fn random_condition(rng: &mut ChaCha8Rng, d: usize, real: bool) -> VertexCondition {
    if rng.gen_bool(0.35) {
        VertexCondition::Kirchhoff { degree: d }
    } else {
        VertexCondition::Constant(random_vertex_matrix(rng, d, real))
    }
}

fn random_bc(rng: &mut ChaCha8Rng) -> FreeEndBc {
    match rng.gen_range(0..3) {
        0 => FreeEndBc::Dirichlet,
        1 => FreeEndBc::Neumann,
        _ => FreeEndBc::Robin(rng.gen_range(0.0..3.0)),
    }
}

/// Graph with 1 to 3 junctions joined by a tree (plus maybe one cycle edge),
/// free-end stubs and, if `leads`, 1 to 3 leads. `real` restricts the vertex
/// data to real orthogonal matrices.
pub fn random_graph(rng: &mut ChaCha8Rng, leads: bool, real: bool) -> MetricGraph {
    let nj = rng.gen_range(1..=3usize);
    // (start, end) with free ends encoded as None until vertices are built
    let mut finite: Vec<(usize, usize)> = Vec::new();
    for i in 1..nj {
        finite.push((rng.gen_range(0..i), i));
    }
    if nj >= 2 && rng.gen_bool(0.5) {
        let a = rng.gen_range(0..nj);
        let b = (a + rng.gen_range(1..nj)) % nj;
        finite.push((a, b));
    }
    let mut stubs: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..nj)).collect();
    let mut lead_at: Vec<usize> = if leads {
        (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..nj)).collect()
    } else {
        Vec::new()
    };
    if !leads && stubs.is_empty() && finite.is_empty() {
        stubs.push(0);
    }
    for j in 0..nj {
        let deg = |stubs: &Vec<usize>, lead_at: &Vec<usize>| {
            finite.iter().filter(|e| e.0 == j || e.1 == j).count()
                + stubs.iter().filter(|&&s| s == j).count()
                + lead_at.iter().filter(|&&s| s == j).count()
        };
        while deg(&stubs, &lead_at) < 2 {
            if leads && rng.gen_bool(0.5) {
                lead_at.push(j);
            } else {
                stubs.push(j);
            }
        }
    }

    let mut edges = Vec::new();
    let mut vertex_ids: Vec<String> = (0..nj).map(|j| format!("j{j}")).collect();
    let mut free_vertices = Vec::new();
    for &(a, b) in &finite {
        edges.push(Edge {
            id: format!("e{}", edges.len()),
            start: a,
            end: Some(b),
            length: rng.gen_range(0.4..1.6),
        });
    }
    for &s in &stubs {
        let v = vertex_ids.len();
        vertex_ids.push(format!("f{v}"));
        free_vertices.push((v, random_bc(rng)));
        edges.push(Edge {
            id: format!("e{}", edges.len()),
            start: s,
            end: Some(v),
            length: rng.gen_range(0.4..1.6),
        });
    }
    for &s in &lead_at {
        edges.push(Edge {
            id: format!("lead{}", edges.len()),
            start: s,
            end: None,
            length: f64::INFINITY,
        });
    }
    let mut vertices = Vec::new();
    for j in 0..nj {
        let order: Vec<usize> = (0..edges.len())
            .filter(|&e| edges[e].start == j || edges[e].end == Some(j))
            .collect();
        let condition = random_condition(rng, order.len(), real);
        vertices.push(Vertex {
            id: vertex_ids[j].clone(),
            kind: VertexKind::Junction(condition),
            order,
        });
    }
    for (v, bc) in free_vertices {
        let e = edges.iter().position(|e| e.end == Some(v)).unwrap();
        vertices.push(Vertex {
            id: vertex_ids[v].clone(),
            kind: VertexKind::FreeEnd(bc),
            order: vec![e],
        });
    }
    MetricGraph::new(LAMBDA0, LAMBDA1, vertices, edges).expect("valid random graph")
}

/// Random spider of degree 2 to 5.
pub fn random_spider(rng: &mut ChaCha8Rng) -> MetricGraph {
    let d = rng.gen_range(2..=5);
    let condition = random_condition(rng, d, false);
    fibernet::graph::spider(LAMBDA0, LAMBDA1, condition).unwrap()
}

pub fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
