mod common;

use std::fs;

use fibernet::graph::{self, graphs_equal, load_graph, parse_graph, serialize_graph, Orientation};
use fibernet::vertex::{Table, TableDocument};
use fibernet::{Error, VertexCondition};
use proptest::prelude::*;

const STAR: &str = r#"{
  "lambda0": 9.8696, "lambda1": 39.478,
  "vertices": [
    {"id": "c", "kind": "junction", "condition": "kirchhoff", "order": ["a", "b", "d"]},
    {"id": "ta", "kind": "free_end", "bc": "dirichlet", "order": ["a"]},
    {"id": "tb", "kind": "free_end", "bc": "neumann", "order": ["b"]},
    {"id": "td", "kind": "free_end", "bc": {"robin": 0.5}, "order": ["d"]}
  ],
  "edges": [
    {"id": "a", "start": "c", "end": "ta", "length": 1.0},
    {"id": "b", "start": "c", "end": "tb", "length": 0.5},
    {"id": "d", "start": "td", "end": "c", "length": 2.0}
  ]
}"#;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), leads in any::<bool>(), real in any::<bool>()) {
        let g = common::random_graph(&mut common::rng(seed), leads, real);
        let text = serialize_graph(&g);
        let back = parse_graph(&text, None).unwrap();
        prop_assert!(graphs_equal(&g, &back));
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn endpoint_coordinates_add_up(seed in any::<u64>(), frac in 0.0f64..1.0) {
        let g = common::random_graph(&mut common::rng(seed), true, false);
        for (e, edge) in g.edges.iter().enumerate() {
            let Some(end) = edge.end else { continue };
            let a = g.local_coordinate(e, edge.start).unwrap();
            let b = g.local_coordinate(e, end).unwrap();
            prop_assert_eq!(a.orientation, Orientation::Forward);
            prop_assert_eq!(b.orientation, Orientation::Reversed);
            let t = frac * edge.length;
            prop_assert!((a.to_local(t) + b.to_local(t) - edge.length).abs() < 1e-12);
        }
    }
}

#[test]
fn parses_mixed_free_ends() {
    let g = parse_graph(STAR, None).unwrap();
    assert_eq!(g.edge_count(), 3);
    assert_eq!(g.lead_count(), 0);
    assert!(g.is_bounded());
    let d = g.edge_index("d").unwrap();
    let c = g.vertex_index("c").unwrap();
    let lc = g.local_coordinate(d, c).unwrap();
    assert_eq!(lc.orientation, Orientation::Reversed);
    assert_eq!(lc.to_local(0.5), 1.5);
}

#[test]
fn errors_name_the_offender() {
    let cases = [
        (STAR.replace("\"length\": 0.5", "\"length\": -0.5"), "`b`"),
        (STAR.replace("[\"a\", \"b\", \"d\"]", "[\"a\", \"b\"]"), "`c`"),
        (STAR.replace("\"end\": \"ta\"", "\"end\": \"nowhere\""), "`a`"),
    ];
    for (doc, id) in cases {
        let err = parse_graph(&doc, None).unwrap_err();
        assert!(matches!(err, Error::Invariant { .. }), "{err}");
        assert!(err.to_string().contains(id), "{err} should name {id}");
    }
    let unknown = STAR.replace("\"neumann\"", "\"sticky\"");
    assert!(matches!(parse_graph(&unknown, None), Err(Error::Schema(_))));
    let swapped = STAR.replace("9.8696", "50.0");
    assert!(parse_graph(&swapped, None).is_err());
}

#[test]
fn robin_with_negative_alpha_is_rejected() {
    let doc = STAR.replace("{\"robin\": 0.5}", "{\"robin\": -1.0}");
    assert!(parse_graph(&doc, None).is_err());
}

#[test]
fn table_reference_resolves_relative_to_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = common::random_vertex_matrix(&mut common::rng(1), 2, false);
    let table = Table::new(2, 1.0, vec![1.0, 2.0], vec![m.clone(), m]).unwrap();
    let doc = TableDocument::from_table(&table);
    fs::write(dir.path().join("t.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let graph_doc = r#"{
      "lambda0": 1.0, "lambda1": 4.0,
      "vertices": [{"id": "c", "kind": "junction", "condition": {"table": "t.json"}, "order": ["p", "q"]}],
      "edges": [{"id": "p", "start": "c", "length": "inf"}, {"id": "q", "start": "c", "length": "inf"}]
    }"#;
    let path = dir.path().join("g.json");
    fs::write(&path, graph_doc).unwrap();
    let g = load_graph(&path).unwrap();
    assert_eq!(g.lead_count(), 2);
    match g.vertices[0].condition() {
        Some(VertexCondition::Tabulated(t)) => assert_eq!(t.lambdas, vec![1.0, 2.0]),
        other => panic!("expected a table, got {other:?}"),
    }
    // the reference survives serialization
    assert!(serialize_graph(&g).contains("t.json"));
    let missing = graph_doc.replace("t.json", "absent.json");
    fs::write(&path, missing).unwrap();
    assert!(matches!(load_graph(&path), Err(Error::Io { .. })));
}

#[test]
fn builders_validate() {
    let k3 = VertexCondition::Kirchhoff { degree: 3 };
    assert!(graph::star(1.0, 4.0, k3.clone(), &[1.0, 1.0], fibernet::FreeEndBc::Dirichlet).is_err());
    assert!(graph::star(1.0, 4.0, k3, &[1.0, 0.0, 1.0], fibernet::FreeEndBc::Dirichlet).is_err());
}
