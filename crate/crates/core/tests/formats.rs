use coarsepath::decomp::{build_path_partition, PartitionDecomposition};
use coarsepath::gen::generate;
use coarsepath::graph::{ball, bfs, sphere};
use coarsepath::{verify_cover, GeodesicCover, Graph};

#[test]
fn graph_text_round_trip() {
    let inst = generate("random-cover-union 2 6 1 3".parse().unwrap()).unwrap();
    let text = inst.graph.to_text();
    assert_eq!(Graph::parse(&text).unwrap(), inst.graph);
}

#[test]
fn graph_loader_names_the_line() {
    let err = Graph::parse("3 2\n0 1\n1 1\n").unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    assert!(Graph::parse("3 2\n0 1\n1 0\n").is_err());
}

#[test]
fn cover_json_round_trip() {
    let inst = generate("cross 4 6".parse().unwrap()).unwrap();
    let json = inst.cover.to_json();
    let back = GeodesicCover::from_json(&json).unwrap();
    assert_eq!(back, inst.cover);
    assert!(verify_cover(&inst.graph, &back).unwrap().ok);
    let bare = GeodesicCover::from_json(r#"{ "rho": 0, "paths": [[0,1,2]] }"#).unwrap();
    assert_eq!(bare.k(), 1);
}

#[test]
fn decomposition_json_round_trip() {
    let inst = generate("grid 5 5 1".parse().unwrap()).unwrap();
    let pd = build_path_partition(&inst.graph, &inst.cover).unwrap();
    let back = PartitionDecomposition::from_json(&pd.to_json()).unwrap();
    assert_eq!(back, pd);
    let value: serde_json::Value = serde_json::from_str(&pd.to_json()).unwrap();
    for key in ["rho", "tree", "bags", "certificates"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn metric_examples() {
    let c6 = generate("cycle 6".parse().unwrap()).unwrap().graph;
    let d = bfs(&c6, &[0]).unwrap();
    assert_eq!((d.dist[3], d.dist[4]), (3, 2));
    assert_eq!(ball(&c6, 0, 2).unwrap(), vec![0, 1, 2, 4, 5]);
    let grid = generate("grid 4 4 1".parse().unwrap()).unwrap().graph;
    assert_eq!(sphere(&grid, 0, 2).unwrap().len(), 3);
}
