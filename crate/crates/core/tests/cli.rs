use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collabnet::graph::build_graph;
use collabnet::ingest::{load_edges, ArtistCatalog, SchemaConfig};
use collabnet::report::{load_dataset, RunConfig};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn collabnet(out: &Path, args: &[&str]) -> Output {
    let fx = fixtures();
    Command::new(env!("CARGO_BIN_EXE_collabnet"))
        .env("RUST_LOG", "error")
        .env_remove("COLLABNET_OUT_DIR")
        .arg("--nodes")
        .arg(fx.join("nodes.csv"))
        .arg("--edges")
        .arg(fx.join("edges.csv"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn export_round_trip_preserves_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let out = collabnet(tmp.path(), &["export"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let fx = fixtures();
    let cfg = RunConfig {
        nodes: Some(fx.join("nodes.csv")),
        edges: Some(fx.join("edges.csv")),
        ..Default::default()
    };
    let original = load_dataset(&cfg).unwrap().0.graph;

    let schema = SchemaConfig {
        id_column: "key".into(),
        name_column: Some("name".into()),
        genres_column: None,
        chart_hits_column: None,
        popularity_column: None,
        followers_column: None,
        edge_source_column: "source".into(),
        edge_target_column: "target".into(),
        ..Default::default()
    };
    let dir = tmp.path().join("export");
    let catalog = ArtistCatalog::load(dir.join("nodes.csv"), &schema).unwrap();
    let edges = load_edges(dir.join("edges.csv"), &schema).unwrap();
    let ids: Vec<&str> = catalog.ids().collect();
    let (again, _) = build_graph(&edges.pairs, Some(&ids)).unwrap();

    assert_eq!(again.node_count(), original.node_count());
    assert_eq!(again.edge_count(), original.edge_count());
    assert_eq!(again.keys(), original.keys());
    assert_eq!(again.degrees().collect::<Vec<_>>(), original.degrees().collect::<Vec<_>>());
    assert_eq!(again, original);
}

#[test]
fn export_json_and_partition_column() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(collabnet(tmp.path(), &["louvain"]).status.success());
    let partition = tmp.path().join("louvain").join("partition.csv");
    let out = collabnet(tmp.path(), &["export", "--format", "json", "--partition", partition.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let graph = json(&tmp.path().join("export").join("graph.json"));
    let nodes = graph["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 23);
    assert!(nodes.iter().all(|n| n["community"].is_u64()));
    assert_eq!(graph["edges"].as_array().unwrap().len(), 29);
}

#[test]
fn cooccur_without_genre_column_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = tmp.path().join("nodes.csv");
    fs::write(&nodes, "spotify_id,name,followers,popularity,chart_hits\na,A,1,1,\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_collabnet"))
        .arg("--nodes")
        .arg(&nodes)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .arg("cooccur")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("genres"), "{stderr}");
}

#[test]
fn huge_threshold_gives_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = collabnet(tmp.path(), &["cooccur", "--threshold", "1000000000"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("cooccur").join("cooccurrence.csv")).unwrap();
    assert_eq!(csv, "genre_a,genre_b,count\n");
    let top = json(&tmp.path().join("cooccur").join("top_genres.json"));
    assert_eq!(top["edges"], 0);
}

#[test]
fn single_profile_when_one_community_requested() {
    let tmp = tempfile::tempdir().unwrap();
    let out = collabnet(tmp.path(), &["louvain", "--top-communities", "1"]);
    assert!(out.status.success());
    let dir = tmp.path().join("louvain");
    let profiles = json(&dir.join("profiles.json"));
    assert_eq!(profiles["profiles"].as_array().unwrap().len(), 1);
    assert_eq!(profiles["profiles"][0]["community_id"], 0);
    let summary = json(&dir.join("summary.json"));
    assert!(summary["modularity"].as_f64().unwrap() > 0.3);
    let levels = summary["level_modularity"].as_array().unwrap();
    assert!(levels.windows(2).all(|w| w[1].as_f64() >= w[0].as_f64()));
    let partition = fs::read_to_string(dir.join("partition.csv")).unwrap();
    assert_eq!(partition.lines().count(), 24);
}

#[test]
fn analyze_writes_reports_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = collabnet(tmp.path(), &["--seed", "5", "analyze", "--country", "us"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["cleaning"]["edge_rows_read"], 31);
    assert_eq!(manifest["cleaning"]["graph"]["self_loops_dropped"], 1);

    let summary = json(&tmp.path().join("graph_summary.json"));
    assert_eq!(summary["n"], 23);
    assert_eq!(summary["components"], 2);
    assert_eq!(summary["hubs"][0]["name"], "Aurora Vale");

    let giant = json(&tmp.path().join("giant").join("metrics.json"));
    for key in ["n", "m", "density", "avg_local_clustering", "transitivity", "diameter", "gamma", "r_squared", "seed"] {
        assert!(giant.get(key).is_some(), "metrics.json lacks {key}");
    }
    assert_eq!(giant["n"], 21);
    let selection = json(&tmp.path().join("subgraph").join("selection.json"));
    assert_eq!(selection["n"], 3);
    let hist = fs::read_to_string(tmp.path().join("giant").join("degree_histogram.csv")).unwrap();
    assert!(hist.starts_with("degree,count\n"));
}

#[test]
fn empty_filter_fails_in_the_filter_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = collabnet(tmp.path(), &["analyze", "--skip-full-graph", "--genre", "polka"]);
    assert_eq!(out.status.code(), Some(4));
    let manifest = json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["status"], "failed");
    assert_eq!(manifest["failed_stage"], "filter");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(collabnet(tmp.path(), &["export", "--format", "graphml"]).status.code(), Some(2));
    assert_eq!(collabnet(tmp.path(), &["analyze", "--top-fraction", "3"]).status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_collabnet"))
        .args(["--nodes", "/nonexistent/nodes.csv", "--edges", "/nonexistent/edges.csv", "--out"])
        .arg(tmp.path())
        .arg("genres")
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn out_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let config = tmp.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "nodes = {:?}\nedges = {:?}\noutput_dir = {:?}\ntop_n = 3\n",
            fx.join("nodes.csv"),
            fx.join("edges.csv"),
            tmp.path().join("from-config")
        ),
    )
    .unwrap();
    let run = |env: Option<&Path>, out: Option<&Path>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_collabnet"));
        cmd.arg("--config").arg(&config).arg("genres").env_remove("COLLABNET_OUT_DIR");
        if let Some(e) = env {
            cmd.env("COLLABNET_OUT_DIR", e);
        }
        if let Some(o) = out {
            cmd.arg("--out").arg(o);
        }
        assert!(cmd.output().unwrap().status.success());
    };
    run(None, None);
    assert!(tmp.path().join("from-config/genres/all.csv").exists());
    run(Some(&tmp.path().join("from-env")), None);
    assert!(tmp.path().join("from-env/genres/all.csv").exists());
    run(Some(&tmp.path().join("ignored")), Some(&tmp.path().join("from-flag")));
    assert!(tmp.path().join("from-flag/genres/all.csv").exists());
    assert!(!tmp.path().join("ignored").exists());

    let all = fs::read_to_string(tmp.path().join("from-flag/genres/all.csv")).unwrap();
    assert_eq!(all, "genre,artists\npop,6\nhip hop,4\ndance pop,3\n");
}
