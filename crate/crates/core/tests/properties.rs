use std::collections::BTreeSet;
use std::io::Write;

use collabnet::community::{louvain, modularity, LouvainConfig};
use collabnet::cooccur::{CooccurrenceNetwork, ThresholdMode};
use collabnet::graph::{build_graph, connected_components, giant_component, induced_subgraph};
use collabnet::ingest::ArtistCatalog;
use collabnet::{Graph, NodeSet};
use proptest::prelude::*;

fn edge_lists() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (1usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n as u32, 0..n as u32), 0..120)))
}

fn graph(n: usize, edges: &[(u32, u32)]) -> Graph {
    Graph::from_index_edges(n, edges.iter().copied(), None).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_ignores_edge_order_and_orientation((n, edges) in edge_lists(), seed in any::<u64>()) {
        let mut shuffled = edges.clone();
        let len = shuffled.len().max(1) as u64;
        for i in 0..shuffled.len() {
            let j = ((seed.wrapping_mul(i as u64 + 1)) % len) as usize;
            shuffled.swap(i, j);
            if (seed >> (i % 64)) & 1 == 1 {
                let (u, v) = shuffled[i];
                shuffled[i] = (v, u);
            }
        }
        prop_assert_eq!(graph(n, &edges), graph(n, &shuffled));
    }

    #[test]
    fn keyed_build_matches_index_build((n, edges) in edge_lists()) {
        let universe: Vec<String> = (0..n).map(|i| format!("k{i}")).collect();
        let keyed: Vec<(String, String)> = edges.iter().map(|&(u, v)| (format!("k{u}"), format!("k{v}"))).collect();
        let (g, summary) = build_graph(&keyed, Some(&universe)).unwrap();
        let plain = graph(n, &edges);
        prop_assert_eq!(g.edges().collect::<Vec<_>>(), plain.edges().collect::<Vec<_>>());
        let loops = edges.iter().filter(|(u, v)| u == v).count();
        prop_assert_eq!(summary.self_loops_dropped, loops);
        prop_assert_eq!(summary.raw_pairs, edges.len());
        prop_assert_eq!(edges.len() - loops - summary.duplicates_collapsed, g.edge_count());
    }

    #[test]
    fn components_partition_the_nodes((n, edges) in edge_lists()) {
        let g = graph(n, &edges);
        let labels = connected_components(&g);
        prop_assert_eq!(labels.sizes.iter().sum::<usize>(), n);
        prop_assert!(labels.sizes.windows(2).all(|w| w[0] >= w[1]));
        for (u, v) in g.edges() {
            prop_assert_eq!(labels.labels[u as usize], labels.labels[v as usize]);
        }
        let giant = giant_component(&g).unwrap();
        prop_assert_eq!(giant.node_count(), labels.sizes[0]);
        prop_assert!(giant.is_connected());
        let again = giant_component(&giant).unwrap();
        prop_assert_eq!(again.edges().collect::<Vec<_>>(), giant.edges().collect::<Vec<_>>());
        prop_assert_eq!(again.keys(), giant.keys());
    }

    #[test]
    fn induced_subgraph_keeps_exactly_inner_edges((n, edges) in edge_lists(), mask in any::<u64>()) {
        let g = graph(n, &edges);
        let members: Vec<u32> = (0..n as u32).filter(|v| (mask >> (v % 64)) & 1 == 1).collect();
        prop_assume!(!members.is_empty());
        let set = NodeSet::new(n, members.iter().copied()).unwrap();
        let sub = induced_subgraph(&g, &set).unwrap();
        let parents = sub.parent_ids().unwrap();
        prop_assert_eq!(parents, &members[..]);
        let got: BTreeSet<(u32, u32)> = sub.edges().map(|(a, b)| (parents[a as usize], parents[b as usize])).collect();
        let want: BTreeSet<(u32, u32)> = g.edges().filter(|&(a, b)| set.contains(a) && set.contains(b)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn louvain_partition_is_total_and_dense((n, edges) in edge_lists(), seed in any::<u64>()) {
        let g = graph(n, &edges);
        prop_assume!(g.edge_count() > 0);
        let cfg = LouvainConfig { seed, ..Default::default() };
        let part = louvain(&g, &cfg).unwrap();
        prop_assert_eq!(part.assignment.len(), n);
        let used: BTreeSet<u32> = part.assignment.iter().copied().collect();
        prop_assert_eq!(used.len(), part.community_count);
        prop_assert_eq!(used.iter().next_back().map(|&c| c as usize + 1), Some(part.community_count));
        prop_assert!((modularity(&g, &part.assignment).unwrap() - part.modularity).abs() < 1e-12);
        prop_assert!(part.level_modularity.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(louvain(&g, &cfg).unwrap(), part);
    }
}

fn catalog_from(rows: &[Vec<u8>]) -> ArtistCatalog {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "spotify_id,name,genres").unwrap();
    for (i, tags) in rows.iter().enumerate() {
        let mut unique: Vec<String> = tags.iter().map(|t| format!("'g{t}'")).collect();
        unique.sort();
        unique.dedup();
        writeln!(f, "a{i},A{i},\"[{}]\"", unique.join(", ")).unwrap();
    }
    drop(f);
    let schema = collabnet::ingest::SchemaConfig {
        chart_hits_column: None,
        popularity_column: None,
        followers_column: None,
        ..Default::default()
    };
    ArtistCatalog::load(&path, &schema).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cooccurrence_is_symmetric_and_conserves_pairs(
        rows in prop::collection::vec(prop::collection::vec(0u8..12, 0..6), 0..30),
        threshold in 0u64..4,
    ) {
        let cat = catalog_from(&rows);
        let net = CooccurrenceNetwork::build(&cat, threshold, ThresholdMode::Strict);
        let expected: u64 = cat.records().iter().map(|r| {
            let g = r.genres.len() as u64;
            g * g.saturating_sub(1) / 2
        }).sum();
        prop_assert_eq!(net.raw_pairs().map(|(_, _, c)| c).sum::<u64>(), expected);
        for (a, b, c) in net.raw_pairs() {
            prop_assert!(a < b);
            prop_assert_eq!(net.count(a, b), c);
            prop_assert_eq!(net.count(b, a), c);
        }
        prop_assert!(net.edges().iter().all(|&(_, _, c)| c > threshold));
        let inclusive = CooccurrenceNetwork::build(&cat, threshold, ThresholdMode::Inclusive);
        prop_assert!(inclusive.edges().len() >= net.edges().len());
    }
}
