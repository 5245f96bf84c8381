//! Louvain community detection and modularity.
//!
//! Each level sweeps the nodes in a seeded random order, moving every node to
//! the neighbouring community with the largest modularity gain, until a sweep
//! makes no move. Communities are then collapsed into weighted super-nodes
//! (internal edges become self-loops) and the next level starts. Community ids
//! in the returned partition are ordered by descending size.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Graph, NodeSet};
use crate::ingest::ArtistCatalog;
use crate::metrics::{DiameterScope, MetricsReport};

/// Guards against floating-point dithering when `min_gain` is 0.
const MAX_SWEEPS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LouvainConfig {
    pub seed: u64,
    /// Minimum modularity improvement for a node move.
    pub min_gain: f64,
    /// Maximum number of levels.
    pub max_passes: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            seed: 42,
            min_gain: 1e-7,
            max_passes: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub community_count: usize,
    pub modularity: f64,
    /// Modularity of the singleton partition followed by the partition after
    /// each level.
    pub level_modularity: Vec<f64>,
}

/// Newman–Girvan modularity (resolution 1) of an arbitrary labelling.
pub fn modularity(g: &Graph, assignment: &[u32]) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::UndefinedMetric("modularity of a graph without edges"));
    }
    if assignment.len() != g.node_count() {
        return Err(Error::Config(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.len(),
            g.node_count()
        )));
    }
    let slots = assignment.iter().max().map_or(0, |&c| c as usize + 1);
    let mut internal = vec![0u64; slots];
    let mut degree = vec![0u64; slots];
    for (u, v) in g.edges() {
        let c = assignment[u as usize];
        if c == assignment[v as usize] {
            internal[c as usize] += 1;
        }
    }
    for (v, d) in g.degrees().enumerate() {
        degree[assignment[v] as usize] += d as u64;
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Weighted graph with explicit self-loops, private to the aggregation step.
#[derive(Clone, Debug)]
pub(crate) struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    /// Sum of edge weights, self-loops counted once.
    pub(crate) total: f64,
}

impl WeightedGraph {
    fn from_graph(g: &Graph) -> WeightedGraph {
        let n = g.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * g.edge_count());
        offsets.push(0);
        for v in 0..n as u32 {
            targets.extend_from_slice(g.neighbors(v));
            offsets.push(targets.len());
        }
        WeightedGraph {
            weights: vec![1.0; targets.len()],
            self_loops: vec![0.0; n],
            strength: g.degrees().map(|d| d as f64).collect(),
            total: g.edge_count() as f64,
            offsets,
            targets,
        }
    }

    fn len(&self) -> usize {
        self.self_loops.len()
    }

    fn arcs(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .map(|&t| t as usize)
            .zip(self.weights[range].iter().copied())
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        let slots = community.iter().max().map_or(0, |&c| c + 1);
        let mut internal = vec![0.0; slots];
        let mut tot = vec![0.0; slots];
        for v in 0..self.len() {
            let c = community[v];
            internal[c] += self.self_loops[v];
            tot[c] += self.strength[v];
            for (u, w) in self.arcs(v) {
                if u > v && community[u] == c {
                    internal[c] += w;
                }
            }
        }
        let m = self.total;
        internal
            .iter()
            .zip(&tot)
            .map(|(e, d)| e / m - (d / (2.0 * m)).powi(2))
            .sum()
    }

    /// Collapses each community into one node. `community` must use dense
    /// ids `0..count`.
    pub(crate) fn aggregate(&self, community: &[usize], count: usize) -> WeightedGraph {
        let mut self_loops = vec![0.0; count];
        let mut strength = vec![0.0; count];
        let mut arcs: Vec<(u32, u32, f64)> = Vec::new();
        for v in 0..self.len() {
            let c = community[v];
            self_loops[c] += self.self_loops[v];
            strength[c] += self.strength[v];
            for (u, w) in self.arcs(v) {
                let d = community[u];
                if d == c {
                    // every internal edge is seen from both ends
                    if u > v {
                        self_loops[c] += w;
                    }
                } else {
                    arcs.push((c as u32, d as u32, w));
                }
            }
        }
        arcs.sort_unstable_by_key(|a| (a.0, a.1));

        let mut offsets = vec![0usize; count + 1];
        let mut targets = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for (c, d, w) in arcs {
            if last == Some((c, d)) {
                *weights.last_mut().expect("merged arc") += w;
            } else {
                targets.push(d);
                weights.push(w);
                offsets[c as usize + 1] += 1;
                last = Some((c, d));
            }
        }
        for i in 0..count {
            offsets[i + 1] += offsets[i];
        }
        WeightedGraph {
            offsets,
            targets,
            weights,
            self_loops,
            strength,
            total: self.total,
        }
    }

    /// Total edge weight recomputed from the stored arcs and self-loops.
    pub(crate) fn edge_weight_sum(&self) -> f64 {
        self.self_loops.iter().sum::<f64>() + self.weights.iter().sum::<f64>() / 2.0
    }
}

/// One level of local moves. Returns whether any node moved.
fn local_moves(wg: &WeightedGraph, community: &mut [usize], cfg: &LouvainConfig, rng: &mut ChaCha8Rng) -> bool {
    let n = wg.len();
    let m = wg.total;
    let mut tot: Vec<f64> = wg.strength.clone();
    let mut link = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut any_move = false;
    for _ in 0..MAX_SWEEPS {
        let mut moved = false;
        for &v in &order {
            let own = community[v];
            let k = wg.strength[v];
            for (u, w) in wg.arcs(v) {
                let c = community[u];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[own] -= k;
            let gain = |link_c: f64, tot_c: f64| link_c / m - tot_c * k / (2.0 * m * m);
            let own_gain = gain(link[own], tot[own]);
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(link[c], tot[c]);
                if g > best_gain || (g == best_gain && c < best) {
                    best = c;
                    best_gain = g;
                }
            }
            let target = if best != own && best_gain - own_gain > cfg.min_gain {
                moved = true;
                best
            } else {
                own
            };
            tot[target] += k;
            community[v] = target;
            for c in touched.drain(..) {
                link[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

/// Renumbers ids densely in order of first appearance.
fn densify(community: &mut [usize]) -> usize {
    let mut remap = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if remap[*c] == usize::MAX {
            remap[*c] = next;
            next += 1;
        }
        *c = remap[*c];
    }
    next
}

pub fn louvain(g: &Graph, cfg: &LouvainConfig) -> Result<Partition> {
    if cfg.min_gain.is_nan() || cfg.min_gain < 0.0 {
        return Err(Error::Range {
            name: "min_gain",
            value: cfg.min_gain,
            expected: "min_gain >= 0",
        });
    }
    if cfg.max_passes == 0 {
        return Err(Error::Range {
            name: "max_passes",
            value: 0.0,
            expected: "max_passes >= 1",
        });
    }
    if g.edge_count() == 0 {
        return Err(Error::UndefinedMetric("louvain needs at least one edge"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut level_graph = WeightedGraph::from_graph(g);
    let mut node_comm: Vec<usize> = (0..g.node_count()).collect();
    let mut level_modularity = vec![level_graph.modularity(&node_comm)];

    for _ in 0..cfg.max_passes {
        let mut community: Vec<usize> = (0..level_graph.len()).collect();
        if !local_moves(&level_graph, &mut community, cfg, &mut rng) {
            break;
        }
        let count = densify(&mut community);
        let q = level_graph.modularity(&community);
        for c in node_comm.iter_mut() {
            *c = community[*c];
        }
        let improved = q > *level_modularity.last().expect("initial level");
        level_modularity.push(q);
        if !improved || count == level_graph.len() {
            break;
        }
        level_graph = level_graph.aggregate(&community, count);
        debug_assert!((level_graph.edge_weight_sum() - level_graph.total).abs() < 1e-6 * level_graph.total.max(1.0));
    }

    let assignment = relabel_by_size(&node_comm);
    let community_count = assignment.iter().max().map_or(0, |&c| c as usize + 1);
    Ok(Partition {
        modularity: modularity(g, &assignment)?,
        assignment,
        community_count,
        level_modularity,
    })
}

/// Ids ordered by descending size, ties by smallest member.
fn relabel_by_size(raw: &[usize]) -> Vec<u32> {
    let slots = raw.iter().max().map_or(0, |&c| c + 1);
    let mut size = vec![0usize; slots];
    let mut first = vec![usize::MAX; slots];
    for (v, &c) in raw.iter().enumerate() {
        size[c] += 1;
        first[c] = first[c].min(v);
    }
    let mut order: Vec<usize> = (0..slots).filter(|&c| size[c] > 0).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(size[c]), first[c]));
    let mut new_id = vec![0u32; slots];
    for (i, &c) in order.iter().enumerate() {
        new_id[c] = i as u32;
    }
    raw.iter().map(|&c| new_id[c]).collect()
}

/// Community sizes, largest first, ties by community id.
pub fn community_sizes(part: &Partition) -> Vec<usize> {
    let mut sizes = vec![0usize; part.community_count];
    for &c in &part.assignment {
        sizes[c as usize] += 1;
    }
    let mut order: Vec<(usize, usize)> = sizes.into_iter().enumerate().collect();
    order.sort_by_key(|&(c, s)| (std::cmp::Reverse(s), c));
    order.into_iter().map(|(_, s)| s).collect()
}

impl Partition {
    pub fn members(&self, cid: u32) -> NodeSet {
        NodeSet::from_unsorted(
            self.assignment
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c == cid)
                .map(|(v, _)| v as u32)
                .collect(),
        )
    }

    pub fn to_csv(&self, g: &Graph) -> String {
        let mut out = String::from("artist_key,community_id\n");
        for (v, c) in self.assignment.iter().enumerate() {
            out.push_str(&csv_field(g.key(v as u32)));
            out.push_str(&format!(",{c}\n"));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunityProfile {
    pub community_id: u32,
    pub size: usize,
    pub genres: Vec<(String, usize)>,
    pub metrics: MetricsReport,
}

/// Metrics of the community's induced subgraph plus the genre histogram of
/// its members.
pub fn community_profile(g: &Graph, part: &Partition, cid: u32, catalog: &ArtistCatalog) -> Result<CommunityProfile> {
    if cid as usize >= part.community_count {
        return Err(Error::Lookup {
            kind: "community",
            name: cid.to_string(),
        });
    }
    let members = part.members(cid);
    let sub = induced_subgraph(g, &members)?;
    let genres = catalog.genre_histogram(sub.keys().iter().map(String::as_str), usize::MAX);
    Ok(CommunityProfile {
        community_id: cid,
        size: members.len(),
        genres,
        metrics: MetricsReport::compute(&sub, DiameterScope::GiantComponent)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_index_edges(n, edges.iter().copied(), None).unwrap().0
    }

    fn two_triangles() -> Graph {
        graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    }

    #[test]
    fn modularity_values() {
        let g = two_triangles();
        assert!((modularity(&g, &[0, 0, 0, 1, 1, 1]).unwrap() - 0.5).abs() < 1e-15);
        assert!(modularity(&g, &[0; 6]).unwrap().abs() < 1e-15);
        assert!(modularity(&graph(3, &[]), &[0, 1, 2]).is_err());
        assert!(modularity(&g, &[0, 1]).is_err());
    }

    #[test]
    fn weighted_modularity_matches_plain() {
        let g = two_triangles();
        let wg = WeightedGraph::from_graph(&g);
        let part = [0, 0, 1, 1, 1, 0];
        let plain = modularity(&g, &part.map(|c| c as u32)).unwrap();
        assert!((wg.modularity(&part) - plain).abs() < 1e-15);
    }

    #[test]
    fn aggregation_preserves_weight_and_modularity() {
        let g = graph(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6), (6, 0)]);
        let wg = WeightedGraph::from_graph(&g);
        let community = vec![0, 0, 0, 1, 1, 1, 2];
        let agg = wg.aggregate(&community, 3);
        assert_eq!(agg.edge_weight_sum(), 9.0);
        assert_eq!(agg.self_loops, vec![3.0, 3.0, 0.0]);
        // the singleton partition of the aggregate is the community partition
        let q = wg.modularity(&community);
        assert!((agg.modularity(&[0, 1, 2]) - q).abs() < 1e-15);
        let again = agg.aggregate(&[0, 0, 1], 2);
        assert_eq!(again.edge_weight_sum(), 9.0);
    }

    #[test]
    fn single_clique_stays_together() {
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let part = louvain(&k4, &LouvainConfig::default()).unwrap();
        assert_eq!(part.community_count, 1);
        assert!(part.modularity.abs() < 1e-15);
    }

    #[test]
    fn two_triangles_split() {
        let part = louvain(&two_triangles(), &LouvainConfig::default()).unwrap();
        assert_eq!(part.assignment, vec![0, 0, 0, 1, 1, 1]);
        assert!((part.modularity - 0.5).abs() < 1e-12);
        assert!(part.level_modularity.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn config_validation() {
        let g = two_triangles();
        let bad = LouvainConfig { min_gain: -1.0, ..Default::default() };
        assert!(louvain(&g, &bad).is_err());
        let bad = LouvainConfig { max_passes: 0, ..Default::default() };
        assert!(louvain(&g, &bad).is_err());
        assert!(louvain(&graph(3, &[]), &LouvainConfig::default()).is_err());
    }

    #[test]
    fn sizes_sorted() {
        let part = Partition {
            assignment: vec![0, 0, 1],
            community_count: 2,
            modularity: 0.0,
            level_modularity: vec![],
        };
        assert_eq!(community_sizes(&part), vec![2, 1]);
        let singletons = Partition {
            assignment: (0..5).collect(),
            community_count: 5,
            modularity: 0.0,
            level_modularity: vec![],
        };
        assert_eq!(community_sizes(&singletons), vec![1; 5]);
    }

    #[test]
    fn relabel_orders_by_size() {
        assert_eq!(relabel_by_size(&[5, 2, 2, 7, 7, 7]), vec![2, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
