//! Compact immutable undirected simple graphs.
//!
//! Nodes are dense `u32` indices `0..n` with sorted adjacency stored in a
//! single CSR-style array. Every graph keeps the external key of each node
//! (an artist id, or the decimal index for generated graphs) and, for
//! subgraphs, the index each node had in the graph it was cut from.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Clone, Debug, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    keys: Vec<String>,
    parent: Option<Vec<NodeId>>,
    key_index: OnceLock<HashMap<String, NodeId>>,
}

/// What `build_graph` removed or added while cleaning raw input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildSummary {
    pub raw_pairs: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
    /// Endpoints that were not in the supplied key universe and got appended.
    pub keys_added_from_edges: usize,
    pub isolated_nodes: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets && self.targets == other.targets && self.keys == other.keys
    }
}

impl Graph {
    /// Builds a graph over `n` nodes from index pairs. Self-loops and repeated
    /// pairs are dropped; the counts are returned in the summary.
    pub fn from_index_edges<I>(n: usize, edges: I, keys: Option<Vec<String>>) -> Result<(Graph, BuildSummary)>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let keys = match keys {
            Some(k) if k.len() != n => {
                return Err(Error::Config(format!("{} keys supplied for {} nodes", k.len(), n)))
            }
            Some(k) => k,
            None => (0..n).map(|i| i.to_string()).collect(),
        };

        let mut summary = BuildSummary::default();
        let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, v) in edges {
            summary.raw_pairs += 1;
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::NodeOutOfRange { index: x as usize, n });
                }
            }
            if u == v {
                summary.self_loops_dropped += 1;
                continue;
            }
            arcs.push((u, v));
            arcs.push((v, u));
        }
        arcs.sort_unstable();
        let before = arcs.len();
        arcs.dedup();
        summary.duplicates_collapsed = (before - arcs.len()) / 2;

        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &arcs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<NodeId> = arcs.into_iter().map(|(_, v)| v).collect();
        summary.isolated_nodes = (0..n).filter(|&i| offsets[i] == offsets[i + 1]).count();

        Ok((
            Graph {
                offsets,
                targets,
                keys,
                parent: None,
                key_index: OnceLock::new(),
            },
            summary,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Sorted neighbours of `v`. Panics if `v` is out of range.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub(crate) fn deg(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.check(v)?;
        Ok(self.deg(v))
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.node_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn key(&self, v: NodeId) -> &str {
        &self.keys[v as usize]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn node_by_key(&self, key: &str) -> Option<NodeId> {
        self.key_index
            .get_or_init(|| {
                self.keys
                    .iter()
                    .enumerate()
                    .map(|(i, k)| (k.clone(), i as NodeId))
                    .collect()
            })
            .get(key)
            .copied()
    }

    /// For subgraphs: the index each node had in the graph it was cut from.
    pub fn parent_ids(&self) -> Option<&[NodeId]> {
        self.parent.as_deref()
    }

    pub fn node_set<'a>(&self, keys: impl IntoIterator<Item = &'a str>) -> NodeSet {
        NodeSet::from_unsorted(keys.into_iter().filter_map(|k| self.node_by_key(k)).collect())
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::from_sorted((0..self.node_count() as NodeId).collect())
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && bfs_order(self, 0).len() == self.node_count()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: v as usize,
                n: self.node_count(),
            })
        }
    }
}

/// Builds a simple undirected graph from key pairs.
///
/// When `universe` is given its keys come first, in order, so artists without
/// any recorded edge become isolated nodes. Endpoints missing from the
/// universe are appended in order of first appearance.
pub fn build_graph<A, B>(edges: &[(A, A)], universe: Option<&[B]>) -> Result<(Graph, BuildSummary)>
where
    A: AsRef<str>,
    B: AsRef<str>,
{
    let universe_len = universe.map_or(0, |u| u.len());
    if edges.is_empty() && universe_len == 0 {
        return Err(Error::EmptyInput);
    }

    let mut index: HashMap<&str, NodeId> = HashMap::with_capacity(universe_len + edges.len());
    let mut keys: Vec<String> = Vec::with_capacity(universe_len);
    for (row, key) in universe.into_iter().flatten().enumerate() {
        let key = key.as_ref();
        if key.trim().is_empty() {
            return Err(Error::MalformedRow {
                row: row + 1,
                reason: "empty node key".into(),
            });
        }
        if !index.contains_key(key) {
            index.insert(key, keys.len() as NodeId);
            keys.push(key.to_string());
        }
    }

    let mut added = 0;
    let mut pairs = Vec::with_capacity(edges.len());
    for (row, (a, b)) in edges.iter().enumerate() {
        let mut ids = [0 as NodeId; 2];
        for (slot, key) in ids.iter_mut().zip([a.as_ref(), b.as_ref()]) {
            if key.trim().is_empty() {
                return Err(Error::MalformedRow {
                    row: row + 1,
                    reason: "missing endpoint".into(),
                });
            }
            *slot = match index.get(key) {
                Some(&id) => id,
                None => {
                    let id = keys.len() as NodeId;
                    index.insert(key, id);
                    keys.push(key.to_string());
                    added += 1;
                    id
                }
            };
        }
        pairs.push((ids[0], ids[1]));
    }

    let n = keys.len();
    let (g, mut summary) = Graph::from_index_edges(n, pairs, Some(keys))?;
    summary.keys_added_from_edges = if universe.is_some() { added } else { 0 };
    Ok((g, summary))
}

/// A sorted, duplicate-free set of node indices of one graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<NodeId>,
}

impl NodeSet {
    /// Validates every member against a graph of `n` nodes.
    pub fn new(n: usize, members: impl IntoIterator<Item = NodeId>) -> Result<NodeSet> {
        let set = NodeSet::from_unsorted(members.into_iter().collect());
        if let Some(&max) = set.members.last() {
            if max as usize >= n {
                return Err(Error::NodeOutOfRange { index: max as usize, n });
            }
        }
        Ok(set)
    }

    pub(crate) fn from_unsorted(mut members: Vec<NodeId>) -> NodeSet {
        members.sort_unstable();
        members.dedup();
        NodeSet { members }
    }

    pub(crate) fn from_sorted(members: Vec<NodeId>) -> NodeSet {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        NodeSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.members
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.members, &other.members);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        NodeSet { members: out }
    }
}

/// Connected-component labels. Component 0 is the largest; ties are broken by
/// the smallest node index each component contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, component: u32) -> NodeSet {
        NodeSet::from_sorted(
            self.labels
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c == component)
                .map(|(v, _)| v as NodeId)
                .collect(),
        )
    }
}

pub(crate) fn bfs_order(g: &Graph, source: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    let mut order = vec![source];
    seen[source as usize] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                order.push(v);
            }
        }
    }
    order
}

/// Largest BFS distance from `source` within its component.
pub(crate) fn bfs_eccentricity(g: &Graph, source: NodeId) -> usize {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    let mut ecc = 0;
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        ecc = ecc.max(du);
        for &v in g.neighbors(u) {
            if dist[v as usize] == usize::MAX {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    ecc
}

pub fn connected_components(g: &Graph) -> ComponentLabeling {
    let n = g.node_count();
    const UNSEEN: u32 = u32::MAX;
    let mut raw = vec![UNSEEN; n];
    // (size, smallest member) per raw component, discovered in index order
    let mut found: Vec<(usize, NodeId)> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n as NodeId {
        if raw[start as usize] != UNSEEN {
            continue;
        }
        let id = found.len() as u32;
        raw[start as usize] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(u) {
                if raw[v as usize] == UNSEEN {
                    raw[v as usize] = id;
                    queue.push_back(v);
                }
            }
        }
        found.push((size, start));
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(found[c].0), found[c].1));
    let mut relabel = vec![0u32; found.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new as u32;
    }
    ComponentLabeling {
        labels: raw.into_iter().map(|c| relabel[c as usize]).collect(),
        sizes: order.iter().map(|&c| found[c].0).collect(),
    }
}

/// The subgraph induced by `s`. Node order follows ascending parent index.
pub fn induced_subgraph(g: &Graph, s: &NodeSet) -> Result<Graph> {
    if s.is_empty() {
        return Err(Error::EmptySubgraph);
    }
    let n = g.node_count();
    if let Some(&max) = s.members.last() {
        if max as usize >= n {
            return Err(Error::NodeOutOfRange { index: max as usize, n });
        }
    }
    let mut remap = vec![NodeId::MAX; n];
    for (new, &old) in s.members.iter().enumerate() {
        remap[old as usize] = new as NodeId;
    }

    let mut offsets = Vec::with_capacity(s.len() + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    for &old in &s.members {
        // remap is monotone on members, so the filtered lists stay sorted
        targets.extend(
            g.neighbors(old)
                .iter()
                .map(|&v| remap[v as usize])
                .filter(|&v| v != NodeId::MAX),
        );
        offsets.push(targets.len());
    }

    Ok(Graph {
        offsets,
        targets,
        keys: s.members.iter().map(|&v| g.keys[v as usize].clone()).collect(),
        parent: Some(s.members.clone()),
        key_index: OnceLock::new(),
    })
}

pub fn giant_component(g: &Graph) -> Result<Graph> {
    if g.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels = connected_components(g);
    induced_subgraph(g, &labels.members(0))
}

/// The `floor(fraction * n)` highest-degree nodes. Ties at the cutoff go to
/// the smaller node index.
pub fn top_fraction_by_degree(g: &Graph, fraction: f64) -> Result<NodeSet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Range {
            name: "fraction",
            value: fraction,
            expected: "0 < fraction <= 1",
        });
    }
    let n = g.node_count();
    // the epsilon keeps e.g. 0.29 * 100 from flooring to 28
    let count = ((fraction * n as f64) + 1e-9).floor() as usize;
    let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
    nodes.sort_by_key(|&v| (std::cmp::Reverse(g.deg(v)), v));
    nodes.truncate(count.min(n));
    Ok(NodeSet::from_unsorted(nodes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keyed(edges: &[(&str, &str)]) -> Graph {
        build_graph::<&str, &str>(edges, None).unwrap().0
    }

    fn complete(n: u32) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_index_edges(n as usize, edges, None).unwrap().0
    }

    #[test]
    fn build_drops_loops_and_collapses_duplicates() {
        let (g, s) = build_graph::<&str, &str>(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "c")], None).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(s.self_loops_dropped, 1);
        assert_eq!(s.duplicates_collapsed, 1);
        assert_eq!(s.raw_pairs, 4);
    }

    #[test]
    fn complete_graph_degrees() {
        let g = complete(4);
        assert_eq!((g.node_count(), g.edge_count()), (4, 6));
        assert!((0..4).all(|v| g.degree(v).unwrap() == 3));
        assert!(matches!(g.degree(4), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn universe_keeps_isolated_nodes() {
        let (g, s) = build_graph(&[("a", "b")], Some(&["a", "b", "z"])).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degree(g.node_by_key("z").unwrap()).unwrap(), 0);
        assert_eq!(s.isolated_nodes, 1);
        assert_eq!(s.keys_added_from_edges, 0);

        let (g, s) = build_graph(&[("a", "q")], Some(&["a"])).unwrap();
        assert_eq!(g.key(1), "q");
        assert_eq!(s.keys_added_from_edges, 1);
    }

    #[test]
    fn empty_and_malformed_input() {
        let none: &[(&str, &str)] = &[];
        assert!(matches!(build_graph::<&str, &str>(none, None), Err(Error::EmptyInput)));
        assert!(matches!(build_graph::<&str, &str>(none, Some(&[])), Err(Error::EmptyInput)));
        let err = build_graph::<&str, &str>(&[("a", "b"), ("c", "")], None).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }));
    }

    #[test]
    fn components_sorted_by_size() {
        let g = keyed(&[("x", "y"), ("a", "b"), ("b", "c"), ("c", "a")]);
        let cc = connected_components(&g);
        assert_eq!(cc.sizes, vec![3, 2]);
        assert_eq!(cc.labels[g.node_by_key("a").unwrap() as usize], 0);
        assert_eq!(cc.labels[g.node_by_key("x").unwrap() as usize], 1);
        let giant = giant_component(&g).unwrap();
        assert_eq!((giant.node_count(), giant.edge_count()), (3, 3));
    }

    #[test]
    fn equal_size_components_tie_on_smallest_index() {
        let g = keyed(&[("a", "b"), ("c", "d")]);
        let cc = connected_components(&g);
        assert_eq!(cc.labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn induced_subgraphs() {
        let g = complete(4);
        let s = NodeSet::new(4, [0, 2, 3]).unwrap();
        let h = induced_subgraph(&g, &s).unwrap();
        assert_eq!((h.node_count(), h.edge_count()), (3, 3));
        assert_eq!(h.parent_ids(), Some(&[0, 2, 3][..]));

        let path = keyed(&[("a", "b"), ("b", "c")]);
        let ends = path.node_set(["a", "c"]);
        let h = induced_subgraph(&path, &ends).unwrap();
        assert_eq!((h.node_count(), h.edge_count()), (2, 0));

        assert!(matches!(induced_subgraph(&g, &NodeSet::default()), Err(Error::EmptySubgraph)));
        assert!(NodeSet::new(4, [7]).is_err());
    }

    #[test]
    fn giant_of_connected_graph_is_identity() {
        let g = complete(5);
        assert_eq!(giant_component(&g).unwrap(), g);
    }

    #[test]
    fn top_fraction() {
        let star = Graph::from_index_edges(6, (1..6).map(|v| (0, v)), None).unwrap().0;
        assert_eq!(top_fraction_by_degree(&star, 0.2).unwrap().as_slice(), &[0]);
        assert_eq!(top_fraction_by_degree(&star, 1.0).unwrap().len(), 6);
        // all leaves tie; the smaller indices win
        assert_eq!(top_fraction_by_degree(&star, 0.5).unwrap().as_slice(), &[0, 1, 2]);
        assert!(top_fraction_by_degree(&star, 0.0).is_err());
        assert!(top_fraction_by_degree(&star, 1.5).is_err());
    }

    #[test]
    fn top_fraction_count_matches_floor() {
        let g = Graph::from_index_edges(156_326, std::iter::empty(), None).unwrap().0;
        assert_eq!(top_fraction_by_degree(&g, 0.001).unwrap().len(), 156);
    }

    #[test]
    fn node_set_intersection() {
        let a = NodeSet::new(10, [1, 3, 5, 7]).unwrap();
        let b = NodeSet::new(10, [3, 4, 5]).unwrap();
        assert_eq!(a.intersection(&b).as_slice(), &[3, 5]);
    }
}
