//! Density, clustering, exact diameter and degree-distribution statistics.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{connected_components, induced_subgraph, Graph, NodeId};

/// Below this many nodes the diameter is computed by BFS from every node.
const ALL_PAIRS_THRESHOLD: usize = 64;

pub fn density(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::UndefinedMetric("density needs at least 2 nodes"));
    }
    Ok(2.0 * g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Number of triangles through each node.
///
/// Each triangle `u < v < w` is found once, from the edge `(u, v)`, by merging
/// the sorted neighbour lists of `u` and `v` above `v`.
pub fn triangles_per_node(g: &Graph) -> Vec<u64> {
    let n = g.node_count();
    let counts: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    (0..n as NodeId).into_par_iter().for_each(|u| {
        let nu = g.neighbors(u);
        let mut found_u = 0;
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = g.neighbors(v);
            let a = &nu[nu.partition_point(|&x| x <= v)..];
            let b = &nv[nv.partition_point(|&x| x <= v)..];
            let (mut i, mut j) = (0, 0);
            let mut found_v = 0;
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        counts[a[i] as usize].fetch_add(1, Ordering::Relaxed);
                        found_v += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            if found_v > 0 {
                counts[v as usize].fetch_add(found_v, Ordering::Relaxed);
                found_u += found_v;
            }
        }
        if found_u > 0 {
            counts[u as usize].fetch_add(found_u, Ordering::Relaxed);
        }
    });
    counts.into_iter().map(AtomicU64::into_inner).collect()
}

fn pairs(d: usize) -> u64 {
    let d = d as u64;
    d * d.saturating_sub(1) / 2
}

fn clustering_from(g: &Graph, triangles: &[u64]) -> (f64, f64) {
    let n = g.node_count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut local_sum = 0.0;
    let mut closed = 0u64;
    let mut triples = 0u64;
    for (t, d) in triangles.iter().zip(g.degrees()) {
        let p = pairs(d);
        if p > 0 {
            local_sum += *t as f64 / p as f64;
        }
        closed += t;
        triples += p;
    }
    let transitivity = if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    };
    (local_sum / n as f64, transitivity)
}

/// Mean over all nodes of the fraction of neighbour pairs that are adjacent.
/// Nodes of degree < 2 count as 0.
pub fn avg_local_clustering(g: &Graph) -> f64 {
    clustering_from(g, &triangles_per_node(g)).0
}

/// `3 * triangles / connected triples`, or 0 when there are no triples.
pub fn transitivity(g: &Graph) -> f64 {
    clustering_from(g, &triangles_per_node(g)).1
}

struct Bfs {
    dist: Vec<u32>,
    queue: Vec<NodeId>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs {
            dist: vec![u32::MAX; n],
            queue: Vec::with_capacity(n),
        }
    }

    /// Runs a BFS from `src`; returns the eccentricity, the first node found at
    /// that distance and the number of nodes reached.
    fn run(&mut self, g: &Graph, src: NodeId) -> (u32, NodeId, usize) {
        self.dist.fill(u32::MAX);
        self.queue.clear();
        self.dist[src as usize] = 0;
        self.queue.push(src);
        let mut head = 0;
        let mut far = (0, src);
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let du = self.dist[u as usize];
            if du > far.0 {
                far = (du, u);
            }
            for &v in g.neighbors(u) {
                if self.dist[v as usize] == u32::MAX {
                    self.dist[v as usize] = du + 1;
                    self.queue.push(v);
                }
            }
        }
        (far.0, far.1, self.queue.len())
    }
}

fn max_eccentricity<'a>(g: &Graph, nodes: impl IndexedParallelIterator<Item = &'a NodeId>) -> u32 {
    nodes
        .map_init(|| Bfs::new(g.node_count()), |bfs, &v| bfs.run(g, v).0)
        .max()
        .unwrap_or(0)
}

/// Exact diameter of a connected graph.
///
/// A double sweep from the highest-degree node gives a lower bound and a
/// central root. Nodes are then processed level by level from the root's
/// fringe inward; once the bound reaches twice the current level no unvisited
/// pair can be farther apart.
pub fn diameter_exact(g: &Graph) -> Result<u32> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::UndefinedMetric("diameter of an empty graph"));
    }
    let mut bfs = Bfs::new(n);
    if bfs.run(g, 0).2 != n {
        return Err(Error::NotConnected);
    }
    if n <= ALL_PAIRS_THRESHOLD {
        let all: Vec<NodeId> = (0..n as NodeId).collect();
        return Ok(max_eccentricity(g, all.par_iter()));
    }

    let hub = (0..n as NodeId)
        .max_by_key(|&v| (g.deg(v), std::cmp::Reverse(v)))
        .expect("non-empty");
    let (_, a, _) = bfs.run(g, hub);
    let (ecc_a, b, _) = bfs.run(g, a);
    let from_a = std::mem::take(&mut bfs.dist);
    bfs.dist = vec![u32::MAX; n];
    let (ecc_b, _, _) = bfs.run(g, b);
    let half = ecc_a / 2;
    let root = (0..n)
        .find(|&v| from_a[v] == half && from_a[v] + bfs.dist[v] == ecc_a)
        .expect("a shortest a-b path passes through its midpoint") as NodeId;
    drop(from_a);

    let mut lower = ecc_a.max(ecc_b);
    let (ecc_root, _, _) = bfs.run(g, root);
    lower = lower.max(ecc_root);
    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); ecc_root as usize + 1];
    for v in 0..n {
        levels[bfs.dist[v] as usize].push(v as NodeId);
    }
    drop(bfs);

    let mut level = ecc_root;
    while level > 0 && lower < 2 * level {
        lower = lower.max(max_eccentricity(g, levels[level as usize].par_iter()));
        level -= 1;
    }
    Ok(lower)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeDistribution {
    pub counts: BTreeMap<usize, usize>,
}

impl DegreeDistribution {
    pub fn node_count(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn nodes_above(&self, k: usize) -> usize {
        self.counts.range(k + 1..).map(|(_, c)| c).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,count\n");
        for (k, c) in &self.counts {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

pub fn degree_distribution(g: &Graph) -> DegreeDistribution {
    let mut counts = BTreeMap::new();
    for d in g.degrees() {
        *counts.entry(d).or_default() += 1;
    }
    DegreeDistribution { counts }
}

/// Least-squares line through `(log10 k, log10 count)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    /// Intercept of the fitted line, base 10.
    pub log_intercept: f64,
    pub r_squared: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub points_used: usize,
}

/// The log-log points a fit with this `k_min` would use.
pub fn loglog_points(d: &DegreeDistribution, k_min: usize) -> Vec<(usize, usize, f64, f64)> {
    d.counts
        .range(k_min.max(1)..)
        .filter(|(_, &c)| c > 0)
        .map(|(&k, &c)| (k, c, (k as f64).log10(), (c as f64).log10()))
        .collect()
}

/// Ordinary least squares on the unit-bin histogram in log-log space.
/// Zero-count degrees are skipped. When the counts have no variance the
/// coefficient of determination is reported as 0.
pub fn fit_power_law(d: &DegreeDistribution, k_min: usize) -> Result<PowerLawFit> {
    if k_min == 0 {
        return Err(Error::Range {
            name: "k_min",
            value: 0.0,
            expected: "k_min >= 1",
        });
    }
    let points = loglog_points(d, k_min);
    if points.len() < 3 {
        return Err(Error::TooFewFitPoints(points.len()));
    }
    let len = points.len() as f64;
    let mean_x = points.iter().map(|p| p.2).sum::<f64>() / len;
    let mean_y = points.iter().map(|p| p.3).sum::<f64>() / len;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(_, _, x, y) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = points
            .iter()
            .map(|&(_, _, x, y)| (y - (intercept + slope * x)).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit {
        gamma: -slope + 0.0,
        log_intercept: intercept,
        r_squared,
        k_min: points[0].0,
        k_max: points[points.len() - 1].0,
        points_used: points.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diameter {
    Exact(u32),
    Disconnected,
}

impl Diameter {
    pub fn value(self) -> Option<u32> {
        match self {
            Diameter::Exact(d) => Some(d),
            Diameter::Disconnected => None,
        }
    }
}

impl Serialize for Diameter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Diameter::Exact(d) => s.serialize_u32(*d),
            Diameter::Disconnected => s.serialize_str("disconnected"),
        }
    }
}

/// Where a report takes its diameter from when the graph is disconnected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiameterScope {
    /// Report [`Diameter::Disconnected`].
    WholeGraph,
    /// Measure the largest component and record its size.
    GiantComponent,
    /// Do not compute a diameter.
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub m: usize,
    pub density: Option<f64>,
    pub avg_local_clustering: f64,
    pub transitivity: f64,
    pub diameter: Option<Diameter>,
    /// Nodes of the graph the diameter was measured on.
    pub diameter_nodes: usize,
    pub components: usize,
    pub degree_min: f64,
    pub degree_mean: f64,
    pub degree_max: f64,
}

impl MetricsReport {
    pub fn compute(g: &Graph, scope: DiameterScope) -> Result<MetricsReport> {
        let n = g.node_count();
        let (avg_local_clustering, transitivity) = clustering_from(g, &triangles_per_node(g));
        let labels = connected_components(g);
        let (diameter, diameter_nodes) = match scope {
            DiameterScope::Skip => (None, 0),
            _ if n == 0 => (None, 0),
            _ if labels.count() == 1 => (Some(Diameter::Exact(diameter_exact(g)?)), n),
            DiameterScope::WholeGraph => (Some(Diameter::Disconnected), n),
            DiameterScope::GiantComponent => {
                let giant = induced_subgraph(g, &labels.members(0))?;
                (Some(Diameter::Exact(diameter_exact(&giant)?)), giant.node_count())
            }
        };
        let (min, max) = g
            .degrees()
            .fold((usize::MAX, 0), |(lo, hi), d| (lo.min(d), hi.max(d)));
        Ok(MetricsReport {
            n,
            m: g.edge_count(),
            density: density(g).ok(),
            avg_local_clustering,
            transitivity,
            diameter,
            diameter_nodes,
            components: labels.count(),
            degree_min: if n == 0 { 0.0 } else { min as f64 },
            degree_mean: if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 },
            degree_max: max as f64,
        })
    }
}
