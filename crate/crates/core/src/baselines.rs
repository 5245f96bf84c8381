//! Size- and density-matched baselines: Erdős–Rényi `G(n, p)` instances and
//! ring lattices (Watts–Strogatz with no rewiring).
//!
//! The lattice is matched to a target by taking `k` as the even integer
//! nearest the target's mean degree. Its diameter has the closed form
//! `ceil(floor(n/2) / (k/2))`. A second figure, `ceil(n / k)`, treats the ring
//! as continuous; it is identical for even `n` and one larger for some odd `n`.
//! Both are reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::{density, DiameterScope, MetricsReport};

/// Lattices up to this size are built and their diameter checked by BFS.
pub const LATTICE_VERIFY_LIMIT: usize = 10_000;

/// Name of the generator behind every seeded baseline.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

/// `G(n, p)` with every pair included independently with probability `p`.
///
/// Pairs are visited in the order (1,0), (2,0), (2,1), (3,0), ... and the gap
/// to the next included pair is drawn from a geometric distribution, so the
/// cost is proportional to the number of edges rather than to `n^2`.
pub fn er_graph(spec: &ErSpec) -> Result<Graph> {
    let ErSpec { n, p, seed } = *spec;
    if n < 2 {
        return Err(Error::Range {
            name: "n",
            value: n as f64,
            expected: "n >= 2",
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range {
            name: "p",
            value: p,
            expected: "0 <= p <= 1",
        });
    }

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    if p == 1.0 {
        for v in 1..n as NodeId {
            edges.extend((0..v).map(|w| (v, w)));
        }
    } else if p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w): (i64, i64) = (1, -1);
        let n = n as i64;
        while v < n {
            let r: f64 = rng.gen();
            w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
            while w >= v && v < n {
                w -= v;
                v += 1;
            }
            if v < n {
                edges.push((v as NodeId, w as NodeId));
            }
        }
    }
    Ok(Graph::from_index_edges(n, edges, None)?.0)
}

pub fn matched_er(n: usize, target_density: f64, seed: u64) -> Result<Graph> {
    er_graph(&ErSpec {
        n,
        p: target_density,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    pub n: usize,
    pub k: usize,
}

impl LatticeSpec {
    pub fn new(n: usize, k: usize) -> Result<LatticeSpec> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::LatticeSpec(format!("k = {k} must be even and >= 2")));
        }
        if k >= n {
            return Err(Error::LatticeSpec(format!("k = {k} must be below n = {n}")));
        }
        Ok(LatticeSpec { n, k })
    }
}

/// Even integer nearest the mean degree `density * (n - 1)`; midpoints round
/// up and the result is at least 2.
pub fn lattice_k_for_density(n: usize, target_density: f64) -> Result<usize> {
    if n < 3 {
        return Err(Error::Range {
            name: "n",
            value: n as f64,
            expected: "n >= 3",
        });
    }
    let mean_degree = target_density * (n as f64 - 1.0);
    let k = (2.0 * (mean_degree / 2.0 + 0.5).floor()).max(2.0) as usize;
    if k >= n {
        return Err(Error::DensityTooHigh { n, k });
    }
    Ok(k)
}

/// Circulant graph: node `i` joined to `i ± 1, ..., i ± k/2 (mod n)`.
pub fn ring_lattice(spec: LatticeSpec) -> Result<Graph> {
    let LatticeSpec { n, k } = LatticeSpec::new(spec.n, spec.k)?;
    let half = (k / 2) as NodeId;
    let n32 = n as NodeId;
    let edges = (0..n32).flat_map(|i| (1..=half).map(move |j| (i, (i + j) % n32)));
    Ok(Graph::from_index_edges(n, edges, None)?.0)
}

pub fn lattice_diameter_analytic(n: usize, k: usize) -> Result<usize> {
    LatticeSpec::new(n, k)?;
    Ok((n / 2).div_ceil(k / 2))
}

/// `ceil(n / k)`: the hop count across half of a continuous ring of length `n`.
pub fn lattice_diameter_ring_estimate(n: usize, k: usize) -> Result<usize> {
    LatticeSpec::new(n, k)?;
    Ok(n.div_ceil(k))
}

/// Clustering of a ring lattice; both definitions coincide on a regular graph.
pub fn lattice_clustering(k: usize) -> f64 {
    if k < 4 {
        0.0
    } else {
        3.0 * (k as f64 - 2.0) / (4.0 * (k as f64 - 1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErBaseline {
    pub seed: u64,
    pub p: f64,
    pub rng: &'static str,
    /// Expected clustering (either definition) of `G(n, p)`.
    pub analytic_clustering: f64,
    #[serde(flatten)]
    pub metrics: MetricsReport,
    /// Present when more than one instance was sampled.
    pub spread: Option<ErSpread>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> MeanStd {
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0)
        } else {
            0.0
        };
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErSpread {
    pub seeds: Vec<u64>,
    pub m: MeanStd,
    pub avg_local_clustering: MeanStd,
    pub transitivity: MeanStd,
    pub diameter: MeanStd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeBaseline {
    pub n: usize,
    pub k: usize,
    /// True when the density-matched `k` reached `n` and was lowered.
    pub k_clamped: bool,
    pub m: usize,
    pub density: f64,
    pub clustering: f64,
    pub diameter_analytic: usize,
    pub diameter_ring_estimate: usize,
    pub diameter_bfs_verified: bool,
    pub diameter_bfs: Option<usize>,
}

impl LatticeBaseline {
    pub fn for_target(n: usize, target_density: f64) -> Result<LatticeBaseline> {
        let largest = if n.is_multiple_of(2) { n - 2 } else { n - 1 };
        let (k, k_clamped) = match lattice_k_for_density(n, target_density) {
            Ok(k) => (k, false),
            Err(Error::DensityTooHigh { .. }) => (largest, true),
            Err(e) => return Err(e),
        };
        let spec = LatticeSpec::new(n, k)?;
        let diameter_analytic = lattice_diameter_analytic(n, k)?;
        let diameter_bfs = if n <= LATTICE_VERIFY_LIMIT {
            // circulant graphs are vertex-transitive: one eccentricity is the diameter
            let g = ring_lattice(spec)?;
            Some(crate::graph::bfs_eccentricity(&g, 0))
        } else {
            None
        };
        Ok(LatticeBaseline {
            n,
            k,
            k_clamped,
            m: n * k / 2,
            density: k as f64 / (n as f64 - 1.0),
            clustering: lattice_clustering(k),
            diameter_analytic,
            diameter_ring_estimate: lattice_diameter_ring_estimate(n, k)?,
            diameter_bfs_verified: diameter_bfs == Some(diameter_analytic),
            diameter_bfs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ratios {
    /// Target transitivity over ER transitivity.
    pub clustering_ratio_vs_er: Option<f64>,
    pub avg_local_clustering_ratio_vs_er: Option<f64>,
    /// Lattice diameter over target diameter.
    pub diameter_ratio_vs_lattice: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub target: MetricsReport,
    pub er: ErBaseline,
    pub lattice: Option<LatticeBaseline>,
    pub ratios: Ratios,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    let r = a / b;
    r.is_finite().then_some(r)
}

/// Compares `g` against one ER instance (or the mean of several) and the
/// density-matched ring lattice.
///
/// Diameters of disconnected graphs, target and ER alike, are measured on
/// their largest component; `diameter_nodes` in each report says how large it
/// was.
pub fn compare_small_world(g: &Graph, seed: u64, er_instances: usize) -> Result<ComparisonReport> {
    let n = g.node_count();
    let p = density(g)?;
    let (target, er) = rayon::join(
        || MetricsReport::compute(g, DiameterScope::GiantComponent),
        || -> Result<ErBaseline> {
            let instances = er_instances.max(1);
            let seeds: Vec<u64> = (0..instances as u64).map(|i| seed.wrapping_add(i)).collect();
            let mut reports = Vec::with_capacity(instances);
            for &s in &seeds {
                let er = matched_er(n, p, s)?;
                reports.push(MetricsReport::compute(&er, DiameterScope::GiantComponent)?);
            }
            let spread = (instances > 1).then(|| {
                let pick = |f: &dyn Fn(&MetricsReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
                ErSpread {
                    seeds: seeds.clone(),
                    m: pick(&|r| r.m as f64),
                    avg_local_clustering: pick(&|r| r.avg_local_clustering),
                    transitivity: pick(&|r| r.transitivity),
                    diameter: pick(&|r| r.diameter.and_then(|d| d.value()).unwrap_or(0) as f64),
                }
            });
            Ok(ErBaseline {
                seed,
                p,
                rng: RNG_ALGORITHM,
                analytic_clustering: p,
                metrics: reports.swap_remove(0),
                spread,
            })
        },
    );
    let (target, er) = (target?, er?);
    let lattice = if n >= 3 {
        Some(LatticeBaseline::for_target(n, p)?)
    } else {
        None
    };

    let target_diameter = target.diameter.and_then(|d| d.value());
    let ratios = Ratios {
        clustering_ratio_vs_er: ratio(target.transitivity, er.metrics.transitivity),
        avg_local_clustering_ratio_vs_er: ratio(target.avg_local_clustering, er.metrics.avg_local_clustering),
        diameter_ratio_vs_lattice: match (&lattice, target_diameter) {
            (Some(l), Some(d)) => ratio(l.diameter_analytic as f64, d as f64),
            _ => None,
        },
    };
    Ok(ComparisonReport {
        target,
        er,
        lattice,
        ratios,
    })
}

impl ComparisonReport {
    /// Three-column plain-text table: target, random graph, lattice.
    pub fn to_table(&self) -> String {
        let fmt_d = |d: Option<u32>| d.map_or("-".to_string(), |d| d.to_string());
        let er = &self.er.metrics;
        let lat = self.lattice.as_ref();
        let rows: Vec<(String, String, String, String)> = vec![
            ("nodes".into(), self.target.n.to_string(), er.n.to_string(), lat.map_or("-".into(), |l| l.n.to_string())),
            ("edges".into(), self.target.m.to_string(), er.m.to_string(), lat.map_or("-".into(), |l| l.m.to_string())),
            (
                "density".into(),
                self.target.density.map_or("-".into(), |d| format!("{d:.4e}")),
                er.density.map_or("-".into(), |d| format!("{d:.4e}")),
                lat.map_or("-".into(), |l| format!("{:.4e}", l.density)),
            ),
            (
                "transitivity".into(),
                format!("{:.6}", self.target.transitivity),
                format!("{:.6}", er.transitivity),
                lat.map_or("-".into(), |l| format!("{:.6}", l.clustering)),
            ),
            (
                "avg local clustering".into(),
                format!("{:.6}", self.target.avg_local_clustering),
                format!("{:.6}", er.avg_local_clustering),
                lat.map_or("-".into(), |l| format!("{:.6}", l.clustering)),
            ),
            (
                "diameter".into(),
                fmt_d(self.target.diameter.and_then(|d| d.value())),
                fmt_d(er.diameter.and_then(|d| d.value())),
                lat.map_or("-".into(), |l| l.diameter_analytic.to_string()),
            ),
            (
                "diameter measured on".into(),
                format!("{} nodes", self.target.diameter_nodes),
                format!("{} nodes", er.diameter_nodes),
                lat.map_or("-".into(), |l| format!("k = {}", l.k)),
            ),
        ];
        let header = ("metric".to_string(), "graph".to_string(), format!("random (seed {})", self.er.seed), "ring lattice".to_string());
        let widths = rows.iter().chain(std::iter::once(&header)).fold([0usize; 4], |w, r| {
            [w[0].max(r.0.len()), w[1].max(r.1.len()), w[2].max(r.2.len()), w[3].max(r.3.len())]
        });
        let mut out = String::new();
        for r in std::iter::once(&header).chain(rows.iter()) {
            out.push_str(&format!(
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n",
                r.0,
                r.1,
                r.2,
                r.3,
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            ));
        }
        out
    }
}
