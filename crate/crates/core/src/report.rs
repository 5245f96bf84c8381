//! Run configuration, pipeline orchestration and report files.
//!
//! Every command writes `manifest.json` into the output directory before any
//! analysis output, and rewrites it at the end with per-stage timings and the
//! final status. Analysis outputs are byte-identical across runs with the same
//! configuration and inputs; only the manifest's timings differ.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::baselines::{compare_small_world, RNG_ALGORITHM};
use crate::community::{community_profile, community_sizes, csv_field, louvain, LouvainConfig, Partition};
use crate::cooccur::{CooccurrenceNetwork, ThresholdMode};
use crate::error::{Error, Result};
use crate::graph::{build_graph, connected_components, giant_component, induced_subgraph, top_fraction_by_degree, BuildSummary, Graph, NodeSet};
use crate::ingest::{load_edges, ArtistCatalog, SchemaConfig};
use crate::metrics::{degree_distribution, fit_power_law, loglog_points};

pub const OUT_DIR_ENV: &str = "COLLABNET_OUT_DIR";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Filters {
    pub seed_only: bool,
    pub genre: Option<String>,
    pub country: Option<String>,
    pub top_fraction: Option<f64>,
}

impl Filters {
    pub fn is_empty(&self) -> bool {
        !self.seed_only && self.genre.is_none() && self.country.is_none() && self.top_fraction.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LouvainSettings {
    pub min_gain: f64,
    pub max_passes: usize,
}

impl Default for LouvainSettings {
    fn default() -> Self {
        let d = LouvainConfig::default();
        LouvainSettings {
            min_gain: d.min_gain,
            max_passes: d.max_passes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub schema: SchemaConfig,
    pub filters: Filters,
    pub powerlaw_kmin: usize,
    pub louvain: LouvainSettings,
    pub cooccur_threshold: u64,
    pub cooccur_mode: ThresholdMode,
    pub er_instances: usize,
    /// Community profiles written by `louvain`.
    pub top_communities: usize,
    /// Length of ranked lists (genres, hubs, co-occurrences).
    pub top_n: usize,
    /// Skip the whole-graph giant-component bundle in `analyze`.
    pub skip_full_graph: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nodes: None,
            edges: None,
            output_dir: PathBuf::from("collabnet-out"),
            seed: 42,
            schema: SchemaConfig::default(),
            filters: Filters::default(),
            powerlaw_kmin: 1,
            louvain: LouvainSettings::default(),
            cooccur_threshold: 5,
            cooccur_mode: ThresholdMode::Strict,
            er_instances: 1,
            top_communities: 20,
            top_n: 20,
            skip_full_graph: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        // relative input paths are taken from the config file's directory
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.nodes, &mut cfg.edges].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn louvain_config(&self) -> LouvainConfig {
        LouvainConfig {
            seed: self.seed,
            min_gain: self.louvain.min_gain,
            max_passes: self.louvain.max_passes,
        }
    }

    fn require(&self, which: &'static str) -> Result<&Path> {
        match which {
            "nodes" => self.nodes.as_deref(),
            _ => self.edges.as_deref(),
        }
        .ok_or_else(|| Error::Config(format!("no {which} file configured (use --{which} or the config file)")))
    }

    fn validate(&self) -> Result<()> {
        if self.powerlaw_kmin == 0 {
            return Err(Error::Config("powerlaw_kmin must be >= 1".into()));
        }
        if self.top_n == 0 {
            return Err(Error::Config("top_n must be >= 1".into()));
        }
        if let Some(f) = self.filters.top_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("top_fraction {f} must be in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Cleaning {
    pub node_rows_read: usize,
    pub node_rows_rejected: usize,
    pub node_cell_warnings: usize,
    pub edge_rows_read: usize,
    pub edge_rows_rejected: usize,
    pub graph: Option<BuildSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub command: String,
    pub rng: &'static str,
    pub config: RunConfig,
    pub inputs: Vec<InputFile>,
    pub cleaning: Cleaning,
    pub stages: Vec<StageTiming>,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

/// Tracks stages of one command and keeps the manifest on disk current.
struct Run {
    manifest: RunManifest,
    out: PathBuf,
}

impl Run {
    fn start(command: &str, cfg: &RunConfig, inputs: &[(&'static str, &Path)]) -> Result<Run> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
        let inputs = inputs
            .iter()
            .map(|&(role, path)| checksum(role, path))
            .collect::<Result<Vec<_>>>()?;
        let run = Run {
            manifest: RunManifest {
                toolkit: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                rng: RNG_ALGORITHM,
                config: cfg.clone(),
                inputs,
                cleaning: Cleaning::default(),
                stages: Vec::new(),
                status: "running".into(),
                failed_stage: None,
                error: None,
            },
            out: cfg.output_dir.clone(),
        };
        run.save()?;
        Ok(run)
    }

    fn save(&self) -> Result<()> {
        write_json(&self.out.join("manifest.json"), &self.manifest)
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        info!("stage {name}");
        let started = Instant::now();
        let result = f(self);
        self.manifest.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: started.elapsed().as_secs_f64(),
        });
        if let Err(e) = &result {
            if self.manifest.failed_stage.is_none() {
                self.manifest.status = "failed".into();
                self.manifest.failed_stage = Some(name.to_string());
                self.manifest.error = Some(e.to_string());
                self.save()?;
            }
        }
        result
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.status = "ok".into();
        self.save()
    }
}

fn checksum(role: &'static str, path: &Path) -> Result<InputFile> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let read = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
        bytes += read as u64;
    }
    Ok(InputFile {
        role,
        path: path.to_path_buf(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Catalog and full graph, with the catalog's ids as the key universe.
pub struct Dataset {
    pub catalog: ArtistCatalog,
    pub graph: Graph,
    pub build: BuildSummary,
}

pub fn load_dataset(cfg: &RunConfig) -> Result<(Dataset, Cleaning)> {
    let catalog = ArtistCatalog::load(cfg.require("nodes")?, &cfg.schema)?;
    let edges = load_edges(cfg.require("edges")?, &cfg.schema)?;
    let ids: Vec<&str> = catalog.ids().collect();
    let (graph, build) = build_graph(&edges.pairs, Some(&ids))?;
    info!(
        "graph: {} nodes, {} edges ({} loops dropped, {} duplicates collapsed)",
        graph.node_count(),
        graph.edge_count(),
        build.self_loops_dropped,
        build.duplicates_collapsed
    );
    let cleaning = Cleaning {
        node_rows_read: catalog.rows_read,
        node_rows_rejected: catalog.rejected.len(),
        node_cell_warnings: catalog.warnings.len(),
        edge_rows_read: edges.rows_read,
        edge_rows_rejected: edges.rejected.len(),
        graph: Some(build.clone()),
    };
    Ok((Dataset { catalog, graph, build }, cleaning))
}

/// Intersection of every configured filter over the full graph. `None` when
/// no filter is set.
pub fn filter_nodes(data: &Dataset, filters: &Filters) -> Result<Option<NodeSet>> {
    if filters.is_empty() {
        return Ok(None);
    }
    let g = &data.graph;
    let mut set = g.all_nodes();
    if filters.seed_only {
        set = set.intersection(&data.catalog.seed_artists(g));
    }
    if let Some(genre) = &filters.genre {
        set = set.intersection(&data.catalog.genre_set(g, genre));
    }
    if let Some(country) = &filters.country {
        set = set.intersection(&data.catalog.country_chart_set(g, country));
    }
    if let Some(fraction) = filters.top_fraction {
        set = set.intersection(&top_fraction_by_degree(g, fraction)?);
    }
    Ok(Some(set))
}

#[derive(Clone, Debug, Serialize)]
pub struct Hub {
    pub key: String,
    pub name: String,
    pub degree: usize,
}

pub fn hubs(g: &Graph, catalog: &ArtistCatalog, count: usize) -> Vec<Hub> {
    let mut nodes: Vec<u32> = (0..g.node_count() as u32).collect();
    nodes.sort_by_key(|&v| (std::cmp::Reverse(g.deg(v)), v));
    nodes
        .into_iter()
        .take(count)
        .map(|v| Hub {
            key: g.key(v).to_string(),
            name: catalog.get(g.key(v)).map(|r| r.name.clone()).unwrap_or_default(),
            degree: g.deg(v),
        })
        .collect()
}

/// Metrics, baselines, degree histogram and power-law fit of one graph.
fn write_bundle(dir: &Path, g: &Graph, catalog: &ArtistCatalog, cfg: &RunConfig) -> Result<()> {
    let comparison = compare_small_world(g, cfg.seed, cfg.er_instances)?;
    let dist = degree_distribution(g);
    let fit = fit_power_law(&dist, cfg.powerlaw_kmin);

    let mut metrics = serde_json::to_value(&comparison.target)?;
    let extra = json!({
        "seed": cfg.seed,
        "gamma": fit.as_ref().ok().map(|f| f.gamma),
        "r_squared": fit.as_ref().ok().map(|f| f.r_squared),
    });
    if let (Some(m), Some(e)) = (metrics.as_object_mut(), extra.as_object()) {
        m.extend(e.clone());
    }
    write_json(&dir.join("metrics.json"), &metrics)?;
    write_json(&dir.join("comparison.json"), &json!({ "seed": cfg.seed, "report": comparison }))?;
    write_text(&dir.join("comparison.txt"), &comparison.to_table())?;
    write_text(&dir.join("degree_histogram.csv"), &dist.to_csv())?;
    write_json(&dir.join("hubs.json"), &hubs(g, catalog, cfg.top_n))?;

    let powerlaw = match &fit {
        Ok(f) => json!({ "seed": cfg.seed, "fit": f, "error": null }),
        Err(e) => json!({ "seed": cfg.seed, "fit": null, "error": e.to_string() }),
    };
    write_json(&dir.join("powerlaw.json"), &powerlaw)?;
    let mut points = String::from("degree,count,log10_degree,log10_count,log10_fitted\n");
    for (k, c, x, y) in loglog_points(&dist, cfg.powerlaw_kmin) {
        let fitted = fit.as_ref().map_or(String::new(), |f| format!("{}", f.log_intercept - f.gamma * x));
        points.push_str(&format!("{k},{c},{x},{y},{fitted}\n"));
    }
    write_text(&dir.join("loglog_points.csv"), &points)?;
    info!("{}:\n{}", dir.display(), comparison.to_table());
    Ok(())
}

fn subgraph_of(data: &Dataset, cfg: &RunConfig) -> Result<Option<Graph>> {
    match filter_nodes(data, &cfg.filters)? {
        None => Ok(None),
        Some(set) => Ok(Some(induced_subgraph(&data.graph, &set)?)),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::start("analyze", cfg, &[("nodes", cfg.require("nodes")?), ("edges", cfg.require("edges")?)])?;
    let data = run.stage("load", |run| {
        let (data, cleaning) = load_dataset(cfg)?;
        run.manifest.cleaning = cleaning;
        run.save()?;
        Ok(data)
    })?;
    let out = cfg.output_dir.clone();

    run.stage("graph_summary", |_| {
        let g = &data.graph;
        let labels = connected_components(g);
        write_json(
            &out.join("graph_summary.json"),
            &json!({
                "seed": cfg.seed,
                "n": g.node_count(),
                "m": g.edge_count(),
                "cleaning": data.build,
                "components": labels.count(),
                "largest_component_sizes": labels.sizes.iter().take(cfg.top_n).collect::<Vec<_>>(),
                "seed_artists": data.catalog.seed_artists(g).len(),
                "artists_without_genres": data.catalog.records().iter().filter(|r| r.genres.is_empty()).count(),
                "hubs": hubs(g, &data.catalog, cfg.top_n),
            }),
        )
    })?;

    if !cfg.skip_full_graph {
        run.stage("giant_component", |_| {
            let giant = giant_component(&data.graph)?;
            write_bundle(&out.join("giant"), &giant, &data.catalog, cfg)
        })?;
    }

    if let Some(sub) = run.stage("filter", |_| subgraph_of(&data, cfg))? {
        run.stage("subgraph", |_| {
            write_json(
                &out.join("subgraph").join("selection.json"),
                &json!({ "seed": cfg.seed, "filters": cfg.filters, "n": sub.node_count(), "m": sub.edge_count() }),
            )?;
            write_bundle(&out.join("subgraph"), &sub, &data.catalog, cfg)
        })?;
    }
    run.finish()
}

pub fn cmd_louvain(cfg: &RunConfig) -> Result<Partition> {
    let mut run = Run::start("louvain", cfg, &[("nodes", cfg.require("nodes")?), ("edges", cfg.require("edges")?)])?;
    let data = run.stage("load", |run| {
        let (data, cleaning) = load_dataset(cfg)?;
        run.manifest.cleaning = cleaning;
        run.save()?;
        Ok(data)
    })?;
    let sub = run.stage("filter", |_| subgraph_of(&data, cfg))?;
    let g = sub.as_ref().unwrap_or(&data.graph);
    let louvain_cfg = cfg.louvain_config();
    let part = run.stage("louvain", |_| louvain(g, &louvain_cfg))?;
    let dir = cfg.output_dir.join("louvain");

    run.stage("write_partition", |_| {
        write_text(&dir.join("partition.csv"), &part.to_csv(g))?;
        let sizes = community_sizes(&part);
        write_json(
            &dir.join("summary.json"),
            &json!({
                "seed": cfg.seed,
                "min_gain": louvain_cfg.min_gain,
                "max_passes": louvain_cfg.max_passes,
                "filters": cfg.filters,
                "n": g.node_count(),
                "m": g.edge_count(),
                "community_count": part.community_count,
                "modularity": part.modularity,
                "level_modularity": part.level_modularity,
                "top_sizes": sizes.iter().take(cfg.top_communities.max(cfg.top_n)).collect::<Vec<_>>(),
            }),
        )?;
        let mut hist = String::from("size,communities\n");
        let mut by_size = std::collections::BTreeMap::new();
        for s in &sizes {
            *by_size.entry(*s).or_insert(0usize) += 1;
        }
        for (s, c) in by_size {
            hist.push_str(&format!("{s},{c}\n"));
        }
        write_text(&dir.join("size_histogram.csv"), &hist)
    })?;

    run.stage("profiles", |_| {
        let count = cfg.top_communities.min(part.community_count);
        let profiles = (0..count as u32)
            .into_par_iter()
            .map(|cid| community_profile(g, &part, cid, &data.catalog))
            .collect::<Result<Vec<_>>>()?;
        write_json(&dir.join("profiles.json"), &json!({ "seed": cfg.seed, "profiles": profiles }))
    })?;
    run.finish()?;
    Ok(part)
}

pub fn cmd_cooccur(cfg: &RunConfig) -> Result<CooccurrenceNetwork> {
    let mut run = Run::start("cooccur", cfg, &[("nodes", cfg.require("nodes")?)])?;
    let catalog = run.stage("load", |run| {
        let catalog = ArtistCatalog::load(cfg.require("nodes")?, &cfg.schema)?;
        if cfg.schema.genres_column.is_none() {
            return Err(Error::Config("co-occurrence needs a genres column".into()));
        }
        run.manifest.cleaning.node_rows_read = catalog.rows_read;
        run.manifest.cleaning.node_rows_rejected = catalog.rejected.len();
        run.manifest.cleaning.node_cell_warnings = catalog.warnings.len();
        Ok(catalog)
    })?;
    let net = run.stage("count", |_| Ok(CooccurrenceNetwork::build(&catalog, cfg.cooccur_threshold, cfg.cooccur_mode)))?;
    let dir = cfg.output_dir.join("cooccur");
    run.stage("write", |_| {
        write_text(&dir.join("cooccurrence.csv"), &net.to_csv())?;
        let top: Vec<_> = net
            .top_genres_by_degree(cfg.top_n)
            .into_iter()
            .map(|(genre, degree)| {
                let partners = net.top_cooccurring(&genre, cfg.top_n).unwrap_or_default();
                json!({ "genre": genre, "degree": degree, "top_cooccurring": partners })
            })
            .collect();
        write_json(
            &dir.join("top_genres.json"),
            &json!({
                "seed": cfg.seed,
                "threshold": cfg.cooccur_threshold,
                "mode": cfg.cooccur_mode,
                "genres": net.genre_count(),
                "edges": net.edges().len(),
                "top_genres": top,
            }),
        )
    })?;
    run.finish()?;
    Ok(net)
}

pub fn cmd_genres(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::start("genres", cfg, &[("nodes", cfg.require("nodes")?), ("edges", cfg.require("edges")?)])?;
    let data = run.stage("load", |run| {
        let (data, cleaning) = load_dataset(cfg)?;
        run.manifest.cleaning = cleaning;
        run.save()?;
        Ok(data)
    })?;
    let dir = cfg.output_dir.join("genres");
    run.stage("histograms", |_| {
        let to_csv = |rows: Vec<(String, usize)>| {
            let mut out = String::from("genre,artists\n");
            for (g, c) in rows {
                out.push_str(&format!("{},{c}\n", csv_field(&g)));
            }
            out
        };
        let cat = &data.catalog;
        write_text(&dir.join("all.csv"), &to_csv(cat.genre_histogram(cat.ids(), cfg.top_n)))?;
        let seeds = cat.seed_artists(&data.graph);
        let seed_keys = seeds.iter().map(|v| data.graph.key(v));
        write_text(&dir.join("seed_artists.csv"), &to_csv(cat.genre_histogram(seed_keys, cfg.top_n)))?;
        if let Some(set) = filter_nodes(&data, &cfg.filters)? {
            let keys = set.iter().map(|v| data.graph.key(v));
            write_text(&dir.join("selection.csv"), &to_csv(cat.genre_histogram(keys, cfg.top_n)))?;
        }
        Ok(())
    })?;
    run.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    EdgelistCsv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edgelist-csv" | "csv" => Ok(ExportFormat::EdgelistCsv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::Usage(format!("unknown export format {other:?} (expected edgelist-csv or json)"))),
        }
    }
}

/// Reads an `artist_key,community_id` file as written by `louvain`.
pub fn read_partition(path: &Path, g: &Graph) -> Result<Vec<Option<u32>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = vec![None; g.node_count()];
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let (Some(key), Some(cid)) = (row.get(0), row.get(1)) else {
            return Err(Error::MalformedRow {
                row: i + 1,
                reason: "expected artist_key,community_id".into(),
            });
        };
        let cid: u32 = cid.trim().parse().map_err(|_| Error::MalformedRow {
            row: i + 1,
            reason: format!("bad community id {cid:?}"),
        })?;
        if let Some(v) = g.node_by_key(key) {
            out[v as usize] = Some(cid);
        }
    }
    Ok(out)
}

/// Node and edge files for `g`. Output depends only on the graph, names and
/// partition, so repeated exports are byte-identical.
pub fn export_graph(dir: &Path, g: &Graph, catalog: Option<&ArtistCatalog>, partition: Option<&[Option<u32>]>, format: ExportFormat) -> Result<()> {
    let name = |v: u32| catalog.and_then(|c| c.get(g.key(v))).map_or("", |r| r.name.as_str());
    match format {
        ExportFormat::EdgelistCsv => {
            let mut nodes = String::from(if partition.is_some() { "key,name,degree,community\n" } else { "key,name,degree\n" });
            for v in 0..g.node_count() as u32 {
                nodes.push_str(&format!("{},{},{}", csv_field(g.key(v)), csv_field(name(v)), g.deg(v)));
                if let Some(p) = partition {
                    nodes.push(',');
                    if let Some(c) = p[v as usize] {
                        nodes.push_str(&c.to_string());
                    }
                }
                nodes.push('\n');
            }
            let mut edges = String::from("source,target\n");
            for (u, v) in g.edges() {
                edges.push_str(&format!("{},{}\n", csv_field(g.key(u)), csv_field(g.key(v))));
            }
            write_text(&dir.join("nodes.csv"), &nodes)?;
            write_text(&dir.join("edges.csv"), &edges)
        }
        ExportFormat::Json => {
            let nodes: Vec<_> = (0..g.node_count() as u32)
                .map(|v| {
                    let mut node = json!({ "key": g.key(v), "name": name(v), "degree": g.deg(v) });
                    if let Some(p) = partition {
                        node["community"] = json!(p[v as usize]);
                    }
                    node
                })
                .collect();
            let edges: Vec<_> = g.edges().map(|(u, v)| [g.key(u), g.key(v)]).collect();
            write_json(&dir.join("graph.json"), &json!({ "nodes": nodes, "edges": edges }))
        }
    }
}

pub fn cmd_export(cfg: &RunConfig, format: &str, partition: Option<&Path>) -> Result<()> {
    let format: ExportFormat = format.parse()?;
    let mut inputs = vec![("nodes", cfg.require("nodes")?), ("edges", cfg.require("edges")?)];
    if let Some(p) = partition {
        inputs.push(("partition", p));
    }
    let mut run = Run::start("export", cfg, &inputs)?;
    let data = run.stage("load", |run| {
        let (data, cleaning) = load_dataset(cfg)?;
        run.manifest.cleaning = cleaning;
        run.save()?;
        Ok(data)
    })?;
    let sub = run.stage("filter", |_| subgraph_of(&data, cfg))?;
    let g = sub.as_ref().unwrap_or(&data.graph);
    let labels = match partition {
        Some(p) => Some(run.stage("read_partition", |_| read_partition(p, g))?),
        None => None,
    };
    run.stage("write", |_| export_graph(&cfg.output_dir.join("export"), g, Some(&data.catalog), labels.as_deref(), format))?;
    run.finish()
}
