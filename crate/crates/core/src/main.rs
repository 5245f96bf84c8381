use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collabnet::cooccur::ThresholdMode;
use collabnet::report::{self, RunConfig, OUT_DIR_ENV};
use collabnet::Result;

/// Small-world analysis of an artist collaboration network.
#[derive(Parser, Debug)]
#[command(name = "collabnet", version)]
struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (baselines, Louvain order).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the COLLABNET_OUT_DIR environment variable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artist table (CSV).
    #[arg(long, global = true)]
    nodes: Option<PathBuf>,
    /// Collaboration edge list (CSV).
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Entries in ranked lists.
    #[arg(long, global = true)]
    top: Option<usize>,
    #[command(flatten)]
    filters: FilterArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Keep only artists with at least one chart hit.
    #[arg(long, global = true)]
    seed_only: bool,
    /// Keep only artists tagged with this genre.
    #[arg(long, global = true)]
    genre: Option<String>,
    /// Keep only artists that charted in this country code.
    #[arg(long, global = true)]
    country: Option<String>,
    /// Keep only this fraction of artists by descending degree.
    #[arg(long, global = true)]
    top_fraction: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metrics, random and lattice baselines, degree distribution and power-law fit.
    Analyze {
        /// Smallest degree used in the power-law fit.
        #[arg(long)]
        kmin: Option<usize>,
        /// Number of random-graph instances averaged for the baseline spread.
        #[arg(long)]
        er_instances: Option<usize>,
        /// Analyse only the filtered subgraph.
        #[arg(long)]
        skip_full_graph: bool,
    },
    /// Louvain communities with per-community profiles.
    Louvain {
        /// Number of largest communities to profile.
        #[arg(long)]
        top_communities: Option<usize>,
        #[arg(long)]
        min_gain: Option<f64>,
        #[arg(long)]
        max_passes: Option<usize>,
    },
    /// Genre co-occurrence network.
    Cooccur {
        /// Keep genre pairs whose count exceeds this value.
        #[arg(long)]
        threshold: Option<u64>,
        /// Keep pairs whose count equals the threshold as well.
        #[arg(long)]
        inclusive: bool,
    },
    /// Write the (filtered) graph for external tools.
    Export {
        /// edgelist-csv or json.
        #[arg(long, default_value = "edgelist-csv")]
        format: String,
        /// Partition CSV from `louvain`, adds a community column.
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Genre histograms.
    Genres,
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        cfg.output_dir = dir.into();
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.nodes.is_some() {
        cfg.nodes = cli.nodes.clone();
    }
    if cli.edges.is_some() {
        cfg.edges = cli.edges.clone();
    }
    if let Some(top) = cli.top {
        cfg.top_n = top;
    }
    let f = &cli.filters;
    cfg.filters.seed_only |= f.seed_only;
    if f.genre.is_some() {
        cfg.filters.genre = f.genre.clone();
    }
    if f.country.is_some() {
        cfg.filters.country = f.country.clone();
    }
    if f.top_fraction.is_some() {
        cfg.filters.top_fraction = f.top_fraction;
    }
    match &cli.command {
        Command::Analyze { kmin, er_instances, skip_full_graph } => {
            cfg.powerlaw_kmin = kmin.unwrap_or(cfg.powerlaw_kmin);
            cfg.er_instances = er_instances.unwrap_or(cfg.er_instances);
            cfg.skip_full_graph |= skip_full_graph;
        }
        Command::Louvain { top_communities, min_gain, max_passes } => {
            cfg.top_communities = top_communities.unwrap_or(cfg.top_communities);
            cfg.louvain.min_gain = min_gain.unwrap_or(cfg.louvain.min_gain);
            cfg.louvain.max_passes = max_passes.unwrap_or(cfg.louvain.max_passes);
        }
        Command::Cooccur { threshold, inclusive } => {
            cfg.cooccur_threshold = threshold.unwrap_or(cfg.cooccur_threshold);
            if *inclusive {
                cfg.cooccur_mode = ThresholdMode::Inclusive;
            }
        }
        Command::Export { .. } | Command::Genres => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Analyze { .. } => report::cmd_analyze(&cfg),
        Command::Louvain { .. } => report::cmd_louvain(&cfg).map(|part| {
            println!("{} communities, modularity {:.4}", part.community_count, part.modularity);
        }),
        Command::Cooccur { .. } => report::cmd_cooccur(&cfg).map(|net| {
            println!("{} genres, {} retained pairs", net.genre_count(), net.edges().len());
        }),
        Command::Export { format, partition } => report::cmd_export(&cfg, format, partition.as_deref()),
        Command::Genres => report::cmd_genres(&cfg),
    }?;
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
