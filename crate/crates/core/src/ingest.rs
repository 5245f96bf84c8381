//! Node and edge table loading.
//!
//! The node table carries one artist per row. Genre and chart-hit columns hold
//! bracketed, quote-delimited list literals such as `['pop', 'dance pop']` and
//! `['us (7)', 'gb (2)']`. A list cell that cannot be parsed becomes an empty
//! list plus a warning; a row without an id is rejected.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::warn;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaConfig {
    pub id_column: String,
    pub name_column: Option<String>,
    pub genres_column: Option<String>,
    pub chart_hits_column: Option<String>,
    pub popularity_column: Option<String>,
    pub followers_column: Option<String>,
    pub edge_source_column: String,
    pub edge_target_column: String,
    pub list_open: char,
    pub list_close: char,
    /// Regex with two capture groups: country code and hit count.
    pub chart_hit_pattern: String,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            id_column: "spotify_id".into(),
            name_column: Some("name".into()),
            genres_column: Some("genres".into()),
            chart_hits_column: Some("chart_hits".into()),
            popularity_column: Some("popularity".into()),
            followers_column: Some("followers".into()),
            edge_source_column: "id_0".into(),
            edge_target_column: "id_1".into(),
            list_open: '[',
            list_close: ']',
            chart_hit_pattern: r"^\s*([A-Za-z][A-Za-z0-9_-]*)\s*\(\s*(\d+)\s*\)\s*$".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ArtistRecord {
    pub spotify_id: String,
    pub name: String,
    pub genres: Vec<String>,
    pub chart_hits: Vec<(String, u32)>,
    pub popularity: Option<i64>,
    pub followers: Option<i64>,
}

impl ArtistRecord {
    pub fn is_seed(&self) -> bool {
        !self.chart_hits.is_empty()
    }

    pub fn has_genre(&self, tag: &str) -> bool {
        self.genres.iter().any(|g| g == tag)
    }

    pub fn charted_in(&self, country: &str) -> bool {
        self.chart_hits.iter().any(|(c, _)| c == country)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the source file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArtistCatalog {
    records: Vec<ArtistRecord>,
    index: HashMap<String, usize>,
    pub schema: SchemaConfig,
    pub rows_read: usize,
    pub rejected: Vec<Rejection>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeList {
    pub pairs: Vec<(String, String)>,
    pub rows_read: usize,
    pub rejected: Vec<Rejection>,
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().flexible(true).from_reader(file))
}

fn column(path: &Path, header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn {
            path: PathBuf::from(path),
            column: name.to_string(),
        })
}

fn optional_column(path: &Path, header: &csv::StringRecord, name: &Option<String>) -> Result<Option<usize>> {
    name.as_deref().map(|n| column(path, header, n)).transpose()
}

/// Parses a bracketed list of quoted strings. Both quote styles and backslash
/// escapes are accepted. Blank cells and `nan`/`None` are empty lists.
pub fn parse_list_literal(cell: &str, open: char, close: char) -> std::result::Result<Vec<String>, String> {
    let cell = cell.trim();
    if cell.is_empty() || matches!(cell, "nan" | "NaN" | "None" | "null") {
        return Ok(Vec::new());
    }
    let inner = cell
        .strip_prefix(open)
        .and_then(|s| s.strip_suffix(close))
        .ok_or_else(|| format!("expected {open}...{close}"))?;

    let mut items = Vec::new();
    let mut chars = inner.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let quote = match chars.next() {
            None if items.is_empty() => return Ok(items),
            None => return Err("trailing comma".into()),
            Some(q @ ('\'' | '"')) => q,
            Some(c) => return Err(format!("unquoted item starting with {c:?}")),
        };
        let mut item = String::new();
        loop {
            match chars.next() {
                None => return Err("unterminated string".into()),
                Some('\\') => match chars.next() {
                    Some(c) => item.push(c),
                    None => return Err("dangling escape".into()),
                },
                Some(c) if c == quote => break,
                Some(c) => item.push(c),
            }
        }
        items.push(item);
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => return Ok(items),
            Some(',') => {}
            Some(c) => return Err(format!("expected ',' but found {c:?}")),
        }
    }
}

fn normalize_tags(raw: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    raw.into_iter()
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect()
}

fn parse_chart_hits(tokens: Vec<String>, pattern: &Regex) -> std::result::Result<Vec<(String, u32)>, String> {
    let mut hits: Vec<(String, u32)> = Vec::new();
    for token in tokens {
        let caps = pattern
            .captures(&token)
            .ok_or_else(|| format!("chart hit {token:?} does not match pattern"))?;
        let country = caps[1].to_lowercase();
        let count: u32 = caps[2].parse().map_err(|_| format!("bad hit count in {token:?}"))?;
        if count == 0 {
            return Err(format!("zero hit count in {token:?}"));
        }
        match hits.iter_mut().find(|(c, _)| *c == country) {
            Some(entry) => entry.1 += count,
            None => hits.push((country, count)),
        }
    }
    Ok(hits)
}

fn parse_int(cell: &str) -> Option<i64> {
    let cell = cell.trim();
    cell.parse::<i64>()
        .ok()
        .or_else(|| cell.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| v.round() as i64))
}

impl ArtistCatalog {
    pub fn load(path: impl AsRef<Path>, cfg: &SchemaConfig) -> Result<ArtistCatalog> {
        let path = path.as_ref();
        let pattern = Regex::new(&cfg.chart_hit_pattern)
            .map_err(|e| Error::Config(format!("chart_hit_pattern: {e}")))?;
        if pattern.captures_len() < 3 {
            return Err(Error::Config("chart_hit_pattern needs two capture groups".into()));
        }

        let mut reader = open_csv(path)?;
        let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let id_col = column(path, &header, &cfg.id_column)?;
        let name_col = optional_column(path, &header, &cfg.name_column)?;
        let genres_col = optional_column(path, &header, &cfg.genres_column)?;
        let hits_col = optional_column(path, &header, &cfg.chart_hits_column)?;
        let pop_col = optional_column(path, &header, &cfg.popularity_column)?;
        let fol_col = optional_column(path, &header, &cfg.followers_column)?;

        let mut catalog = ArtistCatalog {
            records: Vec::new(),
            index: HashMap::new(),
            schema: cfg.clone(),
            rows_read: 0,
            rejected: Vec::new(),
            warnings: Vec::new(),
        };

        for row in reader.records() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            catalog.rows_read += 1;
            let line = row.position().map_or(0, |p| p.line());
            let cell = |col: Option<usize>| col.and_then(|c| row.get(c)).unwrap_or("");

            let id = cell(Some(id_col)).trim();
            if id.is_empty() {
                catalog.reject(line, "missing id".into());
                continue;
            }
            if catalog.index.contains_key(id) {
                catalog.reject(line, format!("duplicate id {id}"));
                continue;
            }

            let mut record = ArtistRecord {
                spotify_id: id.to_string(),
                name: cell(name_col).trim().to_string(),
                popularity: pop_col.and_then(|c| row.get(c)).and_then(parse_int),
                followers: fol_col.and_then(|c| row.get(c)).and_then(parse_int),
                ..Default::default()
            };
            if genres_col.is_some() {
                match parse_list_literal(cell(genres_col), cfg.list_open, cfg.list_close) {
                    Ok(tags) => record.genres = normalize_tags(tags),
                    Err(e) => catalog.warn(format!("line {line}: genres cell ignored: {e}")),
                }
            }
            if hits_col.is_some() {
                let parsed = parse_list_literal(cell(hits_col), cfg.list_open, cfg.list_close)
                    .and_then(|tokens| parse_chart_hits(tokens, &pattern));
                match parsed {
                    Ok(hits) => record.chart_hits = hits,
                    Err(e) => catalog.warn(format!("line {line}: chart_hits cell ignored: {e}")),
                }
            }
            catalog.index.insert(record.spotify_id.clone(), catalog.records.len());
            catalog.records.push(record);
        }
        Ok(catalog)
    }

    fn reject(&mut self, line: u64, reason: String) {
        warn!("node table line {line} rejected: {reason}");
        self.rejected.push(Rejection { line, reason });
    }

    fn warn(&mut self, message: String) {
        warn!("{message}");
        self.warnings.push(message);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ArtistRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&ArtistRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.spotify_id.as_str())
    }

    fn select<'a>(&'a self, g: &Graph, keep: impl Fn(&ArtistRecord) -> bool + 'a) -> NodeSet {
        g.node_set(
            self.records
                .iter()
                .filter(|r| keep(r))
                .map(|r| r.spotify_id.as_str()),
        )
    }

    /// Artists with at least one chart hit.
    pub fn seed_artists(&self, g: &Graph) -> NodeSet {
        self.select(g, ArtistRecord::is_seed)
    }

    /// Exact-tag match after normalisation: "pop" does not match "dance pop".
    pub fn genre_set(&self, g: &Graph, genre: &str) -> NodeSet {
        let tag = genre.trim().to_lowercase();
        let set = self.select(g, |r| r.has_genre(&tag));
        if set.is_empty() {
            warn!("no artists tagged {tag:?}");
        }
        set
    }

    pub fn country_chart_set(&self, g: &Graph, country: &str) -> NodeSet {
        let code = country.trim().to_lowercase();
        let set = self.select(g, |r| r.charted_in(&code));
        if set.is_empty() {
            warn!("no artists charted in {code:?}");
        }
        set
    }

    /// Artists per tag over the given keys, descending, ties alphabetical.
    /// Keys that are not in the catalog are ignored.
    pub fn genre_histogram<'a>(&self, scope: impl IntoIterator<Item = &'a str>, top_n: usize) -> Vec<(String, usize)> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for key in scope {
            if let Some(r) = self.get(key) {
                for tag in &r.genres {
                    *counts.entry(tag.as_str()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().map(|(g, c)| (g.to_string(), c)).collect();
        // stable sort keeps the BTreeMap's alphabetical order among ties
        ranked.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        ranked.truncate(top_n);
        ranked
    }
}

/// Loads the raw edge pairs in file order. Rows with a missing endpoint are
/// rejected and logged.
pub fn load_edges(path: impl AsRef<Path>, cfg: &SchemaConfig) -> Result<EdgeList> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let a = column(path, &header, &cfg.edge_source_column)?;
    let b = column(path, &header, &cfg.edge_target_column)?;

    let mut out = EdgeList::default();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        out.rows_read += 1;
        let line = row.position().map_or(0, |p| p.line());
        let u = row.get(a).map(str::trim).unwrap_or("");
        let v = row.get(b).map(str::trim).unwrap_or("");
        if u.is_empty() || v.is_empty() {
            warn!("edge table line {line} rejected: missing endpoint");
            out.rejected.push(Rejection {
                line,
                reason: "missing endpoint".into(),
            });
            continue;
        }
        out.pairs.push((u.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let path = dir.path().join(name);
        std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    const NODES: &str = "spotify_id,name,followers,popularity,genres,chart_hits
a1,Alpha,1000.0,50,\"['pop', 'dance pop']\",\"['us (3)', 'gb (1)']\"
a2,Beta,,40,\"['Pop ', \"\"children's music\"\"]\",
a3,Gamma,5,10,[],\"['jp (2)']\"
,NoId,1,1,[],[]
a4,Delta,7,7,\"[broken\",\"['??']\"
a1,Dup,1,1,[],[]
";

    #[test]
    fn list_literals() {
        assert_eq!(parse_list_literal("['pop', 'dance pop']", '[', ']').unwrap(), vec!["pop", "dance pop"]);
        assert_eq!(parse_list_literal("[\"it's\", 'a\\'b']", '[', ']').unwrap(), vec!["it's", "a'b"]);
        assert!(parse_list_literal("[]", '[', ']').unwrap().is_empty());
        assert!(parse_list_literal("  ", '[', ']').unwrap().is_empty());
        assert!(parse_list_literal("['a',]", '[', ']').is_err());
        assert!(parse_list_literal("['a' 'b']", '[', ']').is_err());
        assert!(parse_list_literal("[a]", '[', ']').is_err());
        assert!(parse_list_literal("['a'", '[', ']').is_err());
    }

    #[test]
    fn catalog_rows_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "nodes.csv", NODES);
        let cat = ArtistCatalog::load(&path, &SchemaConfig::default()).unwrap();
        assert_eq!(cat.rows_read, 6);
        assert_eq!(cat.len() + cat.rejected.len(), cat.rows_read);
        assert_eq!(cat.len(), 4);
        assert_eq!(cat.rejected.iter().map(|r| r.line).collect::<Vec<_>>(), vec![5, 7]);

        let a1 = cat.get("a1").unwrap();
        assert_eq!(a1.genres, vec!["pop", "dance pop"]);
        assert_eq!(a1.chart_hits, vec![("us".to_string(), 3), ("gb".to_string(), 1)]);
        assert_eq!(a1.followers, Some(1000));

        let a2 = cat.get("a2").unwrap();
        assert_eq!(a2.genres, vec!["pop", "children's music"]);
        assert!(!a2.is_seed());
        assert_eq!(a2.followers, None);

        // malformed cells degrade to empty lists with warnings
        let a4 = cat.get("a4").unwrap();
        assert!(a4.genres.is_empty() && a4.chart_hits.is_empty());
        assert_eq!(cat.warnings.len(), 2);

        assert_eq!(ArtistCatalog::load(&path, &SchemaConfig::default()).unwrap(), cat);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "nodes.csv", "spotify_id,name\nx,X\n");
        let err = ArtistCatalog::load(&path, &SchemaConfig::default()).unwrap_err();
        assert!(matches!(&err, Error::MissingColumn { column, .. } if column == "genres"), "{err}");
        let err = ArtistCatalog::load(dir.path().join("absent.csv"), &SchemaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn filters_and_histogram() {
        let dir = tempfile::tempdir().unwrap();
        let cat = ArtistCatalog::load(write(&dir, "nodes.csv", NODES), &SchemaConfig::default()).unwrap();
        let ids: Vec<&str> = cat.ids().collect();
        let (g, _) = crate::graph::build_graph::<&str, &str>(&[("a1", "a2")], Some(&ids)).unwrap();

        let seeds = cat.seed_artists(&g);
        assert_eq!(seeds.len(), 2);
        assert_eq!(cat.country_chart_set(&g, "US").len(), 1);
        assert!(cat.country_chart_set(&g, "br").is_empty());
        assert_eq!(cat.country_chart_set(&g, "us").intersection(&seeds).len(), 1);
        assert_eq!(cat.genre_set(&g, "pop").len(), 2);
        assert_eq!(cat.genre_set(&g, "dance pop").len(), 1);
        assert!(cat.genre_set(&g, "zzz").is_empty());

        let hist = cat.genre_histogram(cat.ids(), 10);
        assert_eq!(hist[0], ("pop".to_string(), 2));
        assert_eq!(hist[1], ("children's music".to_string(), 1));
        assert!(cat.genre_histogram(std::iter::empty(), 10).is_empty());
    }

    #[test]
    fn histogram_ties_alphabetical() {
        let dir = tempfile::tempdir().unwrap();
        let body = "spotify_id,name,followers,popularity,genres,chart_hits
x,X,,,\"['a']\",
y,Y,,,\"['a', 'b']\",
z,Z,,,\"['b']\",
";
        let cat = ArtistCatalog::load(write(&dir, "n.csv", body), &SchemaConfig::default()).unwrap();
        assert_eq!(
            cat.genre_histogram(cat.ids(), 5),
            vec![("a".to_string(), 2), ("b".to_string(), 2)]
        );
    }

    #[test]
    fn edges_in_file_order_with_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "edges.csv", "id_0,id_1\na,b\nb,\nc,a\nb,c\n");
        let edges = load_edges(&path, &SchemaConfig::default()).unwrap();
        assert_eq!(edges.pairs.len(), 3);
        assert_eq!(edges.pairs[1], ("c".to_string(), "a".to_string()));
        assert_eq!(edges.rejected, vec![Rejection { line: 3, reason: "missing endpoint".into() }]);
    }
}
