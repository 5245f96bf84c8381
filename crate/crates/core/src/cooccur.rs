//! Genre co-occurrence network.
//!
//! Every artist with `g >= 2` tags adds one to each of its `g(g-1)/2` tag
//! pairs. Raw counts are kept for all pairs; only pairs above the threshold
//! become edges of the network.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::community::csv_field;
use crate::error::{Error, Result};
use crate::ingest::ArtistCatalog;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Keep pairs with `count > threshold`.
    #[default]
    Strict,
    /// Keep pairs with `count >= threshold`.
    Inclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CooccurrenceNetwork {
    /// Tags in alphabetical order; a tag's vertex id is its position.
    genres: Vec<String>,
    ids: HashMap<String, u32>,
    /// Raw counts keyed by `(a, b)` with `a < b`.
    raw: BTreeMap<(u32, u32), u64>,
    pub threshold: u64,
    pub mode: ThresholdMode,
}

impl CooccurrenceNetwork {
    pub fn build(catalog: &ArtistCatalog, threshold: u64, mode: ThresholdMode) -> CooccurrenceNetwork {
        let mut genres: Vec<String> = catalog
            .records()
            .iter()
            .flat_map(|r| r.genres.iter().cloned())
            .collect();
        genres.sort_unstable();
        genres.dedup();
        let ids: HashMap<String, u32> = genres.iter().enumerate().map(|(i, g)| (g.clone(), i as u32)).collect();

        let mut raw: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for record in catalog.records() {
            let tags: Vec<u32> = record.genres.iter().map(|g| ids[g]).collect();
            for (i, &a) in tags.iter().enumerate() {
                for &b in &tags[i + 1..] {
                    *raw.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
        }
        CooccurrenceNetwork {
            genres,
            ids,
            raw,
            threshold,
            mode,
        }
    }

    fn retained(&self, count: u64) -> bool {
        match self.mode {
            ThresholdMode::Strict => count > self.threshold,
            ThresholdMode::Inclusive => count >= self.threshold,
        }
    }

    pub fn genre_count(&self) -> usize {
        self.genres.len()
    }

    /// Raw count for a tag pair, whether or not it passed the threshold.
    pub fn count(&self, a: &str, b: &str) -> u64 {
        match (self.ids.get(a), self.ids.get(b)) {
            (Some(&x), Some(&y)) if x != y => self.raw.get(&(x.min(y), x.max(y))).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn raw_pairs(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.raw
            .iter()
            .map(|(&(a, b), &c)| (self.genres[a as usize].as_str(), self.genres[b as usize].as_str(), c))
    }

    /// Retained edges, by descending count then alphabetically.
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut edges: Vec<_> = self.raw_pairs().filter(|&(_, _, c)| self.retained(c)).collect();
        edges.sort_by(|x, y| y.2.cmp(&x.2).then_with(|| (x.0, x.1).cmp(&(y.0, y.1))));
        edges
    }

    /// Genres by number of retained edges, ties alphabetical. Genres without
    /// retained edges are left out.
    pub fn top_genres_by_degree(&self, n: usize) -> Vec<(String, usize)> {
        let mut degree = vec![0usize; self.genres.len()];
        for (&(a, b), &c) in &self.raw {
            if self.retained(c) {
                degree[a as usize] += 1;
                degree[b as usize] += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = degree
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d > 0)
            .map(|(i, d)| (self.genres[i].clone(), d))
            .collect();
        ranked.sort_by_key(|&(_, d)| std::cmp::Reverse(d));
        ranked.truncate(n);
        ranked
    }

    /// Retained neighbours of `genre` by descending count, ties alphabetical.
    pub fn top_cooccurring(&self, genre: &str, n: usize) -> Result<Vec<(String, u64)>> {
        let id = *self.ids.get(genre).ok_or_else(|| Error::Lookup {
            kind: "genre",
            name: genre.to_string(),
        })?;
        let mut out: Vec<(String, u64)> = self
            .raw
            .iter()
            .filter(|(&(a, b), &c)| (a == id || b == id) && self.retained(c))
            .map(|(&(a, b), &c)| {
                let other = if a == id { b } else { a };
                (self.genres[other as usize].clone(), c)
            })
            .collect();
        out.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        out.truncate(n);
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("genre_a,genre_b,count\n");
        for (a, b, c) in self.edges() {
            out.push_str(&format!("{},{},{c}\n", csv_field(a), csv_field(b)));
        }
        out
    }
}
