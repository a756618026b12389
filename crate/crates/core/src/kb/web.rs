//! Offline web hit-count cache and the query patterns that read it.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::extract::ArgPos;
use crate::lexicon;

/// Query strings for the four patterns, each expanded over morphological
/// variants: `candidate arg`, `candidate pred`, `candidate pred arg`,
/// `arg candidate`. The last one only exists for an adjective argument of a
/// to-be predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WebQueries {
    pub variants: [Vec<String>; 4],
}

impl WebQueries {
    pub fn all(&self) -> impl Iterator<Item = &String> {
        self.variants.iter().flatten()
    }
}

pub fn normalize_query(q: &str) -> String {
    q.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn product(parts: &[Vec<String>]) -> Vec<String> {
    let mut out = vec![String::new()];
    for part in parts {
        out = out
            .iter()
            .flat_map(|prefix| part.iter().map(move |w| format!("{prefix} {w}")))
            .collect();
    }
    let mut seen = std::collections::BTreeSet::new();
    out.into_iter()
        .map(|q| normalize_query(&q))
        .filter(|q| seen.insert(q.clone()))
        .collect()
}

pub fn web_queries(
    candidate: &str,
    predicate: &str,
    argument: &str,
    arg_pos: ArgPos,
) -> WebQueries {
    let mut q = WebQueries::default();
    if candidate.is_empty() || predicate.is_empty() {
        return q;
    }
    let cand = lexicon::noun_forms(candidate);
    let pred = lexicon::verb_forms(predicate);
    let arg = match arg_pos {
        ArgPos::Noun => lexicon::noun_forms(argument),
        _ => vec![argument.to_string()],
    };
    if !argument.is_empty() {
        q.variants[0] = product(&[cand.clone(), arg.clone()]);
    }
    q.variants[1] = product(&[cand.clone(), pred.clone()]);
    if !argument.is_empty() {
        q.variants[2] = product(&[cand.clone(), pred, arg.clone()]);
    }
    if arg_pos == ArgPos::Adjective && lexicon::is_to_be(predicate) && !argument.is_empty() {
        q.variants[3] = product(&[arg, cand]);
    }
    q
}

/// Read-only map from normalized query to averaged hit count.
#[derive(Debug, Default)]
pub struct WebCache {
    counts: BTreeMap<String, f64>,
    misses: AtomicU64,
    requested: Mutex<std::collections::BTreeSet<String>>,
}

impl Clone for WebCache {
    fn clone(&self) -> Self {
        WebCache {
            counts: self.counts.clone(),
            misses: AtomicU64::new(self.misses()),
            requested: Mutex::new(self.requested.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for WebCache {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts
    }
}

impl WebCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut cache = WebCache::new();
        for (q, n) in counts {
            cache.insert(&q, n)?;
        }
        Ok(cache)
    }

    pub fn insert(&mut self, query: &str, count: f64) -> Result<()> {
        if !count.is_finite() || count < 0.0 {
            return Err(Error::Config(format!(
                "web count for `{query}` must be a non-negative number"
            )));
        }
        self.counts.insert(normalize_query(query), count);
        Ok(())
    }

    pub fn get(&self, query: &str) -> Option<f64> {
        let key = normalize_query(query);
        let hit = self.counts.get(&key).copied();
        if hit.is_none() {
            self.misses.fetch_add(1, Ordering::Relaxed);
            self.requested.lock().unwrap().insert(key);
        }
        hit
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Missed queries seen so far, for filling the cache from another source.
    pub fn missed_queries(&self) -> Vec<String> {
        self.requested.lock().unwrap().iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// One dimension per pattern: `ln(1 + mean)` over the cached variants of
    /// that pattern. Misses are left out of the mean; a pattern with no
    /// cached variant scores 0.
    pub fn query(&self, queries: &WebQueries) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (dim, variants) in queries.variants.iter().enumerate() {
            let hits: Vec<f64> = variants.iter().filter_map(|q| self.get(q)).collect();
            if !hits.is_empty() {
                let mean = hits.iter().sum::<f64>() / hits.len() as f64;
                out[dim] = mean.ln_1p();
            }
        }
        out
    }

    pub fn merge(&mut self, other: &WebCache) {
        for (q, n) in &other.counts {
            *self.counts.entry(q.clone()).or_insert(0.0) += n;
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.counts).expect("string keys serialize");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })?;
        WebCache::from_counts(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_misses_score_zero() {
        let cache = WebCache::new();
        let q = web_queries("fish", "be", "hungry", ArgPos::Adjective);
        assert_eq!(cache.query(&q), [0.0; 4]);
        assert_eq!(cache.misses() as usize, q.all().count());
        assert!(cache
            .missed_queries()
            .contains(&"fish was hungry".to_string()));
    }

    #[test]
    fn average_over_cached_variants() {
        let q = web_queries("fish", "eat", "", ArgPos::Other);
        assert!(q.variants[1].contains(&"fish eats".to_string()));
        assert!(
            q.variants[1].contains(&"fishes ate".to_string())
                || q.variants[1].contains(&"fish ate".to_string())
        );
        let cache = WebCache::from_counts([
            ("fish eats".to_string(), 10.0),
            ("fish ate".to_string(), 30.0),
        ])
        .unwrap();
        let v = cache.query(&q);
        assert!((v[1] - 21f64.ln()).abs() < 1e-12);
        assert_eq!((v[0], v[2], v[3]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn adjective_pattern_gate() {
        let adj = web_queries("trophy", "be", "big", ArgPos::Adjective);
        assert!(adj.variants[3].contains(&"big trophy".to_string()));
        assert!(adj.variants[3].contains(&"big trophies".to_string()));
        let noun = web_queries("fish", "eat", "worm", ArgPos::Noun);
        assert!(noun.variants[3].is_empty());
        assert!(noun.variants[2].contains(&"fish ate worms".to_string()));
        let verb_adj = web_queries("man", "seem", "tall", ArgPos::Adjective);
        assert!(verb_adj.variants[3].is_empty());
    }

    #[test]
    fn json_round_trip() {
        let cache = WebCache::from_counts([("Big  Trophy".to_string(), 4.5)]).unwrap();
        assert_eq!(cache.get("big trophy"), Some(4.5));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("web.json");
        cache.save(&p).unwrap();
        assert_eq!(WebCache::load(&p).unwrap(), cache);
    }

    #[test]
    fn negative_counts_rejected() {
        assert!(WebCache::from_counts([("x".to_string(), -1.0)]).is_err());
    }
}
