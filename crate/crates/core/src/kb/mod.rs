//! Knowledge stores backing the pair score vector.
//!
//! A knowledge-base directory holds:
//!
//! | file             | content                                            |
//! |------------------|----------------------------------------------------|
//! | `type1.tsv`      | `pred  role  head  arg  count`                     |
//! | `type2.tsv`      | `pred_a  role_a  pred_b  role_b  connective  count` |
//! | `wiki.tsv`       | `variation  w1  w2  count` (first row: window)      |
//! | `web_cache.json` | `{query: count}` (optional)                        |
//! | `polarity.tsv`   | `lemma  +/-` (optional)                            |
//!
//! Empty fields are written as `-`. Rows are sorted, so two builds of the
//! same corpus produce byte-identical files.

mod polarity;
mod tsv;
mod type1;
mod type2;
mod web;
mod wiki;

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

pub use polarity::PolarityLexicon;
pub use type1::{Type1Key, Type1Store};
pub use type2::{Type2Key, Type2Marginal, Type2Store};
pub use web::{normalize_query, web_queries, WebCache, WebQueries};
pub use wiki::{content_sequence, Variation, WikiStore, DEFAULT_WINDOW as WIKI_WINDOW};

use crate::docmodel::Document;
use crate::error::{Error, Result};
use crate::extract::{self, SkipReport};

pub const TYPE1_FILE: &str = "type1.tsv";
pub const TYPE2_FILE: &str = "type2.tsv";
pub const WIKI_FILE: &str = "wiki.tsv";
pub const WEB_FILE: &str = "web_cache.json";
pub const POLARITY_FILE: &str = "polarity.tsv";
pub const REPORT_FILE: &str = "build_report.txt";

/// Any of the mergeable stores, for callers that handle them generically.
#[derive(Debug, Clone, PartialEq)]
pub enum Store {
    Type1(Type1Store),
    Type2(Type2Store),
    Wiki(WikiStore),
    Web(WebCache),
}

impl Store {
    pub fn kind(&self) -> &'static str {
        match self {
            Store::Type1(_) => "type1",
            Store::Type2(_) => "type2",
            Store::Wiki(_) => "wiki",
            Store::Web(_) => "web",
        }
    }
}

/// Sums the counts of two stores of the same kind.
pub fn merge(a: Store, b: &Store) -> Result<Store> {
    match (a, b) {
        (Store::Type1(mut x), Store::Type1(y)) => {
            x.merge(y);
            Ok(Store::Type1(x))
        }
        (Store::Type2(mut x), Store::Type2(y)) => {
            x.merge(y);
            Ok(Store::Type2(x))
        }
        (Store::Wiki(mut x), Store::Wiki(y)) => {
            x.merge(y)?;
            Ok(Store::Wiki(x))
        }
        (Store::Web(mut x), Store::Web(y)) => {
            x.merge(y);
            Ok(Store::Web(x))
        }
        (a, b) => Err(Error::KindMismatch {
            left: a.kind(),
            right: b.kind(),
        }),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    pub type1: Type1Store,
    pub type2: Type2Store,
    pub wiki: WikiStore,
    pub web: WebCache,
    pub polarity: PolarityLexicon,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub documents: usize,
    pub sentences: usize,
    pub shards: usize,
    pub skips: SkipReport,
    pub events: usize,
    pub type1_keys: usize,
    pub type2_keys: usize,
    pub wiki_keys: usize,
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents           {}", self.documents)?;
        writeln!(f, "sentences           {}", self.sentences)?;
        writeln!(f, "shards              {}", self.shards)?;
        writeln!(f, "{}", self.skips)?;
        writeln!(f, "neighbor events     {}", self.events)?;
        writeln!(f, "type1 keys          {}", self.type1_keys)?;
        writeln!(f, "type2 keys          {}", self.type2_keys)?;
        write!(f, "wiki keys           {}", self.wiki_keys)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildConfig {
    pub neighbor_window: usize,
    pub wiki_window: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            neighbor_window: extract::NEIGHBOR_WINDOW,
            wiki_window: WIKI_WINDOW,
        }
    }
}

/// Corpus-derived stores of one shard.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStores {
    pub type1: Type1Store,
    pub type2: Type2Store,
    pub wiki: WikiStore,
}

impl CorpusStores {
    fn empty(cfg: &BuildConfig) -> Self {
        CorpusStores {
            type1: Type1Store::new(),
            type2: Type2Store::new(),
            wiki: WikiStore::new(cfg.wiki_window),
        }
    }

    pub fn merge(&mut self, other: &CorpusStores) -> Result<()> {
        self.type1.merge(&other.type1);
        self.type2.merge(&other.type2);
        self.wiki.merge(&other.wiki)
    }
}

fn build_shard(docs: &[Document], cfg: &BuildConfig) -> (CorpusStores, BuildReport) {
    let mut stores = CorpusStores::empty(cfg);
    let mut report = BuildReport {
        documents: docs.len(),
        shards: 1,
        ..Default::default()
    };
    for doc in docs {
        report.sentences += doc.sentences.len();
        let (triples, skips) = extract::extract_triples(doc);
        report.skips.absorb(skips);
        let events = extract::neighbor_pairs(doc, &triples, cfg.neighbor_window);
        report.events += events.len();
        for t in &triples {
            stores.type1.add(Type1Key::of(t), 1);
        }
        for e in &events {
            stores.type2.add(Type2Key::of(e), 1);
        }
        stores.wiki.add_document(doc);
    }
    (stores, report)
}

/// Builds the corpus stores, splitting the corpus into `shards` contiguous
/// pieces built in parallel and merged in order.
pub fn build_corpus_stores(
    docs: &[Document],
    shards: usize,
    cfg: &BuildConfig,
) -> (CorpusStores, BuildReport) {
    let shards = shards.max(1);
    let chunk = docs.len().div_ceil(shards).max(1);
    let parts: Vec<(CorpusStores, BuildReport)> = docs
        .par_chunks(chunk)
        .map(|c| build_shard(c, cfg))
        .collect();
    let mut stores = CorpusStores::empty(cfg);
    let mut report = BuildReport {
        shards,
        ..Default::default()
    };
    for (s, r) in &parts {
        stores.merge(s).expect("shards share one window");
        report.documents += r.documents;
        report.sentences += r.sentences;
        report.skips.absorb(r.skips);
        report.events += r.events;
    }
    report.type1_keys = stores.type1.len();
    report.type2_keys = stores.type2.len();
    report.wiki_keys = stores.wiki.len();
    (stores, report)
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_corpus(stores: CorpusStores) -> Self {
        KnowledgeBase {
            type1: stores.type1,
            type2: stores.type2,
            wiki: stores.wiki,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.type1.is_empty()
            && self.type2.is_empty()
            && self.wiki.is_empty()
            && self.web.is_empty()
            && self.polarity.is_empty()
    }

    /// Loads every store present in `dir`; missing files give empty stores.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "knowledge base directory {} not found",
                dir.display()
            )));
        }
        let opt = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Ok(KnowledgeBase {
            type1: opt(TYPE1_FILE)
                .map(|p| Type1Store::load(&p))
                .transpose()?
                .unwrap_or_default(),
            type2: opt(TYPE2_FILE)
                .map(|p| Type2Store::load(&p))
                .transpose()?
                .unwrap_or_default(),
            wiki: opt(WIKI_FILE)
                .map(|p| WikiStore::load(&p))
                .transpose()?
                .unwrap_or_default(),
            web: opt(WEB_FILE)
                .map(|p| WebCache::load(&p))
                .transpose()?
                .unwrap_or_default(),
            polarity: opt(POLARITY_FILE)
                .map(|p| PolarityLexicon::load(&p))
                .transpose()?
                .unwrap_or_default(),
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.type1.save(&dir.join(TYPE1_FILE))?;
        self.type2.save(&dir.join(TYPE2_FILE))?;
        self.wiki.save(&dir.join(WIKI_FILE))?;
        if !self.web.is_empty() {
            self.web.save(&dir.join(WEB_FILE))?;
        }
        if !self.polarity.is_empty() {
            self.polarity.save(&dir.join(POLARITY_FILE))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::doc_from_text;

    #[test]
    fn merge_kind_mismatch() {
        let err = merge(
            Store::Type1(Type1Store::new()),
            &Store::Type2(Type2Store::new()),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::KindMismatch {
                left: "type1",
                right: "type2"
            }
        ));
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let doc = doc_from_text(
            "k",
            "The/DET cat/NOUN chased/VERB the/DET mouse/NOUN ./PUNCT",
            &[],
        );
        let (stores, _) = build_corpus_stores(&[doc], 1, &BuildConfig::default());
        let s = Store::Type1(stores.type1.clone());
        assert_eq!(
            merge(s.clone(), &Store::Type1(Type1Store::new())).unwrap(),
            s
        );
    }

    #[test]
    fn empty_corpus_gives_empty_stores() {
        let (stores, report) = build_corpus_stores(&[], 4, &BuildConfig::default());
        assert!(stores.type1.is_empty() && stores.type2.is_empty() && stores.wiki.is_empty());
        assert_eq!(report.documents, 0);
    }

    #[test]
    fn save_load_round_trip() {
        let doc = doc_from_text(
            "k",
            "John/PROPN fell/VERB because/SCONJ he/PRON slipped/VERB ./PUNCT",
            &[],
        );
        let (stores, _) = build_corpus_stores(&[doc], 1, &BuildConfig::default());
        let mut kb = KnowledgeBase::from_corpus(stores);
        kb.web.insert("john fell", 3.0).unwrap();
        kb.polarity
            .insert("slip", crate::scoring::Polarity::Negative);
        let dir = tempfile::tempdir().unwrap();
        kb.save(dir.path()).unwrap();
        assert_eq!(KnowledgeBase::load(dir.path()).unwrap(), kb);
    }
}
