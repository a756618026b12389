//! Positional co-occurrence of disambiguated words.
//!
//! Each sentence is reduced to its content sequence: verbs, nouns and
//! entity-tagged tokens, in order. Entity-tagged tokens are keyed by their
//! entity id (consecutive tokens of one entity collapse into one item),
//! everything else by lemma. Pairs are counted over that sequence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::tsv;
use crate::docmodel::{Document, PosClass};
use crate::error::{Error, Result};

/// Default reach of the `before` / `after` variations, in content items.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variation {
    ImmediatelyAfter,
    ImmediatelyBefore,
    Before,
    After,
}

impl Variation {
    /// Fixed order of the score dimensions.
    pub const ALL: [Variation; 4] = [
        Variation::ImmediatelyAfter,
        Variation::ImmediatelyBefore,
        Variation::Before,
        Variation::After,
    ];

    fn as_str(self) -> &'static str {
        match self {
            Variation::ImmediatelyAfter => "imm_after",
            Variation::ImmediatelyBefore => "imm_before",
            Variation::Before => "before",
            Variation::After => "after",
        }
    }

    fn parse(s: &str) -> Option<Variation> {
        Variation::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

impl fmt::Display for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counts keyed by (variation, conditioning word, completion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiStore {
    window: usize,
    counts: BTreeMap<(Variation, String, String), u64>,
    marginal: BTreeMap<(Variation, String), u64>,
}

impl Default for WikiStore {
    fn default() -> Self {
        WikiStore::new(DEFAULT_WINDOW)
    }
}

/// Key of a token inside the content sequence.
pub fn content_sequence(sentence: &[crate::docmodel::Token]) -> Vec<String> {
    let mut seq: Vec<String> = Vec::new();
    let mut last_ent: Option<&str> = None;
    for tok in sentence {
        if let Some(ent) = tok.ent.as_deref() {
            if last_ent != Some(ent) {
                seq.push(ent.to_string());
            }
            last_ent = Some(ent);
            continue;
        }
        last_ent = None;
        if matches!(
            tok.pos_class(),
            PosClass::Verb | PosClass::Noun | PosClass::ProperNoun
        ) {
            seq.push(tok.norm_lemma());
        }
    }
    seq
}

impl WikiStore {
    pub fn new(window: usize) -> Self {
        WikiStore {
            window: window.max(1),
            counts: BTreeMap::new(),
            marginal: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>, window: usize) -> Self {
        let mut store = WikiStore::new(window);
        for doc in docs {
            store.add_document(doc);
        }
        store
    }

    pub fn add_document(&mut self, doc: &Document) {
        for sentence in &doc.sentences {
            let seq = content_sequence(sentence);
            for (i, w1) in seq.iter().enumerate() {
                if i + 1 < seq.len() {
                    self.add(Variation::ImmediatelyAfter, w1, &seq[i + 1], 1);
                }
                if i > 0 {
                    self.add(Variation::ImmediatelyBefore, w1, &seq[i - 1], 1);
                }
                for w2 in &seq[i.saturating_sub(self.window)..i] {
                    self.add(Variation::Before, w1, w2, 1);
                }
                for w2 in seq.iter().skip(i + 1).take(self.window) {
                    self.add(Variation::After, w1, w2, 1);
                }
            }
        }
    }

    pub fn add(&mut self, var: Variation, w1: &str, w2: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self
            .counts
            .entry((var, w1.to_string(), w2.to_string()))
            .or_insert(0) += n;
        *self.marginal.entry((var, w1.to_string())).or_insert(0) += n;
    }

    pub fn count(&self, var: Variation, w1: &str, w2: &str) -> u64 {
        self.counts
            .get(&(var, w1.to_string(), w2.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Conditional probability of `w2` completing `w1` under `var`.
    pub fn probability(&self, var: Variation, w1: &str, w2: &str) -> f64 {
        let n = self.count(var, w1, w2);
        if n == 0 {
            return 0.0;
        }
        n as f64 / self.marginal[&(var, w1.to_string())] as f64
    }

    /// (probability, ln count) for each variation in [`Variation::ALL`] order.
    pub fn query(&self, w1: &str, w2: &str) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, var) in Variation::ALL.into_iter().enumerate() {
            let n = self.count(var, w1, w2);
            if n > 0 {
                out[2 * i] = self.probability(var, w1, w2);
                out[2 * i + 1] = (n as f64).ln();
            }
        }
        out
    }

    pub fn merge(&mut self, other: &WikiStore) -> Result<()> {
        if other.window != self.window && !other.counts.is_empty() && !self.counts.is_empty() {
            return Err(Error::Config(format!(
                "cannot merge wiki stores with windows {} and {}",
                self.window, other.window
            )));
        }
        if self.counts.is_empty() {
            self.window = other.window;
        }
        for ((v, a, b), &n) in &other.counts {
            self.add(*v, a, b, n);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Conditioning words and their total completion counts under `var`.
    pub fn marginals(&self, var: Variation) -> impl Iterator<Item = (&str, u64)> {
        self.marginal
            .iter()
            .filter(move |((v, _), _)| *v == var)
            .map(|((_, w), &n)| (w.as_str(), n))
    }

    pub fn completions<'a>(
        &'a self,
        var: Variation,
        w1: &'a str,
    ) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.counts
            .iter()
            .filter(move |((v, a, _), _)| *v == var && a == w1)
            .map(|((_, _, b), &n)| (b.as_str(), n))
    }

    /// First row records the window; counts follow, marginals are re-derived.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = vec![
            "#window".to_string(),
            "-".to_string(),
            "-".to_string(),
            self.window.to_string(),
        ];
        let rows = self
            .counts
            .iter()
            .map(|((v, a, b), n)| vec![v.to_string(), tsv::clean(a), tsv::clean(b), n.to_string()]);
        tsv::write_rows(path, std::iter::once(header).chain(rows))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut store = WikiStore::default();
        for (i, (f, n)) in tsv::read_rows(path, 4)?.into_iter().enumerate() {
            if f[0] == "#window" {
                store.window = n as usize;
                continue;
            }
            let var = Variation::parse(&f[0]).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("{}: bad variation `{}`", path.display(), f[0]),
            })?;
            store.add(var, &tsv::unclean(&f[1]), &tsv::unclean(&f[2]), n);
        }
        Ok(store)
    }
}
