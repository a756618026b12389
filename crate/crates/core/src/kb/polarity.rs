use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scoring::Polarity;

/// Prior polarity of predicate lemmas; anything absent is neutral.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolarityLexicon {
    entries: BTreeMap<String, Polarity>,
}

impl PolarityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lemma: &str, polarity: Polarity) {
        if polarity == Polarity::Neutral {
            self.entries.remove(lemma);
        } else {
            self.entries.insert(lemma.to_lowercase(), polarity);
        }
    }

    pub fn get(&self, lemma: &str) -> Polarity {
        self.entries
            .get(&lemma.to_lowercase())
            .copied()
            .unwrap_or(Polarity::Neutral)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `lemma<TAB>+` or `lemma<TAB>-` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = PolarityLexicon::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, sign) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `lemma<TAB>+|-`".into(),
            })?;
            let polarity = match sign.trim() {
                "+" => Polarity::Positive,
                "-" => Polarity::Negative,
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("bad polarity `{other}`"),
                    })
                }
            };
            lex.insert(lemma.trim(), polarity);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (lemma, p) in &self.entries {
            let sign = if *p == Polarity::Positive { '+' } else { '-' };
            out.push_str(&format!("{lemma}\t{sign}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}
