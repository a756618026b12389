//! Documents, mentions and the JSON-lines corpus format.
//!
//! One document per line:
//!
//! ```json
//! {"doc_id": "d1",
//!  "sentences": [[{"t": "The", "lemma": "the", "pos": "DET"}, ...]],
//!  "mentions": [{"sent": 0, "start": 0, "end": 2, "head": 1, "role": "subj",
//!                "pronoun": false, "gold": 0}],
//!  "category": "Cat1"}
//! ```
//!
//! Token keys `ent`, `gender` and `num` are optional, as are the mention keys
//! `gold` and `target` and the document key `category`. Mentions must be
//! listed in document order.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Masc,
    Fem,
    Neut,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Number {
    Sing,
    Plur,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subj,
    Obj,
    Other,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Subj => "subj",
            Role::Obj => "obj",
            Role::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "subj" => Some(Role::Subj),
            "obj" => Some(Role::Obj),
            "other" => Some(Role::Other),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Winograd instance category: which kind of schema knowledge resolves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Cat1,
    Cat2,
    Cat3,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Cat1, Category::Cat2, Category::Cat3];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Coarse part-of-speech class. Accepts both universal and Penn tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosClass {
    Noun,
    ProperNoun,
    Pronoun,
    Verb,
    Aux,
    Adjective,
    Adverb,
    Determiner,
    Adposition,
    Conjunction,
    Particle,
    Punct,
    Other,
}

impl PosClass {
    pub fn from_tag(tag: &str) -> PosClass {
        match tag {
            "NOUN" | "NN" | "NNS" => PosClass::Noun,
            "PROPN" | "NNP" | "NNPS" => PosClass::ProperNoun,
            "PRON" | "PRP" | "PRP$" | "WP" | "WP$" => PosClass::Pronoun,
            "VERB" | "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" => PosClass::Verb,
            "AUX" | "MD" => PosClass::Aux,
            "ADJ" | "JJ" | "JJR" | "JJS" => PosClass::Adjective,
            "ADV" | "RB" | "RBR" | "RBS" | "WRB" => PosClass::Adverb,
            "DET" | "DT" | "PDT" | "WDT" => PosClass::Determiner,
            "ADP" | "IN" => PosClass::Adposition,
            "CCONJ" | "SCONJ" | "CC" => PosClass::Conjunction,
            "PART" | "RP" | "TO" | "POS" => PosClass::Particle,
            "PUNCT" | "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" => PosClass::Punct,
            _ => PosClass::Other,
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(
            self,
            PosClass::Noun | PosClass::ProperNoun | PosClass::Pronoun
        )
    }

    pub fn is_verbal(self) -> bool {
        matches!(self, PosClass::Verb | PosClass::Aux)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub t: String,
    pub lemma: String,
    pub pos: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<Number>,
}

impl Token {
    pub fn new(t: &str, lemma: &str, pos: &str) -> Token {
        Token {
            t: t.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            ent: None,
            gender: None,
            num: None,
        }
    }

    pub fn pos_class(&self) -> PosClass {
        PosClass::from_tag(&self.pos)
    }

    /// Lowercased lemma, falling back to the bundled lemmatizer when the
    /// corpus left the lemma empty.
    pub fn norm_lemma(&self) -> String {
        if self.lemma.is_empty() {
            lexicon::lemmatize(&self.t, self.pos_class())
        } else {
            self.lemma.to_lowercase()
        }
    }
}

/// Mention as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub sent: usize,
    pub start: usize,
    pub end: usize,
    pub head: usize,
    pub role: Role,
    pub pronoun: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub target: bool,
}

/// Document as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub doc_id: String,
    pub sentences: Vec<Vec<Token>>,
    pub mentions: Vec<MentionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub sent: usize,
    pub start: usize,
    pub end: usize,
    pub head: usize,
    pub head_lemma: String,
    pub role: Role,
    pub is_pronoun: bool,
    pub gender: Gender,
    pub number: Number,
    pub gold: Option<u32>,
    /// Flagged as the pronoun in question of a Winograd-style instance.
    pub target: bool,
}

impl Mention {
    fn to_record(&self) -> MentionRecord {
        MentionRecord {
            sent: self.sent,
            start: self.start,
            end: self.end,
            head: self.head,
            role: self.role,
            pronoun: self.is_pronoun,
            gold: self.gold,
            target: self.target,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Vec<Token>>,
    pub mentions: Vec<Mention>,
    pub category: Option<Category>,
}

impl Document {
    /// Validates a record and derives per-mention lexical features.
    pub fn from_record(rec: DocRecord) -> Result<Document> {
        let DocRecord {
            doc_id,
            sentences,
            mentions,
            category,
        } = rec;
        let mut out = Vec::with_capacity(mentions.len());
        for (i, m) in mentions.into_iter().enumerate() {
            let field = format!("mentions[{i}]");
            let sent = sentences.get(m.sent).ok_or_else(|| {
                Error::invariant(
                    &doc_id,
                    &field,
                    format!("sentence {} does not exist", m.sent),
                )
            })?;
            if m.start >= m.end || m.end > sent.len() {
                return Err(Error::invariant(
                    &doc_id,
                    &field,
                    format!(
                        "span [{}, {}) outside sentence {} of length {}",
                        m.start,
                        m.end,
                        m.sent,
                        sent.len()
                    ),
                ));
            }
            if m.head < m.start || m.head >= m.end {
                return Err(Error::invariant(
                    &doc_id,
                    &field,
                    format!("head {} outside span [{}, {})", m.head, m.start, m.end),
                ));
            }
            let head_tok = &sent[m.head];
            let (gender, number) = if m.pronoun {
                lexicon::pronoun_features(&head_tok.t).unwrap_or((Gender::Unknown, Number::Unknown))
            } else {
                let gender = head_tok
                    .gender
                    .or_else(|| {
                        (head_tok.pos_class() == PosClass::ProperNoun)
                            .then(|| lexicon::name_gender(&head_tok.t))
                            .flatten()
                    })
                    .unwrap_or(Gender::Unknown);
                (gender, head_tok.num.unwrap_or(Number::Unknown))
            };
            out.push(Mention {
                sent: m.sent,
                start: m.start,
                end: m.end,
                head: m.head,
                head_lemma: head_tok.norm_lemma(),
                role: m.role,
                is_pronoun: m.pronoun,
                gender,
                number,
                gold: m.gold,
                target: m.target,
            });
        }
        for (i, pair) in out.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if (a.sent, a.start, a.end) >= (b.sent, b.start, b.end) {
                return Err(Error::invariant(
                    &doc_id,
                    &format!("mentions[{}]", i + 1),
                    "mentions must be listed in document order without duplicates",
                ));
            }
        }
        let with_gold = out.iter().filter(|m| m.gold.is_some()).count();
        if with_gold != 0 && with_gold != out.len() {
            return Err(Error::invariant(
                &doc_id,
                "gold",
                "either every mention or no mention carries a gold cluster id",
            ));
        }
        Ok(Document {
            doc_id,
            sentences,
            mentions: out,
            category,
        })
    }

    pub fn to_record(&self) -> DocRecord {
        DocRecord {
            doc_id: self.doc_id.clone(),
            sentences: self.sentences.clone(),
            mentions: self.mentions.iter().map(Mention::to_record).collect(),
            category: self.category,
        }
    }

    pub fn token(&self, sent: usize, idx: usize) -> &Token {
        &self.sentences[sent][idx]
    }

    pub fn head_token(&self, m: usize) -> &Token {
        let m = &self.mentions[m];
        &self.sentences[m.sent][m.head]
    }

    pub fn has_gold(&self) -> bool {
        !self.mentions.is_empty() && self.mentions.iter().all(|m| m.gold.is_some())
    }

    /// Gold clusters as sorted lists of mention indices, ordered by first member.
    pub fn gold_clusters(&self) -> Vec<Vec<usize>> {
        let mut by_id: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, m) in self.mentions.iter().enumerate() {
            match m.gold {
                Some(g) => by_id.entry(g).or_default().push(i),
                None => by_id.entry(u32::MAX - i as u32).or_default().push(i),
            }
        }
        let mut clusters: Vec<Vec<usize>> = by_id.into_values().collect();
        clusters.sort();
        clusters
    }

    /// Preceding mentions in the same gold cluster.
    pub fn gold_antecedents(&self, u: usize) -> Vec<usize> {
        match self.mentions[u].gold {
            Some(g) => (0..u)
                .filter(|&v| self.mentions[v].gold == Some(g))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Candidate antecedents of a pronoun: every preceding non-pronoun mention.
    pub fn candidate_entities(&self, u: usize) -> Vec<usize> {
        (0..u).filter(|&v| !self.mentions[v].is_pronoun).collect()
    }

    /// The pronouns in question. Flagged mentions when any are flagged,
    /// otherwise every pronoun.
    pub fn target_pronouns(&self) -> Vec<usize> {
        let flagged: Vec<usize> = (0..self.mentions.len())
            .filter(|&i| self.mentions[i].target && self.mentions[i].is_pronoun)
            .collect();
        if !flagged.is_empty() {
            return flagged;
        }
        (0..self.mentions.len())
            .filter(|&i| self.mentions[i].is_pronoun)
            .collect()
    }
}

pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DocRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        docs.push(Document::from_record(rec)?);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file))
}

pub fn write_corpus<W: Write>(docs: &[Document], mut out: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, &doc.to_record())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_corpus(docs, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub docs: usize,
    pub mentions: usize,
    pub pronouns: usize,
    /// Σ over pronouns of the number of candidate antecedents
    /// (preceding non-pronoun mentions).
    pub predictions_for_pronoun: usize,
    pub categories: BTreeMap<String, usize>,
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents               {}", self.docs)?;
        writeln!(f, "mentions                {}", self.mentions)?;
        writeln!(f, "pronouns                {}", self.pronouns)?;
        writeln!(
            f,
            "predictions for pronoun {}",
            self.predictions_for_pronoun
        )?;
        for (cat, n) in &self.categories {
            writeln!(f, "  {cat:<21} {n}")?;
        }
        Ok(())
    }
}

pub fn dataset_stats(docs: &[Document]) -> StatsReport {
    let mut report = StatsReport {
        docs: docs.len(),
        ..Default::default()
    };
    for doc in docs {
        report.mentions += doc.mentions.len();
        for (i, m) in doc.mentions.iter().enumerate() {
            if m.is_pronoun {
                report.pronouns += 1;
                report.predictions_for_pronoun += doc.candidate_entities(i).len();
            }
        }
        if let Some(cat) = doc.category {
            *report.categories.entry(cat.to_string()).or_default() += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const FISH: &str = r#"{"doc_id":"fish","sentences":[[{"t":"The","lemma":"the","pos":"DET"},{"t":"fish","lemma":"fish","pos":"NOUN"},{"t":"ate","lemma":"eat","pos":"VERB"},{"t":"the","lemma":"the","pos":"DET"},{"t":"worm","lemma":"worm","pos":"NOUN"},{"t":"because","lemma":"because","pos":"SCONJ"},{"t":"it","lemma":"it","pos":"PRON"},{"t":"was","lemma":"be","pos":"AUX"},{"t":"hungry","lemma":"hungry","pos":"ADJ"},{"t":".","lemma":".","pos":"PUNCT"}]],"mentions":[{"sent":0,"start":0,"end":2,"head":1,"role":"subj","pronoun":false,"gold":0},{"sent":0,"start":3,"end":5,"head":4,"role":"obj","pronoun":false,"gold":1},{"sent":0,"start":6,"end":7,"head":6,"role":"subj","pronoun":true,"gold":0,"target":true}],"category":"Cat1"}"#;

    #[test]
    fn empty_input_is_empty_corpus() {
        assert!(parse_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn loads_hand_built_fixture() {
        let docs = parse_corpus(FISH.as_bytes()).unwrap();
        assert_eq!(docs.len(), 1);
        let d = &docs[0];
        assert_eq!(d.mentions.len(), 3);
        assert_eq!(d.mentions[0].head_lemma, "fish");
        assert_eq!(d.mentions[2].gender, Gender::Neut);
        assert_eq!(d.mentions[2].number, Number::Sing);
        assert_eq!(d.mentions[0].gender, Gender::Unknown);
        assert_eq!(d.category, Some(Category::Cat1));
        assert_eq!(d.gold_clusters(), vec![vec![0, 2], vec![1]]);
        assert_eq!(d.gold_antecedents(2), vec![0]);
        assert_eq!(d.candidate_entities(2), vec![0, 1]);
        assert_eq!(d.target_pronouns(), vec![2]);

        let mut buf = Vec::new();
        write_corpus(&docs, &mut buf).unwrap();
        assert_eq!(parse_corpus(&buf[..]).unwrap(), docs);
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), FISH);
    }

    #[test]
    fn span_past_sentence_end_names_document() {
        let bad = FISH.replace(r#""start":3,"end":5"#, r#""start":3,"end":12"#);
        let err = parse_corpus(bad.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fish") && msg.contains("mentions[1]"), "{msg}");
    }

    #[test]
    fn parse_error_carries_line_number() {
        let input = format!("{FISH}\n{{not json\n");
        match parse_corpus(input.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn head_outside_span_rejected() {
        let bad = FISH.replace(r#""end":2,"head":1"#, r#""end":2,"head":2"#);
        assert!(matches!(
            parse_corpus(bad.as_bytes()).unwrap_err(),
            Error::Invariant { .. }
        ));
    }

    #[test]
    fn partial_gold_rejected() {
        let bad = FISH.replace(r#""pronoun":false,"gold":1"#, r#""pronoun":false"#);
        let err = parse_corpus(bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("gold"));
    }

    #[test]
    fn unknown_category_rejected() {
        let bad = FISH.replace("Cat1", "Cat4");
        assert!(parse_corpus(bad.as_bytes()).is_err());
    }

    #[test]
    fn stats_on_single_doc() {
        let docs = parse_corpus(FISH.as_bytes()).unwrap();
        let s = dataset_stats(&docs);
        assert_eq!(
            (s.docs, s.mentions, s.pronouns, s.predictions_for_pronoun),
            (1, 3, 1, 2)
        );
        assert_eq!(s.categories.get("Cat1"), Some(&1));
    }
}
