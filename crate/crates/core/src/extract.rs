//! Predicate-argument triples and neighbor co-occurrence events.
//!
//! A triple `pred(m, a)` is read off a POS-tagged sentence with a rule
//! cascade instead of a parser: the sentence is cut into clauses at
//! punctuation, conjunctions and discourse connectives; inside a clause the
//! verb group closest to the noun-phrase head governs it. A head left of the
//! verb group is its subject, a head right of it is its object. The other
//! argument is the nearest nominal or predicative adjective on the opposite
//! side.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Gender, Number, PosClass, Role, Token};
use crate::lexicon;

/// Default neighbor window, in sentences.
pub const NEIGHBOR_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgPos {
    Noun,
    Adjective,
    Other,
}

/// Position of a noun-phrase head: sentence index and token index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub sent: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub predicate: String,
    /// Always `Subj` or `Obj`.
    pub role: Role,
    /// Lemma of the mention head filling the role.
    pub head: String,
    /// Lemma of the other argument, empty when there is none.
    pub argument: String,
    pub arg_pos: ArgPos,
    pub sent: usize,
    /// Token index of the main verb of the governing verb group.
    pub pred_index: usize,
    pub source: Anchor,
    pub arg_index: Option<usize>,
}

impl Triple {
    /// Predicate key used for co-occurrence schemas. Copular predicates with
    /// an adjective complement are keyed by the adjective (`be:hungry`) since
    /// the bare copula carries no content.
    pub fn schema_predicate(&self) -> String {
        if self.is_copular_adjective() {
            format!("be:{}", self.argument)
        } else {
            self.predicate.clone()
        }
    }

    pub fn is_copular_adjective(&self) -> bool {
        self.arg_pos == ArgPos::Adjective && lexicon::is_to_be(&self.predicate)
    }

    pub fn key(&self) -> TripleKey {
        TripleKey {
            predicate: self.schema_predicate(),
            role: self.role,
        }
    }
}

/// What is kept of a triple inside a co-occurrence schema: predicate and role.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleKey {
    pub predicate: String,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Evidence {
    HeadMatch,
    NamePronoun,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeighborPairEvent {
    pub first: TripleKey,
    pub second: TripleKey,
    pub connective: Option<&'static str>,
    pub evidence: Evidence,
    pub sentence_distance: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipReport {
    pub noun_phrases: usize,
    pub with_triple: usize,
    pub without_triple: usize,
}

impl SkipReport {
    pub fn absorb(&mut self, other: SkipReport) {
        self.noun_phrases += other.noun_phrases;
        self.with_triple += other.with_triple;
        self.without_triple += other.without_triple;
    }
}

impl fmt::Display for SkipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "noun phrases        {}", self.noun_phrases)?;
        writeln!(f, "with triple         {}", self.with_triple)?;
        write!(f, "without predicate   {}", self.without_triple)
    }
}

fn is_boundary(tok: &Token) -> bool {
    matches!(tok.pos_class(), PosClass::Punct | PosClass::Conjunction)
        || lexicon::connective(&tok.t).is_some()
}

/// Half-open token range of the clause containing `idx`.
fn clause_bounds(sent: &[Token], idx: usize) -> (usize, usize) {
    let lo = (0..idx)
        .rev()
        .find(|&i| is_boundary(&sent[i]))
        .map_or(0, |i| i + 1);
    let hi = (idx + 1..sent.len())
        .find(|&i| is_boundary(&sent[i]))
        .unwrap_or(sent.len());
    (lo, hi)
}

#[derive(Debug, Clone, Copy)]
struct VerbGroup {
    start: usize,
    end: usize,
    main: usize,
}

fn verb_groups(sent: &[Token], lo: usize, hi: usize) -> Vec<VerbGroup> {
    let mut groups = Vec::new();
    let mut i = lo;
    while i < hi {
        if !sent[i].pos_class().is_verbal() {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        loop {
            let mut j = end;
            while j < hi && matches!(sent[j].pos_class(), PosClass::Adverb | PosClass::Particle) {
                j += 1;
            }
            if j < hi && sent[j].pos_class().is_verbal() {
                end = j + 1;
            } else {
                break;
            }
        }
        let main = (start..end)
            .rev()
            .find(|&k| sent[k].pos_class() == PosClass::Verb)
            .or_else(|| {
                (start..end)
                    .rev()
                    .find(|&k| sent[k].pos_class() == PosClass::Aux)
            })
            .unwrap_or(start);
        groups.push(VerbGroup { start, end, main });
        i = end;
    }
    groups
}

fn nominal_class(pos: PosClass) -> ArgPos {
    match pos {
        PosClass::Noun | PosClass::ProperNoun => ArgPos::Noun,
        _ => ArgPos::Other,
    }
}

/// Argument to the right of a verb group: object or predicative complement.
fn right_argument(sent: &[Token], from: usize, hi: usize) -> Option<(usize, ArgPos)> {
    let mut i = from;
    while i < hi {
        let pos = sent[i].pos_class();
        match pos {
            PosClass::Noun | PosClass::ProperNoun => {
                let mut j = i;
                while j + 1 < hi
                    && matches!(
                        sent[j + 1].pos_class(),
                        PosClass::Noun | PosClass::ProperNoun
                    )
                {
                    j += 1;
                }
                return Some((j, ArgPos::Noun));
            }
            PosClass::Pronoun => return Some((i, ArgPos::Other)),
            PosClass::Adjective => {
                let mut j = i + 1;
                while j < hi && sent[j].pos_class() == PosClass::Adjective {
                    j += 1;
                }
                if j < hi && matches!(sent[j].pos_class(), PosClass::Noun | PosClass::ProperNoun) {
                    i = j;
                    continue;
                }
                return Some((i, ArgPos::Adjective));
            }
            PosClass::Determiner
            | PosClass::Adposition
            | PosClass::Adverb
            | PosClass::Particle
            | PosClass::Other => i += 1,
            _ => return None,
        }
    }
    None
}

/// Argument to the left of a verb group: its subject.
fn left_argument(sent: &[Token], lo: usize, before: usize) -> Option<(usize, ArgPos)> {
    (lo..before)
        .rev()
        .take_while(|&i| !sent[i].pos_class().is_verbal())
        .find(|&i| sent[i].pos_class().is_nominal())
        .map(|i| (i, nominal_class(sent[i].pos_class())))
}

/// Triple governed by the closest verb group in the clause of `head`.
pub fn triple_for(doc: &Document, anchor: Anchor) -> Option<Triple> {
    let sent = doc.sentences.get(anchor.sent)?;
    if anchor.head >= sent.len() {
        return None;
    }
    let (lo, hi) = clause_bounds(sent, anchor.head);
    let h = anchor.head;
    let group = verb_groups(sent, lo, hi)
        .into_iter()
        .filter(|g| h < g.start || h >= g.end)
        .min_by_key(|g| {
            if h < g.start {
                (g.start - h, 0)
            } else {
                (h + 1 - g.end, 1)
            }
        })?;
    let (role, arg) = if h < group.start {
        (Role::Subj, right_argument(sent, group.end, hi))
    } else {
        (Role::Obj, left_argument(sent, lo, group.start))
    };
    let (argument, arg_pos, arg_index) = match arg {
        Some((i, pos)) => (sent[i].norm_lemma(), pos, Some(i)),
        None => (String::new(), ArgPos::Other, None),
    };
    Some(Triple {
        predicate: sent[group.main].norm_lemma(),
        role,
        head: sent[h].norm_lemma(),
        argument,
        arg_pos,
        sent: anchor.sent,
        pred_index: group.main,
        source: anchor,
        arg_index,
    })
}

/// Heads of the noun phrases to extract from: the annotated mentions when the
/// document has any, otherwise the last token of every nominal run found by a
/// chunking rule. Possessive determiners (`his` before a noun) are skipped.
pub fn noun_phrase_heads(doc: &Document) -> Vec<Anchor> {
    if !doc.mentions.is_empty() {
        return doc
            .mentions
            .iter()
            .map(|m| Anchor {
                sent: m.sent,
                head: m.head,
            })
            .collect();
    }
    let mut heads = Vec::new();
    for (s, sent) in doc.sentences.iter().enumerate() {
        for (i, tok) in sent.iter().enumerate() {
            let next = sent.get(i + 1).map(Token::pos_class);
            let noun_follows = matches!(next, Some(PosClass::Noun | PosClass::ProperNoun));
            let is_head = match tok.pos_class() {
                PosClass::Noun | PosClass::ProperNoun => !noun_follows,
                PosClass::Pronoun => !noun_follows && next != Some(PosClass::Adjective),
                _ => false,
            };
            if is_head {
                heads.push(Anchor { sent: s, head: i });
            }
        }
    }
    heads
}

pub fn extract_triples(doc: &Document) -> (Vec<Triple>, SkipReport) {
    let heads = noun_phrase_heads(doc);
    let mut report = SkipReport {
        noun_phrases: heads.len(),
        ..Default::default()
    };
    let triples: Vec<Triple> = heads
        .into_iter()
        .filter_map(|a| triple_for(doc, a))
        .collect();
    report.with_triple = triples.len();
    report.without_triple = report.noun_phrases - report.with_triple;
    (triples, report)
}

/// Last discourse connective strictly between two token positions.
pub fn connective_between(
    doc: &Document,
    from: (usize, usize),
    to: (usize, usize),
) -> Option<&'static str> {
    let (from, to) = if from <= to { (from, to) } else { (to, from) };
    let mut found = None;
    for s in from.0..=to.0 {
        let sent = &doc.sentences[s];
        let lo = if s == from.0 { from.1 + 1 } else { 0 };
        let hi = if s == to.0 { to.1 } else { sent.len() };
        for tok in sent.iter().take(hi).skip(lo) {
            if let Some(c) = lexicon::connective(&tok.t) {
                found = Some(c);
            }
        }
    }
    found
}

/// Polarity cues of a triple's predicate: the nearest connective preceding it
/// in its sentence, and the negative comparatives in its clause.
pub fn polarity_cues(doc: &Document, triple: &Triple) -> (Vec<&'static str>, Vec<String>) {
    let sent = &doc.sentences[triple.sent];
    let connectives = sent[..triple.pred_index]
        .iter()
        .rev()
        .find_map(|t| lexicon::connective(&t.t))
        .into_iter()
        .collect();
    let (lo, hi) = clause_bounds(sent, triple.pred_index);
    let adverbs = sent[lo..hi]
        .iter()
        .filter(|t| lexicon::is_negative_comparative(&t.t))
        .map(|t| t.t.to_lowercase())
        .collect();
    (connectives, adverbs)
}

fn person_gender(tok: &Token) -> Option<Gender> {
    if tok.pos_class() != PosClass::ProperNoun {
        return None;
    }
    let tagged = tok
        .gender
        .filter(|g| matches!(g, Gender::Masc | Gender::Fem) && tok.ent.is_some());
    tagged.or_else(|| lexicon::name_gender(&tok.t))
}

/// Whether a pronoun is compatible with a singular person name of `gender`.
pub fn compatible_pronoun(pronoun: &str, gender: Gender) -> bool {
    match lexicon::pronoun_features(pronoun) {
        Some((g, Number::Sing)) => g == gender && matches!(g, Gender::Masc | Gender::Fem),
        _ => false,
    }
}

/// Coreference evidence linking the mention slots of two triples.
pub fn link_evidence(doc: &Document, first: &Triple, second: &Triple) -> Option<Evidence> {
    let a = doc.token(first.source.sent, first.source.head);
    let b = doc.token(second.source.sent, second.source.head);
    let nounish = |t: &Token| matches!(t.pos_class(), PosClass::Noun | PosClass::ProperNoun);
    if nounish(a) && nounish(b) && a.norm_lemma() == b.norm_lemma() {
        return Some(Evidence::HeadMatch);
    }
    if b.pos_class() == PosClass::Pronoun {
        if let Some(g) = person_gender(a) {
            if compatible_pronoun(&b.t, g) {
                return Some(Evidence::NamePronoun);
            }
        }
    }
    None
}

pub fn neighbor_pairs(doc: &Document, triples: &[Triple], window: usize) -> Vec<NeighborPairEvent> {
    let mut ordered: Vec<&Triple> = triples.iter().collect();
    ordered.sort_by_key(|t| (t.sent, t.pred_index, t.source));
    let mut events = Vec::new();
    for (i, first) in ordered.iter().enumerate() {
        for second in &ordered[i + 1..] {
            let distance = second.sent - first.sent;
            if distance > window {
                break;
            }
            if (first.sent, first.pred_index) == (second.sent, second.pred_index) {
                continue;
            }
            let Some(evidence) = link_evidence(doc, first, second) else {
                continue;
            };
            events.push(NeighborPairEvent {
                first: first.key(),
                second: second.key(),
                connective: connective_between(
                    doc,
                    (first.sent, first.pred_index),
                    (second.sent, second.pred_index),
                ),
                evidence,
                sentence_distance: distance,
            });
        }
    }
    events
}

pub fn extract_neighbor_pairs(doc: &Document, window: usize) -> Vec<NeighborPairEvent> {
    let (triples, _) = extract_triples(doc);
    neighbor_pairs(doc, &triples, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::doc_from_text;

    fn triples(text: &str) -> Vec<Triple> {
        extract_triples(&doc_from_text("t", text, &[])).0
    }

    #[test]
    fn subject_triple_with_object_argument() {
        let t = triples("The/DET fish/NOUN ate/VERB the/DET worm/NOUN ./PUNCT");
        assert_eq!(t.len(), 2);
        assert_eq!(
            (
                t[0].predicate.as_str(),
                t[0].role,
                t[0].head.as_str(),
                t[0].argument.as_str()
            ),
            ("eat", Role::Subj, "fish", "worm")
        );
        assert_eq!(t[0].arg_pos, ArgPos::Noun);
        assert_eq!(
            (t[1].predicate.as_str(), t[1].role, t[1].argument.as_str()),
            ("eat", Role::Obj, "fish")
        );
    }

    #[test]
    fn copular_adjective() {
        let t = triples("The/DET trophy/NOUN is/AUX big/ADJ ./PUNCT");
        assert_eq!(t.len(), 1);
        assert_eq!(
            (t[0].predicate.as_str(), t[0].argument.as_str()),
            ("be", "big")
        );
        assert_eq!(t[0].arg_pos, ArgPos::Adjective);
        assert_eq!(t[0].schema_predicate(), "be:big");
    }

    #[test]
    fn vocative_has_no_triple() {
        let doc = doc_from_text("t", "John/PROPN ,/PUNCT come/VERB here/ADV !/PUNCT", &[]);
        let (t, report) = extract_triples(&doc);
        // only "John" is a noun phrase and its clause has no verb
        assert!(t.is_empty());
        assert_eq!(report.without_triple, 1);
    }

    #[test]
    fn negated_verb_group_uses_main_verb() {
        let t = triples(
            "The/DET trophy/NOUN does/AUX n't/PART fit/VERB into/ADP the/DET brown/ADJ suitcase/NOUN ./PUNCT",
        );
        assert_eq!(t[0].predicate, "fit");
        assert_eq!(t[0].argument, "suitcase");
        assert_eq!((t[1].role, t[1].argument.as_str()), (Role::Obj, "trophy"));
    }

    #[test]
    fn head_match_event_without_connective() {
        let doc = doc_from_text(
            "t",
            "The/DET cat/NOUN chased/VERB a/DET mouse/NOUN ./PUNCT The/DET cat/NOUN caught/VERB a/DET bird/NOUN ./PUNCT",
            &[],
        );
        let events = extract_neighbor_pairs(&doc, NEIGHBOR_WINDOW);
        let cat = events
            .iter()
            .find(|e| {
                e.first.predicate == "chase"
                    && e.second.predicate == "catch"
                    && e.first.role == Role::Subj
            })
            .expect("cat event");
        assert_eq!(cat.second.role, Role::Subj);
        assert_eq!(cat.evidence, Evidence::HeadMatch);
        assert_eq!(cat.connective, None);
        assert_eq!(cat.sentence_distance, 1);
    }

    #[test]
    fn name_pronoun_event_with_connective() {
        let doc = doc_from_text(
            "t",
            "John/PROPN fell/VERB because/SCONJ he/PRON slipped/VERB ./PUNCT",
            &[],
        );
        let events = extract_neighbor_pairs(&doc, NEIGHBOR_WINDOW);
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(
            (e.first.predicate.as_str(), e.first.role),
            ("fall", Role::Subj)
        );
        assert_eq!(
            (e.second.predicate.as_str(), e.second.role),
            ("slip", Role::Subj)
        );
        assert_eq!(e.evidence, Evidence::NamePronoun);
        assert_eq!(e.connective, Some("because"));
    }

    #[test]
    fn incompatible_pronoun_not_linked() {
        for pron in ["she", "they", "it"] {
            let text =
                format!("John/PROPN fell/VERB because/SCONJ {pron}/PRON slipped/VERB ./PUNCT");
            let doc = doc_from_text("t", &text, &[]);
            assert!(
                extract_neighbor_pairs(&doc, NEIGHBOR_WINDOW).is_empty(),
                "{pron}"
            );
        }
    }

    #[test]
    fn window_limits_events() {
        let filler = "It/PRON rained/VERB ./PUNCT ";
        let text = format!(
            "The/DET cat/NOUN slept/VERB ./PUNCT {f}{f}{f}The/DET cat/NOUN woke/VERB ./PUNCT",
            f = filler
        );
        let doc = doc_from_text("t", &text, &[]);
        assert!(extract_neighbor_pairs(&doc, NEIGHBOR_WINDOW)
            .iter()
            .all(|e| e.first.predicate != "sleep"));
        assert!(extract_neighbor_pairs(&doc, 4)
            .iter()
            .any(|e| e.first.predicate == "sleep"));
    }

    #[test]
    fn polarity_cues_found() {
        let doc = doc_from_text(
            "t",
            "Tom/PROPN liked/VERB Bob/PROPN but/CCONJ he/PRON respected/VERB him/PRON less/ADV ./PUNCT",
            &[],
        );
        let (t, _) = extract_triples(&doc);
        let respect = t
            .iter()
            .find(|t| t.predicate == "respect" && t.role == Role::Subj)
            .unwrap();
        let (c, a) = polarity_cues(&doc, respect);
        assert_eq!(c, vec!["but"]);
        assert_eq!(a, vec!["less".to_string()]);
        let like = t.iter().find(|t| t.predicate == "like").unwrap();
        let (c, a) = polarity_cues(&doc, like);
        assert!(c.is_empty() && a.is_empty());
    }
}
