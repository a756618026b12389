//! Knowledge score vector of a mention pair.
//!
//! Layout (18 dims):
//!
//! | dims   | source | content                                           |
//! |--------|--------|---------------------------------------------------|
//! | 0      | giga   | single-triple log count                           |
//! | 1..3   | giga   | pair co-occurrence log count, conditional prob    |
//! | 3..11  | wiki   | (prob, log count) × 4 positional variations       |
//! | 11..15 | web    | log(1 + mean hits) × 4 query patterns             |
//! | 15..18 | pol    | polarity agreement indicators                     |
//!
//! Single-triple sources all read the anaphor's triple with the candidate's
//! head substituted into the mention slot.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Role};
use crate::extract::{self, Anchor, Triple};
use crate::kb::{web_queries, KnowledgeBase, PolarityLexicon, WebQueries};
use crate::lexicon;

pub const SCORE_DIMS: usize = 18;
pub const SCORE_LAYOUT: &str = "giga3-wiki8-web4-pol3/v1";

pub const GIGA_TYPE1: Range<usize> = 0..1;
pub const GIGA_TYPE2: Range<usize> = 1..3;
pub const WIKI: Range<usize> = 3..11;
pub const WEB: Range<usize> = 11..15;
pub const POL: Range<usize> = 15..18;

pub const DIM_NAMES: [&str; SCORE_DIMS] = [
    "giga.t1.logcount",
    "giga.t2.logjoint",
    "giga.t2.cond",
    "wiki.imm_after.prob",
    "wiki.imm_after.logcount",
    "wiki.imm_before.prob",
    "wiki.imm_before.logcount",
    "wiki.before.prob",
    "wiki.before.logcount",
    "wiki.after.prob",
    "wiki.after.logcount",
    "web.cand_arg",
    "web.cand_pred",
    "web.cand_pred_arg",
    "web.arg_cand",
    "pol.same",
    "pol.both_pos",
    "pol.both_neg",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Neutral => Polarity::Neutral,
        }
    }

    pub fn is_definite(self) -> bool {
        self != Polarity::Neutral
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "+",
            Polarity::Negative => "-",
            Polarity::Neutral => "0",
        })
    }
}

/// Polarity of a predicate in context. Applied in order, each rule flipping
/// the sign once when it fires: lexicon prior, object role, a reversing
/// connective before the predicate, a negative comparative adverb.
pub fn predicate_polarity<C, A>(
    predicate: &str,
    role: Role,
    preceding_connectives: &[C],
    adverbs: &[A],
    lexicon: &PolarityLexicon,
) -> Polarity
where
    C: AsRef<str>,
    A: AsRef<str>,
{
    let mut p = lexicon.get(predicate);
    if role == Role::Obj {
        p = p.flip();
    }
    if preceding_connectives
        .iter()
        .any(|c| lexicon::is_reversing_connective(c.as_ref()))
    {
        p = p.flip();
    }
    if adverbs
        .iter()
        .any(|a| lexicon::is_negative_comparative(a.as_ref()))
    {
        p = p.flip();
    }
    p
}

/// `[same sign, both positive, both negative]`.
pub fn polarity_score(po_u: Polarity, po_v: Polarity) -> [f64; 3] {
    let both_pos = po_u == Polarity::Positive && po_v == Polarity::Positive;
    let both_neg = po_u == Polarity::Negative && po_v == Polarity::Negative;
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    [ind(both_pos || both_neg), ind(both_pos), ind(both_neg)]
}

/// Lexicon key of a triple's predicate; copular predicates are looked up by
/// their adjective.
fn polarity_lemma(t: &Triple) -> &str {
    if t.is_copular_adjective() {
        &t.argument
    } else {
        &t.predicate
    }
}

pub fn triple_polarity(doc: &Document, t: &Triple, lex: &PolarityLexicon) -> Polarity {
    let (connectives, adverbs) = extract::polarity_cues(doc, t);
    predicate_polarity(polarity_lemma(t), t.role, &connectives, &adverbs, lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(pub [f64; SCORE_DIMS]);

impl Default for ScoreVector {
    fn default() -> Self {
        ScoreVector([0.0; SCORE_DIMS])
    }
}

impl ScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn block(&self, r: Range<usize>) -> &[f64] {
        &self.0[r]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

/// Which schema knowledge is visible; the rest is zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnowledgeView {
    #[default]
    All,
    /// Single-triple sources only: giga type1, wiki, web, polarity.
    Type1Only,
    /// Pair co-occurrence only.
    Type2Only,
    None,
}

impl KnowledgeView {
    pub fn apply(self, v: &mut ScoreVector) {
        let keep: fn(usize) -> bool = match self {
            KnowledgeView::All => return,
            KnowledgeView::Type1Only => |i| !GIGA_TYPE2.contains(&i),
            KnowledgeView::Type2Only => |i| GIGA_TYPE2.contains(&i),
            KnowledgeView::None => |_| false,
        };
        for (i, x) in v.0.iter_mut().enumerate() {
            if !keep(i) {
                *x = 0.0;
            }
        }
    }
}

/// Per-document cache: each mention's triple and its contextual polarity.
#[derive(Debug, Clone)]
pub struct DocKnowledge {
    pub triples: Vec<Option<Triple>>,
    pub polarities: Vec<Polarity>,
}

impl DocKnowledge {
    pub fn new(doc: &Document, kb: &KnowledgeBase) -> Self {
        let triples: Vec<Option<Triple>> = doc
            .mentions
            .iter()
            .map(|m| {
                extract::triple_for(
                    doc,
                    Anchor {
                        sent: m.sent,
                        head: m.head,
                    },
                )
            })
            .collect();
        let polarities = triples
            .iter()
            .map(|t| {
                t.as_ref()
                    .map_or(Polarity::Neutral, |t| triple_polarity(doc, t, &kb.polarity))
            })
            .collect();
        DocKnowledge {
            triples,
            polarities,
        }
    }
}

/// Key of a mention's head for positional statistics: entity id if tagged.
fn wiki_key(doc: &Document, m: usize) -> String {
    let tok = doc.head_token(m);
    tok.ent
        .clone()
        .unwrap_or_else(|| doc.mentions[m].head_lemma.clone())
}

/// Score vector of anaphor `u` against candidate antecedent `v`.
pub fn score_pair(
    doc: &Document,
    dk: &DocKnowledge,
    kb: &KnowledgeBase,
    u: usize,
    v: usize,
    view: KnowledgeView,
) -> ScoreVector {
    let mut s = ScoreVector::default();
    if view == KnowledgeView::None {
        return s;
    }
    let cand = &doc.mentions[v];
    let tu = dk.triples[u].as_ref();
    let tv = dk.triples[v].as_ref();

    if let Some(tu) = tu {
        s.0[GIGA_TYPE1.start] =
            kb.type1
                .query(&tu.predicate, tu.role, &cand.head_lemma, &tu.argument);
        s.0[WIKI].copy_from_slice(&kb.wiki.query(&tu.predicate, &wiki_key(doc, v)));
        let q = web_queries(&cand.head_lemma, &tu.predicate, &tu.argument, tu.arg_pos);
        s.0[WEB].copy_from_slice(&kb.web.query(&q));
    }
    if let (Some(tu), Some(tv)) = (tu, tv) {
        let cn =
            extract::connective_between(doc, (tv.sent, tv.pred_index), (tu.sent, tu.pred_index));
        let (lj, cond) = kb.type2.query(&tv.key(), &tu.key(), cn);
        s.0[GIGA_TYPE2.start] = lj;
        s.0[GIGA_TYPE2.start + 1] = cond;
        s.0[POL].copy_from_slice(&polarity_score(dk.polarities[v], dk.polarities[u]));
    }
    view.apply(&mut s);
    s
}

/// Web queries issued for anaphor `u` with candidate `v`, if `u` has a triple.
pub fn pair_web_queries(
    doc: &Document,
    dk: &DocKnowledge,
    u: usize,
    v: usize,
) -> Option<WebQueries> {
    let tu = dk.triples[u].as_ref()?;
    Some(web_queries(
        &doc.mentions[v].head_lemma,
        &tu.predicate,
        &tu.argument,
        tu.arg_pos,
    ))
}

/// Convenience wrapper computing the document cache on the fly.
pub fn score_pair_uncached(doc: &Document, kb: &KnowledgeBase, u: usize, v: usize) -> ScoreVector {
    score_pair(
        doc,
        &DocKnowledge::new(doc, kb),
        kb,
        u,
        v,
        KnowledgeView::All,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Type1Key, Type2Key};
    use crate::testutil::{doc_from_text, m};
    use Polarity::*;

    fn lex(entries: &[(&str, Polarity)]) -> PolarityLexicon {
        let mut l = PolarityLexicon::new();
        for (w, p) in entries {
            l.insert(w, *p);
        }
        l
    }

    #[test]
    fn polarity_rules_in_order() {
        let l = lex(&[("love", Positive)]);
        let none: [&str; 0] = [];
        assert_eq!(
            predicate_polarity("love", Role::Subj, &none, &none, &l),
            Positive
        );
        assert_eq!(
            predicate_polarity("love", Role::Obj, &none, &none, &l),
            Negative
        );
        assert_eq!(
            predicate_polarity("love", Role::Obj, &["but"], &none, &l),
            Positive
        );
        assert_eq!(
            predicate_polarity("love", Role::Obj, &["but"], &["less"], &l),
            Negative
        );
        assert_eq!(
            predicate_polarity("love", Role::Subj, &["because"], &none, &l),
            Positive
        );
        assert_eq!(
            predicate_polarity("table", Role::Obj, &["but"], &["less"], &l),
            Neutral
        );
    }

    #[test]
    fn polarity_table() {
        assert_eq!(polarity_score(Positive, Positive), [1.0, 1.0, 0.0]);
        assert_eq!(polarity_score(Negative, Negative), [1.0, 0.0, 1.0]);
        assert_eq!(polarity_score(Positive, Negative), [0.0, 0.0, 0.0]);
        assert_eq!(polarity_score(Neutral, Positive), [0.0, 0.0, 0.0]);
    }

    fn fish_doc() -> Document {
        doc_from_text(
            "fish",
            "The/DET fish/NOUN ate/VERB the/DET worm/NOUN because/SCONJ it/PRON was/AUX hungry/ADJ ./PUNCT",
            &[m(0, 0, 2, 1, "subj", false, 0), m(0, 3, 5, 4, "obj", false, 1), m(0, 6, 7, 6, "subj", true, 0)],
        )
    }

    #[test]
    fn empty_kb_gives_zero_vector() {
        let doc = fish_doc();
        let kb = KnowledgeBase::empty();
        assert!(score_pair_uncached(&doc, &kb, 2, 0).is_zero());
        assert!(score_pair_uncached(&doc, &kb, 2, 1).is_zero());
    }

    #[test]
    fn type1_substitutes_candidate_head() {
        let doc = fish_doc();
        let mut kb = KnowledgeBase::empty();
        kb.type1
            .add(Type1Key::new("be", Role::Subj, "fish", "hungry"), 20);
        kb.type1
            .add(Type1Key::new("be", Role::Subj, "worm", "hungry"), 1);
        let fish = score_pair_uncached(&doc, &kb, 2, 0);
        let worm = score_pair_uncached(&doc, &kb, 2, 1);
        assert!((fish.0[0] - 20f64.ln()).abs() < 1e-12);
        assert_eq!(worm.0[0], 0.0);
        assert!(fish.block(GIGA_TYPE2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn type2_uses_connective_between_predicates() {
        let doc = fish_doc();
        let mut kb = KnowledgeBase::empty();
        let key = |role| Type2Key {
            antecedent: extract::TripleKey {
                predicate: "eat".into(),
                role,
            },
            anaphor: extract::TripleKey {
                predicate: "be:hungry".into(),
                role: Role::Subj,
            },
            connective: Some("because".into()),
        };
        kb.type2.add(key(Role::Subj), 3);
        kb.type2.add(key(Role::Obj), 1);
        let fish = score_pair_uncached(&doc, &kb, 2, 0);
        assert!((fish.0[1] - 3f64.ln()).abs() < 1e-12);
        assert_eq!(fish.0[2], 0.75);
        let worm = score_pair_uncached(&doc, &kb, 2, 1);
        assert_eq!((worm.0[1], worm.0[2]), (0.0, 0.25));
    }

    #[test]
    fn both_positive_predicates() {
        let doc = doc_from_text(
            "p",
            "Tom/PROPN helped/VERB Bob/PROPN because/SCONJ he/PRON liked/VERB him/PRON ./PUNCT",
            &[
                m(0, 0, 1, 0, "subj", false, 0),
                m(0, 2, 3, 2, "obj", false, 1),
                m(0, 4, 5, 4, "subj", true, 0),
                m(0, 6, 7, 6, "obj", true, 1),
            ],
        );
        let mut kb = KnowledgeBase::empty();
        kb.polarity = lex(&[("help", Positive), ("like", Positive)]);
        let s = score_pair_uncached(&doc, &kb, 2, 0);
        assert_eq!(s.block(POL), &[1.0, 1.0, 0.0]);
        // Bob is the object of "helped": negated, so no agreement
        let s = score_pair_uncached(&doc, &kb, 2, 1);
        assert_eq!(s.block(POL), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn views_zero_other_blocks() {
        let mut v = ScoreVector([1.0; SCORE_DIMS]);
        KnowledgeView::Type2Only.apply(&mut v);
        assert_eq!(v.0.iter().sum::<f64>(), 2.0);
        let mut v = ScoreVector([1.0; SCORE_DIMS]);
        KnowledgeView::Type1Only.apply(&mut v);
        assert_eq!(v.0.iter().sum::<f64>(), 16.0);
        assert_eq!(DIM_NAMES.len(), SCORE_DIMS);
    }
}
