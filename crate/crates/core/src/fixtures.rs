//! Synthetic documents and knowledge for tests, demos and the bundled
//! fixture files.
//!
//! The Winograd fixture has three categories of twin pairs. Each twin pair
//! differs in one word, which flips the correct antecedent:
//!
//! * `Cat1`: `The fish ate the worm because it was hungry / tasty.` Resolved
//!   by single-triple counts (`the fish was hungry`).
//! * `Cat2`: `Tom hit Bill because he was angry / hurt.` Resolved by
//!   predicate-pair counts learned from other names.
//! * `Cat3`: no knowledge source covers these.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::docmodel::{Category, DocRecord, Document, MentionRecord, PosClass, Role, Token};
use crate::error::{Error, Result};
use crate::extract::ArgPos;
use crate::kb::{web_queries, PolarityLexicon, WebCache};
use crate::lexicon;
use crate::scoring::Polarity;

/// Builds a document from `word/TAG` tokens. Sentences end after `.`, `!`
/// or `?`; lemmas come from the bundled lemmatizer.
///
/// # Panics
///
/// On a token without a tag or mentions that fail validation.
pub fn doc_from_text(doc_id: &str, text: &str, mentions: &[MentionRecord]) -> Document {
    let mut sentences: Vec<Vec<Token>> = Vec::new();
    let mut cur = Vec::new();
    for item in text.split_whitespace() {
        let (word, tag) = item
            .rsplit_once('/')
            .unwrap_or_else(|| panic!("token `{item}` has no tag"));
        let lemma = lexicon::lemmatize(word, PosClass::from_tag(tag));
        cur.push(Token::new(word, &lemma, tag));
        if PosClass::from_tag(tag) == PosClass::Punct && matches!(word, "." | "!" | "?") {
            sentences.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        sentences.push(cur);
    }
    let rec = DocRecord {
        doc_id: doc_id.to_string(),
        sentences,
        mentions: mentions.to_vec(),
        category: None,
    };
    Document::from_record(rec).unwrap_or_else(|e| panic!("bad fixture {doc_id}: {e}"))
}

/// Mention shorthand: sentence, span `[start, end)`, head, role, pronoun flag
/// and gold cluster id.
pub fn m(
    sent: usize,
    start: usize,
    end: usize,
    head: usize,
    role: &str,
    pronoun: bool,
    gold: u32,
) -> MentionRecord {
    MentionRecord {
        sent,
        start,
        end,
        head,
        role: Role::parse(role).unwrap_or_else(|| panic!("bad role `{role}`")),
        pronoun,
        gold: Some(gold),
        target: false,
    }
}

// (subject noun, verb, object noun, subject property, object property)
const CAT1: [(&str, &str, &str, &str, &str); 14] = [
    ("fish", "ate", "worm", "hungry", "tasty"),
    ("cat", "chased", "mouse", "playful", "scared"),
    ("dog", "buried", "bone", "bored", "old"),
    ("bird", "carried", "seed", "strong", "light"),
    ("horse", "pulled", "cart", "powerful", "heavy"),
    ("farmer", "sold", "crop", "greedy", "ripe"),
    ("teacher", "praised", "student", "pleased", "diligent"),
    ("doctor", "examined", "patient", "thorough", "sick"),
    ("lawyer", "defended", "client", "skilled", "innocent"),
    ("baker", "burned", "bread", "distracted", "dry"),
    ("pilot", "landed", "plane", "calm", "damaged"),
    ("singer", "performed", "song", "famous", "catchy"),
    ("child", "dropped", "toy", "clumsy", "slippery"),
    ("hunter", "tracked", "deer", "quick", "wounded"),
];

// (verb, property pointing at the subject, property pointing at the object)
const CAT2: [(&str, &str, &str); 14] = [
    ("hit", "angry", "hurt"),
    ("thanked", "grateful", "helpful"),
    ("beat", "strong", "weak"),
    ("called", "worried", "missing"),
    ("followed", "curious", "lost"),
    ("warned", "careful", "reckless"),
    ("punished", "strict", "guilty"),
    ("helped", "kind", "stuck"),
    ("blamed", "upset", "late"),
    ("fooled", "clever", "naive"),
    ("hired", "impressed", "qualified"),
    ("ignored", "rude", "boring"),
    ("trusted", "gullible", "honest"),
    ("paid", "generous", "broke"),
];

const CAT3: [(&str, &str, &str); 14] = [
    ("met", "nervous", "early"),
    ("saw", "sleepy", "silent"),
    ("joined", "cheerful", "alone"),
    ("passed", "hurried", "slow"),
    ("greeted", "polite", "new"),
    ("watched", "quiet", "sad"),
    ("phoned", "anxious", "away"),
    ("visited", "free", "ill"),
    ("texted", "awake", "asleep"),
    ("interviewed", "tired", "ready"),
    ("introduced", "proud", "shy"),
    ("emailed", "confused", "absent"),
    ("teased", "mischievous", "sensitive"),
    ("hugged", "glad", "cold"),
];

const TEST_MALE: [&str; 6] = ["Tom", "Bill", "Jack", "Sam", "Pete", "Frank"];
const TEST_FEMALE: [&str; 6] = ["Mary", "Sue", "Kate", "Lucy", "Emma", "Grace"];
const KB_MALE: [&str; 4] = ["Adam", "George", "Henry", "Mark"];
const KB_FEMALE: [&str; 4] = ["Alice", "Helen", "Laura", "Nancy"];

/// Polarity entries consistent with the fixture sentences.
const POLARITY: [(&str, Polarity); 12] = [
    ("help", Polarity::Positive),
    ("kind", Polarity::Positive),
    ("thank", Polarity::Positive),
    ("grateful", Polarity::Positive),
    ("blame", Polarity::Negative),
    ("upset", Polarity::Negative),
    ("hit", Polarity::Negative),
    ("angry", Polarity::Negative),
    ("punish", Polarity::Negative),
    ("strict", Polarity::Negative),
    ("love", Polarity::Positive),
    ("hate", Polarity::Negative),
];

/// Number of twin pairs per category in each split.
pub const PAIRS_PER_CATEGORY: usize = 7;
pub const KB_REPEATS: usize = 4;
pub const WEB_HITS: f64 = 120.0;
pub const WINOCOREF_DOCS: usize = 20;
pub const FIXTURE_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    /// Table rows owned by the split: the first half trains, the rest tests.
    fn rows(self) -> std::ops::Range<usize> {
        match self {
            Split::Train => 0..PAIRS_PER_CATEGORY,
            Split::Test => PAIRS_PER_CATEGORY..2 * PAIRS_PER_CATEGORY,
        }
    }
}

fn record(
    doc_id: String,
    text: &str,
    mentions: Vec<MentionRecord>,
    category: Category,
) -> Document {
    let mut d = doc_from_text(&doc_id, text, &mentions);
    d.category = Some(category);
    d
}

fn target(mut r: MentionRecord) -> MentionRecord {
    r.target = true;
    r
}

fn cat1_doc(split: Split, row: usize, twin: usize) -> Document {
    let (a, verb, b, pa, pb) = CAT1[row];
    let adj = if twin == 0 { pa } else { pb };
    let text = format!("The/DET {a}/NOUN {verb}/VERB the/DET {b}/NOUN because/SCONJ it/PRON was/AUX {adj}/ADJ ./PUNCT");
    let mentions = vec![
        m(0, 0, 2, 1, "subj", false, 0),
        m(0, 3, 5, 4, "obj", false, 1),
        target(m(0, 6, 7, 6, "subj", true, twin as u32)),
    ];
    record(
        format!("wino-{}-cat1-{row:02}{}", split.name(), twin_suffix(twin)),
        &text,
        mentions,
        Category::Cat1,
    )
}

fn twin_suffix(twin: usize) -> char {
    if twin == 0 {
        'a'
    } else {
        'b'
    }
}

fn names(rng: &mut ChaCha8Rng, female: bool) -> (&'static str, &'static str) {
    let pool: &[&str] = if female { &TEST_FEMALE } else { &TEST_MALE };
    let picked: Vec<&&str> = pool.choose_multiple(rng, 2).collect();
    (picked[0], picked[1])
}

#[allow(clippy::too_many_arguments)]
fn person_doc(
    category: Category,
    split: Split,
    row: usize,
    twin: usize,
    verb: &str,
    adj: &str,
    (x, y): (&str, &str),
    female: bool,
) -> Document {
    let pron = if female { "she" } else { "he" };
    let text = format!(
        "{x}/PROPN {verb}/VERB {y}/PROPN because/SCONJ {pron}/PRON was/AUX {adj}/ADJ ./PUNCT"
    );
    let mentions = vec![
        m(0, 0, 1, 0, "subj", false, 0),
        m(0, 2, 3, 2, "obj", false, 1),
        target(m(0, 4, 5, 4, "subj", true, twin as u32)),
    ];
    let cat = if category == Category::Cat2 {
        "cat2"
    } else {
        "cat3"
    };
    record(
        format!("wino-{}-{cat}-{row:02}{}", split.name(), twin_suffix(twin)),
        &text,
        mentions,
        category,
    )
}

/// Winograd-style twin documents of one split, ordered by category, row and
/// twin. Each document has the two candidates and one target pronoun.
pub fn winograd_docs(split: Split, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ split as u64);
    let mut docs = Vec::new();
    for row in split.rows() {
        for twin in 0..2 {
            docs.push(cat1_doc(split, row, twin));
        }
    }
    for (category, table) in [(Category::Cat2, &CAT2), (Category::Cat3, &CAT3)] {
        for row in split.rows() {
            let (verb, pa, pb) = table[row];
            let female = row % 2 == 1;
            let pair = names(&mut rng, female);
            for (twin, adj) in [pa, pb].into_iter().enumerate() {
                docs.push(person_doc(
                    category, split, row, twin, verb, adj, pair, female,
                ));
            }
        }
    }
    docs
}

/// WinoCoref-style documents: Winograd test documents with a follow-up
/// sentence whose pronoun refers to the answer again.
pub fn winocoref_docs(n: usize, seed: u64) -> Vec<Document> {
    winograd_docs(Split::Test, seed)
        .into_iter()
        .take(n)
        .map(|d| {
            let mut rec = d.to_record();
            let answer = rec.mentions[2].gold;
            let pron = match rec.sentences[0][rec.mentions[2].head].t.as_str() {
                "it" => "It",
                "she" => "She",
                _ => "He",
            };
            rec.sentences.push(vec![
                Token::new(pron, &pron.to_lowercase(), "PRON"),
                Token::new("left", "leave", "VERB"),
                Token::new(".", ".", "PUNCT"),
            ]);
            let mut follow = m(1, 0, 1, 0, "subj", true, 0);
            follow.gold = answer;
            rec.mentions.push(follow);
            rec.doc_id = rec.doc_id.replacen("wino-test", "winocoref", 1);
            Document::from_record(rec).expect("follow-up sentence is valid")
        })
        .collect()
}

fn kb_doc(id: String, text: &str) -> Document {
    doc_from_text(&id, text, &[])
}

/// Raw sentences (one per document, no mentions) carrying the knowledge of
/// the `Cat1` and `Cat2` rows of both splits.
pub fn kb_corpus_docs() -> Vec<Document> {
    let mut docs = Vec::new();
    for (row, (a, _, b, pa, pb)) in CAT1.iter().enumerate() {
        for r in 0..KB_REPEATS {
            for (noun, adj, side) in [(a, pa, 'a'), (b, pb, 'b')] {
                docs.push(kb_doc(
                    format!("kb-cat1-{row:02}{side}-{r}"),
                    &format!("The/DET {noun}/NOUN was/AUX {adj}/ADJ ./PUNCT"),
                ));
            }
        }
    }
    for (row, (verb, pa, pb)) in CAT2.iter().enumerate() {
        for r in 0..KB_REPEATS {
            let he = KB_MALE[(row + r) % KB_MALE.len()];
            let she = KB_FEMALE[(row + 2 * r) % KB_FEMALE.len()];
            docs.push(kb_doc(
                format!("kb-cat2-{row:02}a-{r}"),
                &format!("{he}/PROPN {verb}/VERB {she}/PROPN because/SCONJ he/PRON was/AUX {pa}/ADJ ./PUNCT"),
            ));
            docs.push(kb_doc(
                format!("kb-cat2-{row:02}b-{r}"),
                &format!("{he}/PROPN {verb}/VERB {she}/PROPN because/SCONJ she/PRON was/AUX {pb}/ADJ ./PUNCT"),
            ));
        }
    }
    docs
}

/// Web hit counts for every `Cat1` noun with its own property.
pub fn web_cache() -> WebCache {
    let mut cache = WebCache::default();
    for (a, _, b, pa, pb) in CAT1 {
        for (noun, adj) in [(a, pa), (b, pb)] {
            let q = web_queries(noun, "be", adj, ArgPos::Adjective);
            for query in q.variants.iter().flatten() {
                cache.insert(query, WEB_HITS).expect("positive count");
            }
        }
    }
    cache
}

pub fn polarity_lexicon() -> PolarityLexicon {
    let mut lex = PolarityLexicon::new();
    for (lemma, p) in POLARITY {
        lex.insert(lemma, p);
    }
    lex
}

const SYN_NOUNS: [&str; 12] = [
    "fish", "worm", "cat", "mouse", "dog", "bone", "farmer", "crop", "teacher", "student", "bird",
    "seed",
];
const SYN_VERBS: [&str; 10] = [
    "ate", "chased", "saw", "helped", "hit", "watched", "followed", "called", "warned", "praised",
];
const SYN_ADJS: [&str; 10] = [
    "hungry", "tired", "angry", "happy", "old", "quick", "strong", "weak", "kind", "rude",
];
const SYN_CONNECTIVES: [&str; 6] = ["because", "but", "so", "although", "since", "while"];

/// Seeded random corpus of `n_sentences` sentences in documents of one to
/// five sentences, mixing names, pronouns, nouns and connectives.
pub fn synthetic_corpus(n_sentences: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut made = 0;
    while made < n_sentences {
        let len = rng.gen_range(1..=5).min(n_sentences - made);
        let mut text = String::new();
        for _ in 0..len {
            let male = rng.gen_bool(0.5);
            let name = if male {
                KB_MALE.choose(&mut rng)
            } else {
                KB_FEMALE.choose(&mut rng)
            }
            .expect("non-empty");
            let pron = if male { "he" } else { "she" };
            let noun = SYN_NOUNS.choose(&mut rng).expect("non-empty");
            let noun2 = SYN_NOUNS.choose(&mut rng).expect("non-empty");
            let verb = SYN_VERBS.choose(&mut rng).expect("non-empty");
            let adj = SYN_ADJS.choose(&mut rng).expect("non-empty");
            let conn = SYN_CONNECTIVES.choose(&mut rng).expect("non-empty");
            let sentence = match rng.gen_range(0..4) {
                0 => format!("{name}/PROPN {verb}/VERB the/DET {noun}/NOUN {conn}/SCONJ {pron}/PRON was/AUX {adj}/ADJ ./PUNCT"),
                1 => format!("The/DET {noun}/NOUN {verb}/VERB the/DET {noun2}/NOUN ./PUNCT"),
                2 => format!("The/DET {noun}/NOUN was/AUX {adj}/ADJ ./PUNCT"),
                _ => format!("{name}/PROPN was/AUX {adj}/ADJ {conn}/SCONJ the/DET {noun}/NOUN {verb}/VERB {pron}/PRON ./PUNCT"),
            };
            text.push_str(&sentence);
            text.push(' ');
        }
        docs.push(doc_from_text(&format!("syn-{:05}", docs.len()), &text, &[]));
        made += len;
    }
    docs
}

pub const BUNDLE_FILES: [&str; 6] = [
    "winograd_train.jsonl",
    "winograd_test.jsonl",
    "winocoref.jsonl",
    "kb_corpus.jsonl",
    "web_cache.json",
    "polarity.tsv",
];

/// Writes the fixture bundle into `dir`.
pub fn write_bundle(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let corpora = [
        (BUNDLE_FILES[0], winograd_docs(Split::Train, FIXTURE_SEED)),
        (BUNDLE_FILES[1], winograd_docs(Split::Test, FIXTURE_SEED)),
        (
            BUNDLE_FILES[2],
            winocoref_docs(WINOCOREF_DOCS, FIXTURE_SEED),
        ),
        (BUNDLE_FILES[3], kb_corpus_docs()),
    ];
    for (name, docs) in corpora {
        crate::docmodel::save_corpus(&docs, dir.join(name))?;
    }
    web_cache().save(&dir.join(BUNDLE_FILES[4]))?;
    polarity_lexicon().save(&dir.join(BUNDLE_FILES[5]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract;

    #[test]
    fn fixture_verbs_lemmatize_to_plain_forms() {
        for (_, verb, ..) in CAT1 {
            let lemma = lexicon::lemmatize(verb, PosClass::Verb);
            assert!(
                lexicon::verb_forms(&lemma).iter().any(|f| f == verb),
                "{verb} → {lemma}"
            );
        }
        for (verb, ..) in CAT2.iter().chain(CAT3.iter()) {
            let lemma = lexicon::lemmatize(verb, PosClass::Verb);
            assert!(
                lexicon::verb_forms(&lemma).iter().any(|f| f == verb),
                "{verb} → {lemma}"
            );
        }
    }

    #[test]
    fn split_sizes_and_targets() {
        for split in [Split::Train, Split::Test] {
            let docs = winograd_docs(split, FIXTURE_SEED);
            assert_eq!(docs.len(), 3 * 2 * PAIRS_PER_CATEGORY);
            for d in &docs {
                assert_eq!(d.target_pronouns(), vec![2]);
                assert_eq!(d.candidate_entities(2), vec![0, 1]);
            }
        }
    }

    #[test]
    fn kb_sentences_yield_expected_triples() {
        let docs = kb_corpus_docs();
        let (t, _) = extract::extract_triples(&docs[0]);
        assert_eq!(t.len(), 1);
        assert_eq!(
            (t[0].predicate.as_str(), t[0].argument.as_str()),
            ("be", "hungry")
        );
        let cat2 = docs
            .iter()
            .find(|d| d.doc_id.starts_with("kb-cat2"))
            .unwrap();
        let events = extract::extract_neighbor_pairs(cat2, extract::NEIGHBOR_WINDOW);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].first.predicate, "hit");
        assert_eq!(events[0].second.predicate, "be:angry");
        assert_eq!(events[0].connective, Some("because"));
    }

    #[test]
    fn synthetic_corpus_is_seeded() {
        let a = synthetic_corpus(50, 3);
        assert_eq!(a.iter().map(|d| d.sentences.len()).sum::<usize>(), 50);
        assert_eq!(a, synthetic_corpus(50, 3));
        assert_ne!(a, synthetic_corpus(50, 4));
    }
}
