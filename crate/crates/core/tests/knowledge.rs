use std::path::Path;

use hardcoref::fixtures;
use hardcoref::kb::{self, build_corpus_stores, BuildConfig, KnowledgeBase, Store};
use hardcoref::scoring::{score_pair_uncached, KnowledgeView};

fn corpus() -> Vec<hardcoref::Document> {
    fixtures::synthetic_corpus(300, 3)
}

#[test]
fn shard_count_does_not_change_the_stores() {
    let docs = corpus();
    let cfg = BuildConfig::default();
    let (one, _) = build_corpus_stores(&docs, 1, &cfg);
    for shards in [2, 3, 5, 16, 400] {
        assert_eq!(
            build_corpus_stores(&docs, shards, &cfg).0,
            one,
            "{shards} shards"
        );
    }
}

#[test]
fn merge_is_commutative_and_associative() {
    let docs = corpus();
    let cfg = BuildConfig::default();
    let parts: Vec<_> = docs
        .chunks(docs.len().div_ceil(3))
        .map(|c| build_corpus_stores(c, 1, &cfg).0.type2)
        .collect();
    let s = |i: usize| Store::Type2(parts[i].clone());
    let ab = kb::merge(s(0), &s(1)).unwrap();
    let ba = kb::merge(s(1), &s(0)).unwrap();
    assert_eq!(ab, ba);
    let left = kb::merge(ab, &s(2)).unwrap();
    let right = kb::merge(s(0), &kb::merge(s(1), &s(2)).unwrap()).unwrap();
    assert_eq!(left, right);
    let Store::Type2(all) = left else {
        unreachable!()
    };
    assert_eq!(all, build_corpus_stores(&docs, 1, &cfg).0.type2);
}

#[test]
fn merging_different_kinds_fails() {
    let a = Store::Type1(Default::default());
    let b = Store::Web(Default::default());
    assert!(kb::merge(a, &b).is_err());
}

#[test]
fn saved_kb_loads_back_identically() {
    let (stores, _) = build_corpus_stores(&fixtures::kb_corpus_docs(), 3, &BuildConfig::default());
    let mut kb = KnowledgeBase::from_corpus(stores);
    kb.web = fixtures::web_cache();
    kb.polarity = fixtures::polarity_lexicon();
    let dir = tempfile::tempdir().unwrap();
    kb.save(dir.path()).unwrap();
    let back = KnowledgeBase::load(dir.path()).unwrap();
    assert_eq!(back, kb);
    let again = tempfile::tempdir().unwrap();
    back.save(again.path()).unwrap();
    for f in [kb::TYPE1_FILE, kb::TYPE2_FILE, kb::WIKI_FILE] {
        assert_eq!(
            std::fs::read(dir.path().join(f)).unwrap(),
            std::fs::read(again.path().join(f)).unwrap()
        );
    }
}

#[test]
fn empty_kb_scores_are_zero() {
    let kb = KnowledgeBase::empty();
    for doc in fixtures::winograd_docs(fixtures::Split::Test, fixtures::FIXTURE_SEED) {
        for v in doc.candidate_entities(2) {
            assert!(score_pair_uncached(&doc, &kb, 2, v).is_zero());
        }
    }
}

#[test]
fn view_none_clears_every_dimension() {
    let (stores, _) = build_corpus_stores(&fixtures::kb_corpus_docs(), 1, &BuildConfig::default());
    let mut kb = KnowledgeBase::from_corpus(stores);
    kb.web = fixtures::web_cache();
    kb.polarity = fixtures::polarity_lexicon();
    let doc = &fixtures::winograd_docs(fixtures::Split::Test, fixtures::FIXTURE_SEED)[0];
    let mut s = score_pair_uncached(doc, &kb, 2, 0);
    assert!(!s.is_zero());
    KnowledgeView::None.apply(&mut s);
    assert!(s.is_zero());
}

fn bundled() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

#[test]
fn bundled_fixtures_are_current() {
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_bundle(dir.path()).unwrap();
    for f in fixtures::BUNDLE_FILES {
        assert_eq!(
            std::fs::read(dir.path().join(f)).unwrap(),
            std::fs::read(bundled().join(f)).unwrap(),
            "{f} is stale, regenerate with make-fixtures"
        );
    }
}
