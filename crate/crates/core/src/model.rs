//! Mention-pair features and the latent best-link perceptron.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Gender, Number, PosClass, Role};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::scoring::{self, DocKnowledge, KnowledgeView, ScoreVector, DIM_NAMES, SCORE_LAYOUT};

pub const FEATURE_LAYOUT: &str = "base27+schema18/v1";

const ROLES: [Role; 3] = [Role::Subj, Role::Obj, Role::Other];

fn base_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "bias",
        "sent_dist=0",
        "sent_dist=1",
        "sent_dist=2+",
        "mention_dist=1",
        "mention_dist=2",
        "mention_dist=3+",
        "gender=match",
        "gender=clash",
        "gender=unknown",
        "number=match",
        "number=clash",
        "number=unknown",
        "head_match",
        "same_sentence",
        "anaphor_pronoun",
        "antecedent_pronoun",
        "antecedent_proper",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for a in ROLES {
        for b in ROLES {
            names.push(format!("roles={a}-{b}"));
        }
    }
    names
}

/// Stable name → id mapping persisted with the weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    names: Vec<String>,
    index: HashMap<String, usize>,
    schema_offset: Option<usize>,
}

impl FeatureRegistry {
    pub fn new(with_schema: bool) -> Self {
        let mut names = base_feature_names();
        let schema_offset = with_schema.then(|| {
            let off = names.len();
            names.extend(DIM_NAMES.iter().map(|d| format!("schema:{d}")));
            off
        });
        Self::from_names(names, schema_offset)
    }

    fn from_names(names: Vec<String>, schema_offset: Option<usize>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        FeatureRegistry {
            names,
            index,
            schema_offset,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn with_schema(&self) -> bool {
        self.schema_offset.is_some()
    }

    pub fn is_schema(&self, id: usize) -> bool {
        self.schema_offset.is_some_and(|o| id >= o)
    }
}

/// Sparse feature vector: (id, value) pairs sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector(pub Vec<(usize, f64)>);

impl FeatureVector {
    pub fn get(&self, id: usize) -> Option<f64> {
        self.0
            .binary_search_by_key(&id, |&(i, _)| i)
            .ok()
            .map(|k| self.0[k].1)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&(i, _)| i)
    }
}

fn agreement<T: PartialEq>(a: T, b: T, unknown: T) -> &'static str {
    if a == unknown || b == unknown {
        "unknown"
    } else if a == b {
        "match"
    } else {
        "clash"
    }
}

/// Features of linking anaphor `u` to antecedent `v`. `scores` fills the
/// schema namespace and is required iff the registry has one.
pub fn featurize(
    doc: &Document,
    u: usize,
    v: usize,
    scores: Option<&ScoreVector>,
    reg: &FeatureRegistry,
) -> Result<FeatureVector> {
    if v >= u {
        return Err(Error::Ordering {
            doc_id: doc.doc_id.clone(),
            anaphor: u,
            antecedent: v,
        });
    }
    let (mu, mv) = (&doc.mentions[u], &doc.mentions[v]);
    let mut on: Vec<String> = vec!["bias".into()];
    let sd = mu.sent - mv.sent;
    on.push(match sd {
        0 => "sent_dist=0".into(),
        1 => "sent_dist=1".into(),
        _ => "sent_dist=2+".into(),
    });
    on.push(match u - v {
        1 => "mention_dist=1".into(),
        2 => "mention_dist=2".into(),
        _ => "mention_dist=3+".into(),
    });
    on.push(format!(
        "gender={}",
        agreement(mu.gender, mv.gender, Gender::Unknown)
    ));
    on.push(format!(
        "number={}",
        agreement(mu.number, mv.number, Number::Unknown)
    ));
    if mu.head_lemma == mv.head_lemma {
        on.push("head_match".into());
    }
    if sd == 0 {
        on.push("same_sentence".into());
    }
    if mu.is_pronoun {
        on.push("anaphor_pronoun".into());
    }
    if mv.is_pronoun {
        on.push("antecedent_pronoun".into());
    }
    if doc.head_token(v).pos_class() == PosClass::ProperNoun {
        on.push("antecedent_proper".into());
    }
    on.push(format!("roles={}-{}", mv.role, mu.role));

    let mut fv: Vec<(usize, f64)> = on
        .iter()
        .map(|n| (reg.id(n).expect("base feature registered"), 1.0))
        .collect();
    if let Some(off) = reg.schema_offset {
        let scores =
            scores.ok_or_else(|| Error::Model("schema features need a score vector".into()))?;
        fv.extend(
            scores
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, &x)| (off + i, x)),
        );
    }
    fv.sort_by_key(|&(i, _)| i);
    Ok(FeatureVector(fv))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub with_schema: bool,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub view: KnowledgeView,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            with_schema: false,
            epochs: 10,
            learning_rate: 1.0,
            seed: 13,
            view: KnowledgeView::All,
        }
    }
}

/// Weights plus everything needed to reproduce the feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeights {
    pub feature_layout: String,
    pub score_layout: String,
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub train: TrainConfig,
    pub updates: u64,
}

impl ModelWeights {
    pub fn zeros(reg: &FeatureRegistry, mut train: TrainConfig) -> Self {
        train.with_schema = reg.with_schema();
        ModelWeights {
            feature_layout: FEATURE_LAYOUT.into(),
            score_layout: SCORE_LAYOUT.into(),
            features: reg.names().to_vec(),
            weights: vec![0.0; reg.len()],
            train,
            updates: 0,
        }
    }

    pub fn with_schema(&self) -> bool {
        self.train.with_schema
    }

    /// Registry rebuilt from the stored names; errors if it is not one this
    /// build knows how to compute.
    pub fn registry(&self) -> Result<FeatureRegistry> {
        let reg = FeatureRegistry::new(self.train.with_schema);
        if reg.names() != self.features.as_slice() {
            return Err(Error::Model(
                "feature registry does not match this build".into(),
            ));
        }
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_layout != FEATURE_LAYOUT || self.score_layout != SCORE_LAYOUT {
            return Err(Error::Model(format!(
                "layout {}/{} not supported (expected {}/{})",
                self.feature_layout, self.score_layout, FEATURE_LAYOUT, SCORE_LAYOUT
            )));
        }
        if self.weights.len() != self.features.len() {
            return Err(Error::Model(
                "weight count differs from registry size".into(),
            ));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Model("non-finite weight".into()));
        }
        self.registry().map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelWeights = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("model: {e}"),
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn link_score(w: &ModelWeights, f: &FeatureVector) -> f64 {
    dot(&w.weights, f)
}

fn dot(w: &[f64], f: &FeatureVector) -> f64 {
    f.0.iter().map(|&(i, x)| w[i] * x).sum()
}

/// Features of every ordered pair of one document: `pairs[u][v]` for `v < u`.
#[derive(Debug, Clone)]
pub struct PairFeatures {
    pub pairs: Vec<Vec<FeatureVector>>,
}

impl PairFeatures {
    pub fn compute(
        doc: &Document,
        kb: &KnowledgeBase,
        reg: &FeatureRegistry,
        view: KnowledgeView,
    ) -> Result<Self> {
        let dk = reg.with_schema().then(|| DocKnowledge::new(doc, kb));
        let n = doc.mentions.len();
        let mut pairs = Vec::with_capacity(n);
        for u in 0..n {
            let mut row = Vec::with_capacity(u);
            for v in 0..u {
                let scores = dk
                    .as_ref()
                    .map(|dk| scoring::score_pair(doc, dk, kb, u, v, view));
                row.push(featurize(doc, u, v, scores.as_ref(), reg)?);
            }
            pairs.push(row);
        }
        Ok(PairFeatures { pairs })
    }

    pub fn scores(&self, weights: &[f64]) -> Vec<Vec<f64>> {
        self.pairs
            .iter()
            .map(|row| row.iter().map(|f| dot(weights, f)).collect())
            .collect()
    }
}

/// Best-link choice over `candidates` plus null (score 0): highest score,
/// ties going to the closest antecedent; null wins unless strictly beaten.
pub fn best_link(
    scores: &[f64],
    candidates: impl IntoIterator<Item = usize>,
    allow_null: bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for v in candidates {
        let s = scores[v];
        match best {
            Some((bv, bs)) if s < bs || (s == bs && v < bv) => {}
            _ => best = Some((v, s)),
        }
    }
    match best {
        Some((v, s)) if !allow_null || s > 0.0 => Some(v),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training-set AntePre after each epoch, with the averaged weights.
    pub epoch_antepre: Vec<f64>,
    pub updates_per_epoch: Vec<u64>,
}

/// Latent best-link averaged perceptron.
///
/// Per anaphor the predicted link is the best-link choice over all preceding
/// mentions and null; the latent gold link is the best-scoring preceding
/// mention of the same gold cluster (null if there is none). On disagreement
/// `w += lr * (f_gold - f_pred)`. The returned weights are the average of the
/// weight vector over every anaphor visit.
pub fn train_blmp(
    docs: &[Document],
    kb: &KnowledgeBase,
    cfg: &TrainConfig,
) -> Result<(ModelWeights, TrainReport)> {
    if !docs.iter().any(Document::has_gold) {
        return Err(Error::NoGold);
    }
    let reg = FeatureRegistry::new(cfg.with_schema);
    let view = if cfg.with_schema {
        cfg.view
    } else {
        KnowledgeView::None
    };
    let train: Vec<(&Document, PairFeatures)> = docs
        .iter()
        .filter(|d| d.has_gold())
        .map(|d| PairFeatures::compute(d, kb, &reg, view).map(|p| (d, p)))
        .collect::<Result<_>>()?;

    let dim = reg.len();
    let mut w = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    let mut visits: u64 = 0;
    let mut updates: u64 = 0;
    let mut report = TrainReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_updates = 0;
        for &di in &order {
            let (doc, feats) = &train[di];
            for u in 1..doc.mentions.len() {
                let scores: Vec<f64> = feats.pairs[u].iter().map(|f| dot(&w, f)).collect();
                let pred = best_link(&scores, 0..u, true);
                let gold = best_link(&scores, doc.gold_antecedents(u), false);
                if pred != gold {
                    if let Some(g) = gold {
                        for &(i, x) in &feats.pairs[u][g].0 {
                            w[i] += cfg.learning_rate * x;
                        }
                    }
                    if let Some(p) = pred {
                        for &(i, x) in &feats.pairs[u][p].0 {
                            w[i] -= cfg.learning_rate * x;
                        }
                    }
                    epoch_updates += 1;
                }
                for (s, x) in sum.iter_mut().zip(&w) {
                    *s += x;
                }
                visits += 1;
            }
        }
        updates += epoch_updates;
        report.updates_per_epoch.push(epoch_updates);
        let avg: Vec<f64> = average(&sum, visits);
        report.epoch_antepre.push(training_antepre(&train, &avg));
    }

    let mut model = ModelWeights::zeros(&reg, cfg.clone());
    model.weights = average(&sum, visits);
    model.updates = updates;
    Ok((model, report))
}

fn average(sum: &[f64], visits: u64) -> Vec<f64> {
    if visits == 0 {
        return vec![0.0; sum.len()];
    }
    sum.iter().map(|s| s / visits as f64).collect()
}

fn training_antepre(train: &[(&Document, PairFeatures)], w: &[f64]) -> f64 {
    let mut golds = Vec::new();
    let mut preds = Vec::new();
    for (doc, feats) in train {
        let scores = feats.scores(w);
        let links = (0..doc.mentions.len())
            .map(|u| best_link(&scores[u], 0..u, true))
            .collect();
        golds.push(*doc);
        preds.push(crate::infer::LinkAssignment { links }.partition());
    }
    crate::eval::antepre(&golds, &preds).map_or(0.0, |r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{doc_from_text, m};

    fn pair_doc() -> Document {
        doc_from_text(
            "p",
            "The/DET dog/NOUN saw/VERB the/DET dog/NOUN ./PUNCT",
            &[
                m(0, 0, 2, 1, "subj", false, 0),
                m(0, 3, 5, 4, "obj", false, 0),
            ],
        )
    }

    #[test]
    fn base_features_of_identical_heads() {
        let doc = pair_doc();
        let reg = FeatureRegistry::new(false);
        let f = featurize(&doc, 1, 0, None, &reg).unwrap();
        assert_eq!(f.get(reg.id("head_match").unwrap()), Some(1.0));
        assert_eq!(f.get(reg.id("sent_dist=0").unwrap()), Some(1.0));
        assert_eq!(f.get(reg.id("roles=subj-obj").unwrap()), Some(1.0));
        assert!(f.ids().all(|i| !reg.is_schema(i)));
    }

    #[test]
    fn schema_namespace_gate() {
        let doc = pair_doc();
        let reg = FeatureRegistry::new(true);
        let f = featurize(&doc, 1, 0, Some(&ScoreVector::default()), &reg).unwrap();
        let schema: Vec<_> = f.0.iter().filter(|(i, _)| reg.is_schema(*i)).collect();
        assert_eq!(schema.len(), 18);
        assert!(schema.iter().all(|(_, x)| *x == 0.0));
        assert!(featurize(&doc, 1, 0, None, &reg).is_err());
    }

    #[test]
    fn ordering_violation() {
        let doc = pair_doc();
        let reg = FeatureRegistry::new(false);
        assert!(matches!(
            featurize(&doc, 0, 1, None, &reg),
            Err(Error::Ordering { .. })
        ));
        assert!(featurize(&doc, 0, 0, None, &reg).is_err());
    }

    #[test]
    fn link_score_is_dot_product() {
        let reg = FeatureRegistry::new(false);
        let mut w = ModelWeights::zeros(&reg, TrainConfig::default());
        let f = FeatureVector(vec![(0, 1.0), (3, 2.5)]);
        assert_eq!(link_score(&w, &f), 0.0);
        w.weights[3] = 1.0;
        assert_eq!(link_score(&w, &f), 2.5);
    }

    #[test]
    fn best_link_ties_and_null() {
        assert_eq!(best_link(&[1.0, 1.0, 0.5], 0..3, true), Some(1));
        assert_eq!(best_link(&[0.0, -1.0], 0..2, true), None);
        assert_eq!(best_link(&[0.0, -1.0], 0..2, false), Some(0));
        assert_eq!(best_link(&[], 0..0, false), None);
    }

    #[test]
    fn zero_epochs_zero_weights() {
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        let (w, r) = train_blmp(&[pair_doc()], &KnowledgeBase::empty(), &cfg).unwrap();
        assert!(w.weights.iter().all(|&x| x == 0.0));
        assert!(r.epoch_antepre.is_empty());
    }

    #[test]
    fn no_gold_is_an_error() {
        let doc = doc_from_text("p", "The/DET dog/NOUN barked/VERB ./PUNCT", &[]);
        assert!(matches!(
            train_blmp(&[doc], &KnowledgeBase::empty(), &TrainConfig::default()),
            Err(Error::NoGold)
        ));
    }

    #[test]
    fn separable_doc_learned() {
        // "he" corefers with the masculine name, never with the neuter noun
        let doc = doc_from_text(
            "s",
            "John/PROPN put/VERB the/DET box/NOUN down/ADV because/SCONJ he/PRON was/AUX tired/ADJ ./PUNCT",
            &[m(0, 0, 1, 0, "subj", false, 0), m(0, 2, 4, 3, "obj", false, 1), m(0, 6, 7, 6, "subj", true, 0)],
        );
        let cfg = TrainConfig {
            epochs: 5,
            ..Default::default()
        };
        let (_, report) = train_blmp(&[doc], &KnowledgeBase::empty(), &cfg).unwrap();
        assert_eq!(report.epoch_antepre.len(), 5);
        assert_eq!(*report.epoch_antepre.last().unwrap(), 1.0);
    }

    #[test]
    fn model_json_round_trip() {
        let reg = FeatureRegistry::new(true);
        let mut w = ModelWeights::zeros(&reg, TrainConfig::default());
        w.weights[2] = 0.125;
        let back = ModelWeights::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        let mut bad = w.clone();
        bad.score_layout = "other".into();
        assert!(ModelWeights::from_json(&bad.to_json()).is_err());
    }
}
