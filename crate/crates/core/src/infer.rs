//! Decoding: best-left-link and exact 0-1 ILP with knowledge constraints.
//!
//! The ILP is
//!
//! ```text
//! max  Σ_u Σ_{v<u} s(u,v) · y_uv
//! s.t. Σ_v y_uv ≤ 1              for every anaphor u
//!      y_uv = 1                  for every force-link (u, v)
//!      y_uv = 0                  for every forbid-link (u, v)
//!      y_uv ∈ {0, 1}
//! ```
//!
//! solved by depth-first branch and bound over anaphors. The bound of a node
//! is its partial objective plus, for every undecided anaphor, the best
//! option still allowed to it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Gender, Number};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::model::{best_link, FeatureRegistry, ModelWeights, PairFeatures};
use crate::scoring::{
    self, DocKnowledge, KnowledgeView, ScoreVector, GIGA_TYPE1, GIGA_TYPE2, WIKI,
};

/// Per-anaphor antecedent choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkAssignment {
    pub links: Vec<Option<usize>>,
}

impl LinkAssignment {
    pub fn singletons(n: usize) -> Self {
        LinkAssignment {
            links: vec![None; n],
        }
    }

    /// Transitive closure of the links: sorted clusters ordered by first member.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let n = self.links.len();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while root[r] != r {
                r = root[r];
            }
            let mut y = x;
            while root[y] != r {
                let next = root[y];
                root[y] = r;
                y = next;
            }
            r
        }
        for (u, l) in self.links.iter().enumerate() {
            if let Some(v) = *l {
                let (a, b) = (find(&mut root, u), find(&mut root, v));
                root[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut root, x);
            groups.entry(r).or_default().push(x);
        }
        groups.into_values().collect()
    }

    /// Σ over linked anaphors of their link score, summed in anaphor order.
    pub fn objective(&self, scores: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (u, l) in self.links.iter().enumerate() {
            if let Some(v) = *l {
                total += scores[u][v];
            }
        }
        total
    }
}

/// Each anaphor independently takes its best-scoring preceding mention if
/// that beats the null link (score 0); ties go to the closest antecedent.
pub fn bll_decode(scores: &[Vec<f64>]) -> LinkAssignment {
    LinkAssignment {
        links: scores
            .iter()
            .enumerate()
            .map(|(u, row)| best_link(row, 0..u, true))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Force,
    Forbid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintSource {
    /// Margin of the combined knowledge score over the runner-up.
    Knowledge,
    /// Polarity sign clash.
    Polarity,
    /// Definite gender or number clash (baseline constraint).
    Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConstraint {
    pub kind: ConstraintKind,
    pub anaphor: usize,
    pub antecedent: usize,
    pub source: ConstraintSource,
    pub margin: f64,
}

impl fmt::Display for SchemaConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}-link({}, {}) from {:?} (margin {:.3})",
            self.kind, self.anaphor, self.antecedent, self.source, self.margin
        )
    }
}

/// Weights of the score-vector dims that make up the calibrated knowledge
/// score `k(v)`, and the margin a winner needs over the runner-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintParams {
    pub tau_margin: f64,
    pub combination: Vec<f64>,
}

impl Default for ConstraintParams {
    fn default() -> Self {
        let mut combination = vec![0.0; scoring::SCORE_DIMS];
        combination[GIGA_TYPE1.start] = 1.0;
        combination[GIGA_TYPE2.start] = 1.0;
        for i in WIKI.step_by(2) {
            combination[i + 1] = 1.0;
        }
        ConstraintParams {
            tau_margin: 1.0,
            combination,
        }
    }
}

impl ConstraintParams {
    pub fn knowledge_score(&self, s: &ScoreVector) -> f64 {
        self.combination
            .iter()
            .zip(s.as_slice())
            .map(|(w, x)| w * x)
            .sum()
    }
}

/// Knowledge constraints for every pronoun with at least one candidate.
///
/// A force-link goes to the candidate whose knowledge score beats the
/// runner-up (0 when alone) by at least `tau_margin`. A forbid-link goes to
/// every candidate whose predicate polarity strictly clashes with the
/// pronoun's while another candidate agrees with it. Conflicting force and
/// forbid on one pair cancel out.
pub fn generate_constraints(
    doc: &Document,
    dk: &DocKnowledge,
    kb: &KnowledgeBase,
    params: &ConstraintParams,
    view: KnowledgeView,
) -> Vec<SchemaConstraint> {
    let mut out = Vec::new();
    for u in 0..doc.mentions.len() {
        if !doc.mentions[u].is_pronoun {
            continue;
        }
        let cands = doc.candidate_entities(u);
        if cands.is_empty() {
            continue;
        }
        let k: Vec<(usize, f64)> = cands
            .iter()
            .map(|&v| {
                (
                    v,
                    params.knowledge_score(&scoring::score_pair(doc, dk, kb, u, v, view)),
                )
            })
            .collect();
        let mut force = None;
        let best = k
            .iter()
            .copied()
            .fold(None, |acc: Option<(usize, f64)>, (v, s)| match acc {
                Some((_, bs)) if s <= bs => acc,
                _ => Some((v, s)),
            });
        if let Some((bv, bs)) = best {
            let runner = k
                .iter()
                .filter(|(v, _)| *v != bv)
                .map(|&(_, s)| s)
                .fold(None, |acc: Option<f64>, s| {
                    Some(acc.map_or(s, |a| a.max(s)))
                })
                .unwrap_or(0.0);
            let margin = bs - runner;
            if margin > 0.0 && margin >= params.tau_margin {
                force = Some((bv, margin));
            }
        }

        let mut forbid = Vec::new();
        let polarity_visible = matches!(view, KnowledgeView::All | KnowledgeView::Type1Only);
        let po_u = dk.polarities[u];
        if polarity_visible && po_u.is_definite() {
            let po = |v: usize| dk.polarities[v];
            let has_match = cands
                .iter()
                .any(|&v| dk.triples[v].is_some() && po(v) == po_u);
            if has_match {
                for &v in &cands {
                    if dk.triples[v].is_some() && po(v).is_definite() && po(v) != po_u {
                        forbid.push(v);
                    }
                }
            }
        }
        if let Some((fv, _)) = force {
            if forbid.contains(&fv) {
                forbid.retain(|&v| v != fv);
                force = None;
            }
        }
        if let Some((v, margin)) = force {
            out.push(SchemaConstraint {
                kind: ConstraintKind::Force,
                anaphor: u,
                antecedent: v,
                source: ConstraintSource::Knowledge,
                margin,
            });
        }
        for v in forbid {
            out.push(SchemaConstraint {
                kind: ConstraintKind::Forbid,
                anaphor: u,
                antecedent: v,
                source: ConstraintSource::Polarity,
                margin: 1.0,
            });
        }
    }
    out
}

/// Baseline constraints: a pronoun never links to a mention whose gender or
/// number is known and different.
pub fn agreement_constraints(doc: &Document) -> Vec<SchemaConstraint> {
    let mut out = Vec::new();
    for (u, mu) in doc.mentions.iter().enumerate() {
        if !mu.is_pronoun {
            continue;
        }
        for (v, mv) in doc.mentions[..u].iter().enumerate() {
            let gender_clash = mu.gender != Gender::Unknown
                && mv.gender != Gender::Unknown
                && mu.gender != mv.gender;
            let number_clash = mu.number != Number::Unknown
                && mv.number != Number::Unknown
                && mu.number != mv.number;
            if gender_clash || number_clash {
                out.push(SchemaConstraint {
                    kind: ConstraintKind::Forbid,
                    anaphor: u,
                    antecedent: v,
                    source: ConstraintSource::Agreement,
                    margin: 0.0,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub nodes: u64,
    pub pruned: u64,
    pub incumbents: u64,
}

struct Search<'a> {
    options: &'a [Vec<(Option<usize>, f64)>],
    remaining: Vec<f64>,
    current: Vec<Option<usize>>,
    best: Option<(f64, Vec<Option<usize>>)>,
    stats: SolverStats,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, value: f64) {
        self.stats.nodes += 1;
        if let Some((incumbent, _)) = &self.best {
            if value + self.remaining[depth] <= *incumbent {
                self.stats.pruned += 1;
                return;
            }
        }
        if depth == self.options.len() {
            self.stats.incumbents += 1;
            self.best = Some((value, self.current.clone()));
            return;
        }
        for k in 0..self.options[depth].len() {
            let (choice, s) = self.options[depth][k];
            self.current[depth] = choice;
            self.dfs(depth + 1, value + s);
        }
        self.current[depth] = None;
    }
}

/// Exact solution of the constrained best-link ILP.
///
/// Options of each anaphor are explored best first (null before an equal
/// antecedent, closer antecedents before farther ones), and only strictly
/// better leaves replace the incumbent, so ties resolve exactly as in
/// [`bll_decode`].
pub fn ilp_decode(
    doc_id: &str,
    scores: &[Vec<f64>],
    constraints: &[SchemaConstraint],
) -> Result<(LinkAssignment, f64, SolverStats)> {
    let n = scores.len();
    let infeasible = |u: usize, reason: String| Error::Infeasible {
        doc_id: doc_id.to_string(),
        anaphor: u,
        reason,
    };
    let mut forced: Vec<Option<&SchemaConstraint>> = vec![None; n];
    let mut forbidden: Vec<Vec<&SchemaConstraint>> = vec![Vec::new(); n];
    for c in constraints {
        if c.anaphor >= n || c.antecedent >= c.anaphor {
            return Err(infeasible(
                c.anaphor,
                format!("{c}: antecedent must precede anaphor"),
            ));
        }
        match c.kind {
            ConstraintKind::Force => {
                if let Some(prev) = forced[c.anaphor] {
                    if prev.antecedent != c.antecedent {
                        return Err(infeasible(
                            c.anaphor,
                            format!("{prev} and {c} exceed one antecedent"),
                        ));
                    }
                }
                forced[c.anaphor] = Some(c);
            }
            ConstraintKind::Forbid => forbidden[c.anaphor].push(c),
        }
    }
    let mut options = Vec::with_capacity(n);
    for u in 0..n {
        let opts: Vec<(Option<usize>, f64)> = if let Some(f) = forced[u] {
            if let Some(clash) = forbidden[u].iter().find(|c| c.antecedent == f.antecedent) {
                return Err(infeasible(u, format!("{f} contradicts {clash}")));
            }
            vec![(Some(f.antecedent), scores[u][f.antecedent])]
        } else {
            let mut opts: Vec<(Option<usize>, f64)> = vec![(None, 0.0)];
            opts.extend(
                (0..u)
                    .rev()
                    .filter(|v| !forbidden[u].iter().any(|c| c.antecedent == *v))
                    .map(|v| (Some(v), scores[u][v])),
            );
            // stable: null first, then closest, among equal scores
            opts.sort_by(|a, b| b.1.total_cmp(&a.1));
            opts
        };
        options.push(opts);
    }
    let mut remaining = vec![0.0; n + 1];
    for u in (0..n).rev() {
        remaining[u] = remaining[u + 1] + options[u][0].1;
    }
    let mut search = Search {
        options: &options,
        remaining,
        current: vec![None; n],
        best: None,
        stats: SolverStats::default(),
    };
    search.dfs(0, 0.0);
    let (_, links) = search.best.expect("null options keep the problem feasible");
    let assignment = LinkAssignment { links };
    let objective = assignment.objective(scores);
    Ok((assignment, objective, search.stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Illinois,
    IlliCons,
    KnowFeat,
    KnowCons,
    KnowComb,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Illinois,
        Variant::IlliCons,
        Variant::KnowFeat,
        Variant::KnowCons,
        Variant::KnowComb,
    ];

    pub fn schema_features(self) -> bool {
        matches!(self, Variant::KnowFeat | Variant::KnowComb)
    }

    pub fn ilp(self) -> bool {
        matches!(
            self,
            Variant::IlliCons | Variant::KnowCons | Variant::KnowComb
        )
    }

    pub fn schema_constraints(self) -> bool {
        matches!(self, Variant::KnowCons | Variant::KnowComb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Illinois => "Illinois",
            Variant::IlliCons => "IlliCons",
            Variant::KnowFeat => "KnowFeat",
            Variant::KnowCons => "KnowCons",
            Variant::KnowComb => "KnowComb",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown system variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub constraints: ConstraintParams,
    pub view: KnowledgeView,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            constraints: ConstraintParams::default(),
            view: KnowledgeView::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub u: usize,
    pub v: Option<usize>,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub links: Vec<LinkRecord>,
    pub clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<SchemaConstraint>,
}

impl Prediction {
    pub fn new(doc_id: &str, a: &LinkAssignment, constraints: Vec<SchemaConstraint>) -> Self {
        Prediction {
            doc_id: doc_id.to_string(),
            links: a
                .links
                .iter()
                .enumerate()
                .map(|(u, &v)| LinkRecord { u, v })
                .collect(),
            clusters: a.partition(),
            constraints,
        }
    }

    pub fn assignment(&self) -> LinkAssignment {
        let n = self.links.iter().map(|l| l.u + 1).max().unwrap_or(0);
        let mut a = LinkAssignment::singletons(n);
        for l in &self.links {
            a.links[l.u] = l.v;
        }
        a
    }
}

/// Decodes one document with the given variant.
pub fn decode_document(
    variant: Variant,
    doc: &Document,
    model: &ModelWeights,
    reg: &FeatureRegistry,
    kb: &KnowledgeBase,
    cfg: &SystemConfig,
) -> Result<Prediction> {
    let view = if variant.schema_features() {
        cfg.view
    } else {
        KnowledgeView::None
    };
    let feats = PairFeatures::compute(doc, kb, reg, view)?;
    let scores = feats.scores(&model.weights);
    if !variant.ilp() {
        return Ok(Prediction::new(
            &doc.doc_id,
            &bll_decode(&scores),
            Vec::new(),
        ));
    }
    let mut constraints = agreement_constraints(doc);
    if variant.schema_constraints() {
        let dk = DocKnowledge::new(doc, kb);
        let schema = generate_constraints(doc, &dk, kb, &cfg.constraints, cfg.view);
        // knowledge overrides the baseline agreement heuristic on the same pair
        constraints.retain(|a| {
            !schema.iter().any(|s| {
                s.kind == ConstraintKind::Force
                    && (s.anaphor, s.antecedent) == (a.anaphor, a.antecedent)
            })
        });
        constraints.extend(schema);
    }
    let (assignment, _, _) = ilp_decode(&doc.doc_id, &scores, &constraints)?;
    Ok(Prediction::new(&doc.doc_id, &assignment, constraints))
}

/// Runs a system variant over documents, in parallel, keeping input order.
pub fn run_system(
    variant: Variant,
    docs: &[Document],
    model: &ModelWeights,
    kb: &KnowledgeBase,
    cfg: &SystemConfig,
) -> Result<Vec<Prediction>> {
    model.validate()?;
    if model.with_schema() != variant.schema_features() {
        return Err(Error::Model(format!(
            "{variant} needs a model trained {} schema features",
            if variant.schema_features() {
                "with"
            } else {
                "without"
            }
        )));
    }
    let reg = model.registry()?;
    docs.par_iter()
        .map(|d| decode_document(variant, d, model, &reg, kb, cfg))
        .collect()
}

pub fn write_predictions<W: std::io::Write>(
    preds: &[Prediction],
    mut out: W,
) -> std::io::Result<()> {
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_predictions(preds: &[Prediction], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_predictions(preds, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn all_negative_scores_give_singletons() {
        let s = table(&[&[], &[-1.0], &[-0.5, -2.0]]);
        let a = bll_decode(&s);
        assert_eq!(a, LinkAssignment::singletons(3));
        assert_eq!(a.partition(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn hand_computed_three_mentions() {
        // m1 → m0 (0.7 > 0); m2: 0.4 vs 0.9 → m1
        let s = table(&[&[], &[0.7], &[0.4, 0.9]]);
        let a = bll_decode(&s);
        assert_eq!(a.links, vec![None, Some(0), Some(1)]);
        assert_eq!(a.partition(), vec![vec![0, 1, 2]]);
        let (b, obj, _) = ilp_decode("d", &s, &[]).unwrap();
        assert_eq!(b, a);
        assert!((obj - 1.6).abs() < 1e-12);
    }

    #[test]
    fn force_overrides_model_preference() {
        let s = table(&[&[], &[0.2], &[0.9, 0.1]]);
        let force = SchemaConstraint {
            kind: ConstraintKind::Force,
            anaphor: 2,
            antecedent: 1,
            source: ConstraintSource::Knowledge,
            margin: 2.0,
        };
        let (a, _, _) = ilp_decode("d", &s, std::slice::from_ref(&force)).unwrap();
        assert_eq!(a.links[2], Some(1));
        let forbid = SchemaConstraint {
            kind: ConstraintKind::Forbid,
            ..force.clone()
        };
        assert!(matches!(
            ilp_decode("d", &s, &[force, forbid]),
            Err(Error::Infeasible { anaphor: 2, .. })
        ));
    }

    #[test]
    fn forbid_falls_back_to_next_best_or_null() {
        let s = table(&[&[], &[0.2], &[0.9, -0.1]]);
        let forbid = SchemaConstraint {
            kind: ConstraintKind::Forbid,
            anaphor: 2,
            antecedent: 0,
            source: ConstraintSource::Polarity,
            margin: 1.0,
        };
        let (a, _, _) = ilp_decode("d", &s, &[forbid]).unwrap();
        assert_eq!(a.links, vec![None, Some(0), None]);
    }

    #[test]
    fn ties_prefer_null_then_closest() {
        let s = table(&[&[], &[0.0], &[0.5, 0.5]]);
        let (a, _, _) = ilp_decode("d", &s, &[]).unwrap();
        assert_eq!(a.links, vec![None, None, Some(1)]);
        assert_eq!(bll_decode(&s), a);
    }

    #[test]
    fn constraint_on_following_mention_is_rejected() {
        let s = table(&[&[], &[0.2]]);
        let c = SchemaConstraint {
            kind: ConstraintKind::Force,
            anaphor: 0,
            antecedent: 1,
            source: ConstraintSource::Knowledge,
            margin: 1.0,
        };
        assert!(ilp_decode("d", &s, &[c]).is_err());
    }

    #[test]
    fn variant_table() {
        use Variant::*;
        let rows: Vec<(bool, bool, bool)> = Variant::ALL
            .iter()
            .map(|v| (v.schema_features(), v.ilp(), v.schema_constraints()))
            .collect();
        assert_eq!(
            rows,
            vec![
                (false, false, false),
                (false, true, false),
                (true, false, false),
                (false, true, true),
                (true, true, true)
            ]
        );
        assert_eq!("knowcomb".parse::<Variant>().unwrap(), KnowComb);
        assert!("Oracle".parse::<Variant>().is_err());
    }

    #[test]
    fn prediction_round_trip() {
        let a = LinkAssignment {
            links: vec![None, Some(0), None],
        };
        let p = Prediction::new("d", &a, Vec::new());
        assert_eq!(p.clusters, vec![vec![0, 1], vec![2]]);
        let mut buf = Vec::new();
        write_predictions(std::slice::from_ref(&p), &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(
            line.trim(),
            r#"{"doc_id":"d","links":[{"u":0,"v":null},{"u":1,"v":0},{"u":2,"v":null}],"clusters":[[0,1],[2]]}"#
        );
        let back: Prediction = serde_json::from_str(&line).unwrap();
        assert_eq!(back.assignment(), a);
    }
}
