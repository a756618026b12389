//! Evaluation metrics.
//!
//! Every metric is aggregated at corpus level by summing per-document
//! numerators and denominators. A metric whose denominator is zero for the
//! whole corpus (nothing to get wrong) scores 1.0.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::docmodel::Document;
use crate::error::{Error, Result};
use crate::infer::Prediction;

pub type Partition = Vec<Vec<usize>>;

/// Checks a predicted partition of `n` mentions and returns a cluster id per
/// mention. Mentions absent from every cluster become singletons.
pub fn cluster_ids(doc_id: &str, clusters: &[Vec<usize>], n: usize) -> Result<Vec<usize>> {
    let mut ids = vec![usize::MAX; n];
    for (c, members) in clusters.iter().enumerate() {
        for &m in members {
            if m >= n {
                return Err(Error::Evaluation {
                    doc_id: doc_id.to_string(),
                    message: format!("cluster {c} names mention {m} but the document has {n}"),
                });
            }
            if ids[m] != usize::MAX {
                return Err(Error::Evaluation {
                    doc_id: doc_id.to_string(),
                    message: format!("mention {m} is in clusters {} and {c}", ids[m]),
                });
            }
            ids[m] = c;
        }
    }
    let missing = ids.iter_mut().filter(|i| **i == usize::MAX);
    for (next, id) in (clusters.len()..).zip(missing) {
        *id = next;
    }
    Ok(ids)
}

/// Validated, complete partition: every mention in exactly one cluster,
/// clusters sorted and ordered by first member, empty clusters dropped.
pub fn normalize(doc_id: &str, clusters: &[Vec<usize>], n: usize) -> Result<Partition> {
    let ids = cluster_ids(doc_id, clusters, n)?;
    let mut by_id: HashMap<usize, Vec<usize>> = HashMap::new();
    for (m, id) in ids.into_iter().enumerate() {
        by_id.entry(id).or_default().push(m);
    }
    let mut out: Partition = by_id.into_values().collect();
    out.sort();
    Ok(out)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Raw sums behind a precision/recall pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrfCounts {
    pub p_num: f64,
    pub p_den: f64,
    pub r_num: f64,
    pub r_den: f64,
}

impl PrfCounts {
    pub fn add(&mut self, o: PrfCounts) {
        self.p_num += o.p_num;
        self.p_den += o.p_den;
        self.r_num += o.r_num;
        self.r_den += o.r_den;
    }

    pub fn prf(&self) -> Prf {
        let precision = ratio(self.p_num, self.p_den);
        let recall = ratio(self.r_num, self.r_den);
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

fn muc_side(keys: &Partition, response_ids: &[usize]) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in keys {
        let mut parts: Vec<usize> = k.iter().map(|&m| response_ids[m]).collect();
        parts.sort_unstable();
        parts.dedup();
        num += (k.len() - parts.len()) as f64;
        den += (k.len() - 1) as f64;
    }
    (num, den)
}

/// Link-based MUC counts for one document.
pub fn muc_counts(gold: &Partition, pred: &Partition, n: usize) -> PrfCounts {
    let gid = ids_of(gold, n);
    let pid = ids_of(pred, n);
    let (r_num, r_den) = muc_side(gold, &pid);
    let (p_num, p_den) = muc_side(pred, &gid);
    PrfCounts {
        p_num,
        p_den,
        r_num,
        r_den,
    }
}

/// Mention-based B-cubed counts for one document.
pub fn bcub_counts(gold: &Partition, pred: &Partition, n: usize) -> PrfCounts {
    let gid = ids_of(gold, n);
    let pid = ids_of(pred, n);
    let mut c = PrfCounts {
        p_den: n as f64,
        r_den: n as f64,
        ..Default::default()
    };
    for m in 0..n {
        let k = &gold[gid[m]];
        let r = &pred[pid[m]];
        let common = k.iter().filter(|x| pid[**x] == pid[m]).count() as f64;
        c.p_num += common / r.len() as f64;
        c.r_num += common / k.len() as f64;
    }
    c
}

fn phi4(k: &[usize], r: &[usize]) -> f64 {
    let common = k.iter().filter(|x| r.contains(x)).count();
    2.0 * common as f64 / (k.len() + r.len()) as f64
}

/// Entity-based CEAF counts with φ4 similarity and optimal alignment.
pub fn ceafe_counts(gold: &Partition, pred: &Partition) -> PrfCounts {
    let sim: Vec<Vec<f64>> = gold
        .iter()
        .map(|k| pred.iter().map(|r| phi4(k, r)).collect())
        .collect();
    let total: f64 = max_assignment(&sim).iter().map(|&(i, j)| sim[i][j]).sum();
    PrfCounts {
        p_num: total,
        p_den: pred.len() as f64,
        r_num: total,
        r_den: gold.len() as f64,
    }
}

fn ids_of(p: &Partition, n: usize) -> Vec<usize> {
    let mut ids = vec![0; n];
    for (c, members) in p.iter().enumerate() {
        for &m in members {
            ids[m] = c;
        }
    }
    ids
}

/// Maximum-weight one-to-one assignment of rows to columns (Hungarian
/// method on the padded square cost matrix). Returns matched `(row, col)`
/// pairs of the original matrix.
pub fn max_assignment(w: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| if i < rows && j < cols { -w[i][j] } else { 0.0 };
    // 1-based potentials; p[j] is the row assigned to column j
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] != 0 && p[j] - 1 < rows && j - 1 < cols)
        .map(|j| (p[j] - 1, j - 1))
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPronoun {
    pub doc_id: String,
    pub mention: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntePreReport {
    pub value: f64,
    /// Gold antecedent-pronoun pairs placed in one predicted cluster.
    pub correct: usize,
    /// Σ n_i over scored pronouns.
    pub total: usize,
    /// Pronouns without any gold antecedent.
    pub excluded: Vec<ExcludedPronoun>,
}

fn antepre_doc(
    doc: &Document,
    pred: &[Vec<usize>],
) -> Result<(usize, usize, Vec<ExcludedPronoun>)> {
    let ids = cluster_ids(&doc.doc_id, pred, doc.mentions.len())?;
    let (mut correct, mut total, mut excluded) = (0, 0, Vec::new());
    for u in doc.target_pronouns() {
        let ants = doc.gold_antecedents(u);
        if ants.is_empty() {
            excluded.push(ExcludedPronoun {
                doc_id: doc.doc_id.clone(),
                mention: u,
            });
            continue;
        }
        total += ants.len();
        correct += ants.iter().filter(|&&v| ids[v] == ids[u]).count();
    }
    Ok((correct, total, excluded))
}

/// `m / Σ n_i`: the share of gold antecedent-pronoun pairs that end up in
/// the same predicted cluster.
pub fn antepre<D: Borrow<Document>>(golds: &[D], preds: &[Partition]) -> Result<AntePreReport> {
    check_lengths(golds.len(), preds.len())?;
    let mut r = AntePreReport {
        value: 0.0,
        correct: 0,
        total: 0,
        excluded: Vec::new(),
    };
    for (g, p) in golds.iter().zip(preds) {
        let (c, t, ex) = antepre_doc(g.borrow(), p)?;
        r.correct += c;
        r.total += t;
        r.excluded.extend(ex);
    }
    r.value = ratio(r.correct as f64, r.total as f64);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinogradReport {
    pub value: f64,
    pub correct: usize,
    pub total: usize,
}

fn winograd_doc(doc: &Document, pred: &[Vec<usize>]) -> Result<(usize, usize)> {
    let ids = cluster_ids(&doc.doc_id, pred, doc.mentions.len())?;
    let bad = |message: String| Error::Evaluation {
        doc_id: doc.doc_id.clone(),
        message,
    };
    let mut correct = 0;
    let mut total = 0;
    for u in doc.target_pronouns() {
        let cands = doc.candidate_entities(u);
        if cands.len() != 2 {
            return Err(bad(format!(
                "pronoun {u} has {} candidates, expected 2",
                cands.len()
            )));
        }
        let gold = doc.mentions[u]
            .gold
            .ok_or_else(|| bad(format!("pronoun {u} has no gold cluster")))?;
        let right: Vec<usize> = cands
            .iter()
            .copied()
            .filter(|&v| doc.mentions[v].gold == Some(gold))
            .collect();
        if right.len() != 1 {
            return Err(bad(format!(
                "pronoun {u} corefers with {} candidates, expected 1",
                right.len()
            )));
        }
        let wrong = cands
            .iter()
            .copied()
            .find(|v| *v != right[0])
            .expect("two candidates");
        total += 1;
        if ids[right[0]] == ids[u] && ids[wrong] != ids[u] {
            correct += 1;
        }
    }
    Ok((correct, total))
}

/// Share of target pronouns whose predicted cluster holds the correct
/// candidate and not the other one.
pub fn winograd_precision<D: Borrow<Document>>(
    golds: &[D],
    preds: &[Partition],
) -> Result<WinogradReport> {
    check_lengths(golds.len(), preds.len())?;
    let mut correct = 0;
    let mut total = 0;
    for (g, p) in golds.iter().zip(preds) {
        let (c, t) = winograd_doc(g.borrow(), p)?;
        correct += c;
        total += t;
    }
    Ok(WinogradReport {
        value: ratio(correct as f64, total as f64),
        correct,
        total,
    })
}

fn check_lengths(gold: usize, pred: usize) -> Result<()> {
    if gold != pred {
        return Err(Error::Evaluation {
            doc_id: String::new(),
            message: format!("{gold} gold documents but {pred} predictions"),
        });
    }
    Ok(())
}

type Counter = fn(&Partition, &Partition, usize) -> PrfCounts;

fn cluster_metric<D: Borrow<Document> + Sync>(
    golds: &[D],
    preds: &[Partition],
    f: Counter,
) -> Result<Prf> {
    check_lengths(golds.len(), preds.len())?;
    let per_doc: Vec<PrfCounts> = golds
        .par_iter()
        .zip(preds)
        .map(|(g, p)| {
            let g = g.borrow();
            let n = g.mentions.len();
            let pred = normalize(&g.doc_id, p, n)?;
            let gold = g.gold_clusters();
            Ok(f(&gold, &pred, n))
        })
        .collect::<Result<_>>()?;
    let mut total = PrfCounts::default();
    for c in per_doc {
        total.add(c);
    }
    Ok(total.prf())
}

pub fn muc<D: Borrow<Document> + Sync>(golds: &[D], preds: &[Partition]) -> Result<Prf> {
    cluster_metric(golds, preds, muc_counts)
}

pub fn bcub<D: Borrow<Document> + Sync>(golds: &[D], preds: &[Partition]) -> Result<Prf> {
    cluster_metric(golds, preds, bcub_counts)
}

pub fn ceafe<D: Borrow<Document> + Sync>(golds: &[D], preds: &[Partition]) -> Result<Prf> {
    cluster_metric(golds, preds, |g, p, _| ceafe_counts(g, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    AntePre,
    Winograd,
    Muc,
    Bcub,
    Ceafe,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::AntePre,
        Metric::Winograd,
        Metric::Muc,
        Metric::Bcub,
        Metric::Ceafe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AntePre => "antepre",
            Metric::Winograd => "winograd",
            Metric::Muc => "muc",
            Metric::Bcub => "bcub",
            Metric::Ceafe => "ceafe",
        }
    }

    /// Comma-separated list, e.g. `antepre,muc`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out: Vec<Metric> = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "b3" && *m == Metric::Bcub))
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub documents: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antepre: Option<AntePreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winograd: Option<WinogradReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub muc: Option<Prf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bcub: Option<Prf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceafe: Option<Prf>,
    /// Mean of the MUC, B-cubed and CEAFe F1, when all three are computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg: Option<f64>,
}

/// Pairs predictions with gold documents by `doc_id`.
pub fn align<'a>(
    golds: &'a [Document],
    preds: &[Prediction],
) -> Result<Vec<(&'a Document, Partition)>> {
    let by_id: HashMap<&str, &Prediction> = preds.iter().map(|p| (p.doc_id.as_str(), p)).collect();
    golds
        .iter()
        .map(|g| {
            by_id
                .get(g.doc_id.as_str())
                .map(|p| (g, p.clusters.clone()))
                .ok_or_else(|| Error::Evaluation {
                    doc_id: g.doc_id.clone(),
                    message: "no prediction for this document".into(),
                })
        })
        .collect()
}

pub fn evaluate(
    golds: &[Document],
    preds: &[Prediction],
    metrics: &[Metric],
) -> Result<MetricReport> {
    let pairs = align(golds, preds)?;
    let docs: Vec<&Document> = pairs.iter().map(|(d, _)| *d).collect();
    let parts: Vec<Partition> = pairs.into_iter().map(|(_, p)| p).collect();
    let mut r = MetricReport {
        documents: docs.len(),
        ..Default::default()
    };
    let want = |m: Metric| metrics.contains(&m);
    let needs_gold = metrics
        .iter()
        .any(|m| *m != Metric::AntePre && *m != Metric::Winograd);
    if needs_gold {
        if let Some(d) = docs.iter().find(|d| !d.has_gold()) {
            return Err(Error::Evaluation {
                doc_id: d.doc_id.clone(),
                message: "cluster metrics need gold ids on every mention".into(),
            });
        }
    }
    if want(Metric::AntePre) {
        r.antepre = Some(antepre(&docs, &parts)?);
    }
    if want(Metric::Winograd) {
        r.winograd = Some(winograd_precision(&docs, &parts)?);
    }
    if want(Metric::Muc) {
        r.muc = Some(muc(&docs, &parts)?);
    }
    if want(Metric::Bcub) {
        r.bcub = Some(bcub(&docs, &parts)?);
    }
    if want(Metric::Ceafe) {
        r.ceafe = Some(ceafe(&docs, &parts)?);
    }
    if let (Some(a), Some(b), Some(c)) = (r.muc, r.bcub, r.ceafe) {
        r.avg = Some((a.f1 + b.f1 + c.f1) / 3.0);
    }
    Ok(r)
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>9} {:>9} {:>9}", "metric", "P", "R", "F1")?;
        let pct = |x: f64| format!("{:.2}", 100.0 * x);
        if let Some(a) = &self.antepre {
            writeln!(
                f,
                "{:<10} {:>29}",
                "AntePre",
                format!("{} ({}/{})", pct(a.value), a.correct, a.total)
            )?;
        }
        if let Some(w) = &self.winograd {
            writeln!(f, "{:<10} {:>9}", "Winograd", pct(w.value))?;
        }
        for (name, m) in [
            ("MUC", self.muc),
            ("BCUB", self.bcub),
            ("CEAFe", self.ceafe),
        ] {
            if let Some(m) = m {
                writeln!(
                    f,
                    "{:<10} {:>9} {:>9} {:>9}",
                    name,
                    pct(m.precision),
                    pct(m.recall),
                    pct(m.f1)
                )?;
            }
        }
        if let Some(avg) = self.avg {
            writeln!(f, "{:<10} {:>29}", "AVG", pct(avg))?;
        }
        if let Some(a) = &self.antepre {
            if !a.excluded.is_empty() {
                writeln!(
                    f,
                    "{} pronouns without gold antecedent excluded",
                    a.excluded.len()
                )?;
            }
        }
        write!(f, "documents  {}", self.documents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{doc_from_text, m};

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn antepre_two_thirds() {
        // pronoun 3 has gold antecedents {0, 1}, pronoun 4 has {2}
        let doc = doc_from_text(
            "w",
            "John/PROPN the/DET author/NOUN met/VERB Bill/PROPN ./PUNCT He/PRON smiled/VERB at/ADP him/PRON ./PUNCT",
            &[
                m(0, 0, 1, 0, "subj", false, 0),
                m(0, 1, 3, 2, "subj", false, 0),
                m(0, 4, 5, 4, "obj", false, 1),
                m(1, 0, 1, 0, "subj", true, 0),
                m(1, 3, 4, 3, "obj", true, 1),
            ],
        );
        let r = antepre(&[&doc], &[vec![vec![0, 3], vec![1], vec![2, 4]]]).unwrap();
        assert_eq!((r.correct, r.total), (2, 3));
        close(r.value, 2.0 / 3.0);
        close(antepre(&[&doc], &[doc.gold_clusters()]).unwrap().value, 1.0);
        let singletons: Partition = (0..5).map(|i| vec![i]).collect();
        close(antepre(&[&doc], &[singletons]).unwrap().value, 0.0);
    }

    #[test]
    fn pronoun_without_antecedent_is_excluded() {
        let doc = doc_from_text(
            "x",
            "It/PRON rained/VERB ./PUNCT",
            &[m(0, 0, 1, 0, "subj", true, 0)],
        );
        let r = antepre(&[&doc], &[vec![vec![0]]]).unwrap();
        assert_eq!(r.total, 0);
        assert_eq!(
            r.excluded,
            vec![ExcludedPronoun {
                doc_id: "x".into(),
                mention: 0
            }]
        );
    }

    #[test]
    fn overlapping_clusters_rejected() {
        let doc = doc_from_text(
            "o",
            "John/PROPN saw/VERB him/PRON ./PUNCT",
            &[
                m(0, 0, 1, 0, "subj", false, 0),
                m(0, 2, 3, 2, "obj", true, 0),
            ],
        );
        assert!(muc(&[&doc], &[vec![vec![0, 1], vec![1]]]).is_err());
        assert!(antepre(&[&doc], &[vec![vec![0, 5]]]).is_err());
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let g: Partition = vec![vec![0, 2, 4], vec![1, 3]];
        for c in [
            muc_counts(&g, &g, 5),
            bcub_counts(&g, &g, 5),
            ceafe_counts(&g, &g),
        ] {
            close(c.prf().f1, 1.0);
        }
    }

    #[test]
    fn five_mention_hand_values() {
        // gold {0,1,2} {3,4}; pred {0,1} {2,3,4}
        let g: Partition = vec![vec![0, 1, 2], vec![3, 4]];
        let p: Partition = vec![vec![0, 1], vec![2, 3, 4]];
        // MUC R = ((3-2)+(2-1))/(2+1) = 2/3, P = ((2-1)+(3-2))/(1+2) = 2/3
        let m = muc_counts(&g, &p, 5).prf();
        close(m.recall, 2.0 / 3.0);
        close(m.precision, 2.0 / 3.0);
        // B3 P: m0 2/2, m1 2/2, m2 1/3, m3 2/3, m4 2/3 → (1+1+1/3+2/3+2/3)/5 = 11/15
        // B3 R: m0 2/3, m1 2/3, m2 1/3, m3 1, m4 1 → (2/3+2/3+1/3+1+1)/5 = 11/15
        let b = bcub_counts(&g, &p, 5).prf();
        close(b.precision, 11.0 / 15.0);
        close(b.recall, 11.0 / 15.0);
        // CEAFe: φ({0,1,2},{0,1}) = 4/5, φ({3,4},{2,3,4}) = 4/5 → 8/5 / 2
        let c = ceafe_counts(&g, &p).prf();
        close(c.precision, 0.8);
        close(c.recall, 0.8);
    }

    #[test]
    fn singleton_prediction_has_zero_muc_recall() {
        let g: Partition = vec![vec![0, 1], vec![2]];
        let p: Partition = vec![vec![0], vec![1], vec![2]];
        let m = muc_counts(&g, &p, 3).prf();
        close(m.recall, 0.0);
        close(m.f1, 0.0);
    }

    #[test]
    fn assignment_on_rectangular_matrix() {
        let w = vec![vec![0.1, 0.9, 0.2], vec![0.8, 0.7, 0.0]];
        assert_eq!(max_assignment(&w), vec![(0, 1), (1, 0)]);
        let w = vec![vec![0.5], vec![0.6], vec![0.1]];
        assert_eq!(max_assignment(&w), vec![(1, 0)]);
        assert!(max_assignment(&[]).is_empty());
    }

    #[test]
    fn metric_list_parsing() {
        assert_eq!(
            Metric::parse_list("muc, antepre,b3").unwrap(),
            vec![Metric::AntePre, Metric::Muc, Metric::Bcub]
        );
        assert!(Metric::parse_list("blanc").is_err());
    }
}
