use std::collections::BTreeMap;
use std::path::Path;

use super::tsv;
use crate::docmodel::Role;
use crate::error::{Error, Result};
use crate::extract::{NeighborPairEvent, TripleKey};

/// Co-occurrence schema: the antecedent-side triple (earlier in text), the
/// anaphor-side triple (later) and the connective between them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Type2Key {
    pub antecedent: TripleKey,
    pub anaphor: TripleKey,
    pub connective: Option<String>,
}

/// Conditioning side of a [`Type2Key`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Type2Marginal {
    pub anaphor: TripleKey,
    pub connective: Option<String>,
}

impl Type2Key {
    pub fn of(e: &NeighborPairEvent) -> Self {
        Type2Key {
            antecedent: e.first.clone(),
            anaphor: e.second.clone(),
            connective: e.connective.map(str::to_string),
        }
    }

    fn marginal(&self) -> Type2Marginal {
        Type2Marginal {
            anaphor: self.anaphor.clone(),
            connective: self.connective.clone(),
        }
    }
}

/// Joint counts of neighbor triple pairs plus marginals over the anaphor side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Type2Store {
    joint: BTreeMap<Type2Key, u64>,
    marginal: BTreeMap<Type2Marginal, u64>,
}

impl Type2Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a>(events: impl IntoIterator<Item = &'a NeighborPairEvent>) -> Self {
        let mut store = Self::new();
        for e in events {
            store.add(Type2Key::of(e), 1);
        }
        store
    }

    pub fn add(&mut self, key: Type2Key, n: u64) {
        if n == 0 {
            return;
        }
        *self.marginal.entry(key.marginal()).or_insert(0) += n;
        *self.joint.entry(key).or_insert(0) += n;
    }

    pub fn joint(&self, key: &Type2Key) -> u64 {
        self.joint.get(key).copied().unwrap_or(0)
    }

    pub fn marginal(&self, key: &Type2Marginal) -> u64 {
        self.marginal.get(key).copied().unwrap_or(0)
    }

    fn lookup(&self, key: &Type2Key) -> Option<(f64, f64)> {
        let joint = self.joint(key);
        if joint == 0 {
            return None;
        }
        let marginal = self.marginal(&key.marginal());
        Some(((joint as f64).ln(), joint as f64 / marginal as f64))
    }

    /// `(ln joint, joint / marginal)`. A miss on a connective-specific key
    /// backs off to the connective-free key; a miss there gives `(0, 0)`.
    pub fn query(
        &self,
        antecedent: &TripleKey,
        anaphor: &TripleKey,
        connective: Option<&str>,
    ) -> (f64, f64) {
        let mut key = Type2Key {
            antecedent: antecedent.clone(),
            anaphor: anaphor.clone(),
            connective: connective.map(str::to_string),
        };
        if let Some(hit) = self.lookup(&key) {
            return hit;
        }
        if key.connective.is_some() {
            key.connective = None;
            if let Some(hit) = self.lookup(&key) {
                return hit;
            }
        }
        (0.0, 0.0)
    }

    pub fn merge(&mut self, other: &Type2Store) {
        for (k, &n) in &other.joint {
            self.add(k.clone(), n);
        }
    }

    pub fn len(&self) -> usize {
        self.joint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joint.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Type2Key, u64)> {
        self.joint.iter().map(|(k, &n)| (k, n))
    }

    pub fn marginals(&self) -> impl Iterator<Item = (&Type2Marginal, u64)> {
        self.marginal.iter().map(|(k, &n)| (k, n))
    }

    /// Only joint counts are written; marginals are re-derived on load.
    pub fn save(&self, path: &Path) -> Result<()> {
        tsv::write_rows(
            path,
            self.joint.iter().map(|(k, n)| {
                vec![
                    tsv::clean(&k.antecedent.predicate),
                    k.antecedent.role.to_string(),
                    tsv::clean(&k.anaphor.predicate),
                    k.anaphor.role.to_string(),
                    tsv::clean(k.connective.as_deref().unwrap_or("")),
                    n.to_string(),
                ]
            }),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut store = Self::new();
        for (i, (f, n)) in tsv::read_rows(path, 6)?.into_iter().enumerate() {
            let role = |s: &str| {
                Role::parse(s).ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("{}: bad role `{s}`", path.display()),
                })
            };
            let connective = tsv::unclean(&f[4]);
            store.add(
                Type2Key {
                    antecedent: TripleKey {
                        predicate: tsv::unclean(&f[0]),
                        role: role(&f[1])?,
                    },
                    anaphor: TripleKey {
                        predicate: tsv::unclean(&f[2]),
                        role: role(&f[3])?,
                    },
                    connective: (!connective.is_empty()).then_some(connective),
                },
                n,
            );
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tk(p: &str, r: Role) -> TripleKey {
        TripleKey {
            predicate: p.to_string(),
            role: r,
        }
    }

    fn key(a: &str, b: &str, c: Option<&str>) -> Type2Key {
        Type2Key {
            antecedent: tk(a, Role::Subj),
            anaphor: tk(b, Role::Subj),
            connective: c.map(str::to_string),
        }
    }

    #[test]
    fn single_event() {
        let mut s = Type2Store::new();
        s.add(key("fall", "slip", Some("because")), 1);
        let (lj, p) = s.query(
            &tk("fall", Role::Subj),
            &tk("slip", Role::Subj),
            Some("because"),
        );
        assert_eq!((lj, p), (0.0, 1.0));
    }

    #[test]
    fn joint_over_marginal() {
        let mut s = Type2Store::new();
        s.add(key("a", "x", None), 5);
        s.add(key("b", "x", None), 5);
        let (lj, p) = s.query(&tk("a", Role::Subj), &tk("x", Role::Subj), None);
        assert!((lj - 5f64.ln()).abs() < 1e-12);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn connective_backoff() {
        let mut s = Type2Store::new();
        s.add(key("a", "x", None), 2);
        s.add(key("b", "x", None), 2);
        s.add(key("c", "x", Some("but")), 7);
        let (lj, p) = s.query(&tk("a", Role::Subj), &tk("x", Role::Subj), Some("because"));
        assert!((lj - 2f64.ln()).abs() < 1e-12);
        assert_eq!(p, 0.5);
        assert_eq!(
            s.query(&tk("z", Role::Subj), &tk("x", Role::Subj), Some("because")),
            (0.0, 0.0)
        );
    }

    #[test]
    fn tsv_round_trip_rederives_marginals() {
        let mut s = Type2Store::new();
        s.add(key("a", "x", None), 2);
        s.add(key("b", "x", Some("so")), 3);
        s.add(key("b", "x", None), 1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t2.tsv");
        s.save(&p).unwrap();
        assert_eq!(Type2Store::load(&p).unwrap(), s);
    }
}
