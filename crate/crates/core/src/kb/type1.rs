use std::collections::BTreeMap;
use std::path::Path;

use super::tsv;
use crate::docmodel::Role;
use crate::error::{Error, Result};
use crate::extract::Triple;

/// Single-triple schema instance: `pred(m = head, a = argument)` with the
/// role `m` plays.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Type1Key {
    pub predicate: String,
    pub role: Role,
    pub head: String,
    pub argument: String,
}

impl Type1Key {
    pub fn new(predicate: &str, role: Role, head: &str, argument: &str) -> Self {
        Type1Key {
            predicate: predicate.to_string(),
            role,
            head: head.to_string(),
            argument: argument.to_string(),
        }
    }

    pub fn of(t: &Triple) -> Self {
        Type1Key::new(&t.predicate, t.role, &t.head, &t.argument)
    }
}

/// Occurrence counts of single triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Type1Store {
    counts: BTreeMap<Type1Key, u64>,
}

impl Type1Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut store = Self::new();
        for t in triples {
            store.add(Type1Key::of(t), 1);
        }
        store
    }

    pub fn add(&mut self, key: Type1Key, n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
        }
    }

    pub fn count(&self, key: &Type1Key) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// `ln(count)` for a present key, `0.0` on a miss.
    pub fn query(&self, predicate: &str, role: Role, head: &str, argument: &str) -> f64 {
        let key = Type1Key::new(predicate, role, head, argument);
        match self.count(&key) {
            0 => 0.0,
            n => (n as f64).ln(),
        }
    }

    pub fn merge(&mut self, other: &Type1Store) {
        for (k, &n) in &other.counts {
            self.add(k.clone(), n);
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Type1Key, u64)> {
        self.counts.iter().map(|(k, &n)| (k, n))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        tsv::write_rows(
            path,
            self.counts.iter().map(|(k, n)| {
                vec![
                    tsv::clean(&k.predicate),
                    k.role.to_string(),
                    tsv::clean(&k.head),
                    tsv::clean(&k.argument),
                    n.to_string(),
                ]
            }),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut store = Self::new();
        for (i, (f, n)) in tsv::read_rows(path, 5)?.into_iter().enumerate() {
            let role = Role::parse(&f[1]).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("{}: bad role `{}`", path.display(), f[1]),
            })?;
            store.add(
                Type1Key::new(
                    &tsv::unclean(&f[0]),
                    role,
                    &tsv::unclean(&f[2]),
                    &tsv::unclean(&f[3]),
                ),
                n,
            );
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(p: &str, a: &str) -> Type1Key {
        Type1Key::new(p, Role::Subj, "fish", a)
    }

    #[test]
    fn empty_store() {
        let s = Type1Store::build(std::iter::empty());
        assert!(s.is_empty());
        assert_eq!(s.query("eat", Role::Subj, "fish", "worm"), 0.0);
    }

    #[test]
    fn counts_and_log_scores() {
        let mut s = Type1Store::new();
        s.add(key("eat", "worm"), 3);
        assert_eq!(s.count(&key("eat", "worm")), 3);
        s.add(key("be", "hungry"), 1);
        assert_eq!(s.query("be", Role::Subj, "fish", "hungry"), 0.0);
        s.add(key("swim", ""), 100);
        assert!((s.query("swim", Role::Subj, "fish", "") - 4.605170185988092).abs() < 1e-9);
        assert_eq!(s.query("swim", Role::Obj, "fish", ""), 0.0);
    }

    #[test]
    fn tsv_round_trip() {
        let mut s = Type1Store::new();
        s.add(key("eat", "worm"), 3);
        s.add(key("swim", ""), 7);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t1.tsv");
        s.save(&p).unwrap();
        assert_eq!(Type1Store::load(&p).unwrap(), s);
    }
}
