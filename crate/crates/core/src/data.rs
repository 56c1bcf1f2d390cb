//! Triple ingestion, vocabularies, filter index and fixed negatives.
//!
//! Parsing works on in-memory text; reading files is left to the caller.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::Triple;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTriple {
    pub head: String,
    pub rel: String,
    pub tail: String,
}

/// Parses `head<TAB>relation<TAB>tail` lines. Blank lines are skipped; line
/// numbers in errors are 1-based.
pub fn parse_triples(text: &str) -> Result<Vec<RawTriple>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols.iter().any(|c| c.is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                msg: "empty column".into(),
            });
        }
        out.push(RawTriple {
            head: cols[0].to_string(),
            rel: cols[1].to_string(),
            tail: cols[2].to_string(),
        });
    }
    Ok(out)
}

/// Dense name <-> id map, ids assigned in order of first insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl Vocab {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Up to `limit` known names closest to `name` by edit distance.
    pub fn near_misses(&self, name: &str, limit: usize) -> Vec<&str> {
        let mut scored: Vec<(usize, &str)> = self
            .names
            .iter()
            .map(|n| (edit_distance(name, n), n.as_str()))
            .collect();
        scored.sort();
        scored.into_iter().take(limit).map(|(_, n)| n).collect()
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Set of known triples, grouped by `(head, relation)` for tail filtering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterIndex {
    tails: BTreeMap<(u32, u32), BTreeSet<u32>>,
    len: usize,
}

impl FilterIndex {
    pub fn insert(&mut self, t: Triple) -> bool {
        let fresh = self.tails.entry((t.head, t.rel)).or_default().insert(t.tail);
        self.len += usize::from(fresh);
        fresh
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.tails.get(&(t.head, t.rel)).is_some_and(|s| s.contains(&t.tail))
    }

    /// Known tails of `(head, rel)`.
    pub fn tails(&self, head: u32, rel: u32) -> Option<&BTreeSet<u32>> {
        self.tails.get(&(head, rel))
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.tails
            .iter()
            .flat_map(|(&(head, rel), tails)| tails.iter().map(move |&tail| Triple { head, rel, tail }))
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl FromIterator<Triple> for FilterIndex {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut f = FilterIndex::default();
        for t in iter {
            f.insert(t);
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

/// Integer-encoded dataset with its vocabularies and filter index.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleStore {
    pub entities: Vocab,
    pub relations: Vocab,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    pub filter: FilterIndex,
    /// Entities that never occur in the training split.
    pub unseen_in_train: usize,
}

impl TripleStore {
    /// Assigns ids by first appearance over train, valid and test, in that
    /// order. Duplicates stay in the splits and collapse in the filter index.
    pub fn build(train: &[RawTriple], valid: &[RawTriple], test: &[RawTriple]) -> Self {
        let mut entities = Vocab::default();
        let mut relations = Vocab::default();
        let mut encode = |raws: &[RawTriple]| -> Vec<Triple> {
            raws.iter()
                .map(|r| {
                    let head = entities.intern(&r.head);
                    let rel = relations.intern(&r.rel);
                    let tail = entities.intern(&r.tail);
                    Triple { head, rel, tail }
                })
                .collect()
        };
        let train = encode(train);
        let valid = encode(valid);
        let test = encode(test);

        let mut seen = alloc::vec![false; entities.len()];
        for t in &train {
            seen[t.head as usize] = true;
            seen[t.tail as usize] = true;
        }
        let unseen_in_train = seen.iter().filter(|s| !**s).count();
        if unseen_in_train > 0 {
            log::warn!("{unseen_in_train} entities appear only in valid/test");
        }
        let filter = train.iter().chain(&valid).chain(&test).copied().collect();
        Self {
            entities,
            relations,
            train,
            valid,
            test,
            filter,
            unseen_in_train,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn split(&self, s: Split) -> &[Triple] {
        match s {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn all_triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.train.iter().chain(&self.valid).chain(&self.test).copied()
    }

    pub fn encode(&self, raw: &RawTriple) -> Result<Triple> {
        Ok(Triple {
            head: self.entity_id(&raw.head)?,
            rel: self.relation_id(&raw.rel)?,
            tail: self.entity_id(&raw.tail)?,
        })
    }

    pub fn decode(&self, t: Triple) -> Option<RawTriple> {
        Some(RawTriple {
            head: self.entities.name(t.head)?.to_string(),
            rel: self.relations.name(t.rel)?.to_string(),
            tail: self.entities.name(t.tail)?.to_string(),
        })
    }

    pub fn entity_id(&self, name: &str) -> Result<u32> {
        self.entities.id(name).ok_or_else(|| Error::UnknownName {
            kind: "entity",
            name: name.to_string(),
        })
    }

    pub fn relation_id(&self, name: &str) -> Result<u32> {
        self.relations.id(name).ok_or_else(|| Error::UnknownName {
            kind: "relation",
            name: name.to_string(),
        })
    }

    /// Number of training triples touching each entity, either end.
    pub fn train_degrees(&self) -> Vec<usize> {
        let mut deg = alloc::vec![0; self.num_entities()];
        for t in &self.train {
            deg[t.head as usize] += 1;
            deg[t.tail as usize] += 1;
        }
        deg
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            entities: self.num_entities(),
            relations: self.num_relations(),
            train: self.train.len(),
            valid: self.valid.len(),
            test: self.test.len(),
        }
    }
}

/// Entity/relation/split counts in the usual benchmark summary form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetStats {
    pub entities: usize,
    pub relations: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl DatasetStats {
    /// Published counts for the standard benchmarks.
    pub fn reference(name: &str) -> Option<Self> {
        let s = |entities, relations, train, valid, test| DatasetStats {
            entities,
            relations,
            train,
            valid,
            test,
        };
        match name.to_ascii_lowercase().as_str() {
            "fb15k-237" | "fb15k237" | "fb15k" => Some(s(14_541, 237, 272_114, 17_534, 20_465)),
            "wn18rr" | "wordnet" => Some(s(40_943, 11, 86_836, 3_033, 3_133)),
            "hetionet" | "hetionet-small" => Some(s(12_733, 4, 124_543, 15_566, 15_567)),
            _ => None,
        }
    }

    /// Field names whose counts differ from `expected`.
    pub fn mismatches(&self, expected: &DatasetStats) -> Vec<&'static str> {
        [
            ("entities", self.entities, expected.entities),
            ("relations", self.relations, expected.relations),
            ("train", self.train, expected.train),
            ("valid", self.valid, expected.valid),
            ("test", self.test, expected.test),
        ]
        .into_iter()
        .filter(|(_, a, b)| a != b)
        .map(|(n, _, _)| n)
        .collect()
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>6} {:>10} {:>8} {:>8}",
            "entities", "rels", "train", "valid", "test"
        )?;
        write!(
            f,
            "{:>10} {:>6} {:>10} {:>8} {:>8}",
            self.entities, self.relations, self.train, self.valid, self.test
        )
    }
}

/// Fixed candidate tails per `(head, relation)`, all lists the same length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NegativesTable {
    lists: BTreeMap<(u32, u32), Vec<u32>>,
}

impl NegativesTable {
    pub fn insert(&mut self, head: u32, rel: u32, negatives: Vec<u32>) -> Result<()> {
        if let Some(len) = self.list_len() {
            if negatives.len() != len {
                return Err(Error::Validation(format!(
                    "ragged negatives: ({head}, {rel}) has {} entries, expected {len}",
                    negatives.len()
                )));
            }
        }
        self.lists.insert((head, rel), negatives);
        Ok(())
    }

    pub fn get(&self, head: u32, rel: u32) -> Option<&[u32]> {
        self.lists.get(&(head, rel)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Common list length, `None` when empty.
    pub fn list_len(&self) -> Option<usize> {
        self.lists.values().next().map(Vec::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), &[u32])> {
        self.lists.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Parses `head<TAB>relation<TAB>neg1,neg2,...` lines against `store`.
    pub fn parse(text: &str, store: &TripleStore) -> Result<Self> {
        let mut table = NegativesTable::default();
        let mut true_tail_hits = 0usize;
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::UnknownName { kind, name } => Error::Parse {
                    line: i + 1,
                    msg: format!("unknown {kind} `{name}`"),
                },
                other => other,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            }
            let head = store.entity_id(cols[0]).map_err(at)?;
            let rel = store.relation_id(cols[1]).map_err(at)?;
            let negs = cols[2]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|n| store.entity_id(n).map_err(at))
                .collect::<Result<Vec<u32>>>()?;
            if let Some(known) = store.filter.tails(head, rel) {
                true_tail_hits += negs.iter().filter(|n| known.contains(n)).count();
            }
            table.insert(head, rel, negs).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("line {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        if true_tail_hits > 0 {
            log::warn!("{true_tail_hits} fixed negatives are known true tails");
        }
        Ok(table)
    }
}
