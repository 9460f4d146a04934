//! List membership data: which members each curated list holds, plus the
//! list's name and description, and optional ground-truth categories.
//!
//! On disk a corpus is two files:
//!
//! - `memberships.tsv`: `list_id<TAB>user_id`, UTF-8, no header
//! - `lists.jsonl`: one `{"id", "name", "description"}` object per line
//!
//! Ground truth is `category<TAB>user_id`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListRecord {
    pub id: String,
    pub name: String,
    pub description: String,
}

impl ListRecord {
    pub fn new(id: impl Into<String>, name: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            description: description.into(),
        }
    }

    fn bare(id: &str) -> Self {
        Self::new(id, "", "")
    }
}

/// Bipartite record of lists and their members.
///
/// `memberships` and `user_index` are kept as exact transposes; every list
/// id has a [`ListRecord`], possibly with empty metadata. All maps are
/// ordered, so iteration order is the lexicographic order of the ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MembershipCorpus {
    lists: BTreeMap<String, ListRecord>,
    memberships: BTreeMap<String, BTreeSet<String>>,
    user_index: BTreeMap<String, BTreeSet<String>>,
}

impl MembershipCorpus {
    /// Assemble a corpus from metadata records and `(list, user)` rows.
    ///
    /// Duplicate rows collapse. Lists that only appear in `rows` get empty
    /// metadata; lists that only appear in `records` keep an empty member set.
    pub fn from_parts<I, S>(records: Vec<ListRecord>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut corpus = MembershipCorpus::default();
        for record in records {
            if record.id.is_empty() {
                return Err(Error::Validation("list record with empty id".into()));
            }
            if corpus.lists.contains_key(&record.id) {
                return Err(Error::Validation(format!("duplicate list id `{}` in metadata", record.id)));
            }
            corpus.memberships.entry(record.id.clone()).or_default();
            corpus.lists.insert(record.id.clone(), record);
        }
        for (list, user) in rows {
            let (list, user) = (list.into(), user.into());
            if list.is_empty() || user.is_empty() {
                return Err(Error::Validation("empty list or user id in membership row".into()));
            }
            corpus.insert(list, user);
        }
        Ok(corpus)
    }

    fn insert(&mut self, list: String, user: String) {
        if !self.lists.contains_key(&list) {
            self.lists.insert(list.clone(), ListRecord::bare(&list));
        }
        self.user_index.entry(user.clone()).or_default().insert(list.clone());
        self.memberships.entry(list).or_default().insert(user);
    }

    /// Number of distinct users assigned to at least one list.
    pub fn n(&self) -> usize {
        self.user_index.len()
    }

    pub fn list_count(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Total number of `(list, user)` records.
    pub fn record_count(&self) -> usize {
        self.memberships.values().map(BTreeSet::len).sum()
    }

    pub fn lists(&self) -> impl Iterator<Item = &ListRecord> {
        self.lists.values()
    }

    pub fn list(&self, id: &str) -> Option<&ListRecord> {
        self.lists.get(id)
    }

    pub fn list_ids(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    pub fn members(&self, list: &str) -> Option<&BTreeSet<String>> {
        self.memberships.get(list)
    }

    pub fn memberships(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.memberships
    }

    pub fn user_index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.user_index
    }

    pub fn lists_of(&self, user: &str) -> Option<&BTreeSet<String>> {
        self.user_index.get(user)
    }

    /// Write the two corpus files.
    pub fn write(&self, memberships_path: &Path, lists_path: &Path) -> Result<()> {
        let mut out = create(memberships_path)?;
        for (list, users) in &self.memberships {
            for user in users {
                writeln!(out, "{list}\t{user}").map_err(|e| Error::io(memberships_path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(memberships_path, e))?;

        let mut out = create(lists_path)?;
        for record in self.lists.values() {
            let line = serde_json::to_string(record).expect("list record serializes");
            writeln!(out, "{line}").map_err(|e| Error::io(lists_path, e))?;
        }
        out.flush().map_err(|e| Error::io(lists_path, e))
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Iterate over the non-blank lines of a UTF-8 text file with 1-based line
/// numbers. Invalid UTF-8 is reported as a parse error on its line.
pub(crate) fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (idx, raw) in BufReader::new(file).split(b'\n').enumerate() {
        let line_no = idx + 1;
        let mut raw = raw.map_err(|e| Error::io(path, e))?;
        if raw.last() == Some(&b'\r') {
            raw.pop();
        }
        let line = String::from_utf8(raw).map_err(|_| Error::parse(path, line_no, "invalid UTF-8"))?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push((line_no, line));
    }
    Ok(lines)
}

/// Parse a two-column TSV file into `(first, second)` pairs.
pub(crate) fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    read_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
                [_, _] => Err(Error::parse(path, line_no, "empty field")),
                _ => Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 2 tab-separated columns, found {}", fields.len()),
                )),
            }
        })
        .collect()
}

/// Load a corpus from `memberships.tsv` and `lists.jsonl`.
pub fn load_corpus(memberships_path: &Path, lists_path: &Path) -> Result<MembershipCorpus> {
    let mut records = Vec::new();
    for (line_no, line) in read_lines(lists_path)? {
        let record: ListRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(lists_path, line_no, e.to_string()))?;
        records.push(record);
    }
    let rows = read_pairs(memberships_path)?;
    MembershipCorpus::from_parts(records, rows)
}

/// External categories used to validate member communities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub categories: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn from_rows<I, S>(rows: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (category, user) in rows {
            categories.entry(category.into()).or_default().insert(user.into());
        }
        Self { categories }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        for (category, users) in &self.categories {
            for user in users {
                writeln!(out, "{category}\t{user}").map_err(|e| Error::io(path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    Ok(GroundTruth::from_rows(read_pairs(path)?))
}

/// Keep lists with at least `min_size` members of which at least
/// `min_core_members` are in `core`. `n` is recomputed from the survivors.
pub fn filter_lists(
    corpus: &MembershipCorpus,
    min_size: usize,
    min_core_members: usize,
    core: &BTreeSet<String>,
) -> MembershipCorpus {
    let mut filtered = MembershipCorpus::default();
    for (id, members) in &corpus.memberships {
        let core_count = members.iter().filter(|u| core.contains(*u)).count();
        if members.len() < min_size || core_count < min_core_members {
            continue;
        }
        filtered.lists.insert(id.clone(), corpus.lists[id].clone());
        filtered.memberships.insert(id.clone(), BTreeSet::new());
        for user in members {
            filtered.insert(id.clone(), user.clone());
        }
    }
    filtered
}

/// Read a set of ids, one per line.
pub fn load_id_set(path: &Path) -> Result<BTreeSet<String>> {
    Ok(read_lines(path)?.into_iter().map(|(_, l)| l.trim().to_string()).collect())
}
