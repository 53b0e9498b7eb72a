//! Profile records and their directory format: `items.jsonl`,
//! `results.jsonl`, `decisions.jsonl` and `run.json`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use grammarkit_core::grammar::Grammar;
use grammarkit_core::parser::{ParseOutcome, ParseStatus, ParserLimits};
use grammarkit_core::semantics::{canonicalize, extract_mrs};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::lock::ProfileLock;

pub const ITEMS_FILE: &str = "items.jsonl";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const DECISIONS_FILE: &str = "decisions.jsonl";
pub const RUN_FILE: &str = "run.json";

/// Annotator of the rows written when a profile is created.
pub const SYSTEM_ANNOTATOR: &str = "system";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: u32,
    pub text: String,
    pub wf: u8,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResultRecord {
    pub item_id: u32,
    pub reading_index: usize,
    pub derivation: String,
    pub mrs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Gold { reading: usize },
    RejectAll,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Decision {
    pub item_id: u32,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub annotator: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LimitsRecord {
    pub max_edges: usize,
    pub max_readings: usize,
    pub timeout_s: f64,
}

impl From<ParserLimits> for LimitsRecord {
    fn from(l: ParserLimits) -> Self {
        LimitsRecord { max_edges: l.max_edges, max_readings: l.max_readings, timeout_s: l.timeout.as_secs_f64() }
    }
}

/// Per-item parse bookkeeping. `readings` is the full count; `stored` the
/// number kept under the reading cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ItemRun {
    pub item_id: u32,
    pub status: ParseStatus,
    pub readings: usize,
    pub stored: usize,
    pub edges: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunInfo {
    pub grammar_version: String,
    pub options: BTreeMap<String, bool>,
    pub limits: LimitsRecord,
    pub total_ms: u64,
    pub items: Vec<ItemRun>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("duplicate item id {0}")]
    DuplicateItem(u32),
    #[error("{items} items but {outcomes} parse outcomes")]
    OutcomeCount { items: usize, outcomes: usize },
    #[error("unknown item {0}")]
    UnknownItem(u32),
    #[error("item {item} has {available} stored readings; reading {reading} does not exist")]
    ReadingOutOfRange { item: u32, reading: usize, available: usize },
    #[error("{0} already exists (use --force to overwrite)")]
    Exists(PathBuf),
    #[error("profile {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("inconsistent profile: {0}")]
    Integrity(String),
    #[error("item {item}: {message}")]
    Semantics { item: u32, message: String },
}

impl ProfileError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ProfileError::Io { path: path.to_path_buf(), source }
    }
}

/// All records of one profile, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub items: Vec<Item>,
    pub results: Vec<ResultRecord>,
    /// Append-only log; the latest row per item is the active decision.
    pub decisions: Vec<Decision>,
    pub run: RunInfo,
}

impl Profile {
    /// Stores up to `limits.max_readings` readings per item with their
    /// canonical MRS; every item starts unverified.
    pub fn create(
        g: &Grammar,
        items: Vec<Item>,
        outcomes: &[ParseOutcome],
        limits: ParserLimits,
    ) -> Result<Profile, ProfileError> {
        if items.len() != outcomes.len() {
            return Err(ProfileError::OutcomeCount { items: items.len(), outcomes: outcomes.len() });
        }
        let mut ids = HashSet::new();
        for it in &items {
            if !ids.insert(it.id) {
                return Err(ProfileError::DuplicateItem(it.id));
            }
        }
        let mut results = Vec::new();
        let mut runs = Vec::new();
        let mut decisions = Vec::new();
        for (it, o) in items.iter().zip(outcomes) {
            let (trees, _) = o.forest.enumerate_readings(g, limits.max_readings);
            for (k, (tree, &root)) in trees.iter().zip(&o.forest.roots).enumerate() {
                let mrs = extract_mrs(g, &o.forest.edges[root].fs)
                    .map_err(|e| ProfileError::Semantics { item: it.id, message: e.to_string() })?;
                results.push(ResultRecord {
                    item_id: it.id,
                    reading_index: k,
                    derivation: tree.to_string(),
                    mrs: canonicalize(&mrs),
                });
            }
            runs.push(ItemRun {
                item_id: it.id,
                status: o.status,
                readings: o.forest.roots.len(),
                stored: trees.len(),
                edges: o.stats.edges,
                elapsed_ms: o.stats.elapsed_ms,
            });
            decisions.push(Decision {
                item_id: it.id,
                verdict: Verdict::Unverified,
                annotator: SYSTEM_ANNOTATOR.to_string(),
                timestamp: DateTime::UNIX_EPOCH,
            });
        }
        let run = RunInfo {
            grammar_version: g.version().to_string(),
            options: g.options().clone(),
            limits: limits.into(),
            total_ms: runs.iter().map(|r| r.elapsed_ms).sum(),
            items: runs,
        };
        Ok(Profile { items, results, decisions, run })
    }

    pub fn item(&self, id: u32) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn run_for(&self, id: u32) -> Option<&ItemRun> {
        self.run.items.iter().find(|r| r.item_id == id)
    }

    pub fn status(&self, id: u32) -> Option<ParseStatus> {
        self.run_for(id).map(|r| r.status)
    }

    /// Stored readings of an item, by reading index.
    pub fn readings(&self, id: u32) -> Vec<&ResultRecord> {
        let mut r: Vec<&ResultRecord> = self.results.iter().filter(|r| r.item_id == id).collect();
        r.sort_by_key(|r| r.reading_index);
        r
    }

    /// Latest decision per item.
    pub fn active_decisions(&self) -> BTreeMap<u32, &Decision> {
        let mut out = BTreeMap::new();
        for d in &self.decisions {
            out.insert(d.item_id, d);
        }
        out
    }

    pub fn verdict(&self, id: u32) -> Verdict {
        self.decisions.iter().rev().find(|d| d.item_id == id).map(|d| d.verdict.clone()).unwrap_or(Verdict::Unverified)
    }

    /// Validates and appends a decision. Returns `None` when the item's
    /// active verdict is already the same.
    pub fn decide(&mut self, id: u32, verdict: Verdict, annotator: &str) -> Result<Option<Decision>, ProfileError> {
        if self.item(id).is_none() {
            return Err(ProfileError::UnknownItem(id));
        }
        if let Verdict::Gold { reading } = verdict {
            let available = self.readings(id).len();
            if reading >= available {
                return Err(ProfileError::ReadingOutOfRange { item: id, reading, available });
            }
        }
        if self.verdict(id) == verdict {
            return Ok(None);
        }
        let d = Decision { item_id: id, verdict, annotator: annotator.to_string(), timestamp: Utc::now() };
        self.decisions.push(d.clone());
        Ok(Some(d))
    }

    /// Checks ids, dense reading indices and decision references.
    pub fn check(&self) -> Result<(), ProfileError> {
        let bad = |m: String| Err(ProfileError::Integrity(m));
        let mut ids = HashSet::new();
        for it in &self.items {
            if !ids.insert(it.id) {
                return Err(ProfileError::DuplicateItem(it.id));
            }
        }
        let mut per_item: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for r in &self.results {
            if !ids.contains(&r.item_id) {
                return bad(format!("result for unknown item {}", r.item_id));
            }
            per_item.entry(r.item_id).or_default().push(r.reading_index);
        }
        for (id, mut ks) in per_item {
            ks.sort_unstable();
            if ks.iter().enumerate().any(|(i, &k)| i != k) {
                return bad(format!("reading indices of item {id} are not 0..n"));
            }
        }
        for d in &self.decisions {
            if !ids.contains(&d.item_id) {
                return bad(format!("decision for unknown item {}", d.item_id));
            }
            if let Verdict::Gold { reading } = d.verdict {
                if reading >= self.readings(d.item_id).len() {
                    return bad(format!("decision on item {} names missing reading {reading}", d.item_id));
                }
            }
        }
        let run_ids: HashSet<u32> = self.run.items.iter().map(|r| r.item_id).collect();
        if run_ids != ids {
            return bad("run.json does not list exactly the profile's items".into());
        }
        Ok(())
    }

    /// Writes all four files. An existing non-empty directory is only
    /// replaced with `force`.
    pub fn write(&self, dir: &Path, force: bool) -> Result<(), ProfileError> {
        if dir.exists() {
            let non_empty = fs::read_dir(dir).map_err(|e| ProfileError::io(dir, e))?.next().is_some();
            if non_empty && !force {
                return Err(ProfileError::Exists(dir.to_path_buf()));
            }
        }
        fs::create_dir_all(dir).map_err(|e| ProfileError::io(dir, e))?;
        let _lock = ProfileLock::acquire(dir)?;
        write_jsonl(&dir.join(ITEMS_FILE), &self.items)?;
        write_jsonl(&dir.join(RESULTS_FILE), &self.results)?;
        write_jsonl(&dir.join(DECISIONS_FILE), &self.decisions)?;
        let run = serde_json::to_string_pretty(&self.run).expect("run info serializes");
        let path = dir.join(RUN_FILE);
        fs::write(&path, run + "\n").map_err(|e| ProfileError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Profile, ProfileError> {
        if !dir.is_dir() {
            return Err(ProfileError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "no such profile")));
        }
        let path = dir.join(RUN_FILE);
        let src = fs::read_to_string(&path).map_err(|e| ProfileError::io(&path, e))?;
        let run = serde_json::from_str(&src).map_err(|e| ProfileError::Format {
            path: path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let p = Profile {
            items: read_jsonl(&dir.join(ITEMS_FILE))?,
            results: read_jsonl(&dir.join(RESULTS_FILE))?,
            decisions: read_jsonl(&dir.join(DECISIONS_FILE))?,
            run,
        };
        p.check()?;
        Ok(p)
    }
}

/// Records a decision in a profile directory under the writer lock. This is
/// the only path that appends to `decisions.jsonl`.
pub fn record_decision(
    dir: &Path,
    id: u32,
    verdict: Verdict,
    annotator: &str,
) -> Result<Option<Decision>, ProfileError> {
    let _lock = ProfileLock::acquire(dir)?;
    let mut p = Profile::read(dir)?;
    let Some(d) = p.decide(id, verdict, annotator)? else { return Ok(None) };
    let path = dir.join(DECISIONS_FILE);
    let mut f = fs::OpenOptions::new().append(true).open(&path).map_err(|e| ProfileError::io(&path, e))?;
    let line = serde_json::to_string(&d).expect("decision serializes");
    writeln!(f, "{line}").map_err(|e| ProfileError::io(&path, e))?;
    Ok(Some(d))
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), ProfileError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| ProfileError::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, ProfileError> {
    let src = fs::read_to_string(path).map_err(|e| ProfileError::io(path, e))?;
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ProfileError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
