//! Gold profile against a fresh run of the same items.

use std::collections::BTreeMap;
use std::fmt;

use grammarkit_core::parser::ParseStatus;
use grammarkit_core::semantics::{equivalent, Mrs};
use serde::{Deserialize, Serialize};

use crate::profile::{Profile, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    GoldPreserved,
    GoldLost,
    CoverageGained,
    CoverageLost,
    StillNoParse,
    RejectPreserved,
    RejectViolated,
    Unverified,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::GoldPreserved,
        Category::GoldLost,
        Category::CoverageGained,
        Category::CoverageLost,
        Category::StillNoParse,
        Category::RejectPreserved,
        Category::RejectViolated,
        Category::Unverified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::GoldPreserved => "gold-preserved",
            Category::GoldLost => "gold-lost",
            Category::CoverageGained => "coverage-gained",
            Category::CoverageLost => "coverage-lost",
            Category::StillNoParse => "still-no-parse",
            Category::RejectPreserved => "reject-preserved",
            Category::RejectViolated => "reject-violated",
            Category::Unverified => "unverified",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(self, Category::GoldLost | Category::RejectViolated)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ItemComparison {
    pub item_id: u32,
    pub category: Category,
    pub gold_status: ParseStatus,
    pub new_status: ParseStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub items: Vec<ItemComparison>,
    pub counts: BTreeMap<Category, usize>,
}

impl ComparisonReport {
    pub fn has_regressions(&self) -> bool {
        self.items.iter().any(|i| i.category.is_regression())
    }

    pub fn category(&self, id: u32) -> Option<Category> {
        self.items.iter().find(|i| i.item_id == id).map(|i| i.category)
    }

    pub fn with_category(&self, c: Category) -> Vec<u32> {
        self.items.iter().filter(|i| i.category == c).map(|i| i.item_id).collect()
    }
}

/// One `id category` line per item, then the non-zero counts.
impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            writeln!(f, "{}\t{}", i.item_id, i.category)?;
        }
        let counts: Vec<String> = self.counts.iter().map(|(c, n)| format!("{c} {n}")).collect();
        writeln!(f, "# {}", counts.join("  "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("item {0} is only in the gold profile")]
    MissingInNew(u32),
    #[error("item {0} is only in the new profile")]
    MissingInGold(u32),
    #[error("item {id} has different text: {gold:?} vs {new:?}")]
    TextMismatch { id: u32, gold: String, new: String },
    #[error("item {id}: stored MRS does not parse: {message}")]
    BadMrs { id: u32, message: String },
}

fn mrss(p: &Profile, id: u32) -> Result<Vec<Mrs>, CompareError> {
    p.readings(id)
        .iter()
        .map(|r| r.mrs.parse::<Mrs>().map_err(|e| CompareError::BadMrs { id, message: e.to_string() }))
        .collect()
}

/// Classifies every item. A rejected item stays rejected as long as the new
/// run produces no reading outside the gold profile's own readings for it,
/// so comparing a profile with itself never reports a regression.
pub fn compare_profiles(gold: &Profile, new: &Profile) -> Result<ComparisonReport, CompareError> {
    for it in &new.items {
        if gold.item(it.id).is_none() {
            return Err(CompareError::MissingInGold(it.id));
        }
    }
    let mut items = Vec::new();
    for g in &gold.items {
        let n = new.item(g.id).ok_or(CompareError::MissingInNew(g.id))?;
        if n.text != g.text {
            return Err(CompareError::TextMismatch { id: g.id, gold: g.text.clone(), new: n.text.clone() });
        }
        let gold_status = gold.status(g.id).unwrap_or(ParseStatus::NoParse);
        let new_status = new.status(g.id).unwrap_or(ParseStatus::NoParse);
        let new_mrs = mrss(new, g.id)?;
        let category = match gold.verdict(g.id) {
            Verdict::Gold { reading } => {
                let target = &mrss(gold, g.id)?[reading];
                if new_mrs.iter().any(|m| equivalent(m, target)) {
                    Category::GoldPreserved
                } else {
                    Category::GoldLost
                }
            }
            Verdict::RejectAll => {
                let old = mrss(gold, g.id)?;
                if new_mrs.iter().all(|m| old.iter().any(|o| equivalent(m, o))) {
                    Category::RejectPreserved
                } else {
                    Category::RejectViolated
                }
            }
            Verdict::Unverified => {
                let was = gold_status == ParseStatus::Parsed;
                let is = new_status == ParseStatus::Parsed;
                match (was, is) {
                    (false, true) => Category::CoverageGained,
                    (true, false) => Category::CoverageLost,
                    (false, false) => Category::StillNoParse,
                    (true, true) => Category::Unverified,
                }
            }
        };
        items.push(ItemComparison { item_id: g.id, category, gold_status, new_status });
    }
    let mut counts = BTreeMap::new();
    for i in &items {
        *counts.entry(i.category).or_insert(0) += 1;
    }
    Ok(ComparisonReport { items, counts })
}
