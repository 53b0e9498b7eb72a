//! Coverage, accuracy and overgeneration of a profile, per sentence length.
//!
//! Length rows cover grammatical items only. Unverified items count against
//! accuracy and are disclosed in `unverified_count`; resource-limit items
//! count as not parsed and show up in `limit_hits`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use grammarkit_core::parser::ParseStatus;
use serde::{Serialize, Serializer};

use crate::profile::{Profile, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Length {
    Tokens(usize),
    All,
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Tokens(n) => s.serialize_u64(*n as u64),
            Length::All => s.serialize_str("ALL"),
        }
    }
}

impl std::fmt::Display for Length {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Length::Tokens(n) => write!(f, "{n}"),
            Length::All => f.write_str("ALL"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricsRow {
    pub length: Length,
    pub n_items: usize,
    pub parsed: usize,
    pub gold: usize,
    pub coverage: f64,
    pub accuracy: f64,
    pub limit_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricsReport {
    /// One row per length in ascending order, then ALL. Empty when the
    /// profile has no grammatical items.
    pub rows: Vec<MetricsRow>,
    /// Parsed share of ungrammatical items; `None` when there are none.
    pub overgeneration: Option<f64>,
    pub ungrammatical: usize,
    pub ungrammatical_parsed: usize,
    /// Mean reading count over parsed grammatical items.
    pub ambiguity_mean: Option<f64>,
    /// Set when some item had more readings than were stored.
    pub ambiguity_capped: bool,
    /// Grammatical items still without a decision.
    pub unverified_count: usize,
}

impl MetricsReport {
    pub fn all(&self) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.length == Length::All)
    }
}

#[derive(Default)]
struct Tally {
    n: usize,
    parsed: usize,
    gold: usize,
    limit: usize,
}

impl Tally {
    fn row(&self, length: Length) -> MetricsRow {
        let ratio = |k: usize| if self.n == 0 { 0.0 } else { k as f64 / self.n as f64 };
        MetricsRow {
            length,
            n_items: self.n,
            parsed: self.parsed,
            gold: self.gold,
            coverage: ratio(self.parsed),
            accuracy: ratio(self.gold),
            limit_hits: self.limit,
        }
    }
}

pub fn compute_metrics(p: &Profile) -> MetricsReport {
    let mut buckets: BTreeMap<usize, Tally> = BTreeMap::new();
    let mut total = Tally::default();
    let (mut bad, mut bad_parsed) = (0, 0);
    let (mut readings, mut capped) = (Vec::new(), false);
    let mut unverified = 0;
    for it in &p.items {
        let run = p.run_for(it.id);
        let parsed = run.is_some_and(|r| r.status == ParseStatus::Parsed);
        if it.wf == 0 {
            bad += 1;
            bad_parsed += usize::from(parsed);
            continue;
        }
        let verdict = p.verdict(it.id);
        let gold = parsed && matches!(verdict, Verdict::Gold { .. });
        let limit = run.is_some_and(|r| r.status == ParseStatus::ResourceLimit);
        unverified += usize::from(verdict == Verdict::Unverified);
        if let Some(r) = run.filter(|_| parsed) {
            readings.push(r.readings);
            capped |= r.stored < r.readings;
        }
        for t in [buckets.entry(it.length).or_default(), &mut total] {
            t.n += 1;
            t.parsed += usize::from(parsed);
            t.gold += usize::from(gold);
            t.limit += usize::from(limit);
        }
    }
    let mut rows: Vec<MetricsRow> = buckets.iter().map(|(&l, t)| t.row(Length::Tokens(l))).collect();
    if total.n > 0 {
        rows.push(total.row(Length::All));
    }
    MetricsReport {
        rows,
        overgeneration: (bad > 0).then(|| bad_parsed as f64 / bad as f64),
        ungrammatical: bad,
        ungrammatical_parsed: bad_parsed,
        ambiguity_mean: (!readings.is_empty()).then(|| readings.iter().sum::<usize>() as f64 / readings.len() as f64),
        ambiguity_capped: capped,
        unverified_count: unverified,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Records,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "records" => Ok(ReportFormat::Records),
            _ => Err(format!("unknown format `{s}` (expected table or records)")),
        }
    }
}

const HEADER: [&str; 5] = ["length", "items", "coverage", "accuracy", "limit-hits"];

pub fn render_report(r: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(r),
        ReportFormat::Records => render_records(r),
    }
}

/// Header, then rows right-aligned to the widest cell of each column,
/// columns two spaces apart, then the summary lines.
fn render_table(r: &MetricsReport) -> String {
    let mut out = HEADER.join("  ");
    out.push('\n');
    let cells: Vec<[String; 5]> = r
        .rows
        .iter()
        .map(|row| {
            [
                row.length.to_string(),
                row.n_items.to_string(),
                format!("{:.2}", row.coverage),
                format!("{:.2}", row.accuracy),
                row.limit_hits.to_string(),
            ]
        })
        .collect();
    let mut widths = [0; 5];
    for c in &cells {
        for (w, s) in widths.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    for c in &cells {
        let line: Vec<String> = c.iter().zip(widths).map(|(s, w)| format!("{s:>w$}")).collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    let mut summary = Vec::new();
    if let Some(all) = r.all() {
        summary.push(format!("coverage {:.2}", all.coverage));
        summary.push(format!("accuracy {:.2}", all.accuracy));
    }
    if let Some(o) = r.overgeneration {
        summary.push(format!("overgeneration {o:.2}"));
    }
    if summary.is_empty() {
        return out;
    }
    out.push('\n');
    out.push_str(&summary.join("  "));
    out.push('\n');
    if r.all().is_some() {
        match r.ambiguity_mean {
            Some(a) => write!(out, "ambiguity {a:.2}{}", if r.ambiguity_capped { " (capped)" } else { "" }).unwrap(),
            None => out.push_str("ambiguity -"),
        }
        writeln!(out, "  unverified {}", r.unverified_count).unwrap();
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct Summary {
    summary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    overgeneration: Option<f64>,
    ambiguity_mean: Option<f64>,
    ambiguity_capped: bool,
    unverified_count: usize,
}

fn render_records(r: &MetricsReport) -> String {
    let mut out = String::new();
    for row in &r.rows {
        out.push_str(&serde_json::to_string(row).expect("row serializes"));
        out.push('\n');
    }
    let s = Summary {
        summary: true,
        overgeneration: r.overgeneration,
        ambiguity_mean: r.ambiguity_mean,
        ambiguity_capped: r.ambiguity_capped,
        unverified_count: r.unverified_count,
    };
    out.push_str(&serde_json::to_string(&s).expect("summary serializes"));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = MetricsReport {
            rows: vec![],
            overgeneration: None,
            ungrammatical: 0,
            ungrammatical_parsed: 0,
            ambiguity_mean: None,
            ambiguity_capped: false,
            unverified_count: 0,
        };
        assert_eq!(render_report(&r, ReportFormat::Table), "length  items  coverage  accuracy  limit-hits\n");
    }

    #[test]
    fn length_serializes_as_number_or_all() {
        assert_eq!(serde_json::to_string(&Length::Tokens(4)).unwrap(), "4");
        assert_eq!(serde_json::to_string(&Length::All).unwrap(), "\"ALL\"");
    }
}
