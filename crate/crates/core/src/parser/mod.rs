//! Bottom-up chart parsing over a morphological lattice.

mod derivation;
mod oracle;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use derivation::{DerivationSyntaxError, DerivationTree};
pub use oracle::{oracle_parse, replay, ReplayError, ORACLE_MAX_TOKENS};

use crate::grammar::{Grammar, PhraseRule};
use crate::morpho::SentenceLattice;
use crate::tfs::FeatureStructure;

pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParserLimits {
    pub max_edges: usize,
    /// Readings kept per item when results are stored.
    pub max_readings: usize,
    pub timeout: Duration,
}

impl Default for ParserLimits {
    fn default() -> Self {
        ParserLimits { max_edges: 20_000, max_readings: 100, timeout: Duration::from_secs(10) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseStatus {
    Parsed,
    NoParse,
    LexicalGap,
    ResourceLimit,
}

impl ParseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseStatus::Parsed => "parsed",
            ParseStatus::NoParse => "no-parse",
            ParseStatus::LexicalGap => "lexical-gap",
            ParseStatus::ResourceLimit => "resource-limit",
        }
    }
}

impl fmt::Display for ParseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeSource {
    /// A lexical entry for token `token` via reading `reading`, with the
    /// lexical rules applied innermost first.
    Lexical {
        token: usize,
        reading: usize,
        entry: usize,
        rules: Vec<usize>,
    },
    Rule {
        rule: usize,
        daughters: Vec<EdgeId>,
    },
}

#[derive(Debug, Clone)]
pub struct ChartEdge {
    pub id: EdgeId,
    pub start: usize,
    pub end: usize,
    pub fs: FeatureStructure,
    pub source: EdgeSource,
    /// Unary rules stacked directly above the last lexical or binary edge.
    unary_chain: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ParseForest {
    pub lattice: SentenceLattice,
    pub edges: Vec<ChartEdge>,
    /// Full-span edges satisfying a root condition, in edge order.
    pub roots: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseStats {
    pub edges: usize,
    pub readings: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub status: ParseStatus,
    pub forest: ParseForest,
    pub stats: ParseStats,
}

/// Applies `rule` to daughter structures given in surface order.
pub(crate) fn apply_rule(g: &Grammar, rule: &PhraseRule, dtrs: &[&FeatureStructure]) -> Option<FeatureStructure> {
    let h = g.hierarchy();
    // Cheap type check on the daughter roots before copying anything.
    for (path, d) in rule.daughters.iter().zip(dtrs) {
        let n = rule.fs.follow(rule.fs.root(), path)?;
        h.glb(rule.fs.ty(n), d.root_type())?;
    }
    let mut b = g.builder();
    let r = b.embed(&rule.fs);
    for (path, d) in rule.daughters.iter().zip(dtrs) {
        let target = b.follow(r, path)?;
        let dn = b.embed(d);
        b.unify(target, dn).ok()?;
    }
    b.finish_restricted(r, &[g.geometry().args]).ok()
}

struct Chart<'g> {
    g: &'g Grammar,
    limits: ParserLimits,
    started: Instant,
    edges: Vec<ChartEdge>,
    /// Edge ids by `(start, end)`, indexed `start * (n + 1) + end`.
    cells: Vec<Vec<EdgeId>>,
    n: usize,
    exhausted: bool,
}

impl<'g> Chart<'g> {
    fn cell(&self, start: usize, end: usize) -> &[EdgeId] {
        &self.cells[start * (self.n + 1) + end]
    }

    fn over_budget(&mut self) -> bool {
        if self.edges.len() >= self.limits.max_edges || self.started.elapsed() > self.limits.timeout {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn add(
        &mut self,
        start: usize,
        end: usize,
        fs: FeatureStructure,
        source: EdgeSource,
        unary_chain: Vec<usize>,
    ) -> bool {
        if self.over_budget() {
            return false;
        }
        let id = self.edges.len();
        self.edges.push(ChartEdge { id, start, end, fs, source, unary_chain });
        self.cells[start * (self.n + 1) + end].push(id);
        true
    }

    /// Applies unary rules to every edge of a cell, including edges the
    /// closure itself adds. A unary rule occurs at most once per chain.
    fn unary_closure(&mut self, start: usize, end: usize) {
        let g = self.g;
        let mut i = 0;
        while i < self.cell(start, end).len() {
            let e = self.cell(start, end)[i];
            i += 1;
            for (ri, rule) in g.rules().iter().enumerate() {
                if rule.arity() != 1 || self.edges[e].unary_chain.contains(&ri) {
                    continue;
                }
                if let Some(fs) = apply_rule(g, rule, &[&self.edges[e].fs]) {
                    let mut chain = self.edges[e].unary_chain.clone();
                    chain.push(ri);
                    if !self.add(start, end, fs, EdgeSource::Rule { rule: ri, daughters: vec![e] }, chain) {
                        return;
                    }
                }
            }
        }
    }

    fn binary(&mut self, start: usize, end: usize) {
        let g = self.g;
        for split in start + 1..end {
            for (ri, rule) in g.rules().iter().enumerate() {
                if rule.arity() != 2 {
                    continue;
                }
                let lefts = self.cell(start, split).to_vec();
                let rights = self.cell(split, end).to_vec();
                for &l in &lefts {
                    for &r in &rights {
                        if self.over_budget() {
                            return;
                        }
                        if let Some(fs) = apply_rule(g, rule, &[&self.edges[l].fs, &self.edges[r].fs]) {
                            self.add(start, end, fs, EdgeSource::Rule { rule: ri, daughters: vec![l, r] }, Vec::new());
                        }
                    }
                }
            }
        }
    }
}

/// Parses a lattice. Every token needs at least one lexical edge, otherwise
/// the outcome is `lexical-gap` with no chart work done.
pub fn parse(g: &Grammar, lattice: &SentenceLattice, limits: ParserLimits) -> ParseOutcome {
    let started = Instant::now();
    let n = lattice.analyses.len();
    let mut chart = Chart {
        g,
        limits,
        started,
        edges: Vec::new(),
        cells: vec![Vec::new(); (n + 1) * (n + 1)],
        n,
        exhausted: false,
    };
    // Lexical analyses are looked up before any edge is added, so a gap is
    // reported as such even under a tight edge limit.
    let mut lexical = Vec::new();
    let mut gap = !lattice.failures.is_empty() || n == 0;
    for (t, a) in lattice.analyses.iter().enumerate() {
        if gap {
            break;
        }
        let before = lexical.len();
        for (ri, reading) in a.readings.iter().enumerate() {
            for la in g.lexical_analyses(&reading.lemma, &reading.tag).unwrap_or_default() {
                lexical.push((t, ri, la));
            }
        }
        gap = lexical.len() == before;
    }
    if !gap {
        for (t, ri, la) in lexical {
            let source = EdgeSource::Lexical { token: t, reading: ri, entry: la.entry, rules: la.rules };
            if !chart.add(t, t + 1, la.fs, source, Vec::new()) {
                break;
            }
        }
    }
    if gap {
        let forest = ParseForest { lattice: lattice.clone(), edges: chart.edges, roots: Vec::new() };
        let stats =
            ParseStats { edges: forest.edges.len(), readings: 0, elapsed_ms: started.elapsed().as_millis() as u64 };
        return ParseOutcome { status: ParseStatus::LexicalGap, forest, stats };
    }
    'spans: for len in 1..=n {
        if chart.exhausted {
            break;
        }
        for start in 0..=n - len {
            let end = start + len;
            if len > 1 {
                chart.binary(start, end);
            }
            chart.unary_closure(start, end);
            if chart.exhausted {
                break 'spans;
            }
        }
    }
    let exhausted = chart.exhausted;
    let roots: Vec<EdgeId> = if exhausted {
        Vec::new()
    } else {
        chart.cell(0, n).iter().copied().filter(|&e| g.satisfies_root(&chart.edges[e].fs)).collect()
    };
    let status = if exhausted {
        ParseStatus::ResourceLimit
    } else if roots.is_empty() {
        ParseStatus::NoParse
    } else {
        ParseStatus::Parsed
    };
    let forest = ParseForest { lattice: lattice.clone(), edges: chart.edges, roots };
    let stats = ParseStats {
        edges: forest.edges.len(),
        readings: forest.roots.len(),
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    ParseOutcome { status, forest, stats }
}

/// Derivation of a lexical edge: the entry over the token, wrapped in one
/// unary node per lexical rule.
pub(crate) fn lexical_tree(
    g: &Grammar,
    lattice: &SentenceLattice,
    token: usize,
    reading: usize,
    entry: usize,
    rules: &[usize],
) -> DerivationTree {
    let a = &lattice.analyses[token];
    let r = &a.readings[reading];
    let leaf = DerivationTree::Leaf { surface: a.token.surface.clone(), lemma: r.lemma.clone(), tag: r.tag.clone() };
    let mut t = DerivationTree::node(g.lexicon()[entry].name.clone(), vec![leaf]);
    for &lr in rules {
        t = DerivationTree::node(g.lexical_rules()[lr].name.clone(), vec![t]);
    }
    t
}

impl ParseForest {
    /// Derivation of a single edge.
    pub fn derivation(&self, g: &Grammar, e: EdgeId) -> DerivationTree {
        let edge = &self.edges[e];
        match &edge.source {
            EdgeSource::Lexical { token, reading, entry, rules } => {
                lexical_tree(g, &self.lattice, *token, *reading, *entry, rules)
            }
            EdgeSource::Rule { rule, daughters } => DerivationTree::node(
                g.rules()[*rule].name.clone(),
                daughters.iter().map(|&d| self.derivation(g, d)).collect(),
            ),
        }
    }

    /// Up to `cap` readings in root order; the flag is set when more exist.
    pub fn enumerate_readings(&self, g: &Grammar, cap: usize) -> (Vec<DerivationTree>, bool) {
        let out = self.roots.iter().take(cap).map(|&e| self.derivation(g, e)).collect();
        (out, self.roots.len() > cap)
    }

    /// Line-per-edge dump: `id start end lex entry rules...` or
    /// `id start end rule name daughters...`, then a `roots` line.
    pub fn serialize(&self, g: &Grammar) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{} {} {} ", e.id, e.start, e.end));
            match &e.source {
                EdgeSource::Lexical { entry, rules, .. } => {
                    out.push_str("lex ");
                    out.push_str(&g.lexicon()[*entry].name);
                    for &r in rules {
                        out.push(' ');
                        out.push_str(&g.lexical_rules()[r].name);
                    }
                }
                EdgeSource::Rule { rule, daughters } => {
                    out.push_str("rule ");
                    out.push_str(&g.rules()[*rule].name);
                    for d in daughters {
                        out.push_str(&format!(" {d}"));
                    }
                }
            }
            out.push('\n');
        }
        out.push_str("roots");
        for r in &self.roots {
            out.push_str(&format!(" {r}"));
        }
        out.push('\n');
        out
    }
}
