//! A chart-free reference parser and derivation replay.

use super::{apply_rule, lexical_tree, DerivationTree};
use crate::grammar::Grammar;
use crate::morpho::SentenceLattice;
use crate::tfs::FeatureStructure;

/// Longer inputs are refused; the search is exponential.
pub const ORACLE_MAX_TOKENS: usize = 8;

struct Item {
    tree: DerivationTree,
    fs: FeatureStructure,
    chain: Vec<usize>,
}

/// Every derivation of the whole input that satisfies a root condition,
/// found by exhaustive search without sharing any work. Sorted and
/// deduplicated. `None` when the input is longer than
/// [`ORACLE_MAX_TOKENS`] or has unanalyzed tokens.
pub fn oracle_parse(g: &Grammar, lattice: &SentenceLattice) -> Option<Vec<DerivationTree>> {
    let n = lattice.analyses.len();
    if n > ORACLE_MAX_TOKENS || !lattice.failures.is_empty() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let mut out: Vec<DerivationTree> =
        derive(g, lattice, 0, n).into_iter().filter(|i| g.satisfies_root(&i.fs)).map(|i| i.tree).collect();
    out.sort();
    out.dedup();
    Some(out)
}

fn derive(g: &Grammar, lattice: &SentenceLattice, i: usize, j: usize) -> Vec<Item> {
    let mut items = Vec::new();
    if j == i + 1 {
        for (ri, reading) in lattice.analyses[i].readings.iter().enumerate() {
            for la in g.lexical_analyses(&reading.lemma, &reading.tag).unwrap_or_default() {
                let tree = lexical_tree(g, lattice, i, ri, la.entry, &la.rules);
                items.push(Item { tree, fs: la.fs, chain: Vec::new() });
            }
        }
    }
    for k in i + 1..j {
        let left = derive(g, lattice, i, k);
        let right = derive(g, lattice, k, j);
        for rule in g.rules() {
            if rule.arity() != 2 {
                continue;
            }
            for l in &left {
                for r in &right {
                    if let Some(fs) = apply_rule(g, rule, &[&l.fs, &r.fs]) {
                        let tree = DerivationTree::node(rule.name.clone(), vec![l.tree.clone(), r.tree.clone()]);
                        items.push(Item { tree, fs, chain: Vec::new() });
                    }
                }
            }
        }
    }
    let mut idx = 0;
    while idx < items.len() {
        for (ri, rule) in g.rules().iter().enumerate() {
            if rule.arity() != 1 || items[idx].chain.contains(&ri) {
                continue;
            }
            if let Some(fs) = apply_rule(g, rule, &[&items[idx].fs]) {
                let tree = DerivationTree::node(rule.name.clone(), vec![items[idx].tree.clone()]);
                let mut chain = items[idx].chain.clone();
                chain.push(ri);
                items.push(Item { tree, fs, chain });
            }
        }
        idx += 1;
    }
    items
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("entry `{entry}` does not have lemma `{lemma}`")]
    LemmaMismatch { entry: String, lemma: String },
    #[error("`{label}` takes {expected} daughters, got {got}")]
    Arity { label: String, expected: usize, got: usize },
    #[error("`{0}` does not apply to its daughters")]
    Failed(String),
}

/// Rebuilds the structure a derivation describes, applying each rule by
/// name. Labels are looked up as lexical entries (over a leaf), then
/// lexical rules, then phrase rules.
pub fn replay(g: &Grammar, tree: &DerivationTree) -> Result<FeatureStructure, ReplayError> {
    let (label, children) = match tree {
        DerivationTree::Leaf { surface, .. } => return Err(ReplayError::UnknownLabel(surface.clone())),
        DerivationTree::Node { label, children } => (label, children),
    };
    if let [DerivationTree::Leaf { lemma, .. }] = children.as_slice() {
        let entry =
            g.lexicon().iter().find(|e| &e.name == label).ok_or_else(|| ReplayError::UnknownLabel(label.clone()))?;
        if &entry.lemma != lemma {
            return Err(ReplayError::LemmaMismatch { entry: label.clone(), lemma: lemma.clone() });
        }
        return Ok(entry.fs.clone());
    }
    if let Some(lr) = g.lexical_rules().iter().find(|r| &r.name == label) {
        let [child] = children.as_slice() else {
            return Err(ReplayError::Arity { label: label.clone(), expected: 1, got: children.len() });
        };
        let d = replay(g, child)?;
        return lr.apply(g.hierarchy(), &d).map_err(|_| ReplayError::Failed(label.clone()));
    }
    let rule = g.rules().iter().find(|r| &r.name == label).ok_or_else(|| ReplayError::UnknownLabel(label.clone()))?;
    if rule.arity() != children.len() {
        return Err(ReplayError::Arity { label: label.clone(), expected: rule.arity(), got: children.len() });
    }
    let dtrs = children.iter().map(|c| replay(g, c)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&FeatureStructure> = dtrs.iter().collect();
    apply_rule(g, rule, &refs).ok_or_else(|| ReplayError::Failed(label.clone()))
}
