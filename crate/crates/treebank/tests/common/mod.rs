#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use chrono::DateTime;
use grammarkit_core::grammar::Grammar;
use grammarkit_core::parser::{ParseStatus, ParserLimits};
use grammarkit_treebank::{Decision, Item, ItemRun, Profile, ResultRecord, RunInfo, Verdict};

pub fn root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

pub fn grammar_with(options: &[(&str, bool)]) -> Grammar {
    let o: BTreeMap<String, bool> = options.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Grammar::load_with_options(root().join("grammars/esfrag"), &o).unwrap()
}

pub fn grammar() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(|| grammar_with(&[]))
}

/// One synthetic item: id, wf, length, status, reading count, verdict.
#[derive(Debug, Clone)]
pub struct Spec {
    pub id: u32,
    pub wf: u8,
    pub length: usize,
    pub status: ParseStatus,
    pub readings: usize,
    pub verdict: Verdict,
}

/// Builds a profile without parsing anything. MRS strings are
/// placeholders; only metrics-level fields are meaningful.
pub fn synthetic(specs: &[Spec]) -> Profile {
    let mut p = Profile {
        items: vec![],
        results: vec![],
        decisions: vec![],
        run: RunInfo {
            grammar_version: "synthetic".into(),
            options: BTreeMap::new(),
            limits: ParserLimits::default().into(),
            total_ms: 0,
            items: vec![],
        },
    };
    for s in specs {
        p.items.push(Item { id: s.id, text: format!("item {}", s.id), wf: s.wf, length: s.length });
        for k in 0..s.readings {
            p.results.push(ResultRecord {
                item_id: s.id,
                reading_index: k,
                derivation: format!("(r{k} (\"w\" w W))"),
                mrs: format!("[ TOP: h0 INDEX: e1 RELS: < [ _r{k} LBL: h0 ARG0: e1 ] > HCONS: < > ]"),
            });
        }
        p.run.items.push(ItemRun {
            item_id: s.id,
            status: s.status,
            readings: s.readings,
            stored: s.readings,
            edges: 0,
            elapsed_ms: 0,
        });
        p.decisions.push(Decision {
            item_id: s.id,
            verdict: s.verdict.clone(),
            annotator: "test".into(),
            timestamp: DateTime::UNIX_EPOCH,
        });
    }
    p
}
