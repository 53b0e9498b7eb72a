use std::collections::{BTreeMap, HashMap};

use grammarkit_core::grammar::Grammar;
use grammarkit_core::morpho::analyze;
use grammarkit_core::parser::{parse, ParserLimits};
use grammarkit_core::semantics::{
    canonicalize, check_wellformed, equivalent, extract_mrs, to_dmrs, ExtractError, Mrs, PostLabel, Sort,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");

fn load(flags: &[(&str, bool)]) -> Grammar {
    let o: BTreeMap<String, bool> = flags.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Grammar::load_with_options(format!("{ROOT}/grammars/esfrag"), &o).unwrap()
}

fn suite_sentences() -> Vec<String> {
    let mut out = Vec::new();
    for f in ["phenomena.tsv", "learner.tsv"] {
        let src = std::fs::read_to_string(format!("{ROOT}/suites/{f}")).unwrap();
        out.extend(src.lines().filter(|l| !l.starts_with('#')).map(|l| l.split('\t').nth(2).unwrap().to_string()));
    }
    out
}

fn mrss(g: &Grammar, s: &str) -> Vec<Mrs> {
    let o = parse(g, &analyze(g.morph(), s), ParserLimits::default());
    o.forest.roots.iter().map(|&r| extract_mrs(g, &o.forest.edges[r].fs).unwrap()).collect()
}

fn rename(m: &Mrs, rng: &mut StdRng) -> Mrs {
    let mut keys: Vec<(Sort, u32)> = m.occurrences().iter().map(|v| v.key()).collect();
    keys.sort();
    keys.dedup();
    let mut fresh: Vec<u32> = (100..100 + keys.len() as u32).collect();
    fresh.shuffle(rng);
    let map: HashMap<_, _> = keys.into_iter().zip(fresh).collect();
    let mut out = m.map_vars(|v| {
        let mut v = v.clone();
        v.index = map[&v.key()];
        v
    });
    out.eps.shuffle(rng);
    out.hcons.shuffle(rng);
    out
}

#[test]
fn every_suite_reading_is_wellformed_and_canonical() {
    let mut rng = StdRng::seed_from_u64(42);
    let mut seen = 0;
    for g in [load(&[]), load(&[("depictive", false)]), load(&[("querer_ldd", true)])] {
        for s in suite_sentences() {
            for m in mrss(&g, &s) {
                seen += 1;
                let report = check_wellformed(&m);
                assert!(report.is_ok(), "{s}: {report}");
                assert_eq!(to_dmrs(&m).unwrap().nodes.len(), m.eps.len());
                let c = canonicalize(&m);
                for _ in 0..100 {
                    assert_eq!(canonicalize(&rename(&m, &mut rng)), c, "{s}");
                }
                let back: Mrs = c.parse().unwrap();
                assert_eq!(canonicalize(&back), c);
                assert_eq!(back.to_string(), c);
            }
        }
    }
    assert!(seen > 60);
}

#[test]
fn copula_matches_expected_file() {
    let g = load(&[]);
    let expected: Mrs = std::fs::read_to_string(format!("{ROOT}/crates/core/tests/data/mis-abuelos-son-famosos.mrs"))
        .unwrap()
        .parse()
        .unwrap();
    let got = mrss(&g, "Mis abuelos son famosos.");
    assert_eq!(got.len(), 1);
    assert!(equivalent(&got[0], &expected), "{}", got[0]);
    let ser = got[0].eps.iter().find(|e| e.predicate == "_ser_v").unwrap();
    let abuelo = got[0].eps.iter().find(|e| e.predicate == "_abuelo_n").unwrap();
    assert_eq!(ser.arg("ARG1").unwrap().key(), abuelo.arg("ARG0").unwrap().key());
    let d = to_dmrs(&got[0]).unwrap();
    assert!(d.links.iter().any(|l| l.role == "ARG1" && l.post == PostLabel::Neq));
    assert!(d.links.iter().any(|l| l.role == "RSTR" && l.post == PostLabel::H));
}

#[test]
fn depictive_shares_the_subject() {
    let g = load(&[]);
    let got = mrss(&g, "Ellas hacen música juntas.");
    assert_eq!(got.len(), 1);
    let m = &got[0];
    let main = m.eps.iter().find(|e| e.predicate == "_hacer_v").unwrap();
    let dep = m.eps.iter().find(|e| e.predicate == "_junto_a").unwrap();
    assert_eq!(dep.arg("ARG1").unwrap().key(), main.arg("ARG1").unwrap().key());
    assert_eq!(main.arg("ARG0").unwrap().key(), m.index.key());
}

#[test]
fn attachments_differ_semantically() {
    let g = load(&[]);
    let got = mrss(&g, "Ellas cantan canciones juntas.");
    assert_eq!(got.len(), 2);
    assert!(!equivalent(&got[0], &got[1]));
    // Equivalence behaves as an equivalence relation on fixture MRSs.
    let mut rng = StdRng::seed_from_u64(3);
    let all: Vec<Mrs> = got.iter().flat_map(|m| [m.clone(), rename(m, &mut rng)]).collect();
    for a in &all {
        assert!(equivalent(a, a));
        for b in &all {
            assert_eq!(equivalent(a, b), equivalent(b, a));
            for c in &all {
                if equivalent(a, b) && equivalent(b, c) {
                    assert!(equivalent(a, c));
                }
            }
        }
    }
}

#[test]
fn non_root_edges_are_refused() {
    let g = load(&[]);
    let o = parse(&g, &analyze(g.morph(), "Mis abuelos son famosos."), ParserLimits::default());
    assert!(matches!(extract_mrs(&g, &o.forest.edges[0].fs), Err(ExtractError::NotRoot)));
}
