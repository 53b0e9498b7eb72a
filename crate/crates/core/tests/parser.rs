use std::collections::BTreeMap;

use grammarkit_core::grammar::Grammar;
use grammarkit_core::morpho::analyze;
use grammarkit_core::parser::{oracle_parse, parse, replay, DerivationTree, ParseStatus, ParserLimits};

const DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../grammars/esfrag");

fn grammar() -> Grammar {
    Grammar::load(DIR).unwrap()
}

fn with(flag: &str, on: bool) -> Grammar {
    let mut o = BTreeMap::new();
    o.insert(flag.to_string(), on);
    Grammar::load_with_options(DIR, &o).unwrap()
}

fn readings(g: &Grammar, s: &str) -> (ParseStatus, Vec<DerivationTree>) {
    let o = parse(g, &analyze(g.morph(), s), ParserLimits::default());
    let (r, truncated) = o.forest.enumerate_readings(g, 1000);
    assert!(!truncated);
    (o.status, r)
}

#[test]
fn copula_sentence_parses() {
    let g = grammar();
    let (status, r) = readings(&g, "Mis abuelos son famosos.");
    assert_eq!(status, ParseStatus::Parsed);
    assert!(r.iter().any(|t| t.uses("ser_v_cop")));
}

#[test]
fn gender_clash_blocks_np_internal_attachment() {
    let g = grammar();
    let (status, r) = readings(&g, "Mis abuelos son personas famosos.");
    assert_eq!(status, ParseStatus::Parsed);
    assert!(r.iter().all(|t| t.uses("depictive") && !t.uses("head-adj")));
    let off = with("depictive", false);
    assert_eq!(readings(&off, "Mis abuelos son personas famosos.").0, ParseStatus::NoParse);
}

#[test]
fn attachment_ambiguity_gives_two_readings() {
    let g = grammar();
    let (_, r) = readings(&g, "Ellas cantan canciones juntas.");
    assert_eq!(r.len(), 2);
    assert_eq!(r.iter().filter(|t| t.uses("depictive")).count(), 1);
    let l = analyze(g.morph(), "Ellas cantan canciones juntas.");
    let o = parse(&g, &l, ParserLimits::default());
    let (one, truncated) = o.forest.enumerate_readings(&g, 1);
    assert_eq!(one.len(), 1);
    assert!(truncated);
}

#[test]
fn long_distance_flag_controls_conditional() {
    let s = "Mis amigos pueden venir si quieren.";
    assert_eq!(readings(&with("querer_ldd", true), s).0, ParseStatus::Parsed);
    assert_eq!(readings(&with("querer_ldd", false), s).0, ParseStatus::NoParse);
}

#[test]
fn unknown_word_is_a_lexical_gap() {
    let g = grammar();
    let o = parse(&g, &analyze(g.morph(), "Mis abuelos son xyzzy."), ParserLimits::default());
    assert_eq!(o.status, ParseStatus::LexicalGap);
    assert!(o.forest.roots.is_empty());
    // Known word whose tag chain fails for every entry.
    let o = parse(&g, &analyze(g.morph(), "."), ParserLimits::default());
    assert_ne!(o.status, ParseStatus::Parsed);
}

#[test]
fn edge_limit_reports_resource_limit() {
    let g = grammar();
    let l = analyze(g.morph(), "Mi abuelo lee un libro viejo.");
    let small = parse(&g, &l, ParserLimits { max_edges: 10, ..ParserLimits::default() });
    assert_eq!(small.status, ParseStatus::ResourceLimit);
    assert!(small.forest.roots.is_empty());
    assert_eq!(small.forest.edges.len(), 10);
}

#[test]
fn raising_the_edge_limit_never_removes_readings() {
    let g = grammar();
    let l = analyze(g.morph(), "Mi abuelo lee un libro viejo.");
    let mut prev = 0;
    for max in [5, 20, 30, 40, 100, 1000] {
        let o = parse(&g, &l, ParserLimits { max_edges: max, ..ParserLimits::default() });
        assert_eq!(o.status == ParseStatus::Parsed, !o.forest.roots.is_empty());
        assert!(o.forest.roots.len() >= prev);
        prev = o.forest.roots.len();
    }
    assert_eq!(prev, 2);
}

#[test]
fn forest_serialization_is_deterministic() {
    let a = grammar();
    let b = grammar();
    let s = "Ellas cantan canciones juntas.";
    let fa = parse(&a, &analyze(a.morph(), s), ParserLimits::default()).forest.serialize(&a);
    let fb = parse(&b, &analyze(b.morph(), s), ParserLimits::default()).forest.serialize(&b);
    assert_eq!(fa, fb);
    assert!(fa.lines().last().unwrap().starts_with("roots "));
}

#[test]
fn chart_edges_respect_span_invariants() {
    use grammarkit_core::parser::EdgeSource;
    let g = grammar();
    let o = parse(&g, &analyze(g.morph(), "Mi abuelo lee un libro viejo."), ParserLimits::default());
    for e in &o.forest.edges {
        if let EdgeSource::Rule { daughters, .. } = &e.source {
            let d: Vec<_> = daughters.iter().map(|&d| &o.forest.edges[d]).collect();
            assert_eq!(d[0].start, e.start);
            assert_eq!(d[d.len() - 1].end, e.end);
            for w in d.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
        }
    }
}

#[test]
fn readings_replay_to_root_structures() {
    let g = grammar();
    for s in ["Mis abuelos son famosos.", "Ellas cantan canciones juntas.", "Mi abuelo lee un libro viejo."] {
        let l = analyze(g.morph(), s);
        let (trees, _) = parse(&g, &l, ParserLimits::default()).forest.enumerate_readings(&g, 100);
        for t in trees {
            let leaves: Vec<String> = l.analyses.iter().map(|a| a.token.surface.clone()).collect();
            assert_eq!(t.yield_tokens(), leaves);
            let fs = replay(&g, &t).unwrap();
            assert!(g.satisfies_root(&fs));
            let back: DerivationTree = t.to_string().parse().unwrap();
            assert_eq!(back, t);
        }
    }
}

#[test]
fn replay_rejects_bad_trees() {
    let g = grammar();
    let bad: DerivationTree = r#"(head-subj (nope ("x" x X)))"#.parse().unwrap();
    assert!(replay(&g, &bad).is_err());
}

#[test]
fn oracle_matches_chart() {
    let g = grammar();
    for s in ["Ellas cantan canciones juntas.", "Mis abuelos es famosos.", "Abuelo canta."] {
        let l = analyze(g.morph(), s);
        let (mut chart, _) = parse(&g, &l, ParserLimits::default()).forest.enumerate_readings(&g, 1000);
        chart.sort();
        assert_eq!(oracle_parse(&g, &l).unwrap(), chart, "{s}");
    }
    let nine = analyze(g.morph(), "Mi abuelo lee un libro viejo viejo viejo viejo.");
    assert!(oracle_parse(&g, &nine).is_none());
}
