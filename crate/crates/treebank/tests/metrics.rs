mod common;

use common::{root, synthetic, Spec};
use grammarkit_core::parser::ParseStatus;
use grammarkit_treebank::metrics::Length;
use grammarkit_treebank::{compute_metrics, render_report, Profile, ReportFormat, Verdict};
use proptest::prelude::*;

#[test]
fn learner_fixture_counts() {
    let p = Profile::read(&root().join("profiles/learner-gold")).unwrap();
    let r = compute_metrics(&p);
    let all = r.all().unwrap();
    assert_eq!((all.n_items, all.parsed, all.gold), (13, 12, 10));
    assert_eq!((r.ungrammatical, r.ungrammatical_parsed), (7, 4));
    assert!((all.coverage - 12.0 / 13.0).abs() < 1e-12);
    assert!((all.accuracy - 10.0 / 13.0).abs() < 1e-12);
    assert!((r.overgeneration.unwrap() - 4.0 / 7.0).abs() < 1e-12);
    assert_eq!(r.unverified_count, 1);
    let text = render_report(&r, ReportFormat::Table);
    assert!(text.lines().any(|l| l == "coverage 0.92  accuracy 0.77  overgeneration 0.57"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("ALL  13  0.92  0.77  0")), "{text}");
}

fn spec(id: u32, wf: u8, length: usize, status: ParseStatus, gold: bool) -> Spec {
    let parsed = status == ParseStatus::Parsed;
    Spec {
        id,
        wf,
        length,
        status,
        readings: usize::from(parsed),
        verdict: if gold && parsed { Verdict::Gold { reading: 0 } } else { Verdict::Unverified },
    }
}

#[test]
fn full_success_row() {
    let p = synthetic(&(1..=5).map(|i| spec(i, 1, 1, ParseStatus::Parsed, true)).collect::<Vec<_>>());
    let r = compute_metrics(&p);
    let text = render_report(&r, ReportFormat::Table);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "length  items  coverage  accuracy  limit-hits");
    // Right-aligned under the wider ALL label.
    assert_eq!(lines[1], "  1  5  1.00  1.00  0");
    assert_eq!(lines[1].trim_start(), "1  5  1.00  1.00  0");
    assert_eq!(lines[2], "ALL  5  1.00  1.00  0");
    assert!(r.overgeneration.is_none());
    assert!(!text.contains("overgeneration"));
    assert_eq!(lines[4], "coverage 1.00  accuracy 1.00");
}

#[test]
fn empty_profile() {
    let r = compute_metrics(&synthetic(&[]));
    assert!(r.rows.is_empty());
    assert_eq!(render_report(&r, ReportFormat::Table), "length  items  coverage  accuracy  limit-hits\n");
    assert_eq!(render_report(&r, ReportFormat::Records).lines().count(), 1);
}

#[test]
fn limit_hits_count_as_unparsed() {
    let p = synthetic(&[spec(1, 1, 4, ParseStatus::ResourceLimit, false), spec(2, 1, 4, ParseStatus::Parsed, true)]);
    let r = compute_metrics(&p);
    assert_eq!(r.rows[0].limit_hits, 1);
    assert_eq!(r.rows[0].coverage, 0.5);
}

#[test]
fn records_format() {
    let p = synthetic(&[spec(1, 1, 2, ParseStatus::Parsed, true), spec(2, 0, 3, ParseStatus::Parsed, false)]);
    let out = render_report(&compute_metrics(&p), ReportFormat::Records);
    let rows: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["length"], 2);
    assert_eq!(rows[0]["n-items"], 1);
    assert_eq!(rows[1]["length"], "ALL");
    assert_eq!(rows[2]["summary"], true);
    assert_eq!(rows[2]["overgeneration"], 1.0);
}

fn status() -> impl Strategy<Value = ParseStatus> {
    prop_oneof![
        Just(ParseStatus::Parsed),
        Just(ParseStatus::Parsed),
        Just(ParseStatus::NoParse),
        Just(ParseStatus::LexicalGap),
        Just(ParseStatus::ResourceLimit),
    ]
}

fn specs() -> impl Strategy<Value = Vec<Spec>> {
    proptest::collection::vec((0u8..=1, 1usize..=8, status(), 1usize..4, 0u8..3), 0..30).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (wf, length, status, n, choice))| {
                let parsed = status == ParseStatus::Parsed;
                Spec {
                    id: i as u32 + 1,
                    wf,
                    length,
                    status,
                    readings: if parsed { n } else { 0 },
                    verdict: match choice {
                        0 if parsed => Verdict::Gold { reading: n - 1 },
                        1 => Verdict::RejectAll,
                        _ => Verdict::Unverified,
                    },
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn report_invariants(specs in specs()) {
        let p = synthetic(&specs);
        let r = compute_metrics(&p);
        for row in &r.rows {
            prop_assert!(row.accuracy <= row.coverage);
            prop_assert!((0.0..=1.0).contains(&row.coverage));
        }
        if let Some(all) = r.all() {
            let buckets: Vec<_> = r.rows.iter().filter(|x| x.length != Length::All).collect();
            prop_assert_eq!(all.n_items, buckets.iter().map(|b| b.n_items).sum::<usize>());
            prop_assert_eq!(all.limit_hits, buckets.iter().map(|b| b.limit_hits).sum::<usize>());
            let weighted: f64 = buckets.iter().map(|b| b.coverage * b.n_items as f64).sum::<f64>() / all.n_items as f64;
            prop_assert!((weighted - all.coverage).abs() < 1e-9);
            let weighted: f64 = buckets.iter().map(|b| b.accuracy * b.n_items as f64).sum::<f64>() / all.n_items as f64;
            prop_assert!((weighted - all.accuracy).abs() < 1e-9);
        } else {
            prop_assert!(r.rows.is_empty());
        }
        // Pure and byte-stable.
        prop_assert_eq!(render_report(&r, ReportFormat::Table), render_report(&compute_metrics(&p), ReportFormat::Table));
    }

    #[test]
    fn removal_invariance(specs in specs(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!specs.is_empty());
        let r = compute_metrics(&synthetic(&specs));
        let gone = pick.index(specs.len());
        let mut rest = specs.clone();
        let removed = rest.remove(gone);
        let s = compute_metrics(&synthetic(&rest));
        if removed.wf == 0 {
            prop_assert_eq!(r.rows, s.rows);
        } else {
            prop_assert_eq!(r.overgeneration, s.overgeneration);
        }
    }
}
