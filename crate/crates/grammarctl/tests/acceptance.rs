//! Acceptance checks for the whole toolkit. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails. Runs without the test harness
//! so the lines always show.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use grammarkit_core::grammar::Grammar;
use grammarkit_core::morpho::{analyze, tokenize};
use grammarkit_core::parser::{oracle_parse, parse, DerivationTree, ParseOutcome, ParseStatus, ParserLimits};
use grammarkit_core::semantics::{canonicalize, check_wellformed, extract_mrs, to_dmrs, Mrs, Sort};
use grammarkit_core::tfs::{subsumes, unify, Feature, FeatureStructure, TypeHierarchy, TypeId};
use grammarkit_treebank::{
    compare_profiles, compute_metrics, render_report, Category, Decision, Item, ItemRun, Profile, ReportFormat,
    ResultRecord, RunInfo, TestSuite, Verdict,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

// Tolerances and sizes.
const UNIFY_PAIRS: u64 = 1000;
const UNIFY_MAX_NODES: usize = 6;
const UNIFY_BUDGET: Duration = Duration::from_secs(60);
const MIN_TYPES: usize = 60;
const ORACLE_MAX_LEN: usize = 6;
const RENAMINGS: usize = 100;
const SYNTHETIC_PROFILES: u64 = 500;
const PER_SENTENCE_BUDGET: Duration = Duration::from_millis(100);
const PERF_MAX_LEN: usize = 10;
const SUITE_BUDGET: Duration = Duration::from_secs(300);

fn root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn grammar(options: &[(&str, bool)]) -> Grammar {
    let o: BTreeMap<String, bool> = options.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Grammar::load_with_options(root().join("grammars/esfrag"), &o).unwrap()
}

fn suite(name: &str) -> Vec<Item> {
    TestSuite::parse(&fs::read_to_string(root().join("suites").join(name)).unwrap()).unwrap().to_items()
}

fn run(g: &Grammar, text: &str) -> ParseOutcome {
    parse(g, &analyze(g.morph(), text), ParserLimits::default())
}

fn mrss(g: &Grammar, o: &ParseOutcome) -> Vec<Mrs> {
    o.forest.roots.iter().map(|&r| extract_mrs(g, &o.forest.edges[r].fs).unwrap()).collect()
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

// Unification algebra.

fn pool(h: &TypeHierarchy) -> Vec<TypeId> {
    h.types().filter(|&t| !h.name(t).starts_with('"')).collect()
}

fn features_of(h: &TypeHierarchy, t: TypeId) -> Vec<(Feature, TypeId)> {
    h.features().filter_map(|f| h.appropriate(t, f).map(|v| (f, v))).collect()
}

fn random_fs(h: &TypeHierarchy, rng: &mut StdRng) -> FeatureStructure {
    let types = pool(h);
    let featured: Vec<TypeId> = types.iter().copied().filter(|&t| !features_of(h, t).is_empty()).collect();
    let root = if rng.gen_bool(0.8) { *featured.choose(rng).unwrap() } else { *types.choose(rng).unwrap() };
    let mut nodes: Vec<(TypeId, Vec<(Feature, usize)>)> = vec![(root, Vec::new())];
    let mut i = 0;
    while i < nodes.len() {
        for (f, v) in features_of(h, nodes[i].0) {
            if nodes.len() >= UNIFY_MAX_NODES || !rng.gen_bool(0.5) {
                continue;
            }
            let later: Vec<usize> = (i + 1..nodes.len()).collect();
            let target = if !later.is_empty() && rng.gen_bool(0.25) {
                *later.choose(rng).unwrap()
            } else {
                let subs: Vec<TypeId> = h.subtypes(v).filter(|t| !h.name(*t).starts_with('"')).collect();
                nodes.push((subs.choose(rng).copied().unwrap_or(v), Vec::new()));
                nodes.len() - 1
            };
            nodes[i].1.push((f, target));
        }
        i += 1;
    }
    FeatureStructure::from_nodes(h, &nodes, 0).unwrap()
}

/// One step down: narrow a node's type or merge two nodes.
fn specialize(g: &Grammar, fs: &FeatureStructure, rng: &mut StdRng) -> Option<FeatureStructure> {
    let mut b = g.builder();
    let base = b.embed(fs);
    let n = base + rng.gen_range(0..fs.len()) as u32;
    if rng.gen_bool(0.5) && fs.len() > 1 {
        let m = base + rng.gen_range(0..fs.len()) as u32;
        b.unify(n, m).ok()?;
    } else {
        let t = b.ty(n);
        let subs: Vec<TypeId> = g.hierarchy().subtypes(t).collect();
        b.constrain(n, *subs.choose(rng)?).ok()?;
    }
    b.finish(base).ok()
}

fn unification_algebra() -> Check {
    let g = grammar(&[]);
    let h = g.hierarchy();
    let started = Instant::now();
    let (mut ok, mut failed, mut common) = (0, 0, 0);
    for seed in 0..UNIFY_PAIRS {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_fs(h, &mut rng);
        let b = if rng.gen_bool(0.5) {
            specialize(&g, &a, &mut rng).unwrap_or_else(|| random_fs(h, &mut rng))
        } else {
            random_fs(h, &mut rng)
        };
        if unify(h, &a, &a).ok().as_ref() != Some(&a) {
            return Err(format!("idempotence fails on pair {seed}"));
        }
        let (ab, ba) = (unify(h, &a, &b), unify(h, &b, &a));
        match (ab, ba) {
            (Ok(x), Ok(y)) => {
                ok += 1;
                if x != y {
                    return Err(format!("commutativity fails on pair {seed}"));
                }
                if !(subsumes(h, &a, &x) && subsumes(h, &b, &x)) {
                    return Err(format!("result is not a lower bound on pair {seed}"));
                }
                // Common specializations reached by walking down from the
                // inputs must all lie below the unifier.
                for start in [&a, &b, &x] {
                    let mut cur = start.clone();
                    for _ in 0..8 {
                        let Some(c) = specialize(&g, &cur, &mut rng) else { continue };
                        if subsumes(h, &a, &c) && subsumes(h, &b, &c) {
                            common += 1;
                            if !subsumes(h, &x, &c) {
                                return Err(format!("glb-minimality fails on pair {seed}"));
                            }
                        }
                        cur = c;
                    }
                }
            }
            (Err(_), Err(_)) => {
                failed += 1;
                for c in [specialize(&g, &a, &mut rng), specialize(&g, &b, &mut rng)].into_iter().flatten() {
                    if subsumes(h, &a, &c) && subsumes(h, &b, &c) {
                        return Err(format!("failed pair {seed} has a common specialization"));
                    }
                }
            }
            _ => return Err(format!("failure symmetry fails on pair {seed}")),
        }
    }
    let took = started.elapsed();
    if took > UNIFY_BUDGET {
        return Err(format!("{UNIFY_PAIRS} pairs took {took:.1?}"));
    }
    Ok(format!("{UNIFY_PAIRS} pairs ({ok} unify, {failed} fail), {common} common specializations checked, {took:.1?}"))
}

fn glb_oracle() -> Check {
    let g = grammar(&[]);
    let h = g.hierarchy();
    let types: Vec<TypeId> = h.types().collect();
    if types.len() < MIN_TYPES {
        return Err(format!("only {} types", types.len()));
    }
    let uppers: Vec<BTreeSet<TypeId>> = types
        .iter()
        .map(|&t| {
            let mut seen = BTreeSet::new();
            let mut stack = vec![t];
            while let Some(x) = stack.pop() {
                if seen.insert(x) {
                    stack.extend(h.parents(x).iter().copied());
                }
            }
            seen
        })
        .collect();
    for &a in &types {
        for &b in &types {
            let lower: Vec<usize> =
                (0..types.len()).filter(|&i| uppers[i].contains(&a) && uppers[i].contains(&b)).collect();
            let maxima: Vec<TypeId> = lower
                .iter()
                .copied()
                .filter(|&i| !lower.iter().any(|&j| j != i && uppers[i].contains(&types[j])))
                .map(|i| types[i])
                .collect();
            if maxima.len() > 1 || h.glb(a, b) != maxima.first().copied() {
                return Err(format!("glb({}, {}) disagrees", h.name(a), h.name(b)));
            }
        }
    }
    Ok(format!("{} types, {} pairs", types.len(), types.len() * types.len()))
}

fn parser_oracle() -> Check {
    let mut n = 0;
    for options in [&[][..], &[("depictive", false)], &[("querer_ldd", true)]] {
        let g = grammar(options);
        for it in suite("phenomena.tsv").iter().filter(|i| i.length <= ORACLE_MAX_LEN) {
            let lattice = analyze(g.morph(), &it.text);
            let chart: BTreeSet<DerivationTree> = parse(&g, &lattice, ParserLimits::default())
                .forest
                .enumerate_readings(&g, usize::MAX)
                .0
                .into_iter()
                .collect();
            let oracle: BTreeSet<DerivationTree> = oracle_parse(&g, &lattice).unwrap().into_iter().collect();
            if chart != oracle {
                return Err(format!("item {} {options:?}: chart {} vs oracle {}", it.id, chart.len(), oracle.len()));
            }
            n += 1;
        }
    }
    Ok(format!("{n} sentence/option pairs of at most {ORACLE_MAX_LEN} tokens"))
}

fn phenomena() -> Check {
    let on = grammar(&[]);
    let off = grammar(&[("depictive", false)]);
    let ldd = grammar(&[("querer_ldd", true)]);

    let copula = run(&on, "Mis abuelos son famosos.");
    if copula.status != ParseStatus::Parsed {
        return Err("copula sentence does not parse".into());
    }

    let dep = run(&on, "Ellas hacen música juntas.");
    let shares = mrss(&on, &dep).iter().any(|m| {
        let main = m.eps.iter().find(|e| e.predicate == "_hacer_v");
        let adj = m.eps.iter().find(|e| e.predicate == "_junto_a");
        match (main, adj) {
            (Some(v), Some(a)) => v.arg("ARG1").map(|x| x.key()) == a.arg("ARG1").map(|x| x.key()),
            _ => false,
        }
    });
    if !shares {
        return Err("no depictive reading sharing ARG1 with the verb".into());
    }

    let clash = "Mis abuelos son personas famosos.";
    let o = run(&on, clash);
    if o.status != ParseStatus::Parsed {
        return Err("agreement-clash sentence does not parse with depictive on".into());
    }
    let internal = mrss(&on, &o).iter().any(|m| {
        let noun = m.eps.iter().find(|e| e.predicate == "_persona_n").and_then(|e| e.arg("ARG0"));
        let adj = m.eps.iter().find(|e| e.predicate == "_famoso_a").and_then(|e| e.arg("ARG1"));
        matches!((noun, adj), (Some(n), Some(a)) if n.key() == a.key())
    });
    let (trees, _) = o.forest.enumerate_readings(&on, usize::MAX);
    if internal || trees.iter().any(|t| t.uses("head-adj")) {
        return Err("famosos attaches inside the NP".into());
    }
    if run(&off, clash).status == ParseStatus::Parsed {
        return Err("agreement-clash sentence parses with depictive off".into());
    }

    let cond = "Mis amigos pueden venir si quieren.";
    let (with, without) = (run(&ldd, cond).status, run(&on, cond).status);
    if with != ParseStatus::Parsed || without == ParseStatus::Parsed {
        return Err(format!("conditional: {with} with the flag, {without} without"));
    }
    Ok("copula parses; depictive shares ARG1; no NP-internal famosos, none with flag off; conditional iff flag".into())
}

fn rename(m: &Mrs, rng: &mut StdRng) -> Mrs {
    let mut keys: Vec<(Sort, u32)> = m.occurrences().iter().map(|v| v.key()).collect();
    keys.sort();
    keys.dedup();
    let mut fresh: Vec<u32> = (0..keys.len() as u32).map(|i| 7 * i + rng.gen_range(0..7)).collect();
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

fn semantics() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut readings, mut sentences) = (0, 0);
    for options in [&[][..], &[("depictive", false)], &[("querer_ldd", true)]] {
        let g = grammar(options);
        for it in suite("phenomena.tsv").into_iter().chain(suite("learner.tsv")) {
            let o = run(&g, &it.text);
            if o.status != ParseStatus::Parsed {
                continue;
            }
            sentences += 1;
            for m in mrss(&g, &o) {
                readings += 1;
                let report = check_wellformed(&m);
                if !report.is_ok() {
                    return Err(format!("{:?}: {report}", it.text));
                }
                let nodes = to_dmrs(&m).map_err(|e| e.to_string())?.nodes.len();
                if nodes != m.eps.len() {
                    return Err(format!("{:?}: {nodes} DMRS nodes for {} EPs", it.text, m.eps.len()));
                }
                let c = canonicalize(&m);
                for _ in 0..RENAMINGS {
                    if canonicalize(&rename(&m, &mut rng)) != c {
                        return Err(format!("{:?}: canonical form changes under renaming", it.text));
                    }
                }
            }
        }
    }
    Ok(format!("{readings} readings of {sentences} parses, {RENAMINGS} renamings each"))
}

fn synthetic(rng: &mut StdRng) -> Profile {
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
    for id in 1..=rng.gen_range(0..40u32) {
        let status = *[ParseStatus::Parsed, ParseStatus::NoParse, ParseStatus::ResourceLimit, ParseStatus::LexicalGap]
            .choose(rng)
            .unwrap();
        let n = if status == ParseStatus::Parsed { rng.gen_range(1..4) } else { 0 };
        p.items.push(Item { id, text: format!("s{id}"), wf: rng.gen_range(0..2), length: rng.gen_range(1..10) });
        for k in 0..n {
            p.results.push(ResultRecord {
                item_id: id,
                reading_index: k,
                derivation: String::new(),
                mrs: String::new(),
            });
        }
        p.run.items.push(ItemRun { item_id: id, status, readings: n, stored: n, edges: 0, elapsed_ms: 0 });
        let verdict = match rng.gen_range(0..3) {
            0 if n > 0 => Verdict::Gold { reading: rng.gen_range(0..n) },
            1 => Verdict::RejectAll,
            _ => Verdict::Unverified,
        };
        p.decisions.push(Decision { item_id: id, verdict, annotator: "x".into(), timestamp: Default::default() });
    }
    p
}

fn metrics_fixture() -> Check {
    let p = Profile::read(&root().join("profiles/learner-gold")).map_err(|e| e.to_string())?;
    let r = compute_metrics(&p);
    let all = r.all().ok_or("no ALL row")?;
    let counts = (all.n_items, all.parsed, all.gold, r.ungrammatical, r.ungrammatical_parsed);
    if counts != (13, 12, 10, 7, 4) {
        return Err(format!("counts {counts:?}"));
    }
    let line = "coverage 0.92  accuracy 0.77  overgeneration 0.57";
    if !render_report(&r, ReportFormat::Table).lines().any(|l| l == line) {
        return Err("summary line differs".into());
    }
    let mut rng = StdRng::seed_from_u64(11);
    for i in 0..SYNTHETIC_PROFILES {
        let r = compute_metrics(&synthetic(&mut rng));
        if r.rows.iter().any(|row| row.accuracy > row.coverage) {
            return Err(format!("accuracy above coverage in synthetic profile {i}"));
        }
    }
    Ok(format!(
        "12/13, 10/13, 4/7 rendered as `{line}`; accuracy <= coverage on {SYNTHETIC_PROFILES} synthetic profiles"
    ))
}

fn regression_gate() -> Check {
    let gold = root().join("profiles/phenomena-gold");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let off = dir.path().join("off");
    let ctl = |args: &[&std::ffi::OsStr]| {
        Command::new(env!("CARGO_BIN_EXE_grammarctl")).args(args).current_dir(root()).output()
    };
    let o = ctl(&[
        "parse".as_ref(),
        "grammars/esfrag".as_ref(),
        "suites/phenomena.tsv".as_ref(),
        off.as_os_str(),
        "--option".as_ref(),
        "depictive=off".as_ref(),
    ])
    .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err("reparse failed".into());
    }
    let expect: BTreeMap<u32, Category> = fs::read_to_string(root().join("suites/regression.expect.tsv"))
        .map_err(|e| e.to_string())?
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (id, c) = l.split_once('\t').unwrap();
            (id.parse().unwrap(), c.trim().parse().unwrap())
        })
        .collect();
    let report =
        compare_profiles(&Profile::read(&gold).unwrap(), &Profile::read(&off).unwrap()).map_err(|e| e.to_string())?;
    let got: BTreeMap<u32, Category> = report.items.iter().map(|i| (i.item_id, i.category)).collect();
    if got != expect {
        let diff: Vec<u32> = got.iter().filter(|(id, c)| expect.get(id) != Some(c)).map(|(id, _)| *id).collect();
        return Err(format!("categories differ on items {diff:?}"));
    }
    let cross = ctl(&["treebank".as_ref(), "compare".as_ref(), gold.as_os_str(), off.as_os_str()])
        .map_err(|e| e.to_string())?;
    let own = ctl(&["treebank".as_ref(), "compare".as_ref(), gold.as_os_str(), gold.as_os_str()])
        .map_err(|e| e.to_string())?;
    match (cross.status.code(), own.status.code()) {
        (Some(1), Some(0)) => Ok(format!(
            "{} items as expected, gold-lost {:?}; exit 1 against flag off, 0 against itself",
            got.len(),
            report.with_category(Category::GoldLost)
        )),
        codes => Err(format!("exit codes {codes:?}")),
    }
}

fn performance() -> Check {
    let g = grammar(&[]);
    let started = Instant::now();
    let (mut worst, mut worst_text, mut n) = (Duration::ZERO, String::new(), 0);
    for it in suite("phenomena.tsv").into_iter().chain(suite("learner.tsv")) {
        if tokenize(&it.text).len() > PERF_MAX_LEN {
            continue;
        }
        let t = Instant::now();
        let o = run(&g, &it.text);
        let _ = mrss(&g, &o);
        let took = t.elapsed();
        n += 1;
        if took > worst {
            worst = took;
            worst_text = it.text.clone();
        }
    }
    let total = started.elapsed();
    let build = if cfg!(debug_assertions) { "debug" } else { "release" };
    if worst >= PER_SENTENCE_BUDGET || total >= SUITE_BUDGET {
        return Err(format!("slowest {worst:.1?} ({worst_text:?}), suite {total:.1?}"));
    }
    Ok(format!("{n} sentences, slowest {worst:.1?}, suite {total:.1?} ({build} build)"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("unification algebra", unification_algebra),
        ("glb oracle equivalence", glb_oracle),
        ("parser/oracle equivalence", parser_oracle),
        ("phenomenon suite", phenomena),
        ("semantics", semantics),
        ("metrics fixture", metrics_fixture),
        ("regression gate", regression_gate),
        ("performance", performance),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
