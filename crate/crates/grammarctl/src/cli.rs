//! Command definitions and their implementations.
//!
//! Exit status: 0 success, 1 a negative result (invalid grammar, regression,
//! ill-formed MRS), 2 operational failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use grammarkit_core::grammar::{parse_flag, Grammar};
use grammarkit_core::morpho::analyze;
use grammarkit_core::parser::{parse, ParseOutcome, ParserLimits};
use grammarkit_core::semantics::{to_dmrs, Mrs};
use grammarkit_treebank::profile::record_decision;
use grammarkit_treebank::{
    compare_profiles, compute_metrics, render_report, Profile, ReportFormat, TestSuite, Verdict,
};

#[derive(Debug, Parser)]
#[command(name = "grammarctl", version, about = "Grammar engineering toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a grammar directory and report its size or its errors.
    Validate { grammar: PathBuf },
    /// Show the morphological analyses of a sentence.
    Analyze {
        grammar: PathBuf,
        text: String,
        /// Print the lattice as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Parse every item of a test suite into a new profile.
    Parse {
        grammar: PathBuf,
        suite: PathBuf,
        profile: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        options: OptionArgs,
        /// Replace an existing profile.
        #[arg(long)]
        force: bool,
    },
    /// Record decisions and compare profiles
    #[command(subcommand)]
    Treebank(TreebankCommand),
    /// Coverage, accuracy and overgeneration of a profile.
    Metrics {
        profile: PathBuf,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
    /// MRS utilities
    #[command(subcommand)]
    Mrs(MrsCommand),
    /// Serve a profile over HTTP for treebanking.
    Serve {
        profile: PathBuf,
        /// Grammar the profile was made with; checked against run.json.
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        read_only: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum TreebankCommand {
    /// Record a decision for one item.
    Decide {
        profile: PathBuf,
        #[arg(long)]
        item: u32,
        /// Index of the gold reading.
        #[arg(long, conflicts_with = "reject", required_unless_present = "reject")]
        gold: Option<usize>,
        /// Reject every reading.
        #[arg(long)]
        reject: bool,
        #[arg(long, env = "USER", default_value = "annotator")]
        annotator: String,
    },
    /// Compare a new profile against a gold profile.
    Compare {
        gold: PathBuf,
        new: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MrsCommand {
    /// Convert MRSs (separated by blank lines, `-` for stdin) to DMRS.
    Dmrs { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long, default_value_t = ParserLimits::default().max_edges)]
    pub max_edges: usize,
    #[arg(long, default_value_t = ParserLimits::default().max_readings)]
    pub max_readings: usize,
    #[arg(long, default_value_t = ParserLimits::default().timeout.as_secs_f64())]
    pub timeout_s: f64,
}

impl LimitArgs {
    pub fn limits(&self) -> Result<ParserLimits, String> {
        let timeout = Duration::try_from_secs_f64(self.timeout_s).map_err(|e| format!("--timeout-s: {e}"))?;
        Ok(ParserLimits { max_edges: self.max_edges, max_readings: self.max_readings, timeout })
    }
}

#[derive(Debug, Args)]
pub struct OptionArgs {
    /// Override a grammar option, e.g. `--option depictive=off`.
    #[arg(long = "option", value_name = "NAME=on|off")]
    pub options: Vec<String>,
}

impl OptionArgs {
    pub fn parse(&self) -> Result<BTreeMap<String, bool>, String> {
        let mut out = BTreeMap::new();
        for o in &self.options {
            let (k, v) = o.split_once('=').ok_or_else(|| format!("--option {o}: expected NAME=on|off"))?;
            let v = parse_flag(v.trim()).ok_or_else(|| format!("--option {o}: expected on or off"))?;
            out.insert(k.trim().to_string(), v);
        }
        Ok(out)
    }
}

/// Prints the error and gives exit status 2.
fn fail(e: impl Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Validate { grammar } => validate(&grammar),
        Command::Analyze { grammar, text, json } => cmd_analyze(&grammar, &text, json),
        Command::Parse { grammar, suite, profile, limits, options, force } => {
            let limits = match limits.limits() {
                Ok(l) => l,
                Err(e) => return fail(e),
            };
            let options = match options.parse() {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            cmd_parse(&grammar, &suite, &profile, limits, &options, force)
        }
        Command::Treebank(TreebankCommand::Decide { profile, item, gold, reject: _, annotator }) => {
            let verdict = match gold {
                Some(k) => Verdict::Gold { reading: k },
                None => Verdict::RejectAll,
            };
            match record_decision(&profile, item, verdict, &annotator) {
                Ok(Some(d)) => {
                    println!("{}", serde_json::to_string(&d).expect("decision serializes"));
                    ExitCode::SUCCESS
                }
                Ok(None) => {
                    println!("item {item}: decision unchanged");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Treebank(TreebankCommand::Compare { gold, new, report }) => {
            cmd_compare(&gold, &new, report.as_deref())
        }
        Command::Metrics { profile, format } => match Profile::read(&profile) {
            Ok(p) => {
                print!("{}", render_report(&compute_metrics(&p), format));
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Mrs(MrsCommand::Dmrs { file }) => cmd_dmrs(&file),
        Command::Serve { profile, grammar, port, read_only } => {
            let config = crate::server::ServiceConfig { port, grammar_dir: grammar, profile_dir: profile, read_only };
            match crate::server::serve(config) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    }
}

fn validate(dir: &Path) -> ExitCode {
    match Grammar::load(dir) {
        Ok(g) => {
            println!("grammar {}", g.version());
            println!("types {}", g.hierarchy().len());
            println!("lexical entries {} ({} lemmas)", g.lexicon().len(), g.lemma_count());
            println!("lexical rules {}", g.lexical_rules().len());
            println!("phrase rules {}", g.rules().len());
            println!("root conditions {}", g.roots().len());
            let opts: Vec<String> =
                g.options().iter().map(|(k, v)| format!("{k}={}", if *v { "on" } else { "off" })).collect();
            println!("options {}", opts.join(" "));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_analyze(dir: &Path, text: &str, json: bool) -> ExitCode {
    let g = match Grammar::load(dir) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let lattice = analyze(g.morph(), text);
    if json {
        println!("{}", serde_json::to_string_pretty(&lattice).expect("lattice serializes"));
        return ExitCode::SUCCESS;
    }
    for a in &lattice.analyses {
        let rs: Vec<String> = a.readings.iter().map(|r| format!("{}/{}", r.lemma, r.tag)).collect();
        println!("{}\t{}", a.token.surface, rs.join(" "));
    }
    for t in &lattice.failures {
        println!("{}\t?", t.surface);
    }
    ExitCode::SUCCESS
}

/// Parses items on a few threads; results come back in suite order.
pub fn parse_all(g: &Grammar, texts: &[&str], limits: ParserLimits) -> Vec<ParseOutcome> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(texts.len().max(1));
    let chunk = texts.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = texts
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|t| parse(g, &analyze(g.morph(), t), limits)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("parser thread panicked")).collect()
    })
}

fn cmd_parse(
    grammar: &Path,
    suite: &Path,
    out: &Path,
    limits: ParserLimits,
    options: &BTreeMap<String, bool>,
    force: bool,
) -> ExitCode {
    let g = match Grammar::load_with_options(grammar, options) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let src = match std::fs::read_to_string(suite) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", suite.display())),
    };
    let suite = match TestSuite::parse(&src) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let occupied = out.is_dir() && std::fs::read_dir(out).is_ok_and(|mut d| d.next().is_some());
    if occupied && !force {
        return fail(format!("{} already exists (use --force to overwrite)", out.display()));
    }
    let items = suite.to_items();
    let texts: Vec<&str> = items.iter().map(|i| i.text.as_str()).collect();
    let outcomes = parse_all(&g, &texts, limits);
    for (it, o) in items.iter().zip(&outcomes) {
        println!("{}\t{}\t{}", it.id, o.status, o.forest.roots.len());
    }
    let profile = match Profile::create(&g, items, &outcomes, limits) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    if let Err(e) = profile.write(out, force) {
        return fail(e);
    }
    eprintln!("{} items, {} ms parsing", profile.items.len(), profile.run.total_ms);
    ExitCode::SUCCESS
}

fn cmd_compare(gold: &Path, new: &Path, report_out: Option<&Path>) -> ExitCode {
    let (g, n) = match (Profile::read(gold), Profile::read(new)) {
        (Ok(g), Ok(n)) => (g, n),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let report = match compare_profiles(&g, &n) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print!("{report}");
    if let Some(path) = report_out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, json + "\n") {
            return fail(format!("{}: {e}", path.display()));
        }
    }
    if report.has_regressions() {
        for c in [grammarkit_treebank::Category::GoldLost, grammarkit_treebank::Category::RejectViolated] {
            let ids = report.with_category(c);
            if !ids.is_empty() {
                let ids: Vec<String> = ids.iter().map(u32::to_string).collect();
                eprintln!("{c}: {}", ids.join(" "));
            }
        }
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn cmd_dmrs(file: &Path) -> ExitCode {
    let src =
        if file == Path::new("-") { std::io::read_to_string(std::io::stdin()) } else { std::fs::read_to_string(file) };
    let src = match src {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", file.display())),
    };
    // MRSs are separated by blank lines and may span several lines.
    let mut blocks: Vec<(usize, String)> = Vec::new();
    let mut open = false;
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            open = false;
        } else if open {
            let b = blocks.last_mut().expect("open block");
            b.1.push(' ');
            b.1.push_str(line.trim());
        } else {
            blocks.push((i + 1, line.trim().to_string()));
            open = true;
        }
    }
    let mut status = ExitCode::SUCCESS;
    for (n, (line, text)) in blocks.iter().enumerate() {
        let m: Mrs = match text.parse() {
            Ok(m) => m,
            Err(e) => return fail(format!("MRS at line {line}: {e}")),
        };
        if n > 0 {
            println!();
        }
        match to_dmrs(&m) {
            Ok(d) => print!("{d}"),
            Err(e) => {
                eprintln!("MRS at line {line}: {e}");
                status = ExitCode::from(1);
            }
        }
    }
    status
}
