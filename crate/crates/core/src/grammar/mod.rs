//! Grammar directories: type hierarchy, lexicon, lexical and phrase rules,
//! root conditions, tag map, option flags and the morphological table.

mod compile;
pub mod tdl;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::morpho::MorphTable;
use crate::tfs::{
    unify, Feature, FeatureStructure, FsBuilder, HierarchySpec, TypeDecl, TypeHierarchy, TypeId, UnifyFailure,
    Violation,
};
use compile::{CompileError, Compiler, ListGeometry};
use tdl::{Body, Conj, Definition, Pos, Term};

pub const TYPES_FILE: &str = "types.tdl";
pub const LEXICON_FILE: &str = "lexicon.tdl";
pub const LEXRULES_FILE: &str = "lexrules.tdl";
pub const RULES_FILE: &str = "rules.tdl";
pub const ROOTS_FILE: &str = "roots.tdl";
pub const TAGMAP_FILE: &str = "tagmap.tsv";
pub const OPTIONS_FILE: &str = "options.cfg";
pub const MORPH_FILE: &str = "morph.tsv";

const FILES: [&str; 8] =
    [TYPES_FILE, LEXICON_FILE, LEXRULES_FILE, RULES_FILE, ROOTS_FILE, TAGMAP_FILE, OPTIONS_FILE, MORPH_FILE];

/// One problem found while loading, with its location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl LoadError {
    fn new(file: &str, pos: Pos, message: impl Into<String>) -> Self {
        LoadError { file: file.to_string(), line: pos.line, column: pos.col, message: message.into() }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.file, self.message)
        } else {
            write!(f, "{}:{}:{}: {}", self.file, self.line, self.column, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct LoadErrors(pub Vec<LoadError>);

impl fmt::Display for LoadErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl From<LoadError> for LoadErrors {
    fn from(e: LoadError) -> Self {
        LoadErrors(vec![e])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown morphological tag `{0}`")]
    UnknownTag(String),
}

#[derive(Debug, Clone)]
pub struct LexicalEntry {
    pub name: String,
    pub lemma: String,
    pub lexical_type: TypeId,
    pub stem: String,
    pub predicate: String,
    pub fs: FeatureStructure,
}

#[derive(Debug, Clone)]
pub struct LexicalRule {
    pub name: String,
    /// Inflectional rules realize a morphological tag; others do not.
    pub inflecting: bool,
    pub input: FeatureStructure,
    pub output: FeatureStructure,
}

impl LexicalRule {
    /// Applies the rule to a daughter: daughter ⊓ input, then ⊓ output.
    pub fn apply(&self, h: &TypeHierarchy, dtr: &FeatureStructure) -> Result<FeatureStructure, UnifyFailure> {
        let r = unify(h, dtr, &self.input)?;
        unify(h, &r, &self.output)
    }
}

#[derive(Debug, Clone)]
pub struct PhraseRule {
    pub name: String,
    pub fs: FeatureStructure,
    /// Paths from the rule root to each daughter, in surface order.
    pub daughters: Vec<Vec<Feature>>,
}

impl PhraseRule {
    pub fn arity(&self) -> usize {
        self.daughters.len()
    }
}

#[derive(Debug, Clone)]
pub struct RootCondition {
    pub name: String,
    pub fs: FeatureStructure,
}

/// A lexical structure together with how it was built.
#[derive(Debug, Clone)]
pub struct LexicalAnalysis {
    pub entry: usize,
    /// Lexical rules applied, innermost first.
    pub rules: Vec<usize>,
    pub fs: FeatureStructure,
}

/// Frequently used features, resolved once.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub args: Feature,
    pub first: Feature,
    pub rest: Feature,
    pub list: Feature,
    pub last: Feature,
    pub cons: TypeId,
    pub null: TypeId,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    hierarchy: TypeHierarchy,
    geometry: Geometry,
    constraints: Vec<FeatureStructure>,
    lexicon: Vec<LexicalEntry>,
    by_lemma: HashMap<String, Vec<usize>>,
    lexrules: Vec<LexicalRule>,
    rules: Vec<PhraseRule>,
    roots: Vec<RootCondition>,
    tagmap: BTreeMap<String, Vec<usize>>,
    options: BTreeMap<String, bool>,
    morph: MorphTable,
    version: String,
}

fn read_file(dir: &Path, name: &str) -> Result<String, LoadError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(LoadError { file: name.into(), line: 0, column: 0, message: format!("missing file: {name}") });
    }
    std::fs::read_to_string(&path).map_err(|e| LoadError {
        file: name.into(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

/// Parses `key = on|off` lines; `#` and `;` start comments.
pub fn parse_options(src: &str) -> Result<BTreeMap<String, bool>, LoadError> {
    let mut out = BTreeMap::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.split(['#', ';']).next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let pos = Pos { line: i + 1, col: 1 };
        let (k, v) = t.split_once('=').ok_or_else(|| LoadError::new(OPTIONS_FILE, pos, "expected `key = on|off`"))?;
        let value = parse_flag(v.trim())
            .ok_or_else(|| LoadError::new(OPTIONS_FILE, pos, format!("bad value `{}`", v.trim())))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

/// `on`/`off` and the usual synonyms.
pub fn parse_flag(v: &str) -> Option<bool> {
    match v {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn first_type(conj: &Conj) -> Option<(&str, Pos)> {
    conj.iter().find_map(|t| match t {
        Term::Type(n, p) => Some((n.as_str(), *p)),
        _ => None,
    })
}

fn collect_strings(conj: &Conj, out: &mut BTreeSet<String>) {
    for t in conj {
        match t {
            Term::Str(s, _) => {
                out.insert(s.clone());
            }
            Term::Avm(pairs, _) => pairs.iter().for_each(|(_, v)| collect_strings(v, out)),
            Term::List { items, tail, .. } => {
                items.iter().for_each(|v| collect_strings(v, out));
                if let tdl::ListTail::Dotted(v) = tail {
                    collect_strings(v, out);
                }
            }
            Term::DiffList(items, _) => items.iter().for_each(|v| collect_strings(v, out)),
            Term::Type(..) | Term::Tag(..) => {}
        }
    }
}

fn body_conjs(d: &Definition) -> Vec<&Conj> {
    match &d.body {
        Body::Plain(c) => vec![c],
        Body::Rule { input, output, .. } => vec![input, output],
    }
}

/// Value type declared for a feature written at the top of a type body.
fn declared_value(conj: &Conj) -> Option<String> {
    conj.iter().find_map(|t| match t {
        Term::Type(n, _) => Some(n.clone()),
        Term::Str(s, _) => Some(format!("\"{s}\"")),
        Term::List { .. } => Some("*list*".to_string()),
        Term::DiffList(..) => Some("*diff-list*".to_string()),
        _ => None,
    })
}

/// Reads the files of a grammar directory after applying `%if` blocks.
struct Sources {
    defs: HashMap<&'static str, Vec<Definition>>,
    tagmap: String,
    morph: String,
}

impl Grammar {
    /// Loads a grammar directory with the options from its `options.cfg`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Grammar, LoadErrors> {
        Self::load_with_options(dir, &BTreeMap::new())
    }

    /// Loads a grammar, overriding option flags. Overriding a flag the
    /// grammar does not declare is an error.
    pub fn load_with_options(dir: impl AsRef<Path>, overrides: &BTreeMap<String, bool>) -> Result<Grammar, LoadErrors> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(LoadError {
                file: dir.display().to_string(),
                line: 0,
                column: 0,
                message: "not a directory".into(),
            }
            .into());
        }
        let mut raw = BTreeMap::new();
        for f in FILES {
            raw.insert(f, read_file(dir, f)?);
        }
        let mut options = parse_options(&raw[OPTIONS_FILE])?;
        for (k, v) in overrides {
            match options.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(LoadError {
                        file: OPTIONS_FILE.into(),
                        line: 0,
                        column: 0,
                        message: format!("unknown option `{k}`"),
                    }
                    .into())
                }
            }
        }
        let mut hasher = Sha256::new();
        for f in FILES {
            hasher.update(f.as_bytes());
            hasher.update([0]);
            hasher.update(raw[f].as_bytes());
            hasher.update([0]);
        }
        for (k, v) in &options {
            hasher.update(format!("{k}={}\n", if *v { "on" } else { "off" }).as_bytes());
        }
        let version = hex::encode(hasher.finalize());

        let mut defs = HashMap::new();
        for f in [TYPES_FILE, LEXICON_FILE, LEXRULES_FILE, RULES_FILE, ROOTS_FILE] {
            let src = tdl::preprocess(&raw[f], &options).map_err(|e| LoadError::new(f, e.pos, e.message))?;
            let parsed = tdl::parse(&src).map_err(|e| LoadError::new(f, e.pos, e.message))?;
            defs.insert(f, parsed);
        }
        let sources = Sources { defs, tagmap: raw[TAGMAP_FILE].clone(), morph: raw[MORPH_FILE].clone() };
        Self::build(sources, options, version)
    }

    fn build(src: Sources, options: BTreeMap<String, bool>, version: String) -> Result<Grammar, LoadErrors> {
        let types = &src.defs[TYPES_FILE];

        // Hierarchy: declared types plus one subtype of `string` per literal.
        let mut spec = HierarchySpec::new();
        let mut positions: HashMap<String, Pos> = HashMap::new();
        let mut bodies_src: Vec<(String, Conj, Pos)> = Vec::new();
        for d in types {
            let Body::Plain(conj) = &d.body else {
                return Err(LoadError::new(TYPES_FILE, d.pos, "rule syntax is not allowed in type definitions").into());
            };
            let mut parents = Vec::new();
            let mut features = Vec::new();
            let mut has_body = false;
            for t in conj {
                match t {
                    Term::Type(n, _) => parents.push(n.clone()),
                    Term::Avm(pairs, _) => {
                        has_body = true;
                        for (path, value) in pairs {
                            let v = if path.len() == 1 { declared_value(value) } else { None };
                            features.push((path[0].0.clone(), v));
                        }
                    }
                    _ => {
                        return Err(LoadError::new(
                            TYPES_FILE,
                            d.pos,
                            format!("type `{}` must be a conjunction of parent types and one feature matrix", d.name),
                        )
                        .into())
                    }
                }
            }
            positions.entry(d.name.clone()).or_insert(d.pos);
            spec.types.push(TypeDecl { name: d.name.clone(), parents, features });
            if has_body {
                bodies_src.push((d.name.clone(), conj.clone(), d.pos));
            }
        }
        let mut strings = BTreeSet::new();
        for file in [TYPES_FILE, LEXICON_FILE, LEXRULES_FILE, RULES_FILE, ROOTS_FILE] {
            for d in &src.defs[file] {
                for c in body_conjs(d) {
                    collect_strings(c, &mut strings);
                }
            }
        }
        if !strings.is_empty() && !spec.types.iter().any(|t| t.name == "string") {
            return Err(
                LoadError::new(TYPES_FILE, Pos::default(), "string literals require a type named `string`").into()
            );
        }
        for s in &strings {
            let name = format!("\"{s}\"");
            if !spec.types.iter().any(|t| t.name == name) {
                spec.types.push(TypeDecl { name, parents: vec!["string".into()], features: vec![] });
            }
        }
        let h = TypeHierarchy::new(&spec).map_err(|report| {
            LoadErrors(
                report
                    .violations
                    .iter()
                    .map(|v| {
                        let pos = violation_type(v).and_then(|t| positions.get(t).copied()).unwrap_or_default();
                        LoadError::new(TYPES_FILE, pos, v.to_string())
                    })
                    .collect(),
            )
        })?;

        let need_type = |n: &str| {
            h.lookup(n)
                .ok_or_else(|| LoadError::new(TYPES_FILE, Pos::default(), format!("required type `{n}` is missing")))
        };
        let need_feat = |n: &str| {
            h.feature(n)
                .ok_or_else(|| LoadError::new(TYPES_FILE, Pos::default(), format!("required feature {n} is missing")))
        };
        let list_geo = ListGeometry {
            first: need_feat("FIRST")?,
            rest: need_feat("REST")?,
            list: need_feat("LIST")?,
            last: need_feat("LAST")?,
            list_t: need_type("*list*")?,
            cons: need_type("*cons*")?,
            null: need_type("*null*")?,
            diff_list: need_type("*diff-list*")?,
        };
        let geometry = Geometry {
            args: need_feat("ARGS")?,
            first: list_geo.first,
            rest: list_geo.rest,
            list: list_geo.list,
            last: list_geo.last,
            cons: list_geo.cons,
            null: list_geo.null,
        };

        let mut bodies = HashMap::new();
        for (name, conj, pos) in bodies_src {
            bodies.insert(h.lookup(&name).expect("declared"), (conj, pos));
        }
        let mut c = Compiler::new(&h, list_geo, bodies);
        let in_file = |file: &'static str| move |e: CompileError| LoadError::new(file, e.pos, e.message);

        // Every type's constraint must be consistent.
        for d in types {
            let t = h.lookup(&d.name).expect("declared");
            c.constraint(t, d.pos).map_err(in_file(TYPES_FILE))?;
        }

        let (stem_f, keyrel_f, pred_f) = (need_feat("STEM")?, need_feat("KEYREL")?, need_feat("PRED")?);
        let string_t = need_type("string")?;
        let string_at = |fs: &FeatureStructure, path: &[Feature]| -> Option<String> {
            let n = fs.follow(fs.root(), path)?;
            let t = fs.ty(n);
            if t == string_t {
                return None;
            }
            h.subtype_of(t, string_t).then(|| h.name(t).trim_matches('"').to_string())
        };

        let mut lexicon = Vec::new();
        let mut by_lemma: HashMap<String, Vec<usize>> = HashMap::new();
        let mut seen = BTreeSet::new();
        for d in &src.defs[LEXICON_FILE] {
            let Body::Plain(conj) = &d.body else {
                return Err(LoadError::new(LEXICON_FILE, d.pos, "rule syntax is not allowed in the lexicon").into());
            };
            if !seen.insert(d.name.clone()) {
                return Err(LoadError::new(LEXICON_FILE, d.pos, format!("duplicate entry `{}`", d.name)).into());
            }
            let (ltype, tpos) = first_type(conj).ok_or_else(|| {
                LoadError::new(LEXICON_FILE, d.pos, format!("entry `{}` has no lexical type", d.name))
            })?;
            let lexical_type =
                h.lookup(ltype).ok_or_else(|| LoadError::new(LEXICON_FILE, tpos, format!("unknown type `{ltype}`")))?;
            let fs = c.compile(conj, d.pos).map_err(in_file(LEXICON_FILE))?;
            let stem = string_at(&fs, &[stem_f])
                .ok_or_else(|| LoadError::new(LEXICON_FILE, d.pos, format!("entry `{}` has no STEM", d.name)))?;
            let predicate = string_at(&fs, &[keyrel_f, pred_f]).unwrap_or_default();
            if predicate.is_empty() {
                return Err(
                    LoadError::new(LEXICON_FILE, d.pos, format!("entry `{}` has no KEYREL.PRED", d.name)).into()
                );
            }
            by_lemma.entry(stem.clone()).or_default().push(lexicon.len());
            lexicon.push(LexicalEntry { name: d.name.clone(), lemma: stem.clone(), lexical_type, stem, predicate, fs });
        }

        let mut lexrules = Vec::new();
        let mut lr_index = HashMap::new();
        for d in &src.defs[LEXRULES_FILE] {
            let Body::Rule { inflecting, input, output } = &d.body else {
                return Err(LoadError::new(LEXRULES_FILE, d.pos, "expected `name := [%infl] input => output .`").into());
            };
            if lr_index.insert(d.name.clone(), lexrules.len()).is_some() {
                return Err(LoadError::new(LEXRULES_FILE, d.pos, format!("duplicate rule `{}`", d.name)).into());
            }
            lexrules.push(LexicalRule {
                name: d.name.clone(),
                inflecting: *inflecting,
                input: c.compile(input, d.pos).map_err(in_file(LEXRULES_FILE))?,
                output: c.compile(output, d.pos).map_err(in_file(LEXRULES_FILE))?,
            });
        }

        let mut rules = Vec::new();
        let mut rule_names = BTreeSet::new();
        for d in &src.defs[RULES_FILE] {
            let Body::Plain(conj) = &d.body else {
                return Err(LoadError::new(RULES_FILE, d.pos, "rule syntax is only for lexical rules").into());
            };
            if !rule_names.insert(d.name.clone()) || lr_index.contains_key(&d.name) {
                return Err(LoadError::new(RULES_FILE, d.pos, format!("duplicate rule `{}`", d.name)).into());
            }
            let fs = c.compile(conj, d.pos).map_err(in_file(RULES_FILE))?;
            let daughters = daughter_paths(&fs, &geometry);
            if !(1..=2).contains(&daughters.len()) {
                return Err(LoadError::new(
                    RULES_FILE,
                    d.pos,
                    format!("rule `{}` must have one or two daughters on ARGS, found {}", d.name, daughters.len()),
                )
                .into());
            }
            rules.push(PhraseRule { name: d.name.clone(), fs, daughters });
        }

        let mut roots = Vec::new();
        for d in &src.defs[ROOTS_FILE] {
            let Body::Plain(conj) = &d.body else {
                return Err(LoadError::new(ROOTS_FILE, d.pos, "rule syntax is not allowed in root conditions").into());
            };
            roots
                .push(RootCondition { name: d.name.clone(), fs: c.compile(conj, d.pos).map_err(in_file(ROOTS_FILE))? });
        }
        if roots.is_empty() {
            return Err(LoadError::new(ROOTS_FILE, Pos::default(), "no root condition defined").into());
        }

        let mut tagmap = BTreeMap::new();
        for (i, line) in src.tagmap.lines().enumerate() {
            let pos = Pos { line: i + 1, col: 1 };
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (tag, chain) = line.split_once('\t').unwrap_or((line, ""));
            let tag = tag.trim();
            let mut ids = Vec::new();
            for name in chain.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let id = *lr_index
                    .get(name)
                    .ok_or_else(|| LoadError::new(TAGMAP_FILE, pos, format!("unknown lexical rule `{name}`")))?;
                ids.push(id);
            }
            if tagmap.insert(tag.to_string(), ids).is_some() {
                return Err(LoadError::new(TAGMAP_FILE, pos, format!("duplicate tag `{tag}`")).into());
            }
        }

        let morph = MorphTable::parse(&src.morph)
            .map_err(|e| LoadError::new(MORPH_FILE, Pos { line: e.line, col: 1 }, e.message))?;
        for (i, (_, r)) in morph.rows().iter().enumerate() {
            if !tagmap.contains_key(&r.tag) {
                return Err(LoadError::new(
                    MORPH_FILE,
                    Pos::default(),
                    format!("row {} uses tag `{}` missing from {TAGMAP_FILE}", i + 1, r.tag),
                )
                .into());
            }
        }

        let mut constraints = Vec::with_capacity(h.len());
        for t in h.types() {
            constraints.push(c.constraint(t, Pos::default()).map_err(in_file(TYPES_FILE))?);
        }
        drop(c);
        Ok(Grammar {
            hierarchy: h,
            geometry,
            constraints,
            lexicon,
            by_lemma,
            lexrules,
            rules,
            roots,
            tagmap,
            options,
            morph,
            version,
        })
    }

    pub fn hierarchy(&self) -> &TypeHierarchy {
        &self.hierarchy
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn lexicon(&self) -> &[LexicalEntry] {
        &self.lexicon
    }

    pub fn entries_for(&self, lemma: &str) -> impl Iterator<Item = &LexicalEntry> {
        self.by_lemma.get(lemma).into_iter().flatten().map(|&i| &self.lexicon[i])
    }

    /// Distinct lemmas in the lexicon.
    pub fn lemma_count(&self) -> usize {
        self.by_lemma.len()
    }

    pub fn lexical_rules(&self) -> &[LexicalRule] {
        &self.lexrules
    }

    pub fn rules(&self) -> &[PhraseRule] {
        &self.rules
    }

    pub fn roots(&self) -> &[RootCondition] {
        &self.roots
    }

    pub fn tagmap(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.tagmap
    }

    pub fn options(&self) -> &BTreeMap<String, bool> {
        &self.options
    }

    pub fn option(&self, name: &str) -> Option<bool> {
        self.options.get(name).copied()
    }

    pub fn morph(&self) -> &MorphTable {
        &self.morph
    }

    /// SHA-256 over the grammar files and the effective options.
    pub fn version(&self) -> &str {
        &self.version
    }

    /// Full constraint of a type, including everything inherited.
    pub fn instantiate_type(&self, t: TypeId) -> &FeatureStructure {
        &self.constraints[t.index()]
    }

    /// Lexical structures for `lemma` realizing `tag`, each entry followed
    /// through the tag's rule chain. Entries that fail are dropped.
    pub fn lexical_analyses(&self, lemma: &str, tag: &str) -> Result<Vec<LexicalAnalysis>, LookupError> {
        let chain = self.tagmap.get(tag).ok_or_else(|| LookupError::UnknownTag(tag.to_string()))?;
        let mut out = Vec::new();
        'entries: for &e in self.by_lemma.get(lemma).into_iter().flatten() {
            let mut fs = self.lexicon[e].fs.clone();
            for &r in chain {
                match self.lexrules[r].apply(&self.hierarchy, &fs) {
                    Ok(next) => fs = next,
                    Err(_) => continue 'entries,
                }
            }
            out.push(LexicalAnalysis { entry: e, rules: chain.clone(), fs });
        }
        Ok(out)
    }

    pub fn lookup_lexemes(&self, lemma: &str, tag: &str) -> Result<Vec<FeatureStructure>, LookupError> {
        Ok(self.lexical_analyses(lemma, tag)?.into_iter().map(|a| a.fs).collect())
    }

    /// True iff `fs` unifies with some root condition.
    pub fn satisfies_root(&self, fs: &FeatureStructure) -> bool {
        self.roots.iter().any(|r| unify(&self.hierarchy, fs, &r.fs).is_ok())
    }

    /// Elements of a FIRST/REST list starting at `n`, stopping at the first
    /// node that is not a cons cell, or at `stop`.
    pub fn list_items(&self, fs: &FeatureStructure, n: u32, stop: Option<u32>) -> Vec<u32> {
        let g = &self.geometry;
        let mut out = Vec::new();
        let mut cur = n;
        while Some(cur) != stop {
            let (Some(first), Some(rest)) = (fs.get(cur, g.first), fs.get(cur, g.rest)) else { break };
            out.push(first);
            cur = rest;
        }
        out
    }

    /// Builds an empty builder over this grammar's hierarchy.
    pub fn builder(&self) -> FsBuilder<'_> {
        FsBuilder::new(&self.hierarchy)
    }
}

fn violation_type(v: &Violation) -> Option<&str> {
    match v {
        Violation::DuplicateType(t) => Some(t),
        Violation::UnknownParent { ty, .. }
        | Violation::UnknownValueType { ty, .. }
        | Violation::AppropriatenessWidened { ty, .. }
        | Violation::AppropriatenessConflict { ty, .. } => Some(ty),
        Violation::Cycle(ts) => ts.first().map(String::as_str),
        Violation::NotBoundedComplete { a, .. } => Some(a),
        Violation::FeatureIntroducedTwice { types, .. } => types.first().map(String::as_str),
        Violation::NoRoot | Violation::MultipleRoots(_) => None,
    }
}

fn daughter_paths(fs: &FeatureStructure, g: &Geometry) -> Vec<Vec<Feature>> {
    let mut out = Vec::new();
    let Some(mut cur) = fs.get(fs.root(), g.args) else { return out };
    let mut path = vec![g.args];
    while fs.ty(cur) != g.null {
        let (Some(_), Some(rest)) = (fs.get(cur, g.first), fs.get(cur, g.rest)) else {
            return Vec::new();
        };
        let mut p = path.clone();
        p.push(g.first);
        out.push(p);
        path.push(g.rest);
        cur = rest;
    }
    out
}
