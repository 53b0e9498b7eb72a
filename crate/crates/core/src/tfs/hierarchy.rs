//! Type hierarchy: a bounded-complete partial order of types with
//! per-type feature appropriateness.
//!
//! A hierarchy is described by a [`HierarchySpec`] (names, immediate parents
//! and the features each type mentions) and compiled with
//! [`TypeHierarchy::new`], which refuses anything that [`validate`] flags.
//! Once built, GLBs are answered from a precomputed table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Dense index of a type inside one [`TypeHierarchy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub(crate) u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned feature name. Ids are assigned in lexicographic order of the
/// names, so comparing ids compares names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feature(pub(crate) u16);

impl Feature {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One type declaration before compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parents: Vec<String>,
    /// Features mentioned at the top level of the type's own constraint,
    /// with the value type written there (if any).
    pub features: Vec<(String, Option<String>)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HierarchySpec {
    pub types: Vec<TypeDecl>,
}

impl HierarchySpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style helper used heavily in tests.
    pub fn with(mut self, name: &str, parents: &[&str], features: &[(&str, &str)]) -> Self {
        self.add(name, parents, features);
        self
    }

    pub fn add(&mut self, name: &str, parents: &[&str], features: &[(&str, &str)]) {
        self.types.push(TypeDecl {
            name: name.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            features: features.iter().map(|(f, v)| (f.to_string(), Some(v.to_string()))).collect(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DuplicateType(String),
    UnknownParent {
        ty: String,
        parent: String,
    },
    UnknownValueType {
        ty: String,
        feature: String,
        value: String,
    },
    Cycle(Vec<String>),
    NoRoot,
    MultipleRoots(Vec<String>),
    /// `a` and `b` share subtypes but have no unique greatest one; `maximal`
    /// lists the maximal common lower bounds.
    NotBoundedComplete {
        a: String,
        b: String,
        maximal: Vec<String>,
    },
    FeatureIntroducedTwice {
        feature: String,
        types: Vec<String>,
    },
    /// A subtype's value restriction is not below an inherited one.
    AppropriatenessWidened {
        ty: String,
        feature: String,
        value: String,
        inherited: String,
    },
    /// Two inherited restrictions for the same feature have no common subtype.
    AppropriatenessConflict {
        ty: String,
        feature: String,
        values: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateType(t) => write!(f, "type `{t}` defined more than once"),
            Violation::UnknownParent { ty, parent } => {
                write!(f, "type `{ty}` has unknown parent `{parent}`")
            }
            Violation::UnknownValueType { ty, feature, value } => {
                write!(f, "type `{ty}` restricts {feature} to unknown type `{value}`")
            }
            Violation::Cycle(ts) => write!(f, "cycle in type hierarchy: {}", ts.join(" -> ")),
            Violation::NoRoot => write!(f, "hierarchy has no root type"),
            Violation::MultipleRoots(rs) => write!(f, "multiple root types: {}", rs.join(", ")),
            Violation::NotBoundedComplete { a, b, maximal } => write!(
                f,
                "types `{a}` and `{b}` have no unique greatest lower bound (maximal common subtypes: {})",
                maximal.join(", ")
            ),
            Violation::FeatureIntroducedTwice { feature, types } => {
                write!(f, "feature {feature} introduced by unrelated types: {}", types.join(", "))
            }
            Violation::AppropriatenessWidened { ty, feature, value, inherited } => {
                write!(f, "type `{ty}` widens {feature} to `{value}` (inherited restriction `{inherited}`)")
            }
            Violation::AppropriatenessConflict { ty, feature, values } => {
                write!(f, "type `{ty}` inherits incompatible restrictions for {feature}: {}", values.join(", "))
            }
        }
    }
}

/// Result of [`validate`]. Empty means the spec compiles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Fixed-width bitset over type indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TypeSet {
    words: Vec<u64>,
}

impl TypeSet {
    fn new(n: usize) -> Self {
        TypeSet { words: vec![0; n.div_ceil(64)] }
    }
    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }
    fn union_with(&mut self, other: &TypeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
    fn intersection(&self, other: &TypeSet) -> TypeSet {
        TypeSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }
    fn len(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
    fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b))
    }
}

/// Raw indexing of a spec, shared by validation and compilation.
struct Indexed {
    names: Vec<String>,
    by_name: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
}

fn index_spec(spec: &HierarchySpec, out: &mut Vec<Violation>) -> Indexed {
    let mut names = Vec::new();
    let mut by_name = HashMap::new();
    for decl in &spec.types {
        if by_name.contains_key(&decl.name) {
            out.push(Violation::DuplicateType(decl.name.clone()));
            continue;
        }
        by_name.insert(decl.name.clone(), names.len());
        names.push(decl.name.clone());
    }
    let mut parents = vec![Vec::new(); names.len()];
    let mut seen = vec![false; names.len()];
    for decl in &spec.types {
        let i = by_name[&decl.name];
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        for p in &decl.parents {
            match by_name.get(p) {
                Some(&pi) => {
                    if !parents[i].contains(&pi) {
                        parents[i].push(pi)
                    }
                }
                None => out.push(Violation::UnknownParent { ty: decl.name.clone(), parent: p.clone() }),
            }
        }
    }
    Indexed { names, by_name, parents }
}

/// Returns a topological order (parents before children) or the first cycle found.
fn topo_order(parents: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = parents.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        parents: &[Vec<usize>],
        mark: &mut [Mark],
        order: &mut Vec<usize>,
        stack: &mut Vec<usize>,
    ) -> Result<(), Vec<usize>> {
        match mark[v] {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let pos = stack.iter().position(|&s| s == v).unwrap_or(0);
                let mut cyc = stack[pos..].to_vec();
                cyc.push(v);
                return Err(cyc);
            }
            Mark::New => {}
        }
        mark[v] = Mark::Active;
        stack.push(v);
        for &p in &parents[v] {
            visit(p, parents, mark, order, stack)?;
        }
        stack.pop();
        mark[v] = Mark::Done;
        order.push(v);
        Ok(())
    }

    for v in 0..n {
        visit(v, parents, &mut mark, &mut order, &mut stack)?;
    }
    Ok(order)
}

/// Checks a hierarchy spec: cycles, roots, bounded completeness and
/// feature appropriateness. An empty report means [`TypeHierarchy::new`]
/// will succeed.
pub fn validate(spec: &HierarchySpec) -> ValidationReport {
    match analyze(spec) {
        Ok(_) => ValidationReport::default(),
        Err(report) => report,
    }
}

struct Analysis {
    idx: Indexed,
    order: Vec<usize>,
    ancestors: Vec<TypeSet>,
    descendants: Vec<TypeSet>,
    glb: Vec<Option<u32>>,
    root: usize,
}

fn analyze(spec: &HierarchySpec) -> Result<Analysis, ValidationReport> {
    let mut violations = Vec::new();
    let idx = index_spec(spec, &mut violations);
    let n = idx.names.len();

    let order = match topo_order(&idx.parents) {
        Ok(o) => o,
        Err(cycle) => {
            violations.push(Violation::Cycle(cycle.iter().map(|&i| idx.names[i].clone()).collect()));
            return Err(ValidationReport { violations });
        }
    };

    let roots: Vec<usize> = (0..n).filter(|&i| idx.parents[i].is_empty()).collect();
    let root = match roots.as_slice() {
        [] => {
            violations.push(Violation::NoRoot);
            return Err(ValidationReport { violations });
        }
        [r] => *r,
        many => {
            violations.push(Violation::MultipleRoots(many.iter().map(|&i| idx.names[i].clone()).collect()));
            many[0]
        }
    };

    // Reflexive-transitive closures.
    let mut ancestors: Vec<TypeSet> = vec![TypeSet::new(n); n];
    for &v in &order {
        let mut set = TypeSet::new(n);
        set.insert(v);
        for &p in &idx.parents[v] {
            let pa = ancestors[p].clone();
            set.union_with(&pa);
        }
        ancestors[v] = set;
    }
    let mut descendants: Vec<TypeSet> = vec![TypeSet::new(n); n];
    for (v, anc) in ancestors.iter().enumerate() {
        for a in anc.iter() {
            descendants[a].insert(v);
        }
    }

    // Greatest lower bounds; a pair is fine if the common downset has a
    // member whose own downset is the whole common downset.
    let mut glb = vec![None; n * n];
    for a in 0..n {
        glb[a * n + a] = Some(a as u32);
        for b in (a + 1)..n {
            let common = descendants[a].intersection(&descendants[b]);
            if common.is_empty() {
                continue;
            }
            let size = common.len();
            let best = common.iter().find(|&c| descendants[c].len() == size);
            match best {
                Some(c) => {
                    glb[a * n + b] = Some(c as u32);
                    glb[b * n + a] = Some(c as u32);
                }
                None => {
                    let maximal: Vec<String> = common
                        .iter()
                        .filter(|&c| ancestors[c].intersection(&common).len() == 1)
                        .map(|c| idx.names[c].clone())
                        .collect();
                    violations.push(Violation::NotBoundedComplete {
                        a: idx.names[a].clone(),
                        b: idx.names[b].clone(),
                        maximal,
                    });
                }
            }
        }
    }

    check_appropriateness(spec, &idx, &ancestors, &glb, &mut violations);

    if violations.is_empty() {
        Ok(Analysis { idx, order, ancestors, descendants, glb, root })
    } else {
        Err(ValidationReport { violations })
    }
}

fn check_appropriateness(
    spec: &HierarchySpec,
    idx: &Indexed,
    ancestors: &[TypeSet],
    glb: &[Option<u32>],
    out: &mut Vec<Violation>,
) {
    let n = idx.names.len();
    // feature -> [(declaring type, value type)]
    let mut decls: BTreeMap<&str, Vec<(usize, Option<usize>)>> = BTreeMap::new();
    for decl in &spec.types {
        let Some(&t) = idx.by_name.get(&decl.name) else { continue };
        for (feat, value) in &decl.features {
            let v = match value {
                Some(v) => match idx.by_name.get(v) {
                    Some(&vi) => Some(vi),
                    None => {
                        out.push(Violation::UnknownValueType {
                            ty: decl.name.clone(),
                            feature: feat.clone(),
                            value: v.clone(),
                        });
                        continue;
                    }
                },
                None => None,
            };
            decls.entry(feat.as_str()).or_default().push((t, v));
        }
    }
    for (feat, ds) in &decls {
        let mut intro: BTreeSet<usize> = BTreeSet::new();
        for &(t, _) in ds {
            let has_proper_ancestor = ds.iter().any(|&(o, _)| o != t && ancestors[t].contains(o));
            if !has_proper_ancestor {
                intro.insert(t);
            }
        }
        if intro.len() > 1 {
            out.push(Violation::FeatureIntroducedTwice {
                feature: feat.to_string(),
                types: intro.iter().map(|&t| idx.names[t].clone()).collect(),
            });
        }
        for &(t, v) in ds {
            let Some(v) = v else { continue };
            for &(o, w) in ds {
                let Some(w) = w else { continue };
                if o != t && ancestors[t].contains(o) && !ancestors[v].contains(w) {
                    out.push(Violation::AppropriatenessWidened {
                        ty: idx.names[t].clone(),
                        feature: feat.to_string(),
                        value: idx.names[v].clone(),
                        inherited: idx.names[w].clone(),
                    });
                }
            }
        }
        // Restrictions inherited along unrelated paths must be compatible.
        for (t, above) in ancestors.iter().enumerate() {
            let vals: Vec<usize> = ds.iter().filter(|&&(o, _)| above.contains(o)).filter_map(|&(_, v)| v).collect();
            if vals.len() < 2 {
                continue;
            }
            let mut acc = Some(vals[0]);
            for &v in &vals[1..] {
                acc = acc.and_then(|a| glb[a * n + v].map(|g| g as usize));
            }
            if acc.is_none() {
                out.push(Violation::AppropriatenessConflict {
                    ty: idx.names[t].clone(),
                    feature: feat.to_string(),
                    values: vals.iter().map(|&v| idx.names[v].clone()).collect(),
                });
            }
        }
    }
}

/// A validated, immutable type hierarchy.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    names: Vec<String>,
    by_name: HashMap<String, TypeId>,
    parents: Vec<Vec<TypeId>>,
    /// Types in an order where every type follows its parents.
    order: Vec<TypeId>,
    ancestors: Vec<TypeSet>,
    descendants: Vec<TypeSet>,
    glb: Vec<Option<u32>>,
    root: TypeId,
    features: Vec<String>,
    feature_ids: HashMap<String, Feature>,
    /// Type that introduces each feature.
    introducer: Vec<TypeId>,
    /// Per type, the effective value restriction of every appropriate feature.
    approp: Vec<BTreeMap<Feature, TypeId>>,
    /// Per type, the features with a restriction written at that type.
    own_approp: Vec<BTreeMap<Feature, TypeId>>,
}

impl TypeHierarchy {
    pub fn new(spec: &HierarchySpec) -> Result<TypeHierarchy, ValidationReport> {
        let Analysis { idx, order, ancestors, descendants, glb, root } = analyze(spec)?;
        let n = idx.names.len();

        let mut feat_names: Vec<String> = spec
            .types
            .iter()
            .flat_map(|d| d.features.iter().map(|(f, _)| f.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        feat_names.sort();
        let feature_ids: HashMap<String, Feature> =
            feat_names.iter().enumerate().map(|(i, f)| (f.clone(), Feature(i as u16))).collect();

        let tid = |i: usize| TypeId(i as u32);
        let mut own_approp: Vec<BTreeMap<Feature, TypeId>> = vec![BTreeMap::new(); n];
        let mut declares: Vec<Vec<usize>> = vec![Vec::new(); feat_names.len()];
        let mut seen = vec![false; n];
        for decl in &spec.types {
            let t = idx.by_name[&decl.name];
            if std::mem::replace(&mut seen[t], true) {
                continue;
            }
            for (f, v) in &decl.features {
                let fid = feature_ids[f];
                declares[fid.index()].push(t);
                let value = v.as_ref().map(|v| idx.by_name[v]).unwrap_or(root);
                let slot = own_approp[t].entry(fid).or_insert(tid(value));
                if let Some(g) = glb[slot.index() * n + value] {
                    *slot = TypeId(g);
                }
            }
        }
        let mut introducer = vec![tid(root); feat_names.len()];
        for (f, ds) in declares.iter().enumerate() {
            if let Some(&t) = ds.iter().find(|&&t| ds.iter().all(|&o| o == t || !ancestors[t].contains(o))) {
                introducer[f] = tid(t);
            }
        }

        let mut approp: Vec<BTreeMap<Feature, TypeId>> = vec![BTreeMap::new(); n];
        for &v in &order {
            let mut map: BTreeMap<Feature, TypeId> = BTreeMap::new();
            for &p in &idx.parents[v] {
                for (&f, &val) in &approp[p] {
                    let e = map.entry(f).or_insert(val);
                    if let Some(g) = glb[e.index() * n + val.index()] {
                        *e = TypeId(g);
                    }
                }
            }
            for (&f, &val) in &own_approp[v] {
                let e = map.entry(f).or_insert(val);
                if let Some(g) = glb[e.index() * n + val.index()] {
                    *e = TypeId(g);
                }
            }
            approp[v] = map;
        }

        Ok(TypeHierarchy {
            by_name: idx.by_name.iter().map(|(k, &v)| (k.clone(), tid(v))).collect(),
            parents: idx.parents.iter().map(|ps| ps.iter().map(|&p| tid(p)).collect()).collect(),
            names: idx.names,
            order: order.into_iter().map(tid).collect(),
            ancestors,
            descendants,
            glb,
            root: tid(root),
            features: feat_names,
            feature_ids,
            introducer,
            approp,
            own_approp,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> TypeId {
        self.root
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.names.len() as u32).map(TypeId)
    }

    /// All types, parents before children.
    pub fn topological(&self) -> &[TypeId] {
        &self.order
    }

    pub fn parents(&self, t: TypeId) -> &[TypeId] {
        &self.parents[t.index()]
    }

    /// True iff `a` equals `b` or lies below it.
    pub fn subtype_of(&self, a: TypeId, b: TypeId) -> bool {
        self.ancestors[a.index()].contains(b.index())
    }

    /// Greatest lower bound, or `None` when the types are incompatible.
    pub fn glb(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        self.glb[a.index() * self.names.len() + b.index()].map(TypeId)
    }

    /// Name-based variants of [`subtype_of`](Self::subtype_of) and
    /// [`glb`](Self::glb).
    pub fn subtype_of_named(&self, a: &str, b: &str) -> Result<bool, UnknownType> {
        Ok(self.subtype_of(self.require(a)?, self.require(b)?))
    }

    pub fn glb_named(&self, a: &str, b: &str) -> Result<Option<&str>, UnknownType> {
        Ok(self.glb(self.require(a)?, self.require(b)?).map(|t| self.name(t)))
    }

    pub fn require(&self, name: &str) -> Result<TypeId, UnknownType> {
        self.lookup(name).ok_or_else(|| UnknownType(name.to_string()))
    }

    /// Every type equal to or below `t`.
    pub fn subtypes(&self, t: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        self.descendants[t.index()].iter().map(|i| TypeId(i as u32))
    }

    /// Every type equal to or above `t`.
    pub fn supertypes(&self, t: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        self.ancestors[t.index()].iter().map(|i| TypeId(i as u32))
    }

    pub fn feature(&self, name: &str) -> Option<Feature> {
        self.feature_ids.get(name).copied()
    }

    pub fn feature_name(&self, f: Feature) -> &str {
        &self.features[f.index()]
    }

    pub fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        (0..self.features.len() as u16).map(Feature)
    }

    /// The unique type that introduces `f`.
    pub fn introducer(&self, f: Feature) -> TypeId {
        self.introducer[f.index()]
    }

    /// Value restriction of `f` at type `t`, or `None` when `f` is not
    /// appropriate for `t`.
    pub fn appropriate(&self, t: TypeId, f: Feature) -> Option<TypeId> {
        self.approp[t.index()].get(&f).copied()
    }

    /// Features whose restriction is written at `t` itself.
    pub fn own_appropriateness(&self, t: TypeId) -> impl Iterator<Item = (Feature, TypeId)> + '_ {
        self.own_approp[t.index()].iter().map(|(&f, &v)| (f, v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown type `{0}`")]
pub struct UnknownType(pub String);
