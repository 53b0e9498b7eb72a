use std::fmt;

use super::hierarchy::{Feature, TypeHierarchy, TypeId};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct NodeData {
    ty: TypeId,
    first_arc: u32,
    n_arcs: u32,
}

/// A typed, rooted, acyclic feature graph.
///
/// Nodes are always stored in depth-first preorder from the root (node 0),
/// visiting features in name order, so two structures that are identical up
/// to node renaming are also `==`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    nodes: Vec<NodeData>,
    arcs: Vec<(Feature, NodeId)>,
}

/// Sequence of feature names leading from a root to a node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeaturePath(pub Vec<String>);

impl FeaturePath {
    pub fn root() -> Self {
        FeaturePath(Vec::new())
    }

    pub fn parse(s: &str) -> Self {
        if s.is_empty() {
            return Self::root();
        }
        FeaturePath(s.split('.').map(str::to_string).collect())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    fn from_features(h: &TypeHierarchy, fs: &[Feature]) -> Self {
        FeaturePath(fs.iter().map(|&f| h.feature_name(f).to_string()).collect())
    }
}

impl fmt::Display for FeaturePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "<root>")
        } else {
            write!(f, "{}", self.0.join("."))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    /// The two types have no common subtype.
    Clash { left: TypeId, right: TypeId, left_name: String, right_name: String },
    /// The result would contain a cycle.
    Cycle,
}

/// Why two structures do not unify.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", self.describe())]
pub struct UnifyFailure {
    pub path: FeaturePath,
    pub kind: FailureKind,
}

impl UnifyFailure {
    fn describe(&self) -> String {
        match &self.kind {
            FailureKind::Clash { left_name, right_name, .. } => {
                format!("type clash at {}: `{left_name}` vs `{right_name}`", self.path)
            }
            FailureKind::Cycle => format!("cyclic structure at {}", self.path),
        }
    }

    /// The clashing type names, if this is a type clash.
    pub fn clash(&self) -> Option<(&str, &str)> {
        match &self.kind {
            FailureKind::Clash { left_name, right_name, .. } => Some((left_name, right_name)),
            FailureKind::Cycle => None,
        }
    }
}

/// Structural problems in a hand-built structure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FsError {
    #[error("node {0} referenced but not defined")]
    DanglingNode(usize),
    #[error("structure contains a cycle at {0}")]
    Cycle(FeaturePath),
    #[error("node {0} is unreachable from the root")]
    Unreachable(usize),
    #[error("feature {feature} is not appropriate for type `{ty}` at {path}")]
    Inappropriate { path: FeaturePath, ty: String, feature: String },
    #[error("feature {0} appears twice on one node")]
    DuplicateFeature(String),
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error(transparent)]
    UnknownType(#[from] super::hierarchy::UnknownType),
    #[error(transparent)]
    Unify(#[from] UnifyFailure),
}

impl FeatureStructure {
    /// Single-node structure of type `ty`.
    pub fn atom(ty: TypeId) -> Self {
        FeatureStructure { nodes: vec![NodeData { ty, first_arc: 0, n_arcs: 0 }], arcs: Vec::new() }
    }

    /// Builds a structure from explicit nodes (`(type, arcs)` per node) and a
    /// root index, checking references, acyclicity, reachability and
    /// appropriateness.
    pub fn from_nodes(
        h: &TypeHierarchy,
        nodes: &[(TypeId, Vec<(Feature, usize)>)],
        root: usize,
    ) -> Result<Self, FsError> {
        if root >= nodes.len() {
            return Err(FsError::DanglingNode(root));
        }
        for (_, arcs) in nodes {
            for (i, (f, c)) in arcs.iter().enumerate() {
                if *c >= nodes.len() {
                    return Err(FsError::DanglingNode(*c));
                }
                if arcs[..i].iter().any(|(g, _)| g == f) {
                    return Err(FsError::DuplicateFeature(h.feature_name(*f).to_string()));
                }
            }
        }
        let mut b = FsBuilder::new(h);
        let ids: Vec<NodeId> = nodes.iter().map(|(t, _)| b.node(*t)).collect();
        for (i, (_, arcs)) in nodes.iter().enumerate() {
            for &(f, c) in arcs {
                b.raw_arc(ids[i], f, ids[c]);
            }
        }
        // reachability
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            stack.extend(nodes[n].1.iter().map(|&(_, c)| c));
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(FsError::Unreachable(u));
        }
        let fs = b.finish(ids[root]).map_err(|e| match e.kind {
            FailureKind::Cycle => FsError::Cycle(e.path),
            _ => FsError::Unify(e),
        })?;
        fs.check(h)?;
        Ok(fs)
    }

    /// Builds a well-typed structure from path equations: `assigns` gives
    /// the type at the end of a dotted path, `corefs` pairs of paths that
    /// share a node. Intermediate nodes get the type introducing the next
    /// feature, and values their appropriate type.
    pub fn from_paths(
        h: &TypeHierarchy,
        root_type: &str,
        assigns: &[(&str, &str)],
        corefs: &[(&str, &str)],
    ) -> Result<Self, FsError> {
        let mut b = FsBuilder::new(h);
        let root = b.node(h.require(root_type)?);
        let feats = |p: &str| -> Result<Vec<Feature>, FsError> {
            FeaturePath::parse(p)
                .0
                .iter()
                .map(|f| h.feature(f).ok_or_else(|| FsError::UnknownFeature(f.clone())))
                .collect()
        };
        for (path, ty) in assigns {
            let n = b.ensure_path(root, &feats(path)?);
            let t = h.require(ty)?;
            let at = b.node(t);
            b.unify(n, at)?;
        }
        for (p, q) in corefs {
            let a = b.ensure_path(root, &feats(p)?);
            let c = b.ensure_path(root, &feats(q)?);
            b.unify(a, c)?;
        }
        b.well_type()?;
        Ok(b.finish(root)?)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ty(&self, n: NodeId) -> TypeId {
        self.nodes[n as usize].ty
    }

    pub fn root_type(&self) -> TypeId {
        self.ty(0)
    }

    /// Outgoing arcs of `n`, sorted by feature name.
    pub fn arcs(&self, n: NodeId) -> &[(Feature, NodeId)] {
        let d = &self.nodes[n as usize];
        &self.arcs[d.first_arc as usize..(d.first_arc + d.n_arcs) as usize]
    }

    pub fn get(&self, n: NodeId, f: Feature) -> Option<NodeId> {
        let arcs = self.arcs(n);
        arcs.binary_search_by_key(&f, |&(g, _)| g).ok().map(|i| arcs[i].1)
    }

    pub fn follow(&self, from: NodeId, path: &[Feature]) -> Option<NodeId> {
        path.iter().try_fold(from, |n, &f| self.get(n, f))
    }

    /// Follows a dotted path of feature names from the root.
    pub fn follow_names(&self, h: &TypeHierarchy, path: &str) -> Option<NodeId> {
        let p = FeaturePath::parse(path);
        let mut n = self.root();
        for f in &p.0 {
            n = self.get(n, h.feature(f)?)?;
        }
        Some(n)
    }

    /// Type name at a dotted path.
    pub fn type_at<'h>(&self, h: &'h TypeHierarchy, path: &str) -> Option<&'h str> {
        self.follow_names(h, path).map(|n| h.name(self.ty(n)))
    }

    /// Checks that every feature present is appropriate for its node's type.
    pub fn check(&self, h: &TypeHierarchy) -> Result<(), FsError> {
        let mut path = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        self.check_node(h, 0, &mut path, &mut seen)
    }

    fn check_node(
        &self,
        h: &TypeHierarchy,
        n: NodeId,
        path: &mut Vec<Feature>,
        seen: &mut [bool],
    ) -> Result<(), FsError> {
        if std::mem::replace(&mut seen[n as usize], true) {
            return Ok(());
        }
        let t = self.ty(n);
        for &(f, c) in self.arcs(n) {
            if h.appropriate(t, f).is_none() {
                return Err(FsError::Inappropriate {
                    path: FeaturePath::from_features(h, path),
                    ty: h.name(t).to_string(),
                    feature: h.feature_name(f).to_string(),
                });
            }
            path.push(f);
            self.check_node(h, c, path, seen)?;
            path.pop();
        }
        Ok(())
    }

    /// Copy of this structure with the given root features removed.
    pub fn restrict(&self, h: &TypeHierarchy, drop: &[Feature]) -> FeatureStructure {
        let mut b = FsBuilder::new(h);
        let base = b.embed(self);
        b.finish_restricted(base, drop).expect("restricting an acyclic structure")
    }

    /// Number of incoming arcs per node.
    fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.nodes.len()];
        for &(_, c) in &self.arcs {
            deg[c as usize] += 1;
        }
        deg
    }

    /// Indented attribute-value-matrix rendering with `#n` tags on shared
    /// nodes, numbered in first-visit order.
    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> AvmDisplay<'a> {
        AvmDisplay { fs: self, h }
    }
}

pub struct AvmDisplay<'a> {
    fs: &'a FeatureStructure,
    h: &'a TypeHierarchy,
}

impl fmt::Display for AvmDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = self.fs.in_degrees();
        let mut tags: Vec<Option<usize>> = vec![None; self.fs.nodes.len()];
        let mut next = 0;
        self.write_node(f, 0, 0, &deg, &mut tags, &mut next)
    }
}

impl AvmDisplay<'_> {
    fn write_node(
        &self,
        f: &mut fmt::Formatter<'_>,
        n: NodeId,
        indent: usize,
        deg: &[u32],
        tags: &mut [Option<usize>],
        next: &mut usize,
    ) -> fmt::Result {
        if deg[n as usize] > 1 {
            if let Some(t) = tags[n as usize] {
                return write!(f, "#{t}");
            }
            tags[n as usize] = Some(*next);
            write!(f, "#{} ", *next)?;
            *next += 1;
        }
        let name = self.h.name(self.fs.ty(n));
        let arcs = self.fs.arcs(n);
        if arcs.is_empty() {
            return write!(f, "{name}");
        }
        write!(f, "[ {name}")?;
        for &(feat, c) in arcs {
            write!(f, "\n{:width$}{} ", "", self.h.feature_name(feat), width = indent + 2)?;
            self.write_node(f, c, indent + 2, deg, tags, next)?;
        }
        write!(f, " ]")
    }
}

/// Mutable graph used to build and unify structures. Nodes are merged with
/// union-find; [`finish`](Self::finish) copies the part reachable from a
/// root into a fresh [`FeatureStructure`], so inputs are never modified.
pub struct FsBuilder<'h> {
    h: &'h TypeHierarchy,
    ty: Vec<TypeId>,
    arcs: Vec<Vec<(Feature, NodeId)>>,
    uf: Vec<NodeId>,
}

impl<'h> FsBuilder<'h> {
    pub fn new(h: &'h TypeHierarchy) -> Self {
        FsBuilder { h, ty: Vec::new(), arcs: Vec::new(), uf: Vec::new() }
    }

    pub fn hierarchy(&self) -> &'h TypeHierarchy {
        self.h
    }

    pub fn node(&mut self, ty: TypeId) -> NodeId {
        let id = self.ty.len() as NodeId;
        self.ty.push(ty);
        self.arcs.push(Vec::new());
        self.uf.push(id);
        id
    }

    /// Copies `fs` into the graph; returns the id of its root. Node `k` of
    /// `fs` becomes `base + k`.
    pub fn embed(&mut self, fs: &FeatureStructure) -> NodeId {
        let base = self.ty.len() as NodeId;
        for (i, d) in fs.nodes.iter().enumerate() {
            self.ty.push(d.ty);
            self.arcs.push(fs.arcs(i as NodeId).iter().map(|&(f, c)| (f, c + base)).collect());
            self.uf.push(base + i as NodeId);
        }
        base
    }

    pub fn find(&mut self, mut n: NodeId) -> NodeId {
        let mut root = n;
        while self.uf[root as usize] != root {
            root = self.uf[root as usize];
        }
        while self.uf[n as usize] != root {
            let next = self.uf[n as usize];
            self.uf[n as usize] = root;
            n = next;
        }
        root
    }

    pub fn ty(&mut self, n: NodeId) -> TypeId {
        let r = self.find(n);
        self.ty[r as usize]
    }

    pub fn get(&mut self, n: NodeId, f: Feature) -> Option<NodeId> {
        let r = self.find(n);
        let arcs = &self.arcs[r as usize];
        arcs.binary_search_by_key(&f, |&(g, _)| g).ok().map(|i| arcs[i].1)
    }

    pub fn follow(&mut self, from: NodeId, path: &[Feature]) -> Option<NodeId> {
        path.iter().try_fold(from, |n, &f| self.get(n, f))
    }

    /// Arcs of the representative of `n`.
    pub fn arcs_of(&mut self, n: NodeId) -> Vec<(Feature, NodeId)> {
        let r = self.find(n);
        self.arcs[r as usize].clone()
    }

    /// Ids of all current representatives.
    pub fn representatives(&mut self) -> Vec<NodeId> {
        (0..self.uf.len() as NodeId).filter(|&n| self.uf[n as usize] == n).collect()
    }

    fn raw_arc(&mut self, from: NodeId, f: Feature, to: NodeId) {
        let arcs = &mut self.arcs[from as usize];
        match arcs.binary_search_by_key(&f, |&(g, _)| g) {
            Ok(i) => arcs[i].1 = to,
            Err(i) => arcs.insert(i, (f, to)),
        }
    }

    /// Adds arc `from -f-> to`, unifying with an existing value.
    pub fn arc(&mut self, from: NodeId, f: Feature, to: NodeId) -> Result<(), UnifyFailure> {
        match self.get(from, f) {
            Some(existing) => {
                let mut path = vec![f];
                self.merge(existing, to, &mut path)
            }
            None => {
                let r = self.find(from);
                self.raw_arc(r, f, to);
                Ok(())
            }
        }
    }

    /// Returns the node at `path` from `from`, creating missing nodes typed
    /// with the hierarchy root.
    pub fn ensure_path(&mut self, from: NodeId, path: &[Feature]) -> NodeId {
        let mut n = from;
        for &f in path {
            n = match self.get(n, f) {
                Some(c) => c,
                None => {
                    let c = self.node(self.h.root());
                    let r = self.find(n);
                    self.raw_arc(r, f, c);
                    c
                }
            };
        }
        n
    }

    /// Narrows the type of `n` to its GLB with `t`.
    pub fn constrain(&mut self, n: NodeId, t: TypeId) -> Result<bool, UnifyFailure> {
        let r = self.find(n);
        let cur = self.ty[r as usize];
        match self.h.glb(cur, t) {
            Some(g) => {
                self.ty[r as usize] = g;
                Ok(g != cur)
            }
            None => Err(self.clash(&[], cur, t)),
        }
    }

    /// Unifies two nodes. On failure the path is relative to `a`; the graph
    /// is left in an unspecified state and should be discarded.
    pub fn unify(&mut self, a: NodeId, b: NodeId) -> Result<(), UnifyFailure> {
        let mut path = Vec::new();
        self.merge(a, b, &mut path)
    }

    fn clash(&self, path: &[Feature], left: TypeId, right: TypeId) -> UnifyFailure {
        UnifyFailure {
            path: FeaturePath::from_features(self.h, path),
            kind: FailureKind::Clash {
                left,
                right,
                left_name: self.h.name(left).to_string(),
                right_name: self.h.name(right).to_string(),
            },
        }
    }

    fn merge(&mut self, a: NodeId, b: NodeId, path: &mut Vec<Feature>) -> Result<(), UnifyFailure> {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return Ok(());
        }
        let (ta, tb) = (self.ty[a as usize], self.ty[b as usize]);
        let t = self.h.glb(ta, tb).ok_or_else(|| self.clash(path, ta, tb))?;
        self.uf[b as usize] = a;
        self.ty[a as usize] = t;
        let moved = std::mem::take(&mut self.arcs[b as usize]);
        for (f, bc) in moved {
            let ra = self.find(a);
            let arcs = &mut self.arcs[ra as usize];
            match arcs.binary_search_by_key(&f, |&(g, _)| g) {
                Ok(i) => {
                    let ac = arcs[i].1;
                    path.push(f);
                    self.merge(ac, bc, path)?;
                    path.pop();
                }
                Err(i) => arcs.insert(i, (f, bc)),
            }
        }
        Ok(())
    }

    /// Makes the graph well-typed: every node carrying a feature is narrowed
    /// to the feature's introducing type and every value to its appropriate
    /// type, until nothing changes.
    pub fn well_type(&mut self) -> Result<(), UnifyFailure> {
        loop {
            let mut changed = false;
            for n in self.representatives() {
                for (f, c) in self.arcs_of(n) {
                    changed |= self.constrain(n, self.h.introducer(f)).map_err(|mut e| {
                        e.path = FeaturePath(vec![self.h.feature_name(f).to_string()]);
                        e
                    })?;
                    let t = self.ty(n);
                    if let Some(v) = self.h.appropriate(t, f) {
                        changed |= self.constrain(c, v).map_err(|mut e| {
                            e.path = FeaturePath(vec![self.h.feature_name(f).to_string()]);
                            e
                        })?;
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Extracts the structure rooted at `root`.
    pub fn finish(self, root: NodeId) -> Result<FeatureStructure, UnifyFailure> {
        self.finish_restricted(root, &[])
    }

    /// Like [`finish`](Self::finish) but drops the given features at the root.
    pub fn finish_restricted(mut self, root: NodeId, drop: &[Feature]) -> Result<FeatureStructure, UnifyFailure> {
        #[derive(Clone, Copy)]
        enum State {
            New,
            Active,
            Done(NodeId),
        }
        // Compress every node first so the traversal only sees representatives.
        for n in 0..self.uf.len() as NodeId {
            self.find(n);
        }
        let mut state = vec![State::New; self.uf.len()];
        let mut out = FeatureStructure { nodes: Vec::new(), arcs: Vec::new() };
        let mut pending: Vec<Vec<(Feature, NodeId)>> = Vec::new();

        fn visit(
            b: &FsBuilder<'_>,
            n: NodeId,
            state: &mut [State],
            out: &mut FeatureStructure,
            pending: &mut Vec<Vec<(Feature, NodeId)>>,
            path: &mut Vec<Feature>,
            drop: &[Feature],
        ) -> Result<NodeId, UnifyFailure> {
            let n = b.uf[n as usize];
            match state[n as usize] {
                State::Done(id) => return Ok(id),
                State::Active => {
                    return Err(UnifyFailure { path: FeaturePath::from_features(b.h, path), kind: FailureKind::Cycle })
                }
                State::New => {}
            }
            state[n as usize] = State::Active;
            let id = out.nodes.len() as NodeId;
            out.nodes.push(NodeData { ty: b.ty[n as usize], first_arc: 0, n_arcs: 0 });
            pending.push(Vec::new());
            let is_root = path.is_empty();
            for &(f, c) in &b.arcs[n as usize] {
                if is_root && drop.contains(&f) {
                    continue;
                }
                path.push(f);
                let cid = visit(b, c, state, out, pending, path, drop)?;
                path.pop();
                pending[id as usize].push((f, cid));
            }
            state[n as usize] = State::Done(id);
            Ok(id)
        }

        let mut path = Vec::new();
        visit(&self, root, &mut state, &mut out, &mut pending, &mut path, drop)?;
        for (i, arcs) in pending.into_iter().enumerate() {
            out.nodes[i].first_arc = out.arcs.len() as u32;
            out.nodes[i].n_arcs = arcs.len() as u32;
            out.arcs.extend(arcs);
        }
        Ok(out)
    }
}

/// Most general structure subsumed by both inputs.
pub fn unify(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> Result<FeatureStructure, UnifyFailure> {
    let mut w = FsBuilder::new(h);
    let ra = w.embed(a);
    let rb = w.embed(b);
    w.unify(ra, rb)?;
    w.finish(ra)
}

/// Unifies `b` into the node of `a` reached by `path`; the result keeps
/// `a`'s root. Failure paths are relative to that node.
pub fn unify_at(
    h: &TypeHierarchy,
    a: &FeatureStructure,
    path: &[Feature],
    b: &FeatureStructure,
) -> Result<FeatureStructure, UnifyFailure> {
    let mut w = FsBuilder::new(h);
    let ra = w.embed(a);
    let target = w.ensure_path(ra, path);
    let rb = w.embed(b);
    w.unify(target, rb)?;
    w.finish(ra)
}

/// True iff `general` subsumes `specific`: there is a root-preserving map
/// from general's nodes into specific's that keeps every feature, narrows
/// or keeps every type and maps shared nodes to shared nodes.
pub fn subsumes(h: &TypeHierarchy, general: &FeatureStructure, specific: &FeatureStructure) -> bool {
    let mut map: Vec<Option<NodeId>> = vec![None; general.len()];
    let mut stack = vec![(general.root(), specific.root())];
    while let Some((g, s)) = stack.pop() {
        match map[g as usize] {
            Some(prev) if prev == s => continue,
            Some(_) => return false,
            None => map[g as usize] = Some(s),
        }
        if !h.subtype_of(specific.ty(s), general.ty(g)) {
            return false;
        }
        for &(f, gc) in general.arcs(g) {
            match specific.get(s, f) {
                Some(sc) => stack.push((gc, sc)),
                None => return false,
            }
        }
    }
    true
}

/// Identical up to node renaming.
pub fn isomorphic(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> bool {
    subsumes(h, a, b) && subsumes(h, b, a)
}
