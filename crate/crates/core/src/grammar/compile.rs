//! Turning parsed definitions into expanded, well-typed feature structures.

use std::collections::HashMap;

use super::tdl::{Conj, ListTail, Pos, Term};
use crate::tfs::{Feature, FeatureStructure, FsBuilder, NodeId, TypeHierarchy, TypeId, UnifyFailure};

/// Features and types the list notations desugar to.
#[derive(Debug, Clone)]
pub(crate) struct ListGeometry {
    pub first: Feature,
    pub rest: Feature,
    pub list: Feature,
    pub last: Feature,
    pub list_t: TypeId,
    pub cons: TypeId,
    pub null: TypeId,
    pub diff_list: TypeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CompileError {
    pub pos: Pos,
    pub message: String,
}

fn at(pos: Pos, message: impl Into<String>) -> CompileError {
    CompileError { pos, message: message.into() }
}

fn describe(e: &UnifyFailure) -> String {
    e.to_string()
}

/// Type bodies plus memoized fully expanded constraints.
pub(crate) struct Compiler<'h> {
    pub h: &'h TypeHierarchy,
    pub geo: ListGeometry,
    /// Own constraint of each type (parents excluded) and its position.
    bodies: Vec<Option<(Conj, Pos)>>,
    /// Types with no constraint of their own or inherited.
    trivial: Vec<bool>,
    memo: Vec<Option<FeatureStructure>>,
    in_progress: Vec<bool>,
}

impl<'h> Compiler<'h> {
    pub fn new(h: &'h TypeHierarchy, geo: ListGeometry, bodies: HashMap<TypeId, (Conj, Pos)>) -> Self {
        let mut b = vec![None; h.len()];
        for (t, body) in bodies {
            b[t.index()] = Some(body);
        }
        let mut trivial = vec![true; h.len()];
        for &t in h.topological() {
            trivial[t.index()] = b[t.index()].is_none() && h.parents(t).iter().all(|p| trivial[p.index()]);
        }
        Compiler { h, geo, bodies: b, trivial, memo: vec![None; h.len()], in_progress: vec![false; h.len()] }
    }

    fn is_trivial(&self, t: TypeId) -> bool {
        self.trivial[t.index()]
    }

    /// Full constraint of `t`: its own body unified with every ancestor's,
    /// expanded until every node satisfies its type's constraint.
    pub fn constraint(&mut self, t: TypeId, pos: Pos) -> Result<FeatureStructure, CompileError> {
        if let Some(fs) = &self.memo[t.index()] {
            return Ok(fs.clone());
        }
        if self.in_progress[t.index()] {
            return Err(at(pos, format!("recursive constraint on type `{}`", self.h.name(t))));
        }
        self.in_progress[t.index()] = true;
        let result = self.build_constraint(t, pos);
        self.in_progress[t.index()] = false;
        let fs = result?;
        self.memo[t.index()] = Some(fs.clone());
        Ok(fs)
    }

    fn build_constraint(&mut self, t: TypeId, pos: Pos) -> Result<FeatureStructure, CompileError> {
        if self.is_trivial(t) {
            return Ok(FeatureStructure::atom(t));
        }
        let h = self.h;
        let mut b = FsBuilder::new(h);
        let root = b.node(t);
        for &p in h.parents(t) {
            let c = self.constraint(p, pos)?;
            let base = b.embed(&c);
            b.unify(root, base).map_err(|e| {
                at(pos, format!("type `{}` inherits inconsistent constraints: {}", h.name(t), describe(&e)))
            })?;
        }
        let mut tags = HashMap::new();
        if let Some((body, bpos)) = self.bodies[t.index()].clone() {
            self.compile_conj(&mut b, root, &body, &mut tags)?;
            let mut applied = HashMap::new();
            applied.insert(root, t);
            self.expand(&mut b, &mut applied, bpos)?;
        }
        b.finish(root).map_err(|e| at(pos, describe(&e)))
    }

    /// Compiles a definition body onto a fresh root and expands it.
    pub fn compile(&mut self, conj: &Conj, pos: Pos) -> Result<FeatureStructure, CompileError> {
        let mut b = FsBuilder::new(self.h);
        let root = b.node(self.h.root());
        let mut tags = HashMap::new();
        self.compile_conj(&mut b, root, conj, &mut tags)?;
        let mut applied = HashMap::new();
        self.expand(&mut b, &mut applied, pos)?;
        b.finish(root).map_err(|e| at(pos, describe(&e)))
    }

    fn constrain(&self, b: &mut FsBuilder<'_>, n: NodeId, t: TypeId, pos: Pos) -> Result<(), CompileError> {
        b.constrain(n, t).map(|_| ()).map_err(|e| at(pos, describe(&e)))
    }

    fn type_named(&self, name: &str, pos: Pos) -> Result<TypeId, CompileError> {
        self.h.lookup(name).ok_or_else(|| at(pos, format!("unknown type `{name}`")))
    }

    fn compile_conj(
        &mut self,
        b: &mut FsBuilder<'_>,
        node: NodeId,
        conj: &Conj,
        tags: &mut HashMap<String, NodeId>,
    ) -> Result<(), CompileError> {
        for term in conj {
            self.compile_term(b, node, term, tags)?;
        }
        Ok(())
    }

    fn compile_term(
        &mut self,
        b: &mut FsBuilder<'_>,
        node: NodeId,
        term: &Term,
        tags: &mut HashMap<String, NodeId>,
    ) -> Result<(), CompileError> {
        let g = self.geo.clone();
        match term {
            Term::Type(name, pos) => {
                let t = self.type_named(name, *pos)?;
                self.constrain(b, node, t, *pos)
            }
            Term::Str(s, pos) => {
                let t = self.type_named(&format!("\"{s}\""), *pos)?;
                self.constrain(b, node, t, *pos)
            }
            Term::Tag(name, pos) => match tags.get(name) {
                Some(&other) => b.unify(other, node).map_err(|e| at(*pos, describe(&e))),
                None => {
                    tags.insert(name.clone(), node);
                    Ok(())
                }
            },
            Term::Avm(pairs, _) => {
                for (path, value) in pairs {
                    let mut n = node;
                    for (f, fpos) in path {
                        let feat = self.h.feature(f).ok_or_else(|| at(*fpos, format!("unknown feature {f}")))?;
                        n = b.ensure_path(n, &[feat]);
                    }
                    self.compile_conj(b, n, value, tags)?;
                }
                Ok(())
            }
            Term::List { items, tail, pos } => {
                let mut cur = node;
                self.constrain(b, cur, g.list_t, *pos)?;
                for item in items {
                    self.constrain(b, cur, g.cons, *pos)?;
                    let first = b.ensure_path(cur, &[g.first]);
                    self.compile_conj(b, first, item, tags)?;
                    cur = b.ensure_path(cur, &[g.rest]);
                }
                match tail {
                    ListTail::Closed => self.constrain(b, cur, g.null, *pos),
                    ListTail::Open => self.constrain(b, cur, g.list_t, *pos),
                    ListTail::Dotted(rest) => self.compile_conj(b, cur, rest, tags),
                }
            }
            Term::DiffList(items, pos) => {
                self.constrain(b, node, g.diff_list, *pos)?;
                let mut cur = b.ensure_path(node, &[g.list]);
                let last = b.ensure_path(node, &[g.last]);
                for item in items {
                    self.constrain(b, cur, g.cons, *pos)?;
                    let first = b.ensure_path(cur, &[g.first]);
                    self.compile_conj(b, first, item, tags)?;
                    cur = b.ensure_path(cur, &[g.rest]);
                }
                b.unify(cur, last).map_err(|e| at(*pos, describe(&e)))
            }
        }
    }

    /// Well-types every node and applies each node's type constraint until
    /// nothing changes. `applied` maps representatives to the type whose
    /// constraint they already satisfy.
    fn expand(
        &mut self,
        b: &mut FsBuilder<'_>,
        applied: &mut HashMap<NodeId, TypeId>,
        pos: Pos,
    ) -> Result<(), CompileError> {
        let h = self.h;
        loop {
            let mut changed = false;
            for n in b.representatives() {
                // The node may have been merged earlier in this pass.
                if b.find(n) != n {
                    continue;
                }
                for (f, c) in b.arcs_of(n) {
                    changed |= b.constrain(n, h.introducer(f)).map_err(|e| {
                        at(pos, format!("feature {} not allowed here: {}", h.feature_name(f), describe(&e)))
                    })?;
                    let t = b.ty(n);
                    if let Some(v) = h.appropriate(t, f) {
                        changed |= b.constrain(c, v).map_err(|e| {
                            at(pos, format!("value of {} not appropriate: {}", h.feature_name(f), describe(&e)))
                        })?;
                    }
                }
                let r = b.find(n);
                let t = b.ty(r);
                if applied.get(&r) == Some(&t) {
                    continue;
                }
                if !self.is_trivial(t) {
                    let c = self.constraint(t, pos)?;
                    let base = b.embed(&c);
                    for k in 0..c.len() as NodeId {
                        applied.insert(base + k, c.ty(k));
                    }
                    b.unify(r, base).map_err(|e| {
                        at(pos, format!("constraint of `{}` does not apply: {}", h.name(t), describe(&e)))
                    })?;
                    changed = true;
                }
                let r = b.find(r);
                applied.insert(r, t);
            }
            if !changed {
                return Ok(());
            }
        }
    }
}
