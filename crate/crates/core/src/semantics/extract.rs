use std::collections::{BTreeMap, HashMap};

use super::{role_rank, Ep, Hcons, Mrs, Sort, Var};
use crate::grammar::Grammar;
use crate::tfs::{FeatureStructure, NodeId, TypeHierarchy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("structure does not satisfy any root condition")]
    NotRoot,
    #[error("malformed semantics at {path}: {message}")]
    Malformed { path: String, message: String },
}

fn malformed(path: &str, message: &str) -> ExtractError {
    ExtractError::Malformed { path: path.to_string(), message: message.to_string() }
}

/// MRS of a complete analysis. Structures that satisfy no root condition
/// are refused.
pub fn extract_mrs(g: &Grammar, fs: &FeatureStructure) -> Result<Mrs, ExtractError> {
    if !g.satisfies_root(fs) {
        return Err(ExtractError::NotRoot);
    }
    extract_semantics(g, fs)
}

/// MRS of any sign, complete or not.
pub fn extract_semantics(g: &Grammar, fs: &FeatureStructure) -> Result<Mrs, ExtractError> {
    let h = g.hierarchy();
    let mut x = Extractor { g, h, fs, vars: HashMap::new(), next: 0 };
    let top = x.var_at("SS.HOOK.LTOP")?;
    let index = x.var_at("SS.HOOK.INDEX")?;
    let mut eps = Vec::new();
    for (n, path) in x.diff_list("RELS")? {
        eps.push(x.ep(n, &path)?);
    }
    let mut hcons = Vec::new();
    for (n, path) in x.diff_list("HCONS")? {
        let hi = x.feature_var(n, "HARG", &path)?;
        let lo = x.feature_var(n, "LARG", &path)?;
        hcons.push(Hcons { hi, lo });
    }
    Ok(Mrs { top, index, eps, hcons })
}

struct Extractor<'a> {
    g: &'a Grammar,
    h: &'a TypeHierarchy,
    fs: &'a FeatureStructure,
    /// Node to variable, numbered in first-encounter order.
    vars: HashMap<NodeId, Var>,
    next: u32,
}

impl Extractor<'_> {
    fn node_at(&self, path: &str) -> Result<NodeId, ExtractError> {
        self.fs.follow_names(self.h, path).ok_or_else(|| malformed(path, "missing"))
    }

    fn var_at(&mut self, path: &str) -> Result<Var, ExtractError> {
        let n = self.node_at(path)?;
        self.var(n, path)
    }

    fn feature_var(&mut self, n: NodeId, f: &str, path: &str) -> Result<Var, ExtractError> {
        let p = format!("{path}.{f}");
        let feat = self.h.feature(f).ok_or_else(|| malformed(&p, "feature not declared"))?;
        let c = self.fs.get(n, feat).ok_or_else(|| malformed(&p, "missing"))?;
        self.var(c, &p)
    }

    fn sort_of(&self, n: NodeId, path: &str) -> Result<Sort, ExtractError> {
        let t = self.fs.ty(n);
        let is = |name: &str| self.h.lookup(name).is_some_and(|s| self.h.subtype_of(t, s));
        if is("h") {
            Ok(Sort::H)
        } else if is("e") {
            Ok(Sort::E)
        } else if is("x") {
            Ok(Sort::X)
        } else if is("semarg") || t == self.h.root() {
            Ok(Sort::I)
        } else {
            Err(malformed(path, &format!("`{}` is not a semantic variable", self.h.name(t))))
        }
    }

    fn var(&mut self, n: NodeId, path: &str) -> Result<Var, ExtractError> {
        if let Some(v) = self.vars.get(&n) {
            return Ok(v.clone());
        }
        let sort = self.sort_of(n, path)?;
        let mut v = Var::new(sort, self.next);
        self.next += 1;
        self.properties(n, &mut v.properties);
        self.vars.insert(n, v.clone());
        Ok(v)
    }

    /// Leaf values under a variable, named by their last feature. Values
    /// left at the feature's appropriate type carry no information.
    fn properties(&self, n: NodeId, out: &mut BTreeMap<String, String>) {
        for &(f, c) in self.fs.arcs(n) {
            if !self.fs.arcs(c).is_empty() {
                self.properties(c, out);
                continue;
            }
            let t = self.fs.ty(c);
            if Some(t) == self.h.appropriate(self.fs.ty(n), f) || t == self.h.root() {
                continue;
            }
            out.insert(self.h.feature_name(f).to_string(), self.h.name(t).to_string());
        }
    }

    /// Elements of the difference list at `name`, with their paths.
    fn diff_list(&self, name: &str) -> Result<Vec<(NodeId, String)>, ExtractError> {
        let geo = self.g.geometry();
        let d = self.node_at(name)?;
        let list = self.fs.get(d, geo.list).ok_or_else(|| malformed(&format!("{name}.LIST"), "missing"))?;
        let last = self.fs.get(d, geo.last).ok_or_else(|| malformed(&format!("{name}.LAST"), "missing"))?;
        let mut out = Vec::new();
        let mut cur = list;
        let mut path = format!("{name}.LIST");
        while cur != last {
            let (Some(first), Some(rest)) = (self.fs.get(cur, geo.first), self.fs.get(cur, geo.rest)) else {
                return Err(malformed(&path, "list does not reach LAST"));
            };
            out.push((first, format!("{path}.FIRST")));
            path.push_str(".REST");
            cur = rest;
        }
        Ok(out)
    }

    fn ep(&mut self, n: NodeId, path: &str) -> Result<Ep, ExtractError> {
        let pred_f = self.h.feature("PRED").ok_or_else(|| malformed(path, "PRED not declared"))?;
        let p = self.fs.get(n, pred_f).ok_or_else(|| malformed(&format!("{path}.PRED"), "missing"))?;
        let pname = self.h.name(self.fs.ty(p));
        let predicate = pname
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .ok_or_else(|| malformed(&format!("{path}.PRED"), "unspecified predicate"))?
            .to_string();
        let label = self.feature_var(n, "LBL", path)?;
        let mut roles: Vec<(String, NodeId)> = self
            .fs
            .arcs(n)
            .iter()
            .map(|&(f, c)| (self.h.feature_name(f).to_string(), c))
            .filter(|(r, _)| r != "PRED" && r != "LBL")
            .collect();
        roles.sort_by_key(|(r, _)| role_rank(r));
        let mut args = Vec::new();
        for (role, c) in roles {
            let v = self.var(c, &format!("{path}.{role}"))?;
            args.push((role, v));
        }
        Ok(Ep { predicate, label, args })
    }
}
