//! Minimal recursion semantics: extraction from parse results,
//! well-formedness, dependency conversion and comparison up to renaming.

mod canon;
mod dmrs;
mod extract;
mod wellformed;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use canon::{canonicalize, equivalent};
pub use dmrs::{to_dmrs, Dmrs, DmrsError, DmrsLink, DmrsNode, PostLabel};
pub use extract::{extract_mrs, extract_semantics, ExtractError};
pub use wellformed::{check_wellformed, Violation, WellformednessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    /// Event.
    E,
    /// Instance.
    X,
    /// Handle.
    H,
    /// Underspecified.
    I,
}

impl Sort {
    pub fn letter(self) -> char {
        match self {
            Sort::E => 'e',
            Sort::X => 'x',
            Sort::H => 'h',
            Sort::I => 'i',
        }
    }

    pub fn from_letter(c: char) -> Option<Sort> {
        match c {
            'e' => Some(Sort::E),
            'x' => Some(Sort::X),
            'h' => Some(Sort::H),
            'i' => Some(Sort::I),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub sort: Sort,
    pub index: u32,
    pub properties: BTreeMap<String, String>,
}

impl Var {
    pub fn new(sort: Sort, index: u32) -> Self {
        Var { sort, index, properties: BTreeMap::new() }
    }

    pub fn key(&self) -> (Sort, u32) {
        (self.sort, self.index)
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.sort.letter(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ep {
    pub predicate: String,
    pub label: Var,
    /// Roles in display order: ARG0, ARG1.., RSTR, BODY, then the rest.
    pub args: Vec<(String, Var)>,
}

impl Ep {
    pub fn arg(&self, role: &str) -> Option<&Var> {
        self.args.iter().find(|(r, _)| r == role).map(|(_, v)| v)
    }

    pub fn is_quantifier(&self) -> bool {
        self.arg("RSTR").is_some()
    }
}

/// Sort key putting ARG0..ARGn first, then RSTR and BODY.
pub(crate) fn role_rank(role: &str) -> (u8, u32, String) {
    if let Some(n) = role.strip_prefix("ARG").and_then(|d| d.parse::<u32>().ok()) {
        return (0, n, String::new());
    }
    match role {
        "RSTR" => (1, 0, String::new()),
        "BODY" => (2, 0, String::new()),
        _ => (3, 0, role.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hcons {
    pub hi: Var,
    pub lo: Var,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mrs {
    pub top: Var,
    pub index: Var,
    pub eps: Vec<Ep>,
    pub hcons: Vec<Hcons>,
}

impl Mrs {
    /// Every variable occurrence in display order.
    pub fn occurrences(&self) -> Vec<&Var> {
        let mut out = vec![&self.top, &self.index];
        for ep in &self.eps {
            out.push(&ep.label);
            out.extend(ep.args.iter().map(|(_, v)| v));
        }
        for hc in &self.hcons {
            out.push(&hc.hi);
            out.push(&hc.lo);
        }
        out
    }

    /// Applies `f` to every variable occurrence.
    pub fn map_vars(&self, mut f: impl FnMut(&Var) -> Var) -> Mrs {
        Mrs {
            top: f(&self.top),
            index: f(&self.index),
            eps: self
                .eps
                .iter()
                .map(|ep| Ep {
                    predicate: ep.predicate.clone(),
                    label: f(&ep.label),
                    args: ep.args.iter().map(|(r, v)| (r.clone(), f(v))).collect(),
                })
                .collect(),
            hcons: self.hcons.iter().map(|hc| Hcons { hi: f(&hc.hi), lo: f(&hc.lo) }).collect(),
        }
    }
}

/// Writes `[ TOP: h0 INDEX: e2 [ e TENSE: pres ] RELS: < ... > HCONS: < h5 qeq h7 > ]`,
/// with a variable's properties shown at its first occurrence.
impl fmt::Display for Mrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = std::collections::HashSet::new();
        let mut var = |f: &mut fmt::Formatter<'_>, v: &Var| -> fmt::Result {
            write!(f, "{}", v.name())?;
            if seen.insert(v.key()) && !v.properties.is_empty() {
                write!(f, " [ {}", v.sort.letter())?;
                for (k, val) in &v.properties {
                    write!(f, " {k}: {val}")?;
                }
                write!(f, " ]")?;
            }
            Ok(())
        };
        write!(f, "[ TOP: ")?;
        var(f, &self.top)?;
        write!(f, " INDEX: ")?;
        var(f, &self.index)?;
        write!(f, " RELS: <")?;
        for ep in &self.eps {
            write!(f, " [ {} LBL: ", ep.predicate)?;
            var(f, &ep.label)?;
            for (role, v) in &ep.args {
                write!(f, " {role}: ")?;
                var(f, v)?;
            }
            write!(f, " ]")?;
        }
        write!(f, " > HCONS: <")?;
        for hc in &self.hcons {
            write!(f, " ")?;
            var(f, &hc.hi)?;
            write!(f, " qeq ")?;
            var(f, &hc.lo)?;
        }
        write!(f, " > ]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad MRS text at token {token}: {message}")]
pub struct MrsSyntaxError {
    pub token: usize,
    pub message: String,
}

struct Reader {
    toks: Vec<String>,
    i: usize,
    props: HashMap<(Sort, u32), BTreeMap<String, String>>,
}

impl Reader {
    fn err(&self, m: impl Into<String>) -> MrsSyntaxError {
        MrsSyntaxError { token: self.i, message: m.into() }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.i).map(String::as_str)
    }

    fn next(&mut self) -> Result<String, MrsSyntaxError> {
        let t = self.toks.get(self.i).cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.i += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &str) -> Result<(), MrsSyntaxError> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            self.i -= 1;
            Err(self.err(format!("expected `{want}`, found `{t}`")))
        }
    }

    fn var(&mut self) -> Result<Var, MrsSyntaxError> {
        let t = self.next()?;
        let mut chars = t.chars();
        let sort = chars.next().and_then(Sort::from_letter).ok_or_else(|| self.err(format!("bad variable `{t}`")))?;
        let index: u32 = chars.as_str().parse().map_err(|_| self.err(format!("bad variable `{t}`")))?;
        let mut v = Var::new(sort, index);
        if self.peek() == Some("[") {
            self.i += 1;
            let s = self.next()?;
            if s != sort.letter().to_string() {
                return Err(self.err(format!("sort `{s}` does not match `{t}`")));
            }
            while self.peek() != Some("]") {
                let k = self.next()?;
                let k = k.strip_suffix(':').ok_or_else(|| self.err("expected `PROPERTY:`"))?.to_string();
                let val = self.next()?;
                v.properties.insert(k, val);
            }
            self.i += 1;
            self.props.entry(v.key()).or_insert_with(|| v.properties.clone());
        }
        Ok(v)
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c.is_whitespace() || matches!(c, '[' | ']' | '<' | '>') {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl FromStr for Mrs {
    type Err = MrsSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut r = Reader { toks: tokenize(s), i: 0, props: HashMap::new() };
        r.expect("[")?;
        r.expect("TOP:")?;
        let top = r.var()?;
        r.expect("INDEX:")?;
        let index = r.var()?;
        r.expect("RELS:")?;
        r.expect("<")?;
        let mut eps = Vec::new();
        while r.peek() == Some("[") {
            r.i += 1;
            let predicate = r.next()?;
            r.expect("LBL:")?;
            let label = r.var()?;
            let mut args = Vec::new();
            while r.peek() != Some("]") {
                let role = r.next()?;
                let role = role.strip_suffix(':').ok_or_else(|| r.err("expected `ROLE:`"))?.to_string();
                args.push((role, r.var()?));
            }
            r.i += 1;
            eps.push(Ep { predicate, label, args });
        }
        r.expect(">")?;
        r.expect("HCONS:")?;
        r.expect("<")?;
        let mut hcons = Vec::new();
        while r.peek() != Some(">") {
            let hi = r.var()?;
            r.expect("qeq")?;
            let lo = r.var()?;
            hcons.push(Hcons { hi, lo });
        }
        r.i += 1;
        r.expect("]")?;
        if r.i != r.toks.len() {
            return Err(r.err("trailing input"));
        }
        // Properties are written once; copy them to every occurrence.
        let props = std::mem::take(&mut r.props);
        let m = Mrs { top, index, eps, hcons };
        Ok(m.map_vars(|v| {
            let mut v = v.clone();
            if v.properties.is_empty() {
                if let Some(p) = props.get(&v.key()) {
                    v.properties = p.clone();
                }
            }
            v
        }))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// "Mis abuelos son famosos." as the fragment analyzes it.
    pub(crate) const COPULA: &str = "[ TOP: h0 INDEX: e1 [ e MOOD: indicative TENSE: pres ] RELS: < \
        [ _mi_q LBL: h2 ARG0: x3 [ x GEN: masc PERNUM: 3pl ] RSTR: h4 BODY: h5 ] \
        [ _abuelo_n LBL: h6 ARG0: x3 ] \
        [ _ser_v LBL: h0 ARG0: e1 ARG1: x3 ARG2: e7 ] \
        [ _famoso_a LBL: h8 ARG0: e7 ARG1: x3 ] > HCONS: < h4 qeq h6 > ]";

    pub(crate) fn copula() -> Mrs {
        COPULA.parse().unwrap()
    }

    #[test]
    fn text_round_trips() {
        let m = copula();
        assert_eq!(m.eps.len(), 4);
        assert_eq!(m.eps[1].arg("ARG0").unwrap().properties["GEN"], "masc");
        let again: Mrs = m.to_string().parse().unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_string(), m.to_string());
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!("[ TOP: h0 ]".parse::<Mrs>().is_err());
        assert!("[ TOP: q0 INDEX: e1 RELS: < > HCONS: < > ]".parse::<Mrs>().is_err());
        assert!("[ TOP: h0 INDEX: e1 RELS: < > HCONS: < > ] x".parse::<Mrs>().is_err());
        assert!("[ TOP: h0 INDEX: e1 RELS: < > HCONS: < > ]".parse::<Mrs>().is_ok());
    }

    #[test]
    fn roles_sort_numerically_then_scopal() {
        let mut r = vec!["BODY", "ARG10", "RSTR", "ARG2", "ARG0"];
        r.sort_by_key(|s| role_rank(s));
        assert_eq!(r, ["ARG0", "ARG2", "ARG10", "RSTR", "BODY"]);
    }
}
