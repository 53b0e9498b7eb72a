use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::{Mrs, Sort};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ConflictingProperties(String),
    MissingArg0(String),
    LabelNotHandle(String),
    DanglingVariable(String),
    DanglingQeqHi(String),
    DanglingQeqLo(String),
    QeqSelf(String),
    LabelAsArgument(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ConflictingProperties(v) => write!(f, "conflicting properties on {v}"),
            Violation::MissingArg0(p) => write!(f, "EP {p} has no ARG0"),
            Violation::LabelNotHandle(p) => write!(f, "label of EP {p} is not a handle"),
            Violation::DanglingVariable(v) if v.starts_with('x') => write!(f, "dangling instance variable {v}"),
            Violation::DanglingVariable(v) => write!(f, "dangling variable {v}"),
            Violation::DanglingQeqHi(v) => write!(f, "dangling qeq hi {v}"),
            Violation::DanglingQeqLo(v) => write!(f, "dangling qeq lo {v}"),
            Violation::QeqSelf(v) => write!(f, "qeq relates {v} to itself"),
            Violation::LabelAsArgument(v) => write!(f, "handle {v} is both a label and a non-scopal argument"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WellformednessReport {
    pub violations: Vec<Violation>,
}

impl WellformednessReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for WellformednessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "well-formed");
        }
        let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Structural checks only; scope is not resolved.
pub fn check_wellformed(m: &Mrs) -> WellformednessReport {
    let mut violations = Vec::new();

    let mut props = BTreeMap::new();
    let mut conflicted = HashSet::new();
    for v in m.occurrences() {
        let prev = props.entry(v.key()).or_insert(&v.properties);
        if *prev != &v.properties && conflicted.insert(v.key()) {
            violations.push(Violation::ConflictingProperties(v.name()));
        }
    }

    let mut intrinsic = HashSet::new();
    let mut labels = HashSet::new();
    let mut scopal = HashSet::new();
    for ep in &m.eps {
        match ep.arg("ARG0") {
            Some(a) => {
                intrinsic.insert(a.key());
            }
            None => violations.push(Violation::MissingArg0(ep.predicate.clone())),
        }
        if ep.label.sort != Sort::H {
            violations.push(Violation::LabelNotHandle(ep.predicate.clone()));
        }
        labels.insert(ep.label.key());
        for (_, v) in &ep.args {
            if v.sort == Sort::H {
                scopal.insert(v.key());
            }
        }
    }

    let mut dangling = HashSet::new();
    for ep in &m.eps {
        for (role, v) in &ep.args {
            if role == "ARG0" {
                if v.sort == Sort::H && labels.contains(&v.key()) {
                    violations.push(Violation::LabelAsArgument(v.name()));
                }
                continue;
            }
            if v.sort != Sort::H && !intrinsic.contains(&v.key()) && dangling.insert(v.key()) {
                violations.push(Violation::DanglingVariable(v.name()));
            }
        }
    }

    for hc in &m.hcons {
        if hc.hi.key() == hc.lo.key() {
            violations.push(Violation::QeqSelf(hc.hi.name()));
        }
        if !(scopal.contains(&hc.hi.key()) || hc.hi.key() == m.top.key()) {
            violations.push(Violation::DanglingQeqHi(hc.hi.name()));
        }
        if !labels.contains(&hc.lo.key()) {
            violations.push(Violation::DanglingQeqLo(hc.lo.name()));
        }
    }
    WellformednessReport { violations }
}
