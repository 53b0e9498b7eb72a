use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_wellformed, Mrs, Sort, Var, WellformednessReport};

/// Node ids start here so they never look like variable indices.
const FIRST_NODE: u32 = 10000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PostLabel {
    Eq,
    Neq,
    H,
}

impl fmt::Display for PostLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PostLabel::Eq => "EQ",
            PostLabel::Neq => "NEQ",
            PostLabel::H => "H",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmrsNode {
    pub id: u32,
    pub predicate: String,
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmrsLink {
    pub from: u32,
    pub to: u32,
    pub role: String,
    pub post: PostLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dmrs {
    pub top: Option<u32>,
    pub nodes: Vec<DmrsNode>,
    pub links: Vec<DmrsLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("MRS is not well-formed: {0}")]
pub struct DmrsError(pub WellformednessReport);

/// Line format: `top ID`, `node ID PRED {K=V ...}`, `link FROM ROLE/POST TO`.
impl fmt::Display for Dmrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.top {
            Some(t) => writeln!(f, "top {t}")?,
            None => writeln!(f, "top -")?,
        }
        for n in &self.nodes {
            let props: Vec<String> = n.properties.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(f, "node {} {} {{{}}}", n.id, n.predicate, props.join(" "))?;
        }
        for l in &self.links {
            writeln!(f, "link {} {}/{} {}", l.from, l.role, l.post, l.to)?;
        }
        Ok(())
    }
}

/// The EP standing for a label: among the EPs sharing it, the first whose
/// arguments do not point at another member's intrinsic variable.
fn label_head(m: &Mrs, label: &Var) -> Option<usize> {
    let group: Vec<usize> = (0..m.eps.len()).filter(|&i| m.eps[i].label.key() == label.key()).collect();
    let points_inside = |i: usize| {
        m.eps[i]
            .args
            .iter()
            .filter(|(r, _)| r != "ARG0")
            .any(|(_, v)| group.iter().any(|&j| j != i && m.eps[j].arg("ARG0").is_some_and(|a| a.key() == v.key())))
    };
    group.iter().copied().find(|&i| !points_inside(i)).or(group.first().copied())
}

/// Target of a handle: directly a label, or the label it is qeq to.
fn handle_target(m: &Mrs, h: &Var) -> Option<usize> {
    label_head(m, h).or_else(|| {
        let lo = m.hcons.iter().find(|hc| hc.hi.key() == h.key())?;
        label_head(m, &lo.lo)
    })
}

pub fn to_dmrs(m: &Mrs) -> Result<Dmrs, DmrsError> {
    let report = check_wellformed(m);
    if !report.is_ok() {
        return Err(DmrsError(report));
    }
    let id = |i: usize| FIRST_NODE + i as u32;
    let nodes = m
        .eps
        .iter()
        .enumerate()
        .map(|(i, ep)| DmrsNode {
            id: id(i),
            predicate: ep.predicate.clone(),
            properties: ep.arg("ARG0").map(|v| v.properties.clone()).unwrap_or_default(),
        })
        .collect();
    let mut links = Vec::new();
    for (i, ep) in m.eps.iter().enumerate() {
        for (role, v) in &ep.args {
            if role == "ARG0" || (role == "BODY" && ep.is_quantifier()) {
                continue;
            }
            if v.sort == Sort::H {
                if let Some(j) = handle_target(m, v) {
                    links.push(DmrsLink { from: id(i), to: id(j), role: role.clone(), post: PostLabel::H });
                }
                continue;
            }
            let target = (0..m.eps.len()).find(|&j| {
                j != i && !m.eps[j].is_quantifier() && m.eps[j].arg("ARG0").is_some_and(|a| a.key() == v.key())
            });
            if let Some(j) = target {
                let post = if m.eps[j].label.key() == ep.label.key() { PostLabel::Eq } else { PostLabel::Neq };
                links.push(DmrsLink { from: id(i), to: id(j), role: role.clone(), post });
            }
        }
    }
    Ok(Dmrs { top: handle_target(m, &m.top).map(id), nodes, links })
}
