use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A derivation as a labeled bracketing. Leaves are input tokens with the
/// lemma and tag they were analyzed as.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DerivationTree {
    Node { label: String, children: Vec<DerivationTree> },
    Leaf { surface: String, lemma: String, tag: String },
}

impl DerivationTree {
    pub fn node(label: impl Into<String>, children: Vec<DerivationTree>) -> Self {
        DerivationTree::Node { label: label.into(), children }
    }

    pub fn label(&self) -> &str {
        match self {
            DerivationTree::Node { label, .. } => label,
            DerivationTree::Leaf { surface, .. } => surface,
        }
    }

    pub fn children(&self) -> &[DerivationTree] {
        match self {
            DerivationTree::Node { children, .. } => children,
            DerivationTree::Leaf { .. } => &[],
        }
    }

    /// Surface forms of the leaves, left to right.
    pub fn yield_tokens(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            DerivationTree::Leaf { surface, .. } => out.push(surface),
            DerivationTree::Node { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// True iff some node carries `label`.
    pub fn uses(&self, label: &str) -> bool {
        match self {
            DerivationTree::Leaf { .. } => false,
            DerivationTree::Node { label: l, children } => l == label || children.iter().any(|c| c.uses(label)),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    write!(f, "\"")?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            write!(f, "\\")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, "\"")
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationTree::Leaf { surface, lemma, tag } => {
                write!(f, "(")?;
                write_quoted(f, surface)?;
                write!(f, " {lemma} {tag})")
            }
            DerivationTree::Node { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad derivation at offset {offset}: {message}")]
pub struct DerivationSyntaxError {
    pub offset: usize,
    pub message: String,
}

impl FromStr for DerivationTree {
    type Err = DerivationSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let t = parse_tree(&chars, &mut i)?;
        skip_ws(&chars, &mut i);
        if i != chars.len() {
            return Err(DerivationSyntaxError { offset: i, message: "trailing input".into() });
        }
        Ok(t)
    }
}

fn skip_ws(c: &[char], i: &mut usize) {
    while *i < c.len() && c[*i].is_whitespace() {
        *i += 1;
    }
}

fn atom(c: &[char], i: &mut usize) -> Result<String, DerivationSyntaxError> {
    skip_ws(c, i);
    let start = *i;
    while *i < c.len() && !c[*i].is_whitespace() && c[*i] != '(' && c[*i] != ')' {
        *i += 1;
    }
    if start == *i {
        return Err(DerivationSyntaxError { offset: start, message: "expected a symbol".into() });
    }
    Ok(c[start..*i].iter().collect())
}

fn parse_tree(c: &[char], i: &mut usize) -> Result<DerivationTree, DerivationSyntaxError> {
    let err = |offset: usize, m: &str| DerivationSyntaxError { offset, message: m.to_string() };
    skip_ws(c, i);
    if c.get(*i) != Some(&'(') {
        return Err(err(*i, "expected `(`"));
    }
    *i += 1;
    skip_ws(c, i);
    if c.get(*i) == Some(&'"') {
        *i += 1;
        let mut surface = String::new();
        loop {
            match c.get(*i) {
                None => return Err(err(*i, "unterminated string")),
                Some('"') => {
                    *i += 1;
                    break;
                }
                Some('\\') => {
                    let next = c.get(*i + 1).ok_or_else(|| err(*i, "dangling escape"))?;
                    surface.push(*next);
                    *i += 2;
                }
                Some(&ch) => {
                    surface.push(ch);
                    *i += 1;
                }
            }
        }
        let lemma = atom(c, i)?;
        let tag = atom(c, i)?;
        skip_ws(c, i);
        if c.get(*i) != Some(&')') {
            return Err(err(*i, "expected `)` after leaf"));
        }
        *i += 1;
        return Ok(DerivationTree::Leaf { surface, lemma, tag });
    }
    let label = atom(c, i)?;
    let mut children = Vec::new();
    loop {
        skip_ws(c, i);
        match c.get(*i) {
            Some(')') => {
                *i += 1;
                return Ok(DerivationTree::Node { label, children });
            }
            Some('(') => children.push(parse_tree(c, i)?),
            _ => return Err(err(*i, "expected `(` or `)`")),
        }
    }
}
