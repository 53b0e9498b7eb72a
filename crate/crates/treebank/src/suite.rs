//! Test suite files: `id<TAB>wf<TAB>text` lines, `#` comments.

use std::collections::HashSet;
use std::fmt;

use grammarkit_core::morpho::tokenize;

use crate::profile::Item;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteItem {
    pub id: u32,
    pub wf: u8,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Line {
    Other(String),
    Item(String, SuiteItem),
}

/// A suite file. Lines are kept verbatim so writing it back reproduces the
/// input byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestSuite {
    lines: Vec<Line>,
    trailing_newline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("suite line {line}: {message}")]
pub struct SuiteError {
    pub line: usize,
    pub message: String,
}

impl TestSuite {
    pub fn parse(src: &str) -> Result<Self, SuiteError> {
        let mut lines = Vec::new();
        let mut ids = HashSet::new();
        let body = src.strip_suffix('\n').unwrap_or(src);
        for (i, raw) in body.split('\n').enumerate() {
            if src.is_empty() {
                break;
            }
            let err = |m: &str| SuiteError { line: i + 1, message: m.to_string() };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                lines.push(Line::Other(raw.to_string()));
                continue;
            }
            let cols: Vec<&str> = raw.splitn(3, '\t').collect();
            if cols.len() != 3 {
                return Err(err("expected `id<TAB>wf<TAB>text`"));
            }
            let id: u32 = cols[0].trim().parse().map_err(|_| err("id must be a positive integer"))?;
            if id == 0 {
                return Err(err("id must be a positive integer"));
            }
            let wf = match cols[1].trim() {
                "0" => 0,
                "1" => 1,
                _ => return Err(err("wf must be 0 or 1")),
            };
            let text = cols[2].trim().to_string();
            if text.is_empty() {
                return Err(err("empty text"));
            }
            if !ids.insert(id) {
                return Err(err(&format!("duplicate id {id}")));
            }
            lines.push(Line::Item(raw.to_string(), SuiteItem { id, wf, text }));
        }
        Ok(TestSuite { lines, trailing_newline: src.ends_with('\n') })
    }

    pub fn items(&self) -> impl Iterator<Item = &SuiteItem> {
        self.lines.iter().filter_map(|l| match l {
            Line::Item(_, it) => Some(it),
            Line::Other(_) => None,
        })
    }

    /// Profile items, with lengths from the tokenizer.
    pub fn to_items(&self) -> Vec<Item> {
        self.items()
            .map(|s| Item { id: s.id, text: s.text.clone(), wf: s.wf, length: tokenize(&s.text).len() })
            .collect()
    }
}

impl fmt::Display for TestSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lines.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match l {
                Line::Other(s) | Line::Item(s, _) => write!(f, "{s}")?,
            }
        }
        if self.trailing_newline {
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for src in ["# c\n1\t1\tHola.\n\n2\t0\tx y\n", "1\t1\ta", ""] {
            assert_eq!(TestSuite::parse(src).unwrap().to_string(), src);
        }
    }

    #[test]
    fn items_and_lengths() {
        let s = TestSuite::parse("# c\n3\t1\tMis abuelos son famosos.\n4\t0\tAbuelo canta.\n").unwrap();
        let items = s.to_items();
        assert_eq!(items.len(), 2);
        assert_eq!((items[0].id, items[0].wf, items[0].length), (3, 1, 5));
        assert_eq!(items[1].length, 3);
    }

    #[test]
    fn bad_lines_are_rejected() {
        assert_eq!(TestSuite::parse("1\t1\ta\n1\t0\tb\n").unwrap_err().line, 2);
        assert!(TestSuite::parse("1\t2\ta\n").is_err());
        assert!(TestSuite::parse("x\t1\ta\n").is_err());
        assert!(TestSuite::parse("0\t1\ta\n").is_err());
        assert!(TestSuite::parse("1\t1\n").is_err());
    }
}
