//! Tokenizer and table-driven morphological analysis.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Characters split off as tokens of their own.
const PUNCT: &[char] = &['.', '?', '!', ','];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Character offsets into the input, `start < end`.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Reading {
    pub lemma: String,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphAnalysis {
    pub token: Token,
    pub readings: Vec<Reading>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceLattice {
    pub sentence: String,
    pub analyses: Vec<MorphAnalysis>,
    /// Tokens the table has no entry for.
    pub failures: Vec<Token>,
}

impl SentenceLattice {
    /// Lattice with every token analyzed, built directly from
    /// `(surface, [(lemma, tag)])` pairs. Offsets assume single spaces.
    pub fn from_readings(words: &[(&str, &[(&str, &str)])]) -> Self {
        let mut analyses = Vec::new();
        let mut offset = 0;
        let mut sentence = String::new();
        for (surface, readings) in words {
            if !sentence.is_empty() {
                sentence.push(' ');
                offset += 1;
            }
            sentence.push_str(surface);
            let len = surface.chars().count();
            analyses.push(MorphAnalysis {
                token: Token { surface: surface.to_string(), start: offset, end: offset + len },
                readings: readings.iter().map(|(l, t)| Reading { lemma: l.to_string(), tag: t.to_string() }).collect(),
            });
            offset += len;
        }
        SentenceLattice { sentence, analyses, failures: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.analyses.len() + self.failures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All tokens in input order.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut all: Vec<&Token> = self.analyses.iter().map(|a| &a.token).chain(self.failures.iter()).collect();
        all.sort_by_key(|t| t.start);
        all
    }
}

/// Splits on whitespace and separates `. ? ! ,` into their own tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let flush = |cur: &mut Option<(usize, String)>, out: &mut Vec<Token>, end: usize| {
        if let Some((start, s)) = cur.take() {
            out.push(Token { surface: s, start, end });
        }
    };
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        n = i + 1;
        if c.is_whitespace() {
            flush(&mut current, &mut out, i);
        } else if PUNCT.contains(&c) {
            flush(&mut current, &mut out, i);
            out.push(Token { surface: c.to_string(), start: i, end: i + 1 });
        } else {
            current.get_or_insert_with(|| (i, String::new())).1.push(c);
        }
    }
    flush(&mut current, &mut out, n);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

/// Surface form to `(lemma, tag)` readings, looked up case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorphTable {
    entries: HashMap<String, Vec<Reading>>,
    rows: Vec<(String, Reading)>,
}

impl MorphTable {
    /// Parses `surface TAB lemma TAB tag` lines; `#` starts a comment line.
    pub fn parse(src: &str) -> Result<Self, TableError> {
        let mut table = MorphTable::default();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols.iter().any(|c| c.trim().is_empty()) {
                return Err(TableError { line: i + 1, message: "expected `surface<TAB>lemma<TAB>tag`".into() });
            }
            table.insert(cols[0].trim(), cols[1].trim(), cols[2].trim());
        }
        Ok(table)
    }

    pub fn insert(&mut self, surface: &str, lemma: &str, tag: &str) {
        let r = Reading { lemma: lemma.to_string(), tag: tag.to_string() };
        let slot = self.entries.entry(surface.to_lowercase()).or_default();
        if !slot.contains(&r) {
            slot.push(r.clone());
            self.rows.push((surface.to_string(), r));
        }
    }

    pub fn lookup(&self, surface: &str) -> &[Reading] {
        self.entries.get(&surface.to_lowercase()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Rows in file order.
    pub fn rows(&self) -> &[(String, Reading)] {
        &self.rows
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|(_, r)| r.tag.as_str())
    }
}

/// Tokenizes `text` and looks every token up in `table`.
pub fn analyze(table: &MorphTable, text: &str) -> SentenceLattice {
    let mut analyses = Vec::new();
    let mut failures = Vec::new();
    for token in tokenize(text) {
        let readings = table.lookup(&token.surface);
        if readings.is_empty() {
            failures.push(token);
        } else {
            analyses.push(MorphAnalysis { token, readings: readings.to_vec() });
        }
    }
    SentenceLattice { sentence: text.to_string(), analyses, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> MorphTable {
        MorphTable::parse(
            "# comment\npersonas\tpersona\tN-F-PL\nson\tser\tV-IND-3P\nviejos\tviejo\tA-M-PL\nviejos\tviejo\tN-M-PL\n.\t.\tFP\n",
        )
        .unwrap()
    }

    #[test]
    fn tokenize_splits_terminal_punctuation() {
        let toks = tokenize("Mis abuelos son famosos.");
        let surf: Vec<&str> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surf, ["Mis", "abuelos", "son", "famosos", "."]);
        assert_eq!((toks[4].start, toks[4].end), (23, 24));
        assert!(tokenize("").is_empty());
        let m = tokenize("música");
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "música");
        assert_eq!(m[0].end, 6);
    }

    #[test]
    fn analyze_looks_up_readings() {
        let t = table();
        let l = analyze(&t, "Personas son xyzzy.");
        assert_eq!(l.analyses[0].readings, vec![Reading { lemma: "persona".into(), tag: "N-F-PL".into() }]);
        assert_eq!(l.analyses[1].readings[0].lemma, "ser");
        assert_eq!(l.analyses[1].readings[0].tag, "V-IND-3P");
        assert_eq!(l.failures.len(), 1);
        assert_eq!(l.failures[0].surface, "xyzzy");
        assert_eq!(l.len(), 4);
    }

    #[test]
    fn ambiguity_is_kept() {
        let t = table();
        assert_eq!(t.lookup("viejos").len(), 2);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let e = MorphTable::parse("a\tb\n").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
