//! Lexer and parser for the grammar description files.
//!
//! ```text
//! name := parent & [ PATH.TO.F value, G #tag, L < a, b >, D <! c !> ] .
//! name := %infl [ input ] => [ output ] .
//! ```
//!
//! `;` starts a line comment, `#| ... |#` a block comment. Lines of the
//! form `%if flag` / `%if !flag` / `%endif` include or blank out regions.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Type(String, Pos),
    /// String literal, stored without quotes.
    Str(String, Pos),
    Tag(String, Pos),
    Avm(Vec<(Vec<(String, Pos)>, Conj)>, Pos),
    List {
        items: Vec<Conj>,
        tail: ListTail,
        pos: Pos,
    },
    DiffList(Vec<Conj>, Pos),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ListTail {
    Closed,
    Open,
    Dotted(Conj),
}

/// Terms joined with `&`.
pub type Conj = Vec<Term>;

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Plain(Conj),
    Rule { inflecting: bool, input: Conj, output: Conj },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub pos: Pos,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Tag(String),
    Define,
    Amp,
    LBrack,
    RBrack,
    Comma,
    LAngle,
    RAngle,
    LDiff,
    RDiff,
    Ellipsis,
    /// A `.` that joins two path components.
    PathDot,
    /// Any other `.`: list dotted pair or end of definition.
    Dot,
    Arrow,
    Infl,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Tag(s) => write!(f, "#{s}"),
            Tok::Define => write!(f, "`:=`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LAngle => write!(f, "`<`"),
            Tok::RAngle => write!(f, "`>`"),
            Tok::LDiff => write!(f, "`<!`"),
            Tok::RDiff => write!(f, "`!>`"),
            Tok::Ellipsis => write!(f, "`...`"),
            Tok::PathDot | Tok::Dot => write!(f, "`.`"),
            Tok::Arrow => write!(f, "`=>`"),
            Tok::Infl => write!(f, "`%infl`"),
        }
    }
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '+' | '*' | '\'')
}

/// Applies `%if` / `%endif` directives. Excluded and directive lines are
/// replaced by empty lines so positions stay valid.
pub fn preprocess(src: &str, options: &BTreeMap<String, bool>) -> Result<String, SyntaxError> {
    let mut out = String::with_capacity(src.len());
    let mut stack: Vec<bool> = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let pos = Pos { line: i + 1, col: 1 };
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("%if") {
            let flag = rest.trim();
            let (neg, name) = match flag.strip_prefix('!') {
                Some(n) => (true, n.trim()),
                None => (false, flag),
            };
            let value =
                *options.get(name).ok_or_else(|| SyntaxError { pos, message: format!("unknown option `{name}`") })?;
            stack.push(value != neg);
        } else if t == "%endif" {
            if stack.pop().is_none() {
                return Err(SyntaxError { pos, message: "%endif without %if".into() });
            }
        } else if stack.iter().all(|&b| b) {
            out.push_str(line);
        }
        out.push('\n');
    }
    if !stack.is_empty() {
        return Err(SyntaxError { pos: Pos { line: src.lines().count(), col: 1 }, message: "unterminated %if".into() });
    }
    Ok(out)
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |pos: Pos, m: &str| SyntaxError { pos, message: m.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, line: &mut usize, col: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                *i += 1;
            }
        };
        let peek = |k: usize| chars.get(i + k).copied();
        if c.is_whitespace() {
            advance(1, &mut i, &mut line, &mut col);
        } else if c == ';' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut line, &mut col);
            }
        } else if c == '#' && peek(1) == Some('|') {
            advance(2, &mut i, &mut line, &mut col);
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(pos, "unterminated block comment"));
                }
                if chars[i] == '|' && chars[i + 1] == '#' {
                    advance(2, &mut i, &mut line, &mut col);
                    break;
                }
                advance(1, &mut i, &mut line, &mut col);
            }
        } else if c == '#' {
            advance(1, &mut i, &mut line, &mut col);
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                advance(1, &mut i, &mut line, &mut col);
            }
            if start == i {
                return Err(err(pos, "empty tag name"));
            }
            toks.push((Tok::Tag(chars[start..i].iter().collect()), pos));
        } else if c == '"' {
            advance(1, &mut i, &mut line, &mut col);
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(err(pos, "unterminated string"));
                }
                advance(1, &mut i, &mut line, &mut col);
            }
            if i >= chars.len() {
                return Err(err(pos, "unterminated string"));
            }
            let s: String = chars[start..i].iter().collect();
            advance(1, &mut i, &mut line, &mut col);
            toks.push((Tok::Str(s), pos));
        } else if c == ':' && peek(1) == Some('=') {
            advance(2, &mut i, &mut line, &mut col);
            toks.push((Tok::Define, pos));
        } else if c == '=' && peek(1) == Some('>') {
            advance(2, &mut i, &mut line, &mut col);
            toks.push((Tok::Arrow, pos));
        } else if c == '<' && peek(1) == Some('!') {
            advance(2, &mut i, &mut line, &mut col);
            toks.push((Tok::LDiff, pos));
        } else if c == '!' && peek(1) == Some('>') {
            advance(2, &mut i, &mut line, &mut col);
            toks.push((Tok::RDiff, pos));
        } else if c == '.' && peek(1) == Some('.') && peek(2) == Some('.') {
            advance(3, &mut i, &mut line, &mut col);
            toks.push((Tok::Ellipsis, pos));
        } else if c == '.' {
            let joins = matches!(toks.last(), Some((Tok::Ident(_), _)))
                && i > 0
                && ident_char(chars[i - 1])
                && peek(1).is_some_and(ident_char);
            advance(1, &mut i, &mut line, &mut col);
            toks.push((if joins { Tok::PathDot } else { Tok::Dot }, pos));
        } else if c == '%' {
            advance(1, &mut i, &mut line, &mut col);
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                advance(1, &mut i, &mut line, &mut col);
            }
            let word: String = chars[start..i].iter().collect();
            if word != "infl" {
                return Err(err(pos, &format!("unknown directive `%{word}`")));
            }
            toks.push((Tok::Infl, pos));
        } else if let Some(t) = match c {
            '&' => Some(Tok::Amp),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            _ => None,
        } {
            advance(1, &mut i, &mut line, &mut col);
            toks.push((t, pos));
        } else if ident_char(c) {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                advance(1, &mut i, &mut line, &mut col);
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            return Err(err(pos, &format!("unexpected character `{c}`")));
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        let message = match self.peek() {
            Some(t) => format!("expected {expected}, found {t}"),
            None => format!("expected {expected}, found end of file"),
        };
        Err(SyntaxError { pos: self.pos(), message })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, SyntaxError> {
        if self.peek() == Some(&tok) {
            Ok(self.next().unwrap().1)
        } else {
            self.fail(what)
        }
    }

    fn definition(&mut self) -> Result<Definition, SyntaxError> {
        let (name, pos) = match self.next() {
            Some((Tok::Ident(n), p)) => (n, p),
            Some((Tok::Str(n), p)) => (format!("\"{n}\""), p),
            _ => {
                self.i -= 1;
                return self.fail("definition name");
            }
        };
        self.expect(Tok::Define, "`:=`")?;
        let inflecting = if self.peek() == Some(&Tok::Infl) {
            self.next();
            true
        } else {
            false
        };
        let first = self.conj()?;
        let body = if self.peek() == Some(&Tok::Arrow) {
            self.next();
            let output = self.conj()?;
            Body::Rule { inflecting, input: first, output }
        } else if inflecting {
            return self.fail("`=>`");
        } else {
            Body::Plain(first)
        };
        self.expect(Tok::Dot, "`.` ending the definition")?;
        Ok(Definition { name, pos, body })
    }

    fn conj(&mut self) -> Result<Conj, SyntaxError> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next() {
                Some((Tok::Ident(n), p)) => Ok(Term::Type(n, p)),
                _ => unreachable!(),
            },
            Some(Tok::Str(_)) => match self.next() {
                Some((Tok::Str(s), p)) => Ok(Term::Str(s, p)),
                _ => unreachable!(),
            },
            Some(Tok::Tag(_)) => match self.next() {
                Some((Tok::Tag(s), p)) => Ok(Term::Tag(s, p)),
                _ => unreachable!(),
            },
            Some(Tok::LBrack) => {
                self.next();
                let mut pairs = Vec::new();
                if self.peek() != Some(&Tok::RBrack) {
                    loop {
                        let path = self.path()?;
                        let value = self.conj()?;
                        pairs.push((path, value));
                        if self.peek() == Some(&Tok::Comma) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrack, "`]` or `,`")?;
                Ok(Term::Avm(pairs, pos))
            }
            Some(Tok::LAngle) => {
                self.next();
                let mut items = Vec::new();
                let mut tail = ListTail::Closed;
                if self.peek() != Some(&Tok::RAngle) {
                    loop {
                        if self.peek() == Some(&Tok::Ellipsis) {
                            self.next();
                            tail = ListTail::Open;
                            break;
                        }
                        items.push(self.conj()?);
                        match self.peek() {
                            Some(Tok::Comma) => {
                                self.next();
                            }
                            Some(Tok::Dot) => {
                                self.next();
                                tail = ListTail::Dotted(self.conj()?);
                                break;
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(Tok::RAngle, "`>`")?;
                Ok(Term::List { items, tail, pos })
            }
            Some(Tok::LDiff) => {
                self.next();
                let mut items = Vec::new();
                if self.peek() != Some(&Tok::RDiff) {
                    loop {
                        items.push(self.conj()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RDiff, "`!>`")?;
                Ok(Term::DiffList(items, pos))
            }
            _ => self.fail("a type, string, tag, `[`, `<` or `<!`"),
        }
    }

    fn path(&mut self) -> Result<Vec<(String, Pos)>, SyntaxError> {
        let mut path = Vec::new();
        loop {
            match self.next() {
                Some((Tok::Ident(f), p)) => path.push((f, p)),
                _ => {
                    self.i -= 1;
                    return self.fail("feature name");
                }
            }
            if self.peek() == Some(&Tok::PathDot) {
                self.next();
            } else {
                return Ok(path);
            }
        }
    }
}

/// Parses a whole file into definitions.
pub fn parse(src: &str) -> Result<Vec<Definition>, SyntaxError> {
    let toks = lex(src)?;
    let end = Pos { line: src.lines().count().max(1), col: 1 };
    let mut p = Parser { toks, i: 0, end };
    let mut defs = Vec::new();
    while p.peek().is_some() {
        defs.push(p.definition()?);
    }
    Ok(defs)
}
