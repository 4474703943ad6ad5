//! The `.scn` scenario file format.
//!
//! A document is line oriented. `#` starts a comment. Declarations:
//!
//! ```text
//! scenario <name> [key=value ...]   optional; reserved names load a built-in
//! dimension <N>
//! basis <label> ...                 optional, defaults to 1..N
//! state <name>                      section of `label = complex` entries
//! observable <name>                 section of `label = real` entries
//! query <kind> [key=value ...]
//! ```
//!
//! Entries not listed in a section are zero. The state named `initial` is the
//! pre-selection; every other state is a post-selection. Numbers may be
//! written exactly as `p/q`, `sqrt(k)`, `r/sqrt(k)`; complex values as
//! `a+bi` or `(a, b)`. The full grammar is in `docs/scenario-format.md`.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use indexmap::IndexMap;
use num_complex::Complex64;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::pathsum::orthogonal;
use crate::scenarios::{self, Scenario, RESERVED_NAMES};
use crate::statespace::{Basis, DiagonalObservable, KetState};

/// A diagnostic pointing at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Amplitudes,
    Probabilities,
    Network,
    Weak,
    MeanReading,
    SumRule,
    ProductRule,
    Scan,
}

impl QueryKind {
    pub const ALL: [QueryKind; 8] = [
        QueryKind::Amplitudes,
        QueryKind::Probabilities,
        QueryKind::Network,
        QueryKind::Weak,
        QueryKind::MeanReading,
        QueryKind::SumRule,
        QueryKind::ProductRule,
        QueryKind::Scan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Amplitudes => "amplitudes",
            QueryKind::Probabilities => "probabilities",
            QueryKind::Network => "network",
            QueryKind::Weak => "weak",
            QueryKind::MeanReading => "mean-reading",
            QueryKind::SumRule => "sum-rule",
            QueryKind::ProductRule => "product-rule",
            QueryKind::Scan => "scan",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        QueryKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Accepted argument keys, required ones first.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            QueryKind::Amplitudes | QueryKind::Probabilities => (&[], &[]),
            QueryKind::Network | QueryKind::Weak => (&["final", "obs"], &[]),
            QueryKind::MeanReading => (&["final", "obs", "width"], &[]),
            QueryKind::SumRule => (&["final", "a", "b"], &[]),
            QueryKind::ProductRule => (&["a", "b"], &["final"]),
            QueryKind::Scan => (&["obs", "from", "to", "steps"], &[]),
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A `query` line as written. Equality ignores the source line.
#[derive(Debug, Clone)]
pub struct QueryDirective {
    pub kind: QueryKind,
    pub args: IndexMap<String, String>,
    pub line: usize,
}

impl PartialEq for QueryDirective {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.args == other.args
    }
}

/// Reference to a built-in scenario with its numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinRef {
    pub name: String,
    pub params: IndexMap<String, f64>,
}

/// Source lines of named items, kept for diagnostics. Never affects equality.
#[derive(Debug, Clone, Default)]
pub struct SourceLines(IndexMap<String, usize>);

impl PartialEq for SourceLines {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl SourceLines {
    fn get(&self, key: &str) -> usize {
        self.0.get(key).copied().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioDocument {
    pub name: Option<String>,
    pub builtin: Option<BuiltinRef>,
    /// Zero for built-in documents.
    pub dimension: usize,
    pub basis_names: Vec<String>,
    pub initial: Vec<Complex64>,
    pub finals: IndexMap<String, Vec<Complex64>>,
    pub observables: IndexMap<String, Vec<f64>>,
    pub queries: Vec<QueryDirective>,
    pub lines: SourceLines,
}

const KEYWORDS: [&str; 6] = ["scenario", "dimension", "basis", "state", "observable", "query"];
const INITIAL: &str = "initial";
const COMPLEX_FORMS: &str = "a complex literal such as `0.5`, `1/2-1/sqrt(2)i` or `(0.5, -0.25)`";
const REAL_FORMS: &str = "a real literal such as `1`, `-0.25`, `1/4`, `1/sqrt(2)` or `2.5e-3`";

fn builtin_param(name: &str) -> Option<&'static str> {
    match name {
        "three-box" => Some("beta"),
        "hardy-epsilon" => Some("eps"),
        _ => None,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_graphic() && !matches!(c, '=' | '#' | '"' | '\''))
}

/// Character column (1-based) of a byte offset.
fn column(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in text.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &text[s..k]));
                start = None;
            }
            (false, None) => start = Some(k),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

enum Section {
    None,
    State(String),
    Observable(String),
}

struct Parser<'a> {
    doc: ScenarioDocument,
    section: Section,
    states: IndexMap<String, Vec<Complex64>>,
    line_no: usize,
    line: &'a str,
    saw_custom: Option<usize>,
}

/// Parses a document. The first problem found is reported with its position.
pub fn parse(text: &str) -> std::result::Result<ScenarioDocument, ParseError> {
    let mut p = Parser {
        doc: ScenarioDocument::default(),
        section: Section::None,
        states: IndexMap::new(),
        line_no: 0,
        line: "",
        saw_custom: None,
    };
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        p.line_no = k + 1;
        p.line = raw;
        last_line = k + 1;
        let content = match raw.find('#') {
            Some(cut) => &raw[..cut],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        p.statement(content)?;
    }
    p.finish(last_line + 1)
}

impl<'a> Parser<'a> {
    fn err(&self, byte: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line_no, column(self.line, byte.min(self.line.len())), message)
    }

    fn statement(&mut self, content: &str) -> std::result::Result<(), ParseError> {
        let toks = tokens(content);
        let (head_at, head) = toks[0];
        if KEYWORDS.contains(&head) {
            self.section = Section::None;
            let rest = &toks[1..];
            return match head {
                "scenario" => self.scenario_decl(head_at, rest),
                "dimension" => self.dimension_decl(head_at, rest),
                "basis" => self.basis_decl(head_at, rest),
                "state" | "observable" => self.section_header(head, head_at, rest),
                _ => self.query_decl(head_at, rest),
            };
        }
        match &self.section {
            Section::None => Err(self.err(
                head_at,
                "expected a declaration (scenario, dimension, basis, state, observable, query)",
            )),
            _ => self.entry(content),
        }
    }

    fn mark_custom(&mut self, at: usize) -> std::result::Result<(), ParseError> {
        if let Some(b) = &self.doc.builtin {
            return Err(self.err(
                at,
                format!("built-in scenario `{}` cannot be combined with custom definitions", b.name),
            ));
        }
        self.saw_custom.get_or_insert(self.line_no);
        Ok(())
    }

    fn scenario_decl(&mut self, at: usize, rest: &[(usize, &str)]) -> std::result::Result<(), ParseError> {
        if self.doc.name.is_some() {
            return Err(self.err(at, "duplicate scenario declaration"));
        }
        let Some(&(name_at, name)) = rest.first() else {
            return Err(self.err(at + "scenario".len(), "expected a scenario name"));
        };
        if !valid_name(name) {
            return Err(self.err(name_at, format!("invalid scenario name `{name}`")));
        }
        self.doc.lines.0.insert("scenario".into(), self.line_no);
        if RESERVED_NAMES.contains(&name) {
            if self.saw_custom.is_some() {
                return Err(self.err(
                    name_at,
                    format!("built-in scenario `{name}` cannot be combined with custom definitions"),
                ));
            }
            let mut params = IndexMap::new();
            for &(p_at, tok) in &rest[1..] {
                let (key, value, value_at) = self.split_param(p_at, tok)?;
                if builtin_param(name) != Some(key) {
                    let hint = match builtin_param(name) {
                        Some(k) => format!("only `{k}` is accepted"),
                        None => "it takes no parameters".into(),
                    };
                    return Err(self.err(p_at, format!("unknown parameter `{key}` for `{name}`; {hint}")));
                }
                if params.contains_key(key) {
                    return Err(self.err(p_at, format!("duplicate parameter `{key}`")));
                }
                let v = parse_real(value).map_err(|(off, msg)| self.err(value_at + off, msg))?;
                params.insert(key.to_string(), v);
            }
            self.doc.builtin = Some(BuiltinRef { name: name.to_string(), params });
        } else if let Some(&(p_at, _)) = rest.get(1) {
            return Err(self.err(p_at, "parameters are only accepted for built-in scenarios"));
        }
        self.doc.name = Some(name.to_string());
        Ok(())
    }

    fn dimension_decl(&mut self, at: usize, rest: &[(usize, &str)]) -> std::result::Result<(), ParseError> {
        self.mark_custom(at)?;
        if self.doc.dimension != 0 {
            return Err(self.err(at, "duplicate dimension declaration"));
        }
        let [(n_at, n)] = rest else {
            return Err(self.err(at, "expected `dimension <N>`"));
        };
        let dim: usize = match n.parse() {
            Ok(d) if d > 0 => d,
            _ => return Err(self.err(*n_at, format!("expected a positive integer, found `{n}`"))),
        };
        if !self.doc.basis_names.is_empty() && self.doc.basis_names.len() != dim {
            return Err(self.err(
                *n_at,
                format!("dimension mismatch: basis has {} labels", self.doc.basis_names.len()),
            ));
        }
        self.doc.dimension = dim;
        Ok(())
    }

    fn basis_decl(&mut self, at: usize, rest: &[(usize, &str)]) -> std::result::Result<(), ParseError> {
        self.mark_custom(at)?;
        if !self.doc.basis_names.is_empty() {
            return Err(self.err(at, "duplicate basis declaration"));
        }
        if !self.states.is_empty() || !self.doc.observables.is_empty() {
            return Err(self.err(at, "basis must be declared before any state or observable"));
        }
        if rest.is_empty() {
            return Err(self.err(at, "expected at least one basis label"));
        }
        let mut names: Vec<String> = Vec::new();
        for &(l_at, label) in rest {
            if !valid_name(label) || KEYWORDS.contains(&label) {
                return Err(self.err(l_at, format!("invalid basis label `{label}`")));
            }
            if names.iter().any(|n| n == label) {
                return Err(self.err(l_at, format!("duplicate basis label `{label}`")));
            }
            names.push(label.to_string());
        }
        if self.doc.dimension != 0 && names.len() != self.doc.dimension {
            return Err(self.err(
                at,
                format!(
                    "dimension mismatch: {} labels for dimension {}",
                    names.len(),
                    self.doc.dimension
                ),
            ));
        }
        self.doc.basis_names = names;
        Ok(())
    }

    fn ensure_basis(&mut self, at: usize) -> std::result::Result<(), ParseError> {
        if self.doc.dimension == 0 {
            return Err(self.err(at, "`dimension` must be declared before states and observables"));
        }
        if self.doc.basis_names.is_empty() {
            self.doc.basis_names = (1..=self.doc.dimension).map(|k| k.to_string()).collect();
        }
        Ok(())
    }

    fn section_header(
        &mut self,
        kind: &str,
        at: usize,
        rest: &[(usize, &str)],
    ) -> std::result::Result<(), ParseError> {
        self.mark_custom(at)?;
        self.ensure_basis(at)?;
        let [(name_at, name)] = rest else {
            return Err(self.err(at, format!("expected `{kind} <name>`")));
        };
        if !valid_name(name) {
            return Err(self.err(*name_at, format!("invalid {kind} name `{name}`")));
        }
        let n = self.doc.dimension;
        let key = format!("{kind}:{name}");
        if kind == "state" {
            if self.states.contains_key(*name) {
                return Err(self.err(*name_at, format!("duplicate state `{name}`")));
            }
            self.states.insert(name.to_string(), vec![Complex64::new(0.0, 0.0); n]);
            self.section = Section::State(name.to_string());
        } else {
            if self.doc.observables.contains_key(*name) {
                return Err(self.err(*name_at, format!("duplicate observable `{name}`")));
            }
            self.doc.observables.insert(name.to_string(), vec![0.0; n]);
            self.section = Section::Observable(name.to_string());
        }
        self.doc.lines.0.insert(key, self.line_no);
        Ok(())
    }

    fn entry(&mut self, content: &str) -> std::result::Result<(), ParseError> {
        let Some(eq) = content.find('=') else {
            let at = content.len() - content.trim_start().len();
            return Err(self.err(at, "expected `label = value`"));
        };
        let label = content[..eq].trim();
        let label_at = content.len() - content.trim_start().len();
        if label.is_empty() {
            return Err(self.err(eq, "missing basis label before `=`"));
        }
        let Some(index) = self.doc.basis_names.iter().position(|n| n == label) else {
            return Err(self.err(
                label_at,
                format!("unknown basis label `{label}` (basis: {})", self.doc.basis_names.join(" ")),
            ));
        };
        let value = &content[eq + 1..];
        let value_at = eq + 1 + (value.len() - value.trim_start().len());
        let value = value.trim();
        match &self.section {
            Section::State(name) => {
                let z = parse_complex(value).map_err(|(off, msg)| self.err(value_at + off, msg))?;
                let name = name.clone();
                let key = format!("entry:state:{name}:{label}");
                if self.doc.lines.0.contains_key(&key) {
                    return Err(self.err(label_at, format!("duplicate entry `{label}` in state `{name}`")));
                }
                self.doc.lines.0.insert(key, self.line_no);
                self.states[&name][index] = z;
            }
            Section::Observable(name) => {
                let v = parse_real(value).map_err(|(off, msg)| self.err(value_at + off, msg))?;
                let name = name.clone();
                let key = format!("entry:observable:{name}:{label}");
                if self.doc.lines.0.contains_key(&key) {
                    return Err(self.err(label_at, format!("duplicate entry `{label}` in observable `{name}`")));
                }
                self.doc.lines.0.insert(key, self.line_no);
                self.doc.observables[&name][index] = v;
            }
            Section::None => unreachable!("entries are only parsed inside sections"),
        }
        Ok(())
    }

    fn split_param<'t>(
        &self,
        at: usize,
        tok: &'t str,
    ) -> std::result::Result<(&'t str, &'t str, usize), ParseError> {
        match tok.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k, v, at + k.len() + 1)),
            _ => Err(self.err(at, format!("expected `key=value`, found `{tok}`"))),
        }
    }

    fn query_decl(&mut self, at: usize, rest: &[(usize, &str)]) -> std::result::Result<(), ParseError> {
        let Some(&(kind_at, kind)) = rest.first() else {
            return Err(self.err(at, "expected a query kind"));
        };
        let Some(kind) = QueryKind::parse(kind) else {
            let kinds: Vec<&str> = QueryKind::ALL.iter().map(|k| k.as_str()).collect();
            return Err(self.err(
                kind_at,
                format!("unknown query kind `{kind}` (expected one of: {})", kinds.join(", ")),
            ));
        };
        let (required, optional) = kind.keys();
        let mut args = IndexMap::new();
        for &(p_at, tok) in &rest[1..] {
            let (key, value, _) = self.split_param(p_at, tok)?;
            if !required.contains(&key) && !optional.contains(&key) {
                return Err(self.err(p_at, format!("`{kind}` does not take `{key}`")));
            }
            if args.insert(key.to_string(), value.to_string()).is_some() {
                return Err(self.err(p_at, format!("duplicate argument `{key}`")));
            }
        }
        if let Some(missing) = required.iter().find(|k| !args.contains_key(**k)) {
            return Err(self.err(at, format!("`{kind}` query needs `{missing}=`")));
        }
        self.doc.queries.push(QueryDirective { kind, args, line: self.line_no });
        Ok(())
    }

    fn finish(mut self, eof_line: usize) -> std::result::Result<ScenarioDocument, ParseError> {
        let at_eof = |msg: &str| ParseError::new(eof_line, 1, msg);
        if self.doc.builtin.is_none() {
            if self.doc.dimension == 0 {
                return Err(at_eof("missing `dimension` declaration"));
            }
            self.ensure_basis(0).map_err(|e| at_eof(&e.message))?;
            let Some(initial) = self.states.shift_remove(INITIAL) else {
                return Err(at_eof("missing `state initial`"));
            };
            for (name, amps) in std::iter::once((INITIAL, &initial)).chain(self.states.iter().map(|(k, v)| (k.as_str(), v))) {
                if amps.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                    let line = self.doc.lines.get(&format!("state:{name}"));
                    return Err(ParseError::new(line, 1, format!("state `{name}` is the zero vector and cannot be normalized")));
                }
            }
            self.doc.initial = initial;
            self.doc.finals = self.states;
        }
        if self.doc.queries.is_empty() {
            return Err(at_eof("document has no `query` lines"));
        }
        Ok(self.doc)
    }
}

type LitResult<T> = std::result::Result<T, (usize, String)>;

struct Cursor<'s> {
    s: &'s str,
    pos: usize,
}

impl<'s> Cursor<'s> {
    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, word: &str) -> bool {
        if self.s[self.pos..].starts_with(word) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self, expected: &str) -> LitResult<f64> {
        let start = self.pos;
        let bytes = self.s.as_bytes();
        let mut end = start;
        let mut digits = 0;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
            digits += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            return Err((start, format!("expected {expected}")));
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut e = end + 1;
            if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                e += 1;
            }
            let exp_start = e;
            while e < bytes.len() && bytes[e].is_ascii_digit() {
                e += 1;
            }
            if e == exp_start {
                return Err((end, "malformed exponent".into()));
            }
            end = e;
        }
        self.pos = end;
        let v: f64 = self.s[start..end]
            .parse()
            .map_err(|_| (start, format!("expected {expected}")))?;
        if !v.is_finite() {
            return Err((start, "numeric literal out of range".into()));
        }
        Ok(v)
    }

    /// `number | sqrt(number)`
    fn atom(&mut self, expected: &str) -> LitResult<f64> {
        if self.eat_str("sqrt") {
            self.skip_ws();
            if !self.eat('(') {
                return Err((self.pos, "expected `(` after `sqrt`".into()));
            }
            self.skip_ws();
            let v = self.number(expected)?;
            self.skip_ws();
            if !self.eat(')') {
                return Err((self.pos, "expected `)` to close `sqrt(`".into()));
            }
            return Ok(v.sqrt());
        }
        self.number(expected)
    }

    /// `atom ['/' atom]`
    fn magnitude(&mut self, expected: &str) -> LitResult<f64> {
        let v = self.atom(expected)?;
        let save = self.pos;
        self.skip_ws();
        if self.eat('/') {
            self.skip_ws();
            let at = self.pos;
            let d = self.atom(expected)?;
            if d == 0.0 {
                return Err((at, "division by zero".into()));
            }
            let q = v / d;
            if !q.is_finite() {
                return Err((at, "numeric literal out of range".into()));
            }
            return Ok(q);
        }
        self.pos = save;
        Ok(v)
    }

    fn signed_real(&mut self, expected: &str) -> LitResult<f64> {
        self.skip_ws();
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let v = self.magnitude(expected)?;
        Ok(if negative { -v } else { v })
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.s.len()
    }
}

/// Parses a real literal. Errors carry a byte offset into `s`.
pub(crate) fn parse_real(s: &str) -> LitResult<f64> {
    let mut c = Cursor { s, pos: 0 };
    let v = c.signed_real(REAL_FORMS)?;
    if !c.at_end() {
        return Err((c.pos, format!("unexpected trailing input; expected {REAL_FORMS}")));
    }
    Ok(v)
}

/// Parses a complex literal. Errors carry a byte offset into `s`.
pub(crate) fn parse_complex(s: &str) -> LitResult<Complex64> {
    let mut c = Cursor { s, pos: 0 };
    c.skip_ws();
    if c.eat('(') {
        let re = c.signed_real(COMPLEX_FORMS)?;
        c.skip_ws();
        if !c.eat(',') {
            return Err((c.pos, "expected `,` between real and imaginary parts".into()));
        }
        let im = c.signed_real(COMPLEX_FORMS)?;
        c.skip_ws();
        if !c.eat(')') {
            return Err((c.pos, "expected `)` to close the pair".into()));
        }
        if !c.at_end() {
            return Err((c.pos, format!("unexpected trailing input; expected {COMPLEX_FORMS}")));
        }
        return Ok(Complex64::new(re, im));
    }

    let mut re: Option<f64> = None;
    let mut im: Option<f64> = None;
    let mut first = true;
    while !c.at_end() {
        let term_at = c.pos;
        let negative = if c.eat('-') {
            true
        } else if c.eat('+') || first {
            false
        } else {
            return Err((c.pos, format!("expected `+` or `-` between terms of {COMPLEX_FORMS}")));
        };
        first = false;
        c.skip_ws();
        let magnitude = if c.peek() == Some('i') {
            1.0
        } else {
            c.magnitude(COMPLEX_FORMS)?
        };
        let imaginary = c.eat('i');
        let v = if negative { -magnitude } else { magnitude };
        let slot = if imaginary { &mut im } else { &mut re };
        if slot.is_some() {
            let part = if imaginary { "imaginary" } else { "real" };
            return Err((term_at, format!("second {part} term; expected {COMPLEX_FORMS}")));
        }
        *slot = Some(v);
    }
    if re.is_none() && im.is_none() {
        return Err((c.pos, format!("expected {COMPLEX_FORMS}")));
    }
    Ok(Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)))
}

fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_complex(z: Complex64) -> String {
    format!("({:?}, {:?})", z.re, z.im)
}

/// Writes a document back as `.scn` text that parses to an equal document.
pub fn serialize(doc: &ScenarioDocument) -> String {
    let mut out = String::new();
    if let Some(b) = &doc.builtin {
        let _ = write!(out, "scenario {}", b.name);
        for (k, v) in &b.params {
            let _ = write!(out, " {k}={}", fmt_real(*v));
        }
        out.push('\n');
    } else {
        if let Some(name) = &doc.name {
            let _ = writeln!(out, "scenario {name}");
        }
        let _ = writeln!(out, "dimension {}", doc.dimension);
        let _ = writeln!(out, "basis {}", doc.basis_names.join(" "));
        let states = std::iter::once((INITIAL, &doc.initial))
            .chain(doc.finals.iter().map(|(k, v)| (k.as_str(), v)));
        for (name, amps) in states {
            let _ = writeln!(out, "\nstate {name}");
            for (label, z) in doc.basis_names.iter().zip(amps) {
                if z.re != 0.0 || z.im != 0.0 {
                    let _ = writeln!(out, "  {label} = {}", fmt_complex(*z));
                }
            }
        }
        for (name, values) in &doc.observables {
            let _ = writeln!(out, "\nobservable {name}");
            for (label, v) in doc.basis_names.iter().zip(values) {
                if *v != 0.0 {
                    let _ = writeln!(out, "  {label} = {}", fmt_real(*v));
                }
            }
        }
    }
    out.push('\n');
    for q in &doc.queries {
        let _ = write!(out, "query {}", q.kind);
        for (k, v) in &q.args {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
    }
    out
}

/// A query with its arguments resolved against a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Amplitudes,
    Probabilities,
    Network { final_name: String, observable: String },
    Weak { final_name: String, observable: String },
    MeanReading { final_name: String, observable: String, widths: Vec<f64> },
    SumRule { final_name: String, a: String, b: String },
    /// `final_name: None` conditions on all outcomes.
    ProductRule { final_name: Option<String>, a: String, b: String },
    Scan { observable: String, from: f64, to: f64, steps: usize },
}

impl QueryDirective {
    pub fn resolve(&self, scenario: &Scenario) -> std::result::Result<Query, ParseError> {
        let err = |msg: String| ParseError::new(self.line, 1, format!("query {}: {msg}", self.kind));
        let arg = |key: &str| self.args.get(key).cloned().unwrap_or_default();
        let final_arg = |key: &str| -> std::result::Result<String, ParseError> {
            let name = arg(key);
            scenario.final_state(&name).map_err(|e| err(e.to_string()))?;
            Ok(name)
        };
        let obs_arg = |key: &str| -> std::result::Result<String, ParseError> {
            let name = arg(key);
            scenario.observable(&name).map_err(|e| err(e.to_string()))?;
            Ok(name)
        };
        let real_arg = |key: &str| -> std::result::Result<f64, ParseError> {
            parse_real(&arg(key)).map_err(|(_, m)| err(format!("`{key}`: {m}")))
        };
        Ok(match self.kind {
            QueryKind::Amplitudes => Query::Amplitudes,
            QueryKind::Probabilities => Query::Probabilities,
            QueryKind::Network => Query::Network { final_name: final_arg("final")?, observable: obs_arg("obs")? },
            QueryKind::Weak => Query::Weak { final_name: final_arg("final")?, observable: obs_arg("obs")? },
            QueryKind::MeanReading => {
                let widths = arg("width")
                    .split(',')
                    .map(|w| {
                        let v = parse_real(w).map_err(|(_, m)| err(format!("`width`: {m}")))?;
                        if v > 0.0 {
                            Ok(v)
                        } else {
                            Err(err(format!("`width` must be positive, got {v}")))
                        }
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Query::MeanReading { final_name: final_arg("final")?, observable: obs_arg("obs")?, widths }
            }
            QueryKind::SumRule => Query::SumRule { final_name: final_arg("final")?, a: obs_arg("a")?, b: obs_arg("b")? },
            QueryKind::ProductRule => Query::ProductRule {
                final_name: if self.args.contains_key("final") { Some(final_arg("final")?) } else { None },
                a: obs_arg("a")?,
                b: obs_arg("b")?,
            },
            QueryKind::Scan => {
                if scenario.name != "hardy-epsilon" {
                    return Err(err("scans need `scenario hardy-epsilon`".into()));
                }
                let steps = arg("steps")
                    .parse::<usize>()
                    .ok()
                    .filter(|&s| s > 0)
                    .ok_or_else(|| err("`steps` must be a positive integer".into()))?;
                let (from, to) = (real_arg("from")?, real_arg("to")?);
                if !(from > 0.0 && to > 0.0) {
                    return Err(err("`from` and `to` must be positive".into()));
                }
                Query::Scan { observable: obs_arg("obs")?, from, to, steps }
            }
        })
    }
}

fn contextual(line: usize, context: &str, e: Error) -> Error {
    Error::Parse(ParseError::new(line, 1, format!("{context}: {e}")))
}

/// Builds the scenario a document describes: states are normalized (with a
/// note when the written norm was not 1), observables are checked, and every
/// query must name existing states and observables.
pub fn validate(doc: &ScenarioDocument) -> Result<Scenario> {
    let mut scenario = match &doc.builtin {
        Some(b) => {
            let line = doc.lines.get("scenario");
            let param = b.params.values().next().copied();
            let mut s = scenarios::builtin(&b.name, param)
                .map_err(|e| contextual(line, &format!("scenario {}", b.name), e))?;
            s.notes.push(format!("built-in scenario `{}`", b.name));
            s
        }
        None => custom_scenario(doc)?,
    };
    for q in &doc.queries {
        q.resolve(&scenario)?;
    }
    scenario.notes.dedup();
    Ok(scenario)
}

fn custom_scenario(doc: &ScenarioDocument) -> Result<Scenario> {
    let basis: Arc<Basis> = Basis::new(doc.basis_names.iter().cloned())
        .map_err(|e| contextual(1, "basis", e))?;
    let mut notes = Vec::new();
    let mut state = |name: &str, amps: &[Complex64]| -> Result<KetState> {
        let line = doc.lines.get(&format!("state:{name}"));
        let raw = KetState::from_raw(Arc::clone(&basis), amps.to_vec())
            .map_err(|e| contextual(line, &format!("state {name}"), e))?;
        let norm = raw.norm();
        let normalized = raw.normalize().map_err(|e| contextual(line, &format!("state {name}"), e))?;
        if (norm - 1.0).abs() > crate::ALGEBRAIC_TOL {
            notes.push(format!("state `{name}` had norm {norm} and was normalized"));
        }
        Ok(normalized)
    };
    let initial = state(INITIAL, &doc.initial)?;
    let mut finals = IndexMap::new();
    for (name, amps) in &doc.finals {
        finals.insert(name.clone(), state(name, amps)?);
    }
    let mut observables = IndexMap::new();
    for (name, values) in &doc.observables {
        let line = doc.lines.get(&format!("observable:{name}"));
        let op = DiagonalObservable::new(Arc::clone(&basis), values.clone())
            .map_err(|e| contextual(line, &format!("observable {name}"), e))?;
        observables.insert(name.clone(), op);
    }
    let names: Vec<&String> = finals.keys().collect();
    for (k, a) in names.iter().enumerate() {
        for b in &names[k + 1..] {
            if !orthogonal(&finals[*a], &finals[*b])? {
                notes.push(format!("warning: final states `{a}` and `{b}` are not orthogonal"));
            }
        }
    }
    Ok(Scenario {
        name: doc.name.clone().unwrap_or_else(|| "custom".into()),
        basis,
        initial,
        finals,
        observables,
        notes,
    })
}

/// Parses, validates and resolves every query.
pub fn load(text: &str) -> Result<(Scenario, Vec<Query>)> {
    let doc = parse(text)?;
    let scenario = validate(&doc)?;
    let queries = doc
        .queries
        .iter()
        .map(|q| q.resolve(&scenario))
        .collect::<std::result::Result<_, _>>()?;
    Ok((scenario, queries))
}
