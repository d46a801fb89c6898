//! Line-oriented text format for machines (`.lts`) and single traces
//! (`.trace`).
//!
//! ```text
//! lts Name
//! initial s0
//! final s2, s3
//! s0 -> s1 : !request     # comment
//! s1 -> s2 : ?reply
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Action, ActionLabel, Direction, Lts, Side, Trace, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown state {state}")]
    UnknownState { line: usize, column: usize, state: String },
    #[error("missing `initial` line")]
    MissingInitial,
    #[error("missing `final` line")]
    MissingFinal,
    #[error("line {line}: empty `final` set")]
    EmptyFinal { line: usize },
    #[error("line {line}: duplicate transition {source_state} -> {target} : {action}")]
    DuplicateTransition { line: usize, source_state: String, target: String, action: String },
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self { chars: src.chars().collect(), pos: 0, line }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, column: self.column(), message: message.into() }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what}")));
        }
        Ok((self.chars[start..self.pos].iter().collect(), start + 1))
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        let t: Vec<char> = token.chars().collect();
        if self.chars[self.pos..].starts_with(&t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        self.skip_ws();
        let save = self.pos;
        match self.ident(&format!("`{word}`")) {
            Ok((w, _)) if w == word => Ok(()),
            _ => {
                self.pos = save;
                Err(self.error(format!("expected `{word}`")))
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        self.skip_ws();
        let port = if self.eat("L.") {
            Some(Side::Left)
        } else if self.eat("R.") {
            Some(Side::Right)
        } else {
            None
        };
        self.skip_ws();
        let direction = if self.eat("!") {
            Direction::Send
        } else if self.eat("?") {
            Direction::Receive
        } else {
            return Err(self.error("expected `!` or `?`"));
        };
        let (name, _) = self.ident("message label")?;
        let label = ActionLabel::new(name).map_err(|e| self.error(e.to_string()))?;
        Ok(Action { port, label, direction })
    }
}

/// Yields `(line number, content)` for lines with content left after
/// stripping comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        (!content.trim().is_empty()).then_some((i + 1, content))
    })
}

pub fn parse_lts(text: &str) -> Result<Lts, ParseError> {
    let mut lines = content_lines(text);

    let (line_no, line) = lines
        .next()
        .ok_or(ParseError::Syntax { line: 1, column: 1, message: "expected `lts` header".into() })?;
    let mut c = Cursor::new(line, line_no);
    c.keyword("lts")?;
    let (name, _) = c.ident("machine name")?;
    c.finish()?;

    let (line_no, line) = lines.next().ok_or(ParseError::MissingInitial)?;
    let mut c = Cursor::new(line, line_no);
    c.keyword("initial")?;
    let (initial, _) = c.ident("initial state")?;
    c.finish()?;

    let (final_line, line) = lines.next().ok_or(ParseError::MissingFinal)?;
    let mut c = Cursor::new(line, final_line);
    c.keyword("final")?;
    let mut finals: Vec<(String, usize)> = Vec::new();
    if c.at_end() {
        return Err(ParseError::EmptyFinal { line: final_line });
    }
    loop {
        finals.push(c.ident("final state")?);
        if c.at_end() {
            break;
        }
        c.expect(",")?;
    }

    let mut transitions = BTreeSet::new();
    for (line_no, line) in lines {
        let mut c = Cursor::new(line, line_no);
        let (source, _) = c.ident("source state")?;
        c.expect("->")?;
        let (target, _) = c.ident("target state")?;
        c.expect(":")?;
        let action = c.action()?;
        c.finish()?;
        let t = Transition { source, action, target };
        if transitions.contains(&t) {
            return Err(ParseError::DuplicateTransition {
                line: line_no,
                source_state: t.source,
                target: t.target,
                action: t.action.to_string(),
            });
        }
        transitions.insert(t);
    }

    let mut mentioned: BTreeSet<&str> = BTreeSet::from([initial.as_str()]);
    for t in &transitions {
        mentioned.insert(&t.source);
        mentioned.insert(&t.target);
    }
    for (f, column) in &finals {
        if !mentioned.contains(f.as_str()) {
            return Err(ParseError::UnknownState { line: final_line, column: *column, state: f.clone() });
        }
    }

    Ok(Lts::new(name, initial, finals.into_iter().map(|(f, _)| f), transitions))
}

/// Parses the single-trace shorthand: one action per line.
pub fn parse_trace(text: &str) -> Result<Trace, ParseError> {
    content_lines(text)
        .map(|(line_no, line)| {
            let mut c = Cursor::new(line, line_no);
            let a = c.action()?;
            c.finish()?;
            Ok(a)
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Trace::new)
}

/// Renders a machine in the `.lts` format, transitions sorted by source
/// state, then message label, then the rest of the action and target.
pub fn serialize_lts(lts: &Lts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lts {}", lts.name);
    let _ = writeln!(out, "initial {}", lts.initial);
    let finals: Vec<&str> = lts.finals.iter().map(String::as_str).collect();
    let _ = writeln!(out, "final {}", finals.join(", "));
    for t in sorted_transitions(lts) {
        let _ = writeln!(out, "{} -> {} : {}", t.source, t.target, t.action);
    }
    out
}

pub(super) fn sorted_transitions(lts: &Lts) -> Vec<&Transition> {
    let mut ts: Vec<&Transition> = lts.transitions.iter().collect();
    ts.sort_by(|a, b| {
        (&a.source, &a.action.label, a.action.direction, a.action.port, &a.target).cmp(&(
            &b.source,
            &b.action.label,
            b.action.direction,
            b.action.port,
            &b.target,
        ))
    });
    ts
}
