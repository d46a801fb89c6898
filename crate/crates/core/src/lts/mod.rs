//! Labeled transition systems: the protocol model shared by every stage.
//!
//! Components are plain machines whose actions are `!m` (send) and `?m`
//! (receive). Mediators are port-qualified machines whose actions carry the
//! side they face, rendered `L.?m` or `R.!m`.

mod dot;
mod format;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use dot::{export_dot, LEFT_EDGE_COLOR, RIGHT_EDGE_COLOR};
pub use format::{parse_lts, parse_trace, serialize_lts, ParseError};

/// Returns true for identifier tokens: non-empty, letters, digits and `_`.
pub fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid message label {0:?}: expected letters, digits or '_'")]
pub struct LabelError(pub String);

/// A message identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionLabel(String);

impl ActionLabel {
    pub fn new(name: impl Into<String>) -> Result<Self, LabelError> {
        let name = name.into();
        if is_ident(&name) {
            Ok(Self(name))
        } else {
            Err(LabelError(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Send,
    Receive,
}

impl Direction {
    pub fn complement(self) -> Self {
        match self {
            Direction::Send => Direction::Receive,
            Direction::Receive => Direction::Send,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Send => '!',
            Direction::Receive => '?',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Send => "send",
            Direction::Receive => "receive",
        })
    }
}

/// One of the two components taking part in a mediation, and the mediator
/// port facing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn prefix(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prefix())
    }
}

/// A direction-tagged message occurrence.
///
/// `port` is `None` for component actions and names the facing side for
/// mediator actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub port: Option<Side>,
    pub label: ActionLabel,
    pub direction: Direction,
}

impl Action {
    pub fn send(label: ActionLabel) -> Self {
        Self { port: None, label, direction: Direction::Send }
    }

    pub fn receive(label: ActionLabel) -> Self {
        Self { port: None, label, direction: Direction::Receive }
    }

    pub fn on_port(port: Side, direction: Direction, label: ActionLabel) -> Self {
        Self { port: Some(port), label, direction }
    }

    /// Parses `!m`, `?m`, `L.!m` or `R.?m`.
    pub fn parse(text: &str) -> Result<Self, LabelError> {
        let text = text.trim();
        let (port, rest) = match text.split_once('.') {
            Some(("L", rest)) => (Some(Side::Left), rest),
            Some(("R", rest)) => (Some(Side::Right), rest),
            Some(_) => return Err(LabelError(text.to_string())),
            None => (None, text),
        };
        let direction = match rest.chars().next() {
            Some('!') => Direction::Send,
            Some('?') => Direction::Receive,
            _ => return Err(LabelError(text.to_string())),
        };
        let label = ActionLabel::new(rest[1..].trim())?;
        Ok(Self { port, label, direction })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(port) = self.port {
            write!(f, "{port}.")?;
        }
        write!(f, "{}{}", self.direction.symbol(), self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: String,
    pub action: Action,
    pub target: String,
}

/// A finite action sequence: one elementary behavior of a machine.
///
/// Traces order by length first, then lexicographically by action.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Trace(pub Vec<Action>);

impl Trace {
    pub fn new(actions: Vec<Action>) -> Self {
        Self(actions)
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<empty>");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A violated machine invariant, as reported by [`Lts::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InitialNotAState(String),
    FinalNotAState(String),
    NoFinalStates,
    DanglingEndpoint { transition: Transition, state: String },
    Unreachable(String),
    CannotReachFinal(String),
    MixedPorts,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialNotAState(s) => write!(f, "initial state {s} is not a state"),
            Violation::FinalNotAState(s) => write!(f, "final state {s} is not a state"),
            Violation::NoFinalStates => f.write_str("no final states"),
            Violation::DanglingEndpoint { transition, state } => write!(
                f,
                "transition {} -> {} : {} references unknown state {state}",
                transition.source, transition.target, transition.action
            ),
            Violation::Unreachable(s) => write!(f, "state {s} is unreachable from the initial state"),
            Violation::CannotReachFinal(s) => write!(f, "state {s} cannot reach any final state"),
            Violation::MixedPorts => {
                f.write_str("machine mixes port-qualified and plain actions")
            }
        }
    }
}

/// A rooted labeled transition system with final states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    pub name: String,
    pub states: BTreeSet<String>,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: BTreeSet<Transition>,
}

impl Lts {
    /// Builds a machine whose state set is every state mentioned by the
    /// initial state, the finals and the transitions.
    pub fn new(
        name: impl Into<String>,
        initial: impl Into<String>,
        finals: impl IntoIterator<Item = impl Into<String>>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Self {
        let initial = initial.into();
        let finals: BTreeSet<String> = finals.into_iter().map(Into::into).collect();
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        let mut states = BTreeSet::new();
        states.insert(initial.clone());
        states.extend(finals.iter().cloned());
        for t in &transitions {
            states.insert(t.source.clone());
            states.insert(t.target.clone());
        }
        Self { name: name.into(), states, initial, finals, transitions }
    }

    /// Wraps a trace into a linear machine `t0 -> t1 -> ... -> tn`.
    pub fn linear(name: impl Into<String>, trace: &Trace) -> Self {
        let transitions = trace.actions().iter().enumerate().map(|(i, a)| Transition {
            source: format!("t{i}"),
            action: a.clone(),
            target: format!("t{}", i + 1),
        });
        Self::new(name, "t0", [format!("t{}", trace.len())], transitions)
    }

    pub fn is_final(&self, state: &str) -> bool {
        self.finals.contains(state)
    }

    pub fn outgoing<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| t.source == state)
    }

    /// Every action of the machine, deduplicated.
    pub fn alphabet(&self) -> BTreeSet<&Action> {
        self.transitions.iter().map(|t| &t.action).collect()
    }

    pub fn is_port_qualified(&self) -> bool {
        !self.transitions.is_empty() && self.transitions.iter().all(|t| t.action.port.is_some())
    }

    /// Lists every invariant violation; empty iff the machine is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.states.contains(&self.initial) {
            out.push(Violation::InitialNotAState(self.initial.clone()));
        }
        if self.finals.is_empty() {
            out.push(Violation::NoFinalStates);
        }
        for f in &self.finals {
            if !self.states.contains(f) {
                out.push(Violation::FinalNotAState(f.clone()));
            }
        }
        for t in &self.transitions {
            for s in [&t.source, &t.target] {
                if !self.states.contains(s) {
                    out.push(Violation::DanglingEndpoint { transition: t.clone(), state: s.clone() });
                }
            }
        }
        let ported = self.transitions.iter().filter(|t| t.action.port.is_some()).count();
        if ported != 0 && ported != self.transitions.len() {
            out.push(Violation::MixedPorts);
        }
        if !out.is_empty() {
            return out;
        }

        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for t in &self.transitions {
            succ.entry(&t.source).or_default().push(&t.target);
            pred.entry(&t.target).or_default().push(&t.source);
        }
        let forward = reach(std::iter::once(self.initial.as_str()), &succ);
        let backward = reach(self.finals.iter().map(String::as_str), &pred);
        for s in &self.states {
            if !forward.contains(s.as_str()) {
                out.push(Violation::Unreachable(s.clone()));
            }
        }
        for s in &self.states {
            if !backward.contains(s.as_str()) {
                out.push(Violation::CannotReachFinal(s.clone()));
            }
        }
        out
    }

    /// Returns true if `trace` leads from the initial state to a final
    /// state along some path.
    pub fn accepts(&self, trace: &Trace) -> bool {
        let mut current: BTreeSet<&str> = BTreeSet::from([self.initial.as_str()]);
        for action in trace.actions() {
            current = self
                .transitions
                .iter()
                .filter(|t| current.contains(t.source.as_str()) && &t.action == action)
                .map(|t| t.target.as_str())
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|s| self.is_final(s))
    }

    pub(crate) fn indexed(&self) -> IndexedLts {
        IndexedLts::from(self)
    }
}

fn reach<'a>(
    roots: impl Iterator<Item = &'a str>,
    edges: &BTreeMap<&'a str, Vec<&'a str>>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for r in roots {
        if seen.insert(r) {
            queue.push_back(r);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &n in edges.get(s).into_iter().flatten() {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

/// Dense view of a machine for exploration: states become indices in
/// lexicographic order.
#[derive(Debug, Clone)]
pub(crate) struct IndexedLts {
    pub names: Vec<String>,
    pub initial: usize,
    pub finals: Vec<bool>,
    pub out: Vec<Vec<(Action, usize)>>,
}

impl From<&Lts> for IndexedLts {
    fn from(lts: &Lts) -> Self {
        let names: Vec<String> = lts.states.iter().cloned().collect();
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut out = vec![Vec::new(); names.len()];
        for t in &lts.transitions {
            if let (Some(&s), Some(&d)) = (index.get(t.source.as_str()), index.get(t.target.as_str())) {
                out[s].push((t.action.clone(), d));
            }
        }
        let finals = names.iter().map(|s| lts.finals.contains(s)).collect();
        let initial = index.get(lts.initial.as_str()).copied().unwrap_or(0);
        Self { names, initial, finals, out }
    }
}
