//! Mediator construction: one mediator trace per alignment, merged into a
//! prefix tree.
//!
//! Every step of an alignment becomes a fragment in which the mediator first
//! receives everything the components send in that step (left port before
//! right, each in trace order) and then sends everything they expect to
//! receive (again left before right). For a forward step that is a plain
//! relay; for a reorder it is buffering followed by re-emission in the
//! receiver's order; consume and produce steps are one-sided fragments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::decompose::{enumerate_traces, DecomposeConfig, DecomposeError, TraceSet};
use crate::lts::{Action, ActionLabel, Direction, Lts, Side, Transition};
use crate::mismatch::{match_components, AlignConfig, Alignment, CompatibilityMatrix};
use crate::semantics::CorrespondenceMap;

/// A mediator port: the endpoint facing one component.
pub type Port = Side;

/// A mediator action on one port, seen from the mediator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MediatorAction {
    pub port: Port,
    pub label: ActionLabel,
    pub direction: Direction,
}

impl MediatorAction {
    pub fn receive(port: Port, label: ActionLabel) -> Self {
        Self { port, label, direction: Direction::Receive }
    }

    pub fn send(port: Port, label: ActionLabel) -> Self {
        Self { port, label, direction: Direction::Send }
    }

    pub fn to_action(&self) -> Action {
        Action::on_port(self.port, self.direction, self.label.clone())
    }
}

impl fmt::Display for MediatorAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.port, self.direction.symbol(), self.label)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MediatorTrace(pub Vec<MediatorAction>);

impl MediatorTrace {
    pub fn actions(&self) -> &[MediatorAction] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid mediator action {0:?}: expected a port-qualified action such as L.?m")]
pub struct MediatorActionError(pub String);

impl std::str::FromStr for MediatorTrace {
    type Err = MediatorActionError;

    /// Parses space-separated port-qualified actions, e.g. `L.?a R.!a`, or
    /// `<empty>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "<empty>" {
            return Ok(Self::default());
        }
        s.split_whitespace()
            .map(|word| {
                let bad = || MediatorActionError(word.to_string());
                let a = Action::parse(word).map_err(|_| bad())?;
                let port = a.port.ok_or_else(bad)?;
                Ok(MediatorAction { port, label: a.label, direction: a.direction })
            })
            .collect::<Result<_, _>>()
            .map(MediatorTrace)
    }
}

/// Renders like [`crate::lts::Trace`]: space-separated, `<empty>` when empty.
impl fmt::Display for MediatorTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<empty>");
        }
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Builds the mediating behavior for one alignment.
pub fn mediator_trace(a: &Alignment) -> MediatorTrace {
    let mut out = Vec::new();
    for step in &a.steps {
        for wanted in [Direction::Send, Direction::Receive] {
            for side in [Side::Left, Side::Right] {
                for &i in step.span(side) {
                    let action = a.action(side, i);
                    if action.direction == wanted {
                        out.push(MediatorAction {
                            port: side,
                            label: action.label.clone(),
                            direction: wanted.complement(),
                        });
                    }
                }
            }
        }
    }
    MediatorTrace(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("no mediator traces to compose")]
    NoTraces,
    #[error("no left trace can be aligned with any right trace")]
    NoCompatiblePair,
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

/// Merges mediator traces into one machine: traces sharing a prefix share
/// states, and the end of every trace is a final state. States are named
/// `m0`, `m1`, ... in creation order over the sorted trace set.
pub fn compose_mediator(traces: &BTreeSet<MediatorTrace>) -> Result<Lts, SynthesisError> {
    if traces.is_empty() {
        return Err(SynthesisError::NoTraces);
    }
    let mut children: BTreeMap<(usize, &MediatorAction), usize> = BTreeMap::new();
    let mut count = 1;
    let mut finals = BTreeSet::new();
    let mut transitions = Vec::new();
    for trace in traces {
        let mut at = 0;
        for action in trace.actions() {
            at = *children.entry((at, action)).or_insert_with(|| {
                let next = count;
                count += 1;
                transitions.push(Transition {
                    source: format!("m{at}"),
                    action: action.to_action(),
                    target: format!("m{next}"),
                });
                next
            });
        }
        finals.insert(format!("m{at}"));
    }
    Ok(Lts::new("mediator", "m0", finals, transitions))
}

/// Everything the pipeline produced on the way to a mediator.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub left_traces: TraceSet,
    pub right_traces: TraceSet,
    pub matrix: CompatibilityMatrix,
    pub traces: BTreeSet<MediatorTrace>,
    pub mediator: Lts,
}

impl Synthesis {
    /// Whether either trace enumeration hit its cap.
    pub fn truncated(&self) -> bool {
        self.left_traces.truncated || self.right_traces.truncated
    }
}

/// Decomposes both machines, aligns every trace pair and composes the
/// mediator from the compatible pairs.
pub fn synthesize(
    left: &Lts,
    right: &Lts,
    map: &CorrespondenceMap,
    decompose: &DecomposeConfig,
    align: &AlignConfig,
) -> Result<Synthesis, SynthesisError> {
    let left_traces = enumerate_traces(left, decompose)?;
    let right_traces = enumerate_traces(right, decompose)?;
    let matrix = match_components(&left_traces.traces, &right_traces.traces, map, align);
    let traces: BTreeSet<MediatorTrace> = matrix.alignments().map(|(_, _, a)| mediator_trace(a)).collect();
    if traces.is_empty() {
        return Err(SynthesisError::NoCompatiblePair);
    }
    let mediator = compose_mediator(&traces)?;
    Ok(Synthesis { left_traces, right_traces, matrix, traces, mediator })
}
