//! Decomposition of a machine into its elementary traces.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lts::{IndexedLts, Lts, Trace, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("max_traces must be at least 1")]
    ZeroTraceCap,
    #[error("machine {name} is invalid: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidLts { name: String, violations: Vec<Violation> },
}

/// Bounds for turning cyclic machines into finite trace sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeConfig {
    /// Extra traversals allowed per transition: each transition may occur at
    /// most `unroll_bound + 1` times in one trace.
    pub unroll_bound: u32,
    pub max_traces: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { unroll_bound: 1, max_traces: 1000 }
    }
}

/// The traces of a machine in (length, lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSet {
    pub traces: Vec<Trace>,
    /// Set when more than `max_traces` distinct traces exist; `traces` then
    /// holds the `max_traces` smallest.
    pub truncated: bool,
}

/// Enumerates every initial-to-final path whose per-transition usage stays
/// within the unroll bound, deduplicated by action sequence.
pub fn enumerate_traces(lts: &Lts, cfg: &DecomposeConfig) -> Result<TraceSet, DecomposeError> {
    if cfg.max_traces == 0 {
        return Err(DecomposeError::ZeroTraceCap);
    }
    let violations = lts.validate();
    if !violations.is_empty() {
        return Err(DecomposeError::InvalidLts { name: lts.name.clone(), violations });
    }

    let machine = lts.indexed();
    let mut walk = Walk {
        machine: &machine,
        limit: cfg.unroll_bound.saturating_add(1),
        usage: machine.out.iter().map(|edges| vec![0; edges.len()]).collect(),
        path: Vec::new(),
        found: BTreeSet::new(),
        max_traces: cfg.max_traces,
        truncated: false,
    };
    walk.visit(machine.initial);
    Ok(TraceSet { traces: walk.found.into_iter().collect(), truncated: walk.truncated })
}

struct Walk<'a> {
    machine: &'a IndexedLts,
    limit: u32,
    usage: Vec<Vec<u32>>,
    path: Vec<crate::lts::Action>,
    found: BTreeSet<Trace>,
    max_traces: usize,
    truncated: bool,
}

impl Walk<'_> {
    fn visit(&mut self, state: usize) {
        if self.machine.finals[state] {
            self.record();
        }
        // With the set full, every extension is longer than the largest
        // kept trace and could never displace it.
        if self.found.len() == self.max_traces
            && self.found.last().is_some_and(|t| self.path.len() >= t.len())
        {
            return;
        }
        for edge in 0..self.machine.out[state].len() {
            if self.usage[state][edge] >= self.limit {
                continue;
            }
            let (action, target) = &self.machine.out[state][edge];
            self.usage[state][edge] += 1;
            self.path.push(action.clone());
            self.visit(*target);
            self.path.pop();
            self.usage[state][edge] -= 1;
        }
    }

    fn record(&mut self) {
        let trace = Trace::new(self.path.clone());
        if self.found.contains(&trace) {
            return;
        }
        self.found.insert(trace);
        if self.found.len() > self.max_traces {
            self.found.pop_last();
            self.truncated = true;
        }
    }
}
