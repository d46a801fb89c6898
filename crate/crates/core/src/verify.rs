//! Closed-system verification of `left || mediator || right`.
//!
//! Communication is binary rendezvous between the mediator and one
//! component at a time: a component's `!m` meets the mediator's `P.?m` on
//! the port `P` facing it, and the mediator's `P.!m` meets the component's
//! `?m`. The components never talk to each other directly.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lts::{Action, ActionLabel, Direction, IndexedLts, Lts, Side, Transition};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Bound on the length of one simulated run.
pub const MAX_SIMULATION_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("mediator action {0} has no port")]
    UnportedMediatorAction(Action),
    #[error("{side} component action {action} carries a port")]
    PortedComponentAction { side: Side, action: Action },
    #[error("state space exceeds the cap of {cap} states")]
    StateCapExceeded { cap: usize },
    #[error("script choice {choice} at step {step} is out of range (only {options} options)")]
    ScriptOutOfRange { step: usize, choice: usize, options: usize },
}

/// A triple of states, one per machine.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub left: String,
    pub mediator: String,
    pub right: String,
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.left, self.mediator, self.right)
    }
}

/// One synchronization, labeled from the component's point of view.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sync {
    pub port: Side,
    pub label: ActionLabel,
    pub direction: Direction,
}

impl fmt::Display for Sync {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.port, self.label, self.direction)
    }
}

type Triple = (usize, usize, usize);

/// The closed system, explored on demand.
#[derive(Debug, Clone)]
pub struct Product {
    left: IndexedLts,
    mediator: IndexedLts,
    right: IndexedLts,
    pub warnings: Vec<String>,
}

/// Checks the alphabets and prepares the three machines for exploration.
/// Component actions the mediator never matches become warnings.
pub fn parallel_compose(left: &Lts, mediator: &Lts, right: &Lts) -> Result<Product, VerifyError> {
    if let Some(t) = mediator.transitions.iter().find(|t| t.action.port.is_none()) {
        return Err(VerifyError::UnportedMediatorAction(t.action.clone()));
    }
    for (side, lts) in [(Side::Left, left), (Side::Right, right)] {
        if let Some(t) = lts.transitions.iter().find(|t| t.action.port.is_some()) {
            return Err(VerifyError::PortedComponentAction { side, action: t.action.clone() });
        }
    }
    let offered: BTreeSet<(Side, &ActionLabel, Direction)> = mediator
        .transitions
        .iter()
        .filter_map(|t| t.action.port.map(|p| (p, &t.action.label, t.action.direction.complement())))
        .collect();
    let mut warnings = Vec::new();
    for (side, lts) in [(Side::Left, left), (Side::Right, right)] {
        for a in lts.alphabet() {
            if !offered.contains(&(side, &a.label, a.direction)) {
                warnings.push(format!("{side} action {a} is never matched by the mediator"));
            }
        }
    }
    Ok(Product { left: left.indexed(), mediator: mediator.indexed(), right: right.indexed(), warnings })
}

impl Product {
    fn initial(&self) -> Triple {
        (self.left.initial, self.mediator.initial, self.right.initial)
    }

    fn is_goal(&self, (l, m, r): Triple) -> bool {
        self.left.finals[l] && self.mediator.finals[m] && self.right.finals[r]
    }

    fn state(&self, (l, m, r): Triple) -> ProductState {
        ProductState {
            left: self.left.names[l].clone(),
            mediator: self.mediator.names[m].clone(),
            right: self.right.names[r].clone(),
        }
    }

    /// Enabled synchronizations in a fixed order: mediator transitions in
    /// machine order, then component transitions in machine order.
    fn successors(&self, (l, m, r): Triple) -> Vec<(Sync, Triple)> {
        let mut out = Vec::new();
        for (ma, m2) in &self.mediator.out[m] {
            let Some(port) = ma.port else { continue };
            let (machine, at) = match port {
                Side::Left => (&self.left, l),
                Side::Right => (&self.right, r),
            };
            for (ca, c2) in &machine.out[at] {
                if ca.label == ma.label && ca.direction == ma.direction.complement() {
                    let next = match port {
                        Side::Left => (*c2, *m2, r),
                        Side::Right => (l, *m2, *c2),
                    };
                    let sync = Sync { port, label: ca.label.clone(), direction: ca.direction };
                    out.push((sync, next));
                }
            }
        }
        out
    }

    /// Breadth-first exploration of every reachable triple.
    pub fn explore(&self, cap: usize) -> Result<StateSpace, VerifyError> {
        let mut index: HashMap<Triple, usize> = HashMap::new();
        let mut triples = vec![self.initial()];
        let mut edges: Vec<Vec<(Sync, usize)>> = Vec::new();
        index.insert(self.initial(), 0);
        if cap == 0 {
            return Err(VerifyError::StateCapExceeded { cap });
        }
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut out = Vec::new();
            for (sync, next) in self.successors(triples[i]) {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if triples.len() == cap {
                            return Err(VerifyError::StateCapExceeded { cap });
                        }
                        let j = triples.len();
                        triples.push(next);
                        index.insert(next, j);
                        queue.push_back(j);
                        j
                    }
                };
                out.push((sync, j));
            }
            // Queue order equals discovery order, so `i == edges.len()`.
            edges.push(out);
        }
        let states = triples.iter().map(|&t| self.state(t)).collect();
        let goal = triples.iter().map(|&t| self.is_goal(t)).collect();
        Ok(StateSpace { states, goal, edges })
    }
}

/// The reachable part of a product; state 0 is the initial triple and the
/// rest are numbered in breadth-first discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    pub states: Vec<ProductState>,
    pub goal: Vec<bool>,
    pub edges: Vec<Vec<(Sync, usize)>>,
}

impl StateSpace {
    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn stuck(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&i| !self.goal[i] && self.edges[i].is_empty()).collect()
    }

    /// True when no run, finite or infinite, avoids the goal forever: the
    /// part reachable without passing through a goal state has no dead end
    /// and no cycle.
    pub fn every_run_reaches_goal(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut mark = vec![Mark::New; self.states.len()];
        // Iterative depth-first search over non-goal states.
        let mut stack: Vec<(usize, usize)> = Vec::new();
        if self.goal[0] {
            return true;
        }
        mark[0] = Mark::Open;
        stack.push((0, 0));
        while let Some(&mut (s, ref mut k)) = stack.last_mut() {
            if self.edges[s].is_empty() {
                return false;
            }
            if *k == self.edges[s].len() {
                mark[s] = Mark::Done;
                stack.pop();
                continue;
            }
            let t = self.edges[s][*k].1;
            *k += 1;
            if self.goal[t] {
                continue;
            }
            match mark[t] {
                Mark::Open => return false,
                Mark::Done => {}
                Mark::New => {
                    mark[t] = Mark::Open;
                    stack.push((t, 0));
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub deadlock_free: bool,
    pub goal_reachable: bool,
    /// Every maximal run passes through a goal state.
    pub runs_reach_goal: bool,
    pub stuck_states: Vec<ProductState>,
    pub state_count: usize,
    pub transition_count: usize,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    /// The mediated system interoperates: some run completes and none
    /// gets stuck.
    pub fn passed(&self) -> bool {
        self.deadlock_free && self.goal_reachable
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.state_count)?;
        writeln!(f, "transitions {}", self.transition_count)?;
        writeln!(f, "goal reachable {}", self.goal_reachable)?;
        writeln!(f, "deadlock free {}", self.deadlock_free)?;
        writeln!(f, "runs reach goal {}", self.runs_reach_goal)?;
        for s in &self.stuck_states {
            writeln!(f, "stuck {s}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning {w}")?;
        }
        writeln!(f, "verdict {}", if self.passed() { "pass" } else { "fail" })
    }
}

pub fn check(product: &Product, cap: usize) -> Result<VerifyReport, VerifyError> {
    let space = product.explore(cap)?;
    let stuck_states: Vec<ProductState> = space.stuck().into_iter().map(|i| space.states[i].clone()).collect();
    Ok(VerifyReport {
        deadlock_free: stuck_states.is_empty(),
        goal_reachable: space.goal.iter().any(|&g| g),
        runs_reach_goal: space.every_run_reaches_goal(),
        stuck_states,
        state_count: space.states.len(),
        transition_count: space.transition_count(),
        warnings: product.warnings.clone(),
    })
}

/// Composes and checks in one go.
pub fn verify(left: &Lts, mediator: &Lts, right: &Lts, cap: usize) -> Result<VerifyReport, VerifyError> {
    check(&parallel_compose(left, mediator, right)?, cap)
}

/// How a simulated run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AllFinal,
    Stuck,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationLog {
    pub steps: Vec<Sync>,
    pub end: ProductState,
    pub outcome: Outcome,
}

impl fmt::Display for SimulationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{} {s}", i + 1)?;
        }
        let end = match self.outcome {
            Outcome::AllFinal => "ALL FINAL",
            Outcome::Stuck => "STUCK",
            Outcome::StepLimit => "STEP LIMIT",
        };
        writeln!(f, "{end} {}", self.end)
    }
}

/// Plays one run of the closed system until no synchronization is enabled.
/// Whenever several are enabled, the next script entry picks one; once the
/// script is used up, a generator seeded with `seed` decides.
pub fn simulate(
    left: &Lts,
    mediator: &Lts,
    right: &Lts,
    script: &[usize],
    seed: u64,
) -> Result<SimulationLog, VerifyError> {
    let product = parallel_compose(left, mediator, right)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut script = script.iter();
    let mut at = product.initial();
    let mut steps = Vec::new();
    loop {
        let mut options = product.successors(at);
        if options.is_empty() {
            let outcome = if product.is_goal(at) { Outcome::AllFinal } else { Outcome::Stuck };
            return Ok(SimulationLog { steps, end: product.state(at), outcome });
        }
        if steps.len() == MAX_SIMULATION_STEPS {
            return Ok(SimulationLog { steps, end: product.state(at), outcome: Outcome::StepLimit });
        }
        let pick = if options.len() == 1 {
            0
        } else if let Some(&choice) = script.next() {
            if choice >= options.len() {
                return Err(VerifyError::ScriptOutOfRange {
                    step: steps.len() + 1,
                    choice,
                    options: options.len(),
                });
            }
            choice
        } else {
            rng.gen_range(0..options.len())
        };
        let (sync, next) = options.swap_remove(pick);
        steps.push(sync);
        at = next;
    }
}

/// A mediator that only passes messages through unchanged, one at a time,
/// for every label one component sends and the other receives. Used as the
/// "no adaptation" baseline.
pub fn identity_relay(left: &Lts, right: &Lts) -> Lts {
    let labels = |lts: &Lts, dir: Direction| -> BTreeSet<ActionLabel> {
        lts.alphabet().into_iter().filter(|a| a.direction == dir).map(|a| a.label.clone()).collect()
    };
    let mut transitions = Vec::new();
    for (from, to) in [(Side::Left, Side::Right), (Side::Right, Side::Left)] {
        let (src, dst) = match from {
            Side::Left => (left, right),
            Side::Right => (right, left),
        };
        let sent = labels(src, Direction::Send);
        for label in sent.intersection(&labels(dst, Direction::Receive)) {
            let hold = format!("{from}_{label}");
            transitions.push(Transition {
                source: "idle".into(),
                action: Action::on_port(from, Direction::Receive, label.clone()),
                target: hold.clone(),
            });
            transitions.push(Transition {
                source: hold,
                action: Action::on_port(to, Direction::Send, label.clone()),
                target: "idle".into(),
            });
        }
    }
    Lts::new("relay", "idle", ["idle"], transitions)
}
