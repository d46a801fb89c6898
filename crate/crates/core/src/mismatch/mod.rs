//! Alignment of a left trace with a right trace under a correspondence map.
//!
//! An alignment partitions both traces into steps, each resolving one piece
//! of the conversation: a direct relay (`Forward`), or one of the six basic
//! mismatches (consumed extra send, produced missing send, translation,
//! reordering, splitting, merging). The minimum-cost alignment is computed by
//! dynamic programming over positions `(i, j)` in the two traces.

mod classify;
mod matrix;

use std::fmt;

use thiserror::Error;

use crate::lts::{Action, ActionLabel, Direction, Side, Trace};
use crate::semantics::{CorrespondenceKind, CorrespondenceMap, Mapping};

pub use classify::{classify, MismatchInstance, MismatchReport, Variant};
pub use matrix::{match_components, CompatibilityMatrix};

/// Step kinds, declared in tie-breaking priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    Forward,
    Translate,
    Split,
    Merge,
    Reorder,
    Consume,
    Produce,
}

impl StepKind {
    pub const ALL: [StepKind; 7] = [
        StepKind::Forward,
        StepKind::Translate,
        StepKind::Split,
        StepKind::Merge,
        StepKind::Reorder,
        StepKind::Consume,
        StepKind::Produce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepKind::Forward => "forward",
            StepKind::Translate => "translate",
            StepKind::Split => "split",
            StepKind::Merge => "merge",
            StepKind::Reorder => "reorder",
            StepKind::Consume => "consume",
            StepKind::Produce => "produce",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("forward cost must be 0")]
    NonZeroForward,
    #[error("{0} cost must be at least 1")]
    ZeroCost(StepKind),
    #[error("reorder window must be at least 1")]
    ZeroWindow,
}

/// Cost of each step kind. `reorder` is charged per displaced pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepCosts {
    pub forward: u64,
    pub translate: u64,
    pub split: u64,
    pub merge: u64,
    pub reorder: u64,
    pub consume: u64,
    pub produce: u64,
}

impl Default for StepCosts {
    fn default() -> Self {
        Self { forward: 0, translate: 1, split: 1, merge: 1, reorder: 2, consume: 3, produce: 4 }
    }
}

impl StepCosts {
    pub fn get(&self, kind: StepKind) -> u64 {
        match kind {
            StepKind::Forward => self.forward,
            StepKind::Translate => self.translate,
            StepKind::Split => self.split,
            StepKind::Merge => self.merge,
            StepKind::Reorder => self.reorder,
            StepKind::Consume => self.consume,
            StepKind::Produce => self.produce,
        }
    }

    pub fn set(&mut self, kind: StepKind, cost: u64) {
        let slot = match kind {
            StepKind::Forward => &mut self.forward,
            StepKind::Translate => &mut self.translate,
            StepKind::Split => &mut self.split,
            StepKind::Merge => &mut self.merge,
            StepKind::Reorder => &mut self.reorder,
            StepKind::Consume => &mut self.consume,
            StepKind::Produce => &mut self.produce,
        };
        *slot = cost;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignConfig {
    /// Largest span length a single reordering may cover.
    pub reorder_window: usize,
    pub costs: StepCosts,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self { reorder_window: 4, costs: StepCosts::default() }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.reorder_window == 0 {
            return Err(ConfigError::ZeroWindow);
        }
        if self.costs.forward != 0 {
            return Err(ConfigError::NonZeroForward);
        }
        for kind in &StepKind::ALL[1..] {
            if self.costs.get(*kind) == 0 {
                return Err(ConfigError::ZeroCost(*kind));
            }
        }
        Ok(())
    }
}

/// One step of an alignment: the trace positions it covers on each side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlignStep {
    pub kind: StepKind,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Left labels in span order, then right labels in span order.
    pub labels: Vec<ActionLabel>,
    /// Matched `(left, right)` positions for forward, translate and
    /// reorder steps.
    pub pairs: Vec<(usize, usize)>,
    /// Set on the produce/consume steps that resolve two crossed receives
    /// (`[?x, !y]` against `[?y, !x]`).
    pub crossed: bool,
}

impl AlignStep {
    fn min_left(&self) -> usize {
        self.left.iter().copied().min().unwrap_or(usize::MAX)
    }

    /// The side covered by a one-sided step (consume or produce).
    pub fn lone_side(&self) -> Option<Side> {
        match (self.left.is_empty(), self.right.is_empty()) {
            (false, true) => Some(Side::Left),
            (true, false) => Some(Side::Right),
            _ => None,
        }
    }

    pub fn span(&self, side: Side) -> &[usize] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// A complete alignment of two traces. Steps are in execution order and
/// partition both traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub left: Trace,
    pub right: Trace,
    pub steps: Vec<AlignStep>,
    pub cost: u64,
}

impl Alignment {
    pub fn trace(&self, side: Side) -> &Trace {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn action(&self, side: Side, index: usize) -> &Action {
        &self.trace(side).actions()[index]
    }
}

/// No complete alignment exists. The frontier is the furthest pair of
/// prefixes `(left, right)` that can still be aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("incompatible traces: alignable prefix ends at left {left_prefix}, right {right_prefix}")]
pub struct Incompatible {
    pub left_prefix: usize,
    pub right_prefix: usize,
}

struct Move {
    steps: Vec<AlignStep>,
    next: (usize, usize),
    cost: u64,
}

struct Aligner<'a> {
    left: &'a [Action],
    right: &'a [Action],
    map: &'a CorrespondenceMap,
    cfg: &'a AlignConfig,
}

impl<'a> Aligner<'a> {
    fn step(&self, kind: StepKind, left: Vec<usize>, right: Vec<usize>, pairs: Vec<(usize, usize)>) -> AlignStep {
        let labels = left
            .iter()
            .map(|&i| self.left[i].label.clone())
            .chain(right.iter().map(|&j| self.right[j].label.clone()))
            .collect();
        AlignStep { kind, left, right, labels, pairs, crossed: false }
    }

    fn single(&self, step: AlignStep, next: (usize, usize)) -> Move {
        let cost = self.cfg.costs.get(step.kind);
        Move { steps: vec![step], next, cost }
    }

    /// Forward or translate between two single actions, if they can be
    /// relayed one to the other.
    fn pair_kind(&self, i: usize, j: usize) -> Option<StepKind> {
        let (l, r) = (&self.left[i], &self.right[j]);
        if l.direction == r.direction {
            return None;
        }
        match self.map.one_to_one(&l.label, &r.label)? {
            CorrespondenceKind::Identity => Some(StepKind::Forward),
            _ => Some(StepKind::Translate),
        }
    }

    fn action(&self, side: Side, index: usize) -> Option<&Action> {
        match side {
            Side::Left => self.left.get(index),
            Side::Right => self.right.get(index),
        }
    }

    fn moves(&self, i: usize, j: usize) -> Vec<Move> {
        if let Some(m) = self.crossed_receives(i, j) {
            return vec![m];
        }
        let mut moves = Vec::new();
        if i < self.left.len() && j < self.right.len() {
            if let Some(kind) = self.pair_kind(i, j) {
                moves.push(self.single(self.step(kind, vec![i], vec![j], vec![(i, j)]), (i + 1, j + 1)));
            }
        }
        self.split_merge(i, j, &mut moves);
        self.reorders(i, j, &mut moves);
        for side in [Side::Left, Side::Right] {
            let index = if side == Side::Left { i } else { j };
            let Some(a) = self.action(side, index) else { continue };
            let (span_l, span_r, next) = match side {
                Side::Left => (vec![i], vec![], (i + 1, j)),
                Side::Right => (vec![], vec![j], (i, j + 1)),
            };
            match a.direction {
                Direction::Send => {
                    moves.push(self.single(self.step(StepKind::Consume, span_l, span_r, vec![]), next));
                }
                Direction::Receive if self.map.is_producible(&a.label) => {
                    moves.push(self.single(self.step(StepKind::Produce, span_l, span_r, vec![]), next));
                }
                Direction::Receive => {}
            }
        }
        moves
    }

    /// `[?x, !y]` against `[?y', !x']`: both sides wait to receive first, so
    /// the mediator produces `x` for the left, consumes `y`, produces `y'`
    /// for the right and consumes `x'`.
    fn crossed_receives(&self, i: usize, j: usize) -> Option<Move> {
        let (l0, l1) = (self.left.get(i)?, self.left.get(i + 1)?);
        let (r0, r1) = (self.right.get(j)?, self.right.get(j + 1)?);
        let shape = l0.direction == Direction::Receive
            && l1.direction == Direction::Send
            && r0.direction == Direction::Receive
            && r1.direction == Direction::Send;
        if !shape
            || self.map.one_to_one(&l0.label, &r1.label).is_none()
            || self.map.one_to_one(&l1.label, &r0.label).is_none()
            || !self.map.is_producible(&l0.label)
            || !self.map.is_producible(&r0.label)
        {
            return None;
        }
        let mut steps = vec![
            self.step(StepKind::Produce, vec![i], vec![], vec![]),
            self.step(StepKind::Consume, vec![i + 1], vec![], vec![]),
            self.step(StepKind::Produce, vec![], vec![j], vec![]),
            self.step(StepKind::Consume, vec![], vec![j + 1], vec![]),
        ];
        for s in &mut steps {
            s.crossed = true;
        }
        let c = &self.cfg.costs;
        Some(Move { steps, next: (i + 2, j + 2), cost: 2 * (c.produce + c.consume) })
    }

    fn split_merge(&self, i: usize, j: usize, moves: &mut Vec<Move>) {
        for (single_side, at) in [(Side::Left, i), (Side::Right, j)] {
            let Some(single) = self.action(single_side, at) else { continue };
            let Mapping::Declared(entry) = self.map.lookup(&single.label, single_side) else { continue };
            let many_side = single_side.other();
            if entry.side(single_side).len() != 1 || entry.side(many_side).len() < 2 {
                continue;
            }
            let many_start = if many_side == Side::Left { i } else { j };
            let parts = entry.side(many_side);
            let many: Vec<usize> = (many_start..many_start + parts.len()).collect();
            let fits = many.iter().zip(parts).all(|(&k, label)| {
                self.action(many_side, k)
                    .is_some_and(|a| &a.label == label && a.direction == single.direction.complement())
            });
            if !fits {
                continue;
            }
            let kind = match single.direction {
                Direction::Send => StepKind::Split,
                Direction::Receive => StepKind::Merge,
            };
            let (l, r, next) = match single_side {
                Side::Left => (vec![i], many.clone(), (i + 1, j + parts.len())),
                Side::Right => (many.clone(), vec![j], (i + parts.len(), j + 1)),
            };
            moves.push(self.single(self.step(kind, l, r, vec![]), next));
        }
    }

    fn reorders(&self, i: usize, j: usize, moves: &mut Vec<Move>) {
        for k in 2..=self.cfg.reorder_window {
            if i + k > self.left.len() || j + k > self.right.len() {
                break;
            }
            if !sends_first(&self.left[i..i + k]) || !sends_first(&self.right[j..j + k]) {
                continue;
            }
            let Some(perm) = self.best_permutation(i, j, k) else { continue };
            let displaced = perm.iter().enumerate().filter(|(a, b)| a != *b).count() as u64;
            let pairs: Vec<(usize, usize)> = perm.iter().enumerate().map(|(a, &b)| (i + a, j + b)).collect();
            let step = self.step(StepKind::Reorder, (i..i + k).collect(), (j..j + k).collect(), pairs);
            moves.push(Move { steps: vec![step], next: (i + k, j + k), cost: self.cfg.costs.reorder * displaced });
        }
    }

    /// Matching of `left[i..i+k]` onto `right[j..j+k]` that relays every pair,
    /// is not the identity, and displaces the fewest pairs (lexicographically
    /// smallest among those).
    fn best_permutation(&self, i: usize, j: usize, k: usize) -> Option<Vec<usize>> {
        let ok: Vec<Vec<bool>> =
            (0..k).map(|a| (0..k).map(|b| self.pair_kind(i + a, j + b).is_some()).collect()).collect();
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut current = Vec::with_capacity(k);
        let mut used = vec![false; k];
        search_permutations(&ok, &mut current, &mut used, &mut best);
        best.map(|(_, p)| p)
    }

    fn solve(&self) -> Result<Alignment, Incompatible> {
        let (n, m) = (self.left.len(), self.right.len());
        let mut best = vec![vec![None::<u64>; m + 1]; n + 1];
        best[n][m] = Some(0);
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                if (i, j) == (n, m) {
                    continue;
                }
                best[i][j] = self
                    .moves(i, j)
                    .iter()
                    .filter_map(|mv| best[mv.next.0][mv.next.1].map(|rest| rest + mv.cost))
                    .min();
            }
        }
        let Some(cost) = best[0][0] else {
            return Err(self.frontier());
        };

        let mut steps = Vec::new();
        let (mut i, mut j) = (0, 0);
        while (i, j) != (n, m) {
            let chosen = self
                .moves(i, j)
                .into_iter()
                .filter_map(|mv| best[mv.next.0][mv.next.1].map(|rest| (rest + mv.cost, mv)))
                .min_by(|(ca, a), (cb, b)| {
                    ca.cmp(cb)
                        .then(a.steps[0].kind.cmp(&b.steps[0].kind))
                        .then(a.steps[0].min_left().cmp(&b.steps[0].min_left()))
                })
                .map(|(_, mv)| mv)
                .expect("a finite cell has a finite move");
            (i, j) = chosen.next;
            steps.extend(chosen.steps);
        }
        Ok(Alignment { left: Trace::new(self.left.to_vec()), right: Trace::new(self.right.to_vec()), steps, cost })
    }

    fn frontier(&self) -> Incompatible {
        let (n, m) = (self.left.len(), self.right.len());
        let mut seen = vec![vec![false; m + 1]; n + 1];
        let mut stack = vec![(0, 0)];
        seen[0][0] = true;
        let mut far = (0, 0);
        while let Some((i, j)) = stack.pop() {
            if (i + j, i) > (far.0 + far.1, far.0) {
                far = (i, j);
            }
            for mv in self.moves(i, j) {
                let (a, b) = mv.next;
                if !seen[a][b] {
                    seen[a][b] = true;
                    stack.push((a, b));
                }
            }
        }
        Incompatible { left_prefix: far.0, right_prefix: far.1 }
    }
}

fn sends_first(span: &[Action]) -> bool {
    let first_receive = span.iter().position(|a| a.direction == Direction::Receive).unwrap_or(span.len());
    span[first_receive..].iter().all(|a| a.direction == Direction::Receive)
}

fn search_permutations(
    ok: &[Vec<bool>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut Option<(usize, Vec<usize>)>,
) {
    let k = ok.len();
    if current.len() == k {
        let displaced = current.iter().enumerate().filter(|(a, b)| a != *b).count();
        if displaced > 0 && best.as_ref().is_none_or(|(d, _)| displaced < *d) {
            *best = Some((displaced, current.clone()));
        }
        return;
    }
    let a = current.len();
    for b in 0..k {
        if !used[b] && ok[a][b] {
            used[b] = true;
            current.push(b);
            search_permutations(ok, current, used, best);
            current.pop();
            used[b] = false;
        }
    }
}

/// Minimum-cost alignment of two traces.
///
/// Ties between equal-cost alignments go to the step kind earliest in
/// [`StepKind`] order, then to the step starting at the smaller left index.
pub fn align(
    left: &Trace,
    right: &Trace,
    map: &CorrespondenceMap,
    cfg: &AlignConfig,
) -> Result<Alignment, Incompatible> {
    debug_assert!(cfg.validate().is_ok());
    Aligner { left: left.actions(), right: right.actions(), map, cfg }.solve()
}
