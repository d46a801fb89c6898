//! Independent oracles and random generators shared by the integration tests.
//!
//! The oracles deliberately avoid the library's own lookups and dynamic
//! programming: alignment cost comes from exhaustive search over step
//! sequences, traces from breadth-first path enumeration with explicit
//! per-transition visit counters, and run soundness from a direct walk over
//! the product computed from the raw transition sets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use mediator_core::lts::{Action, ActionLabel, Direction, Lts, Side, Trace, Transition};
use mediator_core::mismatch::StepCosts;
use mediator_core::semantics::CorrespondenceMap;
use rand::seq::SliceRandom;
use rand::Rng;

pub const ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn label(s: &str) -> ActionLabel {
    ActionLabel::new(s).unwrap()
}

pub fn trace(s: &str) -> Trace {
    Trace::new(s.split_whitespace().map(|w| Action::parse(w).unwrap()).collect())
}

// Alignment oracle

/// How two labels relate according to the raw entry list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Same,
    Renamed,
}

struct MapView<'a> {
    map: &'a CorrespondenceMap,
}

impl MapView<'_> {
    fn entry_with(&self, side: Side, l: &ActionLabel) -> Option<(&[ActionLabel], &[ActionLabel])> {
        self.map
            .entries()
            .iter()
            .find(|e| e.side(side).contains(l))
            .map(|e| (e.left(), e.right()))
    }

    fn relate(&self, left: &ActionLabel, right: &ActionLabel) -> Option<Relation> {
        match (self.entry_with(Side::Left, left), self.entry_with(Side::Right, right)) {
            (None, None) => (left == right).then_some(Relation::Same),
            (Some(a), Some(b)) if a == b && a.0.len() == 1 && a.1.len() == 1 => {
                Some(if left == right { Relation::Same } else { Relation::Renamed })
            }
            _ => None,
        }
    }

    fn producible(&self, l: &ActionLabel) -> bool {
        self.map.producible().contains(l)
    }
}

fn sends_then_receives(span: &[Action]) -> bool {
    let first_receive = span.iter().position(|a| a.direction == Direction::Receive).unwrap_or(span.len());
    span[first_receive..].iter().all(|a| a.direction == Direction::Receive)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum alignment cost by trying every sequence of steps from the start;
/// `None` when no sequence consumes both traces.
pub fn brute_force_cost(
    left: &Trace,
    right: &Trace,
    map: &CorrespondenceMap,
    costs: &StepCosts,
    window: usize,
) -> Option<u64> {
    let view = MapView { map };
    search(left.actions(), right.actions(), &view, costs, window)
}

fn search(l: &[Action], r: &[Action], v: &MapView, c: &StepCosts, window: usize) -> Option<u64> {
    if l.is_empty() && r.is_empty() {
        return Some(0);
    }
    let mut best: Option<u64> = None;
    let mut offer = |cost: u64, rest: Option<u64>| {
        if let Some(rest) = rest {
            best = Some(best.map_or(cost + rest, |b| b.min(cost + rest)));
        }
    };

    // Two crossed receives leave no other option.
    if l.len() >= 2 && r.len() >= 2 {
        let (x, y, y2, x2) = (&l[0], &l[1], &r[0], &r[1]);
        if x.direction == Direction::Receive
            && y.direction == Direction::Send
            && y2.direction == Direction::Receive
            && x2.direction == Direction::Send
            && v.relate(&x.label, &x2.label).is_some()
            && v.relate(&y.label, &y2.label).is_some()
            && v.producible(&x.label)
            && v.producible(&y2.label)
        {
            let rest = search(&l[2..], &r[2..], v, c, window);
            return rest.map(|rest| 2 * (c.produce + c.consume) + rest);
        }
    }

    for (side, mine) in [(Side::Left, l), (Side::Right, r)] {
        let Some(first) = mine.first() else { continue };
        let advance = |n: usize| match side {
            Side::Left => search(&l[n..], r, v, c, window),
            Side::Right => search(l, &r[n..], v, c, window),
        };
        match first.direction {
            Direction::Send => offer(c.consume, advance(1)),
            Direction::Receive if v.producible(&first.label) => offer(c.produce, advance(1)),
            Direction::Receive => {}
        }
    }

    if let (Some(a), Some(b)) = (l.first(), r.first()) {
        if a.direction != b.direction {
            match v.relate(&a.label, &b.label) {
                Some(Relation::Same) => offer(c.forward, search(&l[1..], &r[1..], v, c, window)),
                Some(Relation::Renamed) => offer(c.translate, search(&l[1..], &r[1..], v, c, window)),
                None => {}
            }
        }
    }

    // One message against several, per a declared entry.
    for entry in v.map.entries() {
        for (single_side, single, many) in [(Side::Left, entry.left(), entry.right()), (Side::Right, entry.right(), entry.left())] {
            if single.len() != 1 || many.len() < 2 {
                continue;
            }
            let (one, several) = match single_side {
                Side::Left => (l, r),
                Side::Right => (r, l),
            };
            let Some(head) = one.first() else { continue };
            if head.label != single[0] || several.len() < many.len() {
                continue;
            }
            let span = &several[..many.len()];
            let labels_match = span.iter().zip(many).all(|(a, m)| &a.label == m);
            let dirs_match = span.iter().all(|a| a.direction == head.direction.complement());
            if labels_match && dirs_match {
                let rest = match single_side {
                    Side::Left => search(&l[1..], &r[many.len()..], v, c, window),
                    Side::Right => search(&l[many.len()..], &r[1..], v, c, window),
                };
                let cost = if head.direction == Direction::Send { c.split } else { c.merge };
                offer(cost, rest);
            }
        }
    }

    // Reordering of equal-length spans.
    for k in 2..=window.min(l.len()).min(r.len()) {
        let (ls, rs) = (&l[..k], &r[..k]);
        if !sends_then_receives(ls) || !sends_then_receives(rs) {
            continue;
        }
        let displaced = permutations(k)
            .into_iter()
            .filter(|p| p.iter().enumerate().any(|(i, &j)| i != j))
            .filter(|p| {
                p.iter().enumerate().all(|(i, &j)| {
                    ls[i].direction != rs[j].direction && v.relate(&ls[i].label, &rs[j].label).is_some()
                })
            })
            .map(|p| p.iter().enumerate().filter(|(i, &j)| *i != j).count() as u64)
            .min();
        if let Some(d) = displaced {
            offer(c.reorder * d, search(&l[k..], &r[k..], v, c, window));
        }
    }
    best
}

// Decomposition oracle

/// Every initial-to-final path in which each transition is taken at most
/// `bound + 1` times, found breadth-first with explicit visit counters.
pub fn oracle_paths(lts: &Lts, bound: u32) -> BTreeSet<Trace> {
    let edges: Vec<&Transition> = lts.transitions.iter().collect();
    let mut out = BTreeSet::new();
    let mut queue: VecDeque<(String, Vec<Action>, Vec<u32>)> =
        VecDeque::from([(lts.initial.clone(), Vec::new(), vec![0; edges.len()])]);
    while let Some((state, path, visits)) = queue.pop_front() {
        if lts.finals.contains(&state) {
            out.insert(Trace::new(path.clone()));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.source == state && visits[k] <= bound {
                let mut v = visits.clone();
                v[k] += 1;
                let mut p = path.clone();
                p.push(e.action.clone());
                queue.push_back((e.target.clone(), p, v));
            }
        }
    }
    out
}

/// Whether the machine has at most `limit` initial-to-anywhere walks in
/// which each transition is taken at most `bound + 1` times. Machines above
/// the limit have path sets too large to enumerate in full.
pub fn walks_within(lts: &Lts, bound: u32, limit: usize) -> bool {
    fn go(edges: &[&Transition], state: &str, visits: &mut [u32], bound: u32, left: &mut usize) -> bool {
        if *left == 0 {
            return false;
        }
        *left -= 1;
        for k in 0..edges.len() {
            if edges[k].source == state && visits[k] <= bound {
                visits[k] += 1;
                let ok = go(edges, &edges[k].target, visits, bound, left);
                visits[k] -= 1;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let edges: Vec<&Transition> = lts.transitions.iter().collect();
    let mut visits = vec![0; edges.len()];
    let mut left = limit;
    go(&edges, &lts.initial, &mut visits, bound, &mut left)
}

/// Like [`random_lts`], restricted to machines with at most `limit` bounded
/// walks; returns the machine and the number of rejected draws.
pub fn random_enumerable_lts(
    rng: &mut impl Rng,
    max_states: usize,
    max_transitions: usize,
    alphabet: &[&str],
    bound: u32,
    limit: usize,
) -> (Lts, usize) {
    let mut rejected = 0;
    loop {
        let lts = random_lts(rng, max_states, max_transitions, alphabet);
        if walks_within(&lts, bound, limit) {
            return (lts, rejected);
        }
        rejected += 1;
    }
}

// Product oracle

type Triple = (String, String, String);

fn product_moves(left: &Lts, med: &Lts, right: &Lts, (l, m, r): &Triple) -> Vec<Triple> {
    let mut out = Vec::new();
    for mt in med.transitions.iter().filter(|t| &t.source == m) {
        let port = mt.action.port.expect("mediator actions carry ports");
        let (comp, at) = if port == Side::Left { (left, l) } else { (right, r) };
        for ct in comp.transitions.iter().filter(|t| &t.source == at) {
            if ct.action.label == mt.action.label && ct.action.direction != mt.action.direction {
                out.push(if port == Side::Left {
                    (ct.target.clone(), mt.target.clone(), r.clone())
                } else {
                    (l.clone(), mt.target.clone(), ct.target.clone())
                });
            }
        }
    }
    out
}

/// Counts reachable triples from which some maximal run does not end with
/// all three machines final. A run that can go on forever counts as a
/// counterexample.
pub fn runs_not_ending_final(left: &Lts, med: &Lts, right: &Lts) -> usize {
    #[derive(Clone, Copy, PartialEq)]
    enum Status {
        Visiting,
        Good,
        Bad,
    }
    fn visit(
        s: &Triple,
        ctx: (&Lts, &Lts, &Lts),
        memo: &mut HashMap<Triple, Status>,
        bad: &mut usize,
    ) -> bool {
        match memo.get(s) {
            Some(Status::Good) => return true,
            Some(Status::Bad) | Some(Status::Visiting) => return false,
            None => {}
        }
        memo.insert(s.clone(), Status::Visiting);
        let (l, m, r) = ctx;
        let moves = product_moves(l, m, r, s);
        let good = if moves.is_empty() {
            l.finals.contains(&s.0) && m.finals.contains(&s.1) && r.finals.contains(&s.2)
        } else {
            let mut all = true;
            for n in &moves {
                all &= visit(n, ctx, memo, bad);
            }
            all
        };
        if !good {
            *bad += 1;
        }
        memo.insert(s.clone(), if good { Status::Good } else { Status::Bad });
        good
    }
    let start = (left.initial.clone(), med.initial.clone(), right.initial.clone());
    let mut memo = HashMap::new();
    let mut bad = 0;
    visit(&start, (left, med, right), &mut memo, &mut bad);
    bad
}

// Random generators

pub fn random_trace(rng: &mut impl Rng, max_len: usize) -> Trace {
    let len = rng.gen_range(0..=max_len);
    Trace::new((0..len).map(|_| random_action(rng)).collect())
}

pub fn random_action(rng: &mut impl Rng) -> Action {
    let l = label(ALPHABET.choose(rng).unwrap());
    if rng.gen_bool(0.5) {
        Action::send(l)
    } else {
        Action::receive(l)
    }
}

/// A pair of traces (each at most `max_len` long) built segment by segment
/// so that they are likely to align: relayed messages renamed through the
/// map, declared one-to-many entries, swapped neighbours, extra sends, and
/// producible receives.
pub fn related_pair(rng: &mut impl Rng, map: &CorrespondenceMap, max_len: usize) -> (Trace, Trace) {
    let rename = |x: &ActionLabel| -> ActionLabel {
        map.entries()
            .iter()
            .find(|e| e.left() == [x.clone()] && e.right().len() == 1)
            .map_or_else(|| x.clone(), |e| e.right()[0].clone())
    };
    let act = |d: Direction, l: ActionLabel| if d == Direction::Send { Action::send(l) } else { Action::receive(l) };
    let dir = |rng: &mut dyn rand::RngCore| if rng.gen_bool(0.5) { Direction::Send } else { Direction::Receive };
    let (mut left, mut right): (Vec<Action>, Vec<Action>) = (Vec::new(), Vec::new());
    for _ in 0..rng.gen_range(1..=4) {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        match rng.gen_range(0..6) {
            0 => {
                let x = label(ALPHABET.choose(rng).unwrap());
                let d = dir(rng);
                l.push(act(d, x.clone()));
                r.push(act(d.complement(), rename(&x)));
            }
            1 => {
                let many: Vec<_> = map.entries().iter().filter(|e| e.left().len() + e.right().len() > 2).collect();
                if let Some(e) = many.choose(rng) {
                    let d = dir(rng);
                    l.extend(e.left().iter().map(|x| act(d, x.clone())));
                    r.extend(e.right().iter().map(|x| act(d.complement(), x.clone())));
                }
            }
            2 => {
                let (x, y) = (label(ALPHABET.choose(rng).unwrap()), label(ALPHABET.choose(rng).unwrap()));
                let (dx, dy) = (dir(rng), dir(rng));
                l.extend([act(dx, x.clone()), act(dy, y.clone())]);
                r.extend([act(dy.complement(), rename(&y)), act(dx.complement(), rename(&x))]);
            }
            3 => {
                let x = label(ALPHABET.choose(rng).unwrap());
                if rng.gen_bool(0.5) {
                    l.push(Action::send(x));
                } else {
                    r.push(Action::send(x));
                }
            }
            4 => {
                if let Some(x) = map.producible().iter().collect::<Vec<_>>().choose(rng) {
                    if rng.gen_bool(0.5) {
                        l.push(Action::receive((*x).clone()));
                    } else {
                        r.push(Action::receive((*x).clone()));
                    }
                }
            }
            _ => {
                // Both sides wait for the other first.
                let (x, y) = (label(ALPHABET.choose(rng).unwrap()), label(ALPHABET.choose(rng).unwrap()));
                l.extend([Action::receive(x.clone()), Action::send(y.clone())]);
                r.extend([Action::receive(rename(&y)), Action::send(rename(&x))]);
            }
        }
        if left.len() + l.len() > max_len || right.len() + r.len() > max_len {
            break;
        }
        left.extend(l);
        right.extend(r);
    }
    (Trace::new(left), Trace::new(right))
}

/// A map over [`ALPHABET`] with a few renames, at most one split or merge
/// and a random producible set; labels are used at most once per side.
pub fn random_map(rng: &mut impl Rng) -> CorrespondenceMap {
    let mut left: Vec<&str> = ALPHABET.to_vec();
    let mut right: Vec<&str> = ALPHABET.to_vec();
    left.shuffle(rng);
    right.shuffle(rng);
    let mut entries = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let (Some(a), Some(b)) = (left.pop(), right.pop()) else { break };
        entries.push((vec![label(a)], vec![label(b)]));
    }
    if rng.gen_bool(0.5) && left.len() >= 2 && right.len() >= 2 {
        if rng.gen_bool(0.5) {
            let one = vec![label(left.pop().unwrap())];
            let many = vec![label(right.pop().unwrap()), label(right.pop().unwrap())];
            entries.push((one, many));
        } else {
            let many = vec![label(left.pop().unwrap()), label(left.pop().unwrap())];
            let one = vec![label(right.pop().unwrap())];
            entries.push((many, one));
        }
    }
    let producible: Vec<ActionLabel> = ALPHABET.iter().filter(|_| rng.gen_bool(0.3)).map(|s| label(s)).collect();
    CorrespondenceMap::new(entries, producible).expect("generated map is well formed")
}

/// A valid plain machine with at most `max_states` states and at most
/// `max_transitions` transitions, found by rejection sampling.
pub fn random_lts(rng: &mut impl Rng, max_states: usize, max_transitions: usize, alphabet: &[&str]) -> Lts {
    loop {
        let n = rng.gen_range(1..=max_states);
        let state = |i: usize| format!("s{i}");
        let mut transitions = Vec::new();
        // A spanning tree keeps every state reachable.
        for i in 1..n {
            let parent = rng.gen_range(0..i);
            transitions.push(edge(rng, state(parent), state(i), alphabet));
        }
        let budget = max_transitions.saturating_sub(transitions.len());
        for _ in 0..rng.gen_range(0..=budget) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            transitions.push(edge(rng, state(a), state(b), alphabet));
        }
        let finals: BTreeSet<String> = (0..n).filter(|_| rng.gen_bool(0.35)).map(state).collect();
        let finals = if finals.is_empty() { BTreeSet::from([state(n - 1)]) } else { finals };
        let lts = Lts::new("random", state(0), finals, transitions);
        if lts.transitions.len() <= max_transitions && lts.validate().is_empty() {
            return lts;
        }
    }
}

fn edge(rng: &mut impl Rng, source: String, target: String, alphabet: &[&str]) -> Transition {
    let l = label(alphabet.choose(rng).unwrap());
    let action = if rng.gen_bool(0.5) { Action::send(l) } else { Action::receive(l) };
    Transition { source, action, target }
}

/// Renames every state through `f`, keeping the structure.
pub fn rename_states(lts: &Lts, f: impl Fn(&str) -> String) -> Lts {
    let transitions: Vec<Transition> = lts
        .transitions
        .iter()
        .map(|t| Transition { source: f(&t.source), action: t.action.clone(), target: f(&t.target) })
        .collect();
    let finals: Vec<String> = lts.finals.iter().map(|s| f(s)).collect();
    Lts::new(lts.name.clone(), f(&lts.initial), finals, transitions)
}

/// Strips ports so a mediator trace reads like the literal message sequence.
pub fn without_ports(trace: &str) -> String {
    trace.split_whitespace().map(|w| w.split_once('.').map_or(w, |(_, a)| a)).collect::<Vec<_>>().join(" ")
}

pub fn count_by<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut out = BTreeMap::new();
    for i in items {
        *out.entry(i).or_insert(0) += 1;
    }
    out
}
