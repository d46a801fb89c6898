//! Mapping alignment steps onto the six basic mismatch patterns.

use std::fmt;

use super::{AlignStep, Alignment, Incompatible, StepKind};
use crate::lts::{ActionLabel, Direction, Side};

/// Which variant of a pattern an instance is.
///
/// For consumers and producers the variant is read off the nearest relayed
/// message (the anchor) on the same side: whether the extra/missing message
/// comes after or before it, and the direction of the anchor there.
/// Translations are `base` when the left component sends. Reorderings are
/// `base` when the left only receives in the span, `a` when it only sends,
/// `b` when each side sends then receives. Splits and merges are `base`
/// when the single message is on the left or the many messages are,
/// respectively, and `mirrored` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Base,
    A,
    B,
    C,
    Mirrored,
    /// Part of the producer/consumer combination that resolves two crossed
    /// receives.
    Crossed,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
            Variant::Mirrored => "mirrored",
            Variant::Crossed => "4c",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchInstance {
    /// Pattern number: 1 consumer, 2 producer, 3 translator, 4 ordering,
    /// 5 splitting, 6 merger.
    pub pattern: u8,
    pub variant: Variant,
    /// 1-based position of the step in the alignment.
    pub step: usize,
    pub kind: StepKind,
    pub labels: Vec<ActionLabel>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl fmt::Display for MismatchInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
            }
        };
        let labels: Vec<&str> = self.labels.iter().map(ActionLabel::as_str).collect();
        write!(
            f,
            "pattern {} variant {} step {} {} labels {} left {} right {}",
            self.pattern,
            self.variant,
            self.step,
            self.kind,
            labels.join(","),
            list(&self.left),
            list(&self.right)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchReport {
    pub instances: Vec<MismatchInstance>,
    pub compatible: bool,
    pub cost: Option<u64>,
    pub frontier: Option<Incompatible>,
}

impl MismatchReport {
    pub fn incompatible(frontier: Incompatible) -> Self {
        Self { instances: Vec::new(), compatible: false, cost: None, frontier: Some(frontier) }
    }

    pub fn patterns(&self) -> Vec<(u8, Variant)> {
        self.instances.iter().map(|i| (i.pattern, i.variant)).collect()
    }
}

impl fmt::Display for MismatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.cost, self.frontier) {
            (Some(cost), _) => writeln!(f, "compatible cost {cost}")?,
            (None, Some(fr)) => {
                writeln!(f, "incompatible frontier left {} right {}", fr.left_prefix, fr.right_prefix)?
            }
            (None, None) => writeln!(f, "incompatible")?,
        }
        for i in &self.instances {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

fn pattern_of(kind: StepKind) -> Option<u8> {
    match kind {
        StepKind::Forward => None,
        StepKind::Consume => Some(1),
        StepKind::Produce => Some(2),
        StepKind::Translate => Some(3),
        StepKind::Reorder => Some(4),
        StepKind::Split => Some(5),
        StepKind::Merge => Some(6),
    }
}

/// One instance per non-forward step, in step order.
pub fn classify(a: &Alignment) -> MismatchReport {
    let instances = a
        .steps
        .iter()
        .enumerate()
        .filter_map(|(idx, step)| {
            let pattern = pattern_of(step.kind)?;
            Some(MismatchInstance {
                pattern,
                variant: variant(a, idx, step),
                step: idx + 1,
                kind: step.kind,
                labels: step.labels.clone(),
                left: step.left.clone(),
                right: step.right.clone(),
            })
        })
        .collect();
    MismatchReport { instances, compatible: true, cost: Some(a.cost), frontier: None }
}

fn variant(a: &Alignment, idx: usize, step: &AlignStep) -> Variant {
    if step.crossed {
        return Variant::Crossed;
    }
    match step.kind {
        StepKind::Forward => Variant::Base,
        StepKind::Consume | StepKind::Produce => lone_variant(a, idx, step),
        StepKind::Translate => match a.action(Side::Left, step.left[0]).direction {
            Direction::Send => Variant::Base,
            Direction::Receive => Variant::A,
        },
        StepKind::Reorder => {
            let dirs: Vec<Direction> = step.left.iter().map(|&i| a.action(Side::Left, i).direction).collect();
            if dirs.iter().all(|d| *d == Direction::Receive) {
                Variant::Base
            } else if dirs.iter().all(|d| *d == Direction::Send) {
                Variant::A
            } else {
                Variant::B
            }
        }
        StepKind::Split => {
            if step.left.len() == 1 {
                Variant::Base
            } else {
                Variant::Mirrored
            }
        }
        StepKind::Merge => {
            if step.left.len() > 1 {
                Variant::Base
            } else {
                Variant::Mirrored
            }
        }
    }
}

fn lone_variant(a: &Alignment, idx: usize, step: &AlignStep) -> Variant {
    let Some(side) = step.lone_side() else { return Variant::Base };
    let is_anchor = |s: &&AlignStep| matches!(s.kind, StepKind::Forward | StepKind::Translate);
    let before = a.steps[..idx].iter().rev().find(is_anchor);
    let after = a.steps[idx + 1..].iter().find(is_anchor);
    let (anchor, anchor_first) = match (before, after) {
        (Some(s), _) => (s, true),
        (None, Some(s)) => (s, false),
        (None, None) => return Variant::Base,
    };
    let anchor_dir = a.action(side, anchor.span(side)[0]).direction;
    match (step.kind, anchor_first, anchor_dir) {
        (StepKind::Consume, true, Direction::Receive) => Variant::Base,
        (StepKind::Consume, true, Direction::Send) => Variant::A,
        (StepKind::Produce, true, Direction::Send) => Variant::Base,
        (StepKind::Produce, true, Direction::Receive) => Variant::A,
        (_, false, Direction::Send) => Variant::B,
        (_, false, Direction::Receive) => Variant::C,
        _ => unreachable!("only consume and produce steps are lone"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{parse_trace, Trace};
    use crate::mismatch::{align, AlignConfig};
    use crate::semantics::parse_map;

    fn t(s: &str) -> Trace {
        parse_trace(&s.replace(' ', "\n")).unwrap()
    }

    fn report(left: &str, right: &str, map: &str) -> MismatchReport {
        let a = align(&t(left), &t(right), &parse_map(map).unwrap(), &AlignConfig::default()).unwrap();
        classify(&a)
    }

    #[test]
    fn all_forward_has_no_instances() {
        let r = report("!a ?b", "?a !b", "");
        assert!(r.compatible);
        assert!(r.instances.is_empty());
    }

    #[test]
    fn consumer_is_pattern_one_at_step_two() {
        let r = report("?m1 !m2", "!m1", "");
        assert_eq!(r.patterns(), [(1, Variant::Base)]);
        assert_eq!(r.instances[0].step, 2);
        assert_eq!(r.to_string(), "compatible cost 3\npattern 1 variant base step 2 consume labels m2 left 1 right -\n");
    }

    #[test]
    fn consumer_variants() {
        assert_eq!(report("!m1 !m2", "?m1", "").patterns(), [(1, Variant::A)]);
        assert_eq!(report("!m1 !m2", "?m2", "").patterns(), [(1, Variant::B)]);
        assert_eq!(report("!m1 ?m2", "!m2", "").patterns(), [(1, Variant::C)]);
    }

    #[test]
    fn producer_variants() {
        assert_eq!(report("?m1", "!m1 ?m2", "producible m2").patterns(), [(2, Variant::Base)]);
        assert_eq!(report("!m1", "?m1 ?m2", "producible m2").patterns(), [(2, Variant::A)]);
        assert_eq!(report("?m2", "?m1 !m2", "producible m1").patterns(), [(2, Variant::B)]);
        assert_eq!(report("!m2", "?m1 ?m2", "producible m1").patterns(), [(2, Variant::C)]);
    }

    #[test]
    fn crossed_receives_report_producers_and_consumers() {
        let r = report("?m1 !m2", "?m2 !m1", "producible m1, m2");
        assert_eq!(
            r.patterns(),
            [(2, Variant::Crossed), (1, Variant::Crossed), (2, Variant::Crossed), (1, Variant::Crossed)]
        );
        assert!(r.instances.iter().all(|i| i.pattern != 4));
    }

    #[test]
    fn translator_reorder_split_merge() {
        assert_eq!(report("!I", "?R", "I <-> R").patterns(), [(3, Variant::Base)]);
        assert_eq!(report("?I", "!R", "I <-> R").patterns(), [(3, Variant::A)]);
        assert_eq!(report("?b ?a", "!a !b", "").patterns(), [(4, Variant::Base)]);
        assert_eq!(report("!b !a", "?a ?b", "").patterns(), [(4, Variant::A)]);
        assert_eq!(report("!a ?b", "!b ?a", "").patterns(), [(4, Variant::B)]);
        assert_eq!(report("!FL", "?F ?L", "FL <-> F, L").patterns(), [(5, Variant::Base)]);
        assert_eq!(report("!F !L", "?FL", "F, L <-> FL").patterns(), [(6, Variant::Base)]);
        assert_eq!(report("?F ?L", "!FL", "F, L <-> FL").patterns(), [(5, Variant::Mirrored)]);
    }

    #[test]
    fn incompatible_report_renders_frontier() {
        let r = MismatchReport::incompatible(Incompatible { left_prefix: 1, right_prefix: 0 });
        assert!(!r.compatible);
        assert_eq!(r.to_string(), "incompatible frontier left 1 right 0\n");
    }
}
