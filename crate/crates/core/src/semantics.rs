//! Declared semantic correspondence between the two vocabularies.
//!
//! A `.map` file lists one correspondence per line, left vocabulary on the
//! left of `<->`, plus `producible` lines naming messages the mediator may
//! emit on its own:
//!
//! ```text
//! Information <-> Request
//! FirstLastName <-> FirstName, LastName
//! producible ack
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lts::{is_ident, ActionLabel, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: empty side in correspondence")]
    EmptySide { line: usize },
    #[error("line {line}: many-to-many correspondence is not supported")]
    ManyToMany { line: usize },
    #[error("label {label} appears more than once on the {side:?} side")]
    DuplicateLabel { label: String, side: Side },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CorrespondenceKind {
    Identity,
    Rename,
    /// One left message stands for several right messages.
    Split,
    /// Several left messages stand for one right message.
    Merge,
}

impl fmt::Display for CorrespondenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrespondenceKind::Identity => "identity",
            CorrespondenceKind::Rename => "rename",
            CorrespondenceKind::Split => "split",
            CorrespondenceKind::Merge => "merge",
        })
    }
}

/// One declared link. List order on the many side is the emission order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Correspondence {
    left: Vec<ActionLabel>,
    right: Vec<ActionLabel>,
    kind: CorrespondenceKind,
}

impl Correspondence {
    fn new(left: Vec<ActionLabel>, right: Vec<ActionLabel>, line: usize) -> Result<Self, MapError> {
        let kind = match (left.len(), right.len()) {
            (0, _) | (_, 0) => return Err(MapError::EmptySide { line }),
            (1, 1) if left[0] == right[0] => CorrespondenceKind::Identity,
            (1, 1) => CorrespondenceKind::Rename,
            (1, _) => CorrespondenceKind::Split,
            (_, 1) => CorrespondenceKind::Merge,
            _ => return Err(MapError::ManyToMany { line }),
        };
        Ok(Self { left, right, kind })
    }

    pub fn left(&self) -> &[ActionLabel] {
        &self.left
    }

    pub fn right(&self) -> &[ActionLabel] {
        &self.right
    }

    pub fn side(&self, side: Side) -> &[ActionLabel] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn kind(&self) -> CorrespondenceKind {
        self.kind
    }

    fn mirrored(&self) -> Self {
        let kind = match self.kind {
            CorrespondenceKind::Split => CorrespondenceKind::Merge,
            CorrespondenceKind::Merge => CorrespondenceKind::Split,
            k => k,
        };
        Self { left: self.right.clone(), right: self.left.clone(), kind }
    }
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[ActionLabel]| v.iter().map(ActionLabel::as_str).collect::<Vec<_>>().join(", ");
        write!(f, "{} <-> {}", join(&self.left), join(&self.right))
    }
}

/// Result of looking a label up on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapping<'a> {
    Declared(&'a Correspondence),
    /// The label is not mentioned on that side and stands for itself.
    ImplicitIdentity,
}

impl Mapping<'_> {
    pub fn kind(&self) -> CorrespondenceKind {
        match self {
            Mapping::Declared(c) => c.kind(),
            Mapping::ImplicitIdentity => CorrespondenceKind::Identity,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrespondenceMap {
    entries: Vec<Correspondence>,
    producible: BTreeSet<ActionLabel>,
    index: BTreeMap<(Side, ActionLabel), usize>,
}

impl CorrespondenceMap {
    /// Builds a map from `(left labels, right labels)` pairs, checking that
    /// each label occurs at most once per side.
    pub fn new(
        entries: impl IntoIterator<Item = (Vec<ActionLabel>, Vec<ActionLabel>)>,
        producible: impl IntoIterator<Item = ActionLabel>,
    ) -> Result<Self, MapError> {
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, (l, r))| Correspondence::new(l, r, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(entries, producible.into_iter().collect())
    }

    fn from_entries(
        mut entries: Vec<Correspondence>,
        producible: BTreeSet<ActionLabel>,
    ) -> Result<Self, MapError> {
        entries.sort();
        let mut index = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            for side in [Side::Left, Side::Right] {
                for label in e.side(side) {
                    if index.insert((side, label.clone()), i).is_some() {
                        return Err(MapError::DuplicateLabel { label: label.to_string(), side });
                    }
                }
            }
        }
        Ok(Self { entries, producible, index })
    }

    pub fn entries(&self) -> &[Correspondence] {
        &self.entries
    }

    pub fn producible(&self) -> &BTreeSet<ActionLabel> {
        &self.producible
    }

    pub fn is_producible(&self, label: &ActionLabel) -> bool {
        self.producible.contains(label)
    }

    pub fn lookup(&self, label: &ActionLabel, side: Side) -> Mapping<'_> {
        match self.index.get(&(side, label.clone())) {
            Some(&i) => Mapping::Declared(&self.entries[i]),
            None => Mapping::ImplicitIdentity,
        }
    }

    /// How a left label and a right label correspond one-to-one, if they do:
    /// either both are unmentioned and equal, or one declared entry links
    /// exactly these two.
    pub fn one_to_one(&self, left: &ActionLabel, right: &ActionLabel) -> Option<CorrespondenceKind> {
        match (self.lookup(left, Side::Left), self.lookup(right, Side::Right)) {
            (Mapping::ImplicitIdentity, Mapping::ImplicitIdentity) if left == right => {
                Some(CorrespondenceKind::Identity)
            }
            (Mapping::Declared(a), Mapping::Declared(b))
                if std::ptr::eq(a, b) && a.left.len() == 1 && a.right.len() == 1 =>
            {
                Some(a.kind)
            }
            _ => None,
        }
    }

    /// The same correspondences seen from the other side.
    pub fn mirrored(&self) -> Self {
        let entries = self.entries.iter().map(Correspondence::mirrored).collect();
        Self::from_entries(entries, self.producible.clone()).expect("mirroring keeps labels unique per side")
    }
}

impl fmt::Display for CorrespondenceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        if !self.producible.is_empty() {
            let labels: Vec<&str> = self.producible.iter().map(ActionLabel::as_str).collect();
            writeln!(f, "producible {}", labels.join(", "))?;
        }
        Ok(())
    }
}

fn label_list(text: &str, line: usize) -> Result<Vec<ActionLabel>, MapError> {
    if text.trim().is_empty() {
        return Err(MapError::EmptySide { line });
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            if !is_ident(item) {
                return Err(MapError::Syntax { line, message: format!("invalid label {item:?}") });
            }
            Ok(ActionLabel::new(item).expect("checked identifier"))
        })
        .collect()
}

pub fn parse_map(text: &str) -> Result<CorrespondenceMap, MapError> {
    let mut entries = Vec::new();
    let mut producible = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some((l, r)) = content.split_once("<->") {
            if r.contains("<->") {
                return Err(MapError::Syntax { line, message: "more than one `<->`".into() });
            }
            let left = label_list(l, line)?;
            let right = label_list(r, line)?;
            entries.push(Correspondence::new(left, right, line)?);
        } else if let Some(rest) = content.strip_prefix("producible") {
            if !rest.starts_with(char::is_whitespace) {
                return Err(MapError::Syntax { line, message: "expected labels after `producible`".into() });
            }
            for label in label_list(rest, line)? {
                producible.insert(label);
            }
        } else {
            return Err(MapError::Syntax {
                line,
                message: "expected `a <-> b` or `producible a, b`".into(),
            });
        }
    }
    CorrespondenceMap::from_entries(entries, producible)
}
