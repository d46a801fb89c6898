use std::fmt;

use super::{align, classify, AlignConfig, Alignment, Incompatible};
use crate::lts::Trace;
use crate::semantics::CorrespondenceMap;

/// Alignment outcome for every (left trace, right trace) pair, row-major
/// over the left traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityMatrix {
    pub left: Vec<Trace>,
    pub right: Vec<Trace>,
    pub cells: Vec<Vec<Result<Alignment, Incompatible>>>,
}

impl CompatibilityMatrix {
    /// At least one pair of traces can be aligned.
    pub fn potentially_compatible(&self) -> bool {
        self.cells.iter().flatten().any(Result::is_ok)
    }

    /// Compatible pairs as `(left index, right index, alignment)`.
    pub fn alignments(&self) -> impl Iterator<Item = (usize, usize, &Alignment)> {
        self.cells.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().filter_map(move |(j, cell)| cell.as_ref().ok().map(|a| (i, j, a)))
        })
    }
}

impl fmt::Display for CompatibilityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "potentially compatible {}", self.potentially_compatible())?;
        for (i, t) in self.left.iter().enumerate() {
            writeln!(f, "left {i} : {t}")?;
        }
        for (j, t) in self.right.iter().enumerate() {
            writeln!(f, "right {j} : {t}")?;
        }
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let report = match cell {
                    Ok(a) => classify(a),
                    Err(e) => super::MismatchReport::incompatible(*e),
                };
                write!(f, "pair {i} {j} {report}")?;
            }
        }
        Ok(())
    }
}

pub fn match_components(
    left: &[Trace],
    right: &[Trace],
    map: &CorrespondenceMap,
    cfg: &AlignConfig,
) -> CompatibilityMatrix {
    let cells = left
        .iter()
        .map(|l| right.iter().map(|r| align(l, r, map, cfg)).collect())
        .collect();
    CompatibilityMatrix { left: left.to_vec(), right: right.to_vec(), cells }
}
