//! Golden corpus loader.
//!
//! One directory per case holding `left.lts` and `right.lts` (or the
//! single-trace shorthands `left.trace` and `right.trace`), `names.map`,
//! `expected.report` and `expected.mediator`. The report is the rendered
//! compatibility matrix; the mediator file lists one mediator trace per line.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lts::{parse_lts, parse_trace, Lts, ParseError};
use crate::semantics::{parse_map, CorrespondenceMap, MapError};
use crate::synthesis::{MediatorActionError, MediatorTrace};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Machine { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Map { path: PathBuf, source: MapError },
    #[error("{path}: line {line}: {source}")]
    Mediator { path: PathBuf, line: usize, source: MediatorActionError },
    #[error("{case}: missing {what}")]
    Missing { case: String, what: &'static str },
    #[error("{path}: machine is invalid: {violations}")]
    Invalid { path: PathBuf, violations: String },
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    /// Directory name, e.g. `p1-base` or `messenger`.
    pub id: String,
    pub dir: PathBuf,
    pub left: Lts,
    pub right: Lts,
    pub map: CorrespondenceMap,
    pub expected_report: String,
    pub expected_mediator: BTreeSet<MediatorTrace>,
}

impl GoldenCase {
    /// `(pattern, variant)` pairs named by the expected report, in order.
    pub fn expected_patterns(&self) -> Vec<(u8, String)> {
        self.expected_report
            .lines()
            .filter_map(|line| {
                let mut words = line.split_whitespace();
                if words.next()? != "pattern" {
                    return None;
                }
                let pattern = words.next()?.parse().ok()?;
                (words.next()? == "variant").then_some(())?;
                Some((pattern, words.next()?.to_string()))
            })
            .collect()
    }
}

/// The corpus shipped with this crate.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("corpus")
}

/// Loads every case directory under `dir`, sorted by name. Plain files
/// directly under `dir` are ignored.
pub fn load_corpus(dir: &Path) -> Result<Vec<GoldenCase>, FixtureError> {
    let io_err = |source| FixtureError::Io { path: dir.to_path_buf(), source };
    let mut dirs = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}

pub fn load_case(dir: &Path) -> Result<GoldenCase, FixtureError> {
    let id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let left = load_machine(dir, &id, "left")?;
    let right = load_machine(dir, &id, "right")?;
    let map_path = dir.join("names.map");
    let map_text = read_required(&map_path, &id, "names.map")?;
    let map = parse_map(&map_text).map_err(|source| FixtureError::Map { path: map_path, source })?;
    let expected_report = read_required(&dir.join("expected.report"), &id, "expected.report")?;
    let mediator_path = dir.join("expected.mediator");
    let mediator_text = read_required(&mediator_path, &id, "expected.mediator")?;
    let mut expected_mediator = BTreeSet::new();
    for (n, line) in mediator_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let trace = line
            .parse()
            .map_err(|source| FixtureError::Mediator { path: mediator_path.clone(), line: n + 1, source })?;
        expected_mediator.insert(trace);
    }
    if expected_mediator.is_empty() {
        return Err(FixtureError::Missing { case: id, what: "mediator traces" });
    }
    Ok(GoldenCase { id, dir: dir.to_path_buf(), left, right, map, expected_report, expected_mediator })
}

fn read_required(path: &Path, case: &str, what: &'static str) -> Result<String, FixtureError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            Err(FixtureError::Missing { case: case.to_string(), what })
        }
        Err(source) => Err(FixtureError::Io { path: path.to_path_buf(), source }),
    }
}

fn load_machine(dir: &Path, case: &str, side: &'static str) -> Result<Lts, FixtureError> {
    let lts_path = dir.join(format!("{side}.lts"));
    let trace_path = dir.join(format!("{side}.trace"));
    let (path, lts) = if lts_path.exists() {
        let text = read_required(&lts_path, case, side)?;
        let lts = parse_lts(&text).map_err(|source| FixtureError::Machine { path: lts_path.clone(), source })?;
        (lts_path, lts)
    } else if trace_path.exists() {
        let text = read_required(&trace_path, case, side)?;
        let trace =
            parse_trace(&text).map_err(|source| FixtureError::Machine { path: trace_path.clone(), source })?;
        (trace_path, Lts::linear(side, &trace))
    } else {
        return Err(FixtureError::Missing { case: case.to_string(), what: side });
    };
    let violations = lts.validate();
    if !violations.is_empty() {
        let violations = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return Err(FixtureError::Invalid { path, violations });
    }
    Ok(lts)
}
