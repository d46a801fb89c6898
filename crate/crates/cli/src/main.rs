//! `mediator`: command-line front end for connector synthesis.
//!
//! Exit codes: 0 success, 1 domain failure (invalid machine, incompatible
//! protocols, failed verification, stuck simulation), 2 usage or input error.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mediator_core::decompose::{enumerate_traces, DecomposeConfig, TraceSet};
use mediator_core::lts::{export_dot, parse_lts, parse_trace, serialize_lts, Lts};
use mediator_core::mismatch::{match_components, AlignConfig, StepKind};
use mediator_core::semantics::{parse_map, CorrespondenceMap};
use mediator_core::synthesis::{synthesize, SynthesisError};
use mediator_core::verify::{check, parallel_compose, simulate, Outcome, DEFAULT_STATE_CAP};

#[derive(Parser)]
#[command(name = "mediator", version, about = "Synthesize and verify mediators between mismatching protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check machine (.lts, .trace) and map (.map) files.
    Validate { paths: Vec<PathBuf> },
    /// List the bounded traces of a machine, one per line.
    Decompose {
        machine: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Align every left trace with every right trace and report mismatches.
    Match {
        left: PathBuf,
        right: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        align: Alignment,
    },
    /// Run the whole pipeline and write the mediator and its report.
    Synthesize {
        left: PathBuf,
        right: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        align: Alignment,
        /// Run directory for all outputs.
        #[arg(long, default_value = "mediator-out")]
        out: PathBuf,
    },
    /// Model-check left || mediator || right.
    Verify {
        left: PathBuf,
        mediator: PathBuf,
        right: PathBuf,
        /// Maximum number of product states to explore.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
    },
    /// Play one run of left || mediator || right.
    Simulate {
        left: PathBuf,
        mediator: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated choice indices used at branching points before
        /// falling back to the seeded generator.
        #[arg(long, value_delimiter = ',')]
        script: Vec<usize>,
    },
    /// Render a machine in Graphviz dot syntax.
    ExportDot { machine: PathBuf },
}

#[derive(Args, Serialize)]
struct Bounds {
    /// Maximum traversals of any one transition within a trace, minus one.
    #[arg(long = "unroll", default_value_t = 1)]
    unroll_bound: u32,
    #[arg(long, default_value_t = 1000)]
    max_traces: usize,
}

impl Bounds {
    fn config(&self) -> DecomposeConfig {
        DecomposeConfig { unroll_bound: self.unroll_bound, max_traces: self.max_traces }
    }
}

#[derive(Args)]
struct Alignment {
    #[arg(long, default_value_t = 4)]
    reorder_window: usize,
    /// Step cost override such as `consume=5`; repeatable.
    #[arg(long = "cost", value_name = "KIND=N", value_parser = parse_cost)]
    costs: Vec<(StepKind, u64)>,
}

impl Alignment {
    fn config(&self) -> Result<AlignConfig, Failure> {
        let mut cfg = AlignConfig { reorder_window: self.reorder_window, ..AlignConfig::default() };
        for &(kind, cost) in &self.costs {
            cfg.costs.set(kind, cost);
        }
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

fn parse_cost(s: &str) -> Result<(StepKind, u64), String> {
    let (kind, n) = s.split_once('=').ok_or_else(|| format!("expected KIND=N, got {s:?}"))?;
    let kind = StepKind::from_name(kind.trim()).ok_or_else(|| format!("unknown step kind {kind:?}"))?;
    let n = n.trim().parse().map_err(|e| format!("bad cost {n:?}: {e}"))?;
    Ok((kind, n))
}

/// A failed command: the exit code and what to print on stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl Display) -> Self {
        Self { code: 2, message: e.to_string() }
    }

    fn domain(e: impl Display) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("mediator: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { paths } => cmd_validate(&paths),
        Command::Decompose { machine, bounds } => {
            let traces = decompose(&load_machine(&machine)?, &bounds)?;
            print!("{}", render_traces(&traces));
            Ok(())
        }
        Command::Match { left, right, map, bounds, align } => {
            let cfg = align.config()?;
            let (left, right, map) = (load_machine(&left)?, load_machine(&right)?, load_map(&map)?);
            let (lt, rt) = (decompose(&left, &bounds)?, decompose(&right, &bounds)?);
            let matrix = match_components(&lt.traces, &rt.traces, &map, &cfg);
            print!("{matrix}");
            if matrix.potentially_compatible() {
                Ok(())
            } else {
                Err(Failure::domain("not potentially compatible"))
            }
        }
        Command::Synthesize { left, right, map, bounds, align, out } => {
            cmd_synthesize(&left, &right, &map, &bounds, &align, &out)
        }
        Command::Verify { left, mediator, right, cap } => {
            let (left, mediator, right) = (load_machine(&left)?, load_machine(&mediator)?, load_machine(&right)?);
            let product = parallel_compose(&left, &mediator, &right).map_err(Failure::usage)?;
            let report = check(&product, cap).map_err(Failure::usage)?;
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::domain("verification failed"))
            }
        }
        Command::Simulate { left, mediator, right, seed, script } => {
            let (left, mediator, right) = (load_machine(&left)?, load_machine(&mediator)?, load_machine(&right)?);
            let log = simulate(&left, &mediator, &right, &script, seed).map_err(Failure::usage)?;
            print!("{log}");
            match log.outcome {
                Outcome::AllFinal => Ok(()),
                Outcome::Stuck | Outcome::StepLimit => Err(Failure::domain("")),
            }
        }
        Command::ExportDot { machine } => {
            print!("{}", export_dot(&load_machine(&machine)?));
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Reads a `.lts` file, or a `.trace` file wrapped into a linear machine
/// named after the file stem.
fn load_machine(path: &Path) -> Result<Lts, Failure> {
    let text = read(path)?;
    let at = |e: &dyn Display| Failure::usage(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "trace") {
        let trace = parse_trace(&text).map_err(|e| at(&e))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Lts::linear(name, &trace))
    } else {
        parse_lts(&text).map_err(|e| at(&e))
    }
}

fn load_map(path: &Path) -> Result<CorrespondenceMap, Failure> {
    parse_map(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn decompose(lts: &Lts, bounds: &Bounds) -> Result<TraceSet, Failure> {
    let traces = enumerate_traces(lts, &bounds.config()).map_err(Failure::usage)?;
    if traces.truncated {
        eprintln!("mediator: {}: trace cap of {} reached, output truncated", lts.name, bounds.max_traces);
    }
    Ok(traces)
}

fn render_traces(set: &TraceSet) -> String {
    set.traces.iter().map(|t| format!("{t}\n")).collect()
}

fn cmd_validate(paths: &[PathBuf]) -> Result<(), Failure> {
    if paths.is_empty() {
        return Err(Failure::usage("no files given"));
    }
    let mut invalid = false;
    for path in paths {
        if path.extension().is_some_and(|e| e == "map") {
            load_map(path)?;
            println!("{}: ok", path.display());
            continue;
        }
        let violations = load_machine(path)?.validate();
        if violations.is_empty() {
            println!("{}: ok", path.display());
        } else {
            invalid = true;
            for v in violations {
                println!("{}: {v}", path.display());
            }
        }
    }
    if invalid {
        Err(Failure::domain("invalid machine"))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    inputs: BTreeMap<&'static str, String>,
    config: ManifestConfig<'a>,
    outputs: Vec<&'static str>,
}

#[derive(Serialize)]
struct ManifestConfig<'a> {
    #[serde(flatten)]
    bounds: &'a Bounds,
    reorder_window: usize,
    costs: BTreeMap<&'static str, u64>,
}

const OUTPUTS: [&str; 5] = ["left.traces", "right.traces", "report.txt", "mediator.lts", "mediator.dot"];

fn cmd_synthesize(
    left_path: &Path,
    right_path: &Path,
    map_path: &Path,
    bounds: &Bounds,
    align: &Alignment,
    out: &Path,
) -> Result<(), Failure> {
    let cfg = align.config()?;
    let (left, right, map) = (load_machine(left_path)?, load_machine(right_path)?, load_map(map_path)?);
    let result = synthesize(&left, &right, &map, &bounds.config(), &cfg);
    let synthesis = match result {
        Ok(s) => s,
        Err(SynthesisError::NoCompatiblePair) => {
            let (lt, rt) = (decompose(&left, bounds)?, decompose(&right, bounds)?);
            print!("{}", match_components(&lt.traces, &rt.traces, &map, &cfg));
            return Err(Failure::domain("not potentially compatible"));
        }
        Err(e) => return Err(Failure::usage(e)),
    };
    if synthesis.truncated() {
        return Err(Failure::usage(format!(
            "trace cap of {} reached; raise --max-traces or lower --unroll",
            bounds.max_traces
        )));
    }

    let manifest = Manifest {
        tool: "mediator",
        version: env!("CARGO_PKG_VERSION"),
        inputs: BTreeMap::from([
            ("left", left_path.display().to_string()),
            ("right", right_path.display().to_string()),
            ("map", map_path.display().to_string()),
        ]),
        config: ManifestConfig {
            bounds,
            reorder_window: cfg.reorder_window,
            costs: StepKind::ALL.iter().map(|&k| (k.name(), cfg.costs.get(k))).collect(),
        },
        outputs: OUTPUTS.to_vec(),
    };
    let manifest = serde_json::to_string_pretty(&manifest).map_err(Failure::usage)? + "\n";
    let files = [
        ("left.traces", render_traces(&synthesis.left_traces)),
        ("right.traces", render_traces(&synthesis.right_traces)),
        ("report.txt", synthesis.matrix.to_string()),
        ("mediator.lts", serialize_lts(&synthesis.mediator)),
        ("mediator.dot", export_dot(&synthesis.mediator)),
        ("manifest.json", manifest),
    ];
    fs::create_dir_all(out).map_err(|e| Failure::usage(format!("{}: {e}", out.display())))?;
    for (name, text) in files {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    println!(
        "mediator: {} states, {} transitions from {} traces; written to {}",
        synthesis.mediator.states.len(),
        synthesis.mediator.transitions.len(),
        synthesis.traces.len(),
        out.display()
    );
    Ok(())
}
