//! Black-box grounders and solvers.
//!
//! Engines are external executables described by an [`EngineSpec`] and run
//! under CPU-time and address-space limits by [`run_engine`]. A mock engine
//! driven by a per-instance table ([`mock_engine`]) replays recorded
//! outcomes, either in-process on a simulated clock or as the `measp-mock`
//! subprocess.

pub mod mock;
mod registry;
mod run;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

pub use mock::{mock_engine, MockEngine, MockTable};
pub use registry::{parse_registry, registry_load};
pub use run::{check_limits_supported, run_engine, run_engine_captured, EngineOutcome, RunMode};

pub const DEFAULT_CPU_SECONDS: f64 = 600.0;
pub const DEFAULT_MEMORY_BYTES: u64 = 2 * 1024 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("registry line {line}: {msg}")]
    Registry { line: usize, msg: String },
    #[error("duplicate engine name `{0}`")]
    Duplicate(String),
    #[error("resource limits cannot be enforced on this platform")]
    LimitsUnsupported,
    #[error("mock table: {0}")]
    MockTable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineRole {
    Grounder,
    Solver,
    /// Grounder and solver in one executable; the argv template's `{mode}`
    /// selects the behavior.
    Both,
}

impl EngineRole {
    pub fn can_ground(self) -> bool {
        matches!(self, EngineRole::Grounder | EngineRole::Both)
    }

    pub fn can_solve(self) -> bool {
        matches!(self, EngineRole::Solver | EngineRole::Both)
    }
}

impl FromStr for EngineRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grounder" => Ok(EngineRole::Grounder),
            "solver" => Ok(EngineRole::Solver),
            "both" => Ok(EngineRole::Both),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

impl fmt::Display for EngineRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineRole::Grounder => "grounder",
            EngineRole::Solver => "solver",
            EngineRole::Both => "both",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    NongroundText,
    GroundNumeric,
    GroundText,
    AnswerSets,
}

impl Format {
    pub fn is_ground(self) -> bool {
        matches!(self, Format::GroundNumeric | Format::GroundText)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonground-text" => Ok(Format::NongroundText),
            "ground-numeric" => Ok(Format::GroundNumeric),
            "ground-text" => Ok(Format::GroundText),
            "answer-sets" => Ok(Format::AnswerSets),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::NongroundText => "nonground-text",
            Format::GroundNumeric => "ground-numeric",
            Format::GroundText => "ground-text",
            Format::AnswerSets => "answer-sets",
        })
    }
}

#[derive(Clone, Debug)]
pub enum EngineCommand {
    /// argv template with `{input}`, `{output}` and `{mode}` placeholders.
    External(Vec<String>),
    /// In-process mock on a simulated clock.
    Mock(Arc<MockEngine>),
}

#[derive(Clone, Debug)]
pub struct EngineSpec {
    pub name: String,
    pub role: EngineRole,
    pub command: EngineCommand,
    pub input_format: Format,
    /// Output of a grounding run (a ground format) or of a solving run
    /// (`answer-sets`) for single-role engines. `Both` engines name their
    /// ground output here; solving runs always produce answer sets.
    pub output_format: Format,
}

impl EngineSpec {
    pub fn validate(&self) -> Result<(), String> {
        match self.role {
            EngineRole::Grounder | EngineRole::Both => {
                if self.input_format != Format::NongroundText {
                    return Err(format!(
                        "{} `{}` must read nonground-text",
                        self.role, self.name
                    ));
                }
                if !self.output_format.is_ground() {
                    return Err(format!(
                        "{} `{}` must produce a ground format",
                        self.role, self.name
                    ));
                }
            }
            EngineRole::Solver => {
                if self.input_format == Format::AnswerSets {
                    return Err(format!("solver `{}` cannot read answer sets", self.name));
                }
                if self.output_format != Format::AnswerSets {
                    return Err(format!("solver `{}` must produce answer-sets", self.name));
                }
            }
        }
        if let EngineCommand::External(argv) = &self.command {
            if argv.is_empty() {
                return Err(format!("engine `{}` has an empty command", self.name));
            }
        }
        Ok(())
    }

    /// Format read by a solving run of this engine.
    pub fn solve_input(&self) -> Format {
        self.input_format
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    pub cpu_seconds: f64,
    pub memory_bytes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            cpu_seconds: DEFAULT_CPU_SECONDS,
            memory_bytes: DEFAULT_MEMORY_BYTES,
        }
    }
}

impl Limits {
    pub fn new(cpu_seconds: f64, memory_mib: u64) -> Self {
        Limits {
            cpu_seconds,
            memory_bytes: memory_mib * 1024 * 1024,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunStatus {
    SolvedSat,
    SolvedUnsat,
    Timeout,
    Memout,
    Error,
}

impl RunStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, RunStatus::SolvedSat | RunStatus::SolvedUnsat)
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solved-sat" => Ok(RunStatus::SolvedSat),
            "solved-unsat" => Ok(RunStatus::SolvedUnsat),
            "timeout" => Ok(RunStatus::Timeout),
            "memout" => Ok(RunStatus::Memout),
            "error" => Ok(RunStatus::Error),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::SolvedSat => "solved-sat",
            RunStatus::SolvedUnsat => "solved-unsat",
            RunStatus::Timeout => "timeout",
            RunStatus::Memout => "memout",
            RunStatus::Error => "error",
        })
    }
}

/// Outcome of one engine on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance_id: String,
    pub engine_name: String,
    pub status: RunStatus,
    pub cpu_seconds: f64,
    pub wall_seconds: f64,
    /// Truncated SHA-256 of the first answer set, when one was printed.
    pub answer_digest: Option<String>,
    pub diagnostic: Option<String>,
}

impl RunRecord {
    pub fn new(instance_id: &str, engine_name: &str, status: RunStatus, cpu_seconds: f64) -> Self {
        RunRecord {
            instance_id: instance_id.to_string(),
            engine_name: engine_name.to_string(),
            status,
            cpu_seconds,
            wall_seconds: cpu_seconds,
            answer_digest: None,
            diagnostic: None,
        }
    }

    pub fn error(instance_id: &str, engine_name: &str, diagnostic: impl Into<String>) -> Self {
        RunRecord {
            diagnostic: Some(diagnostic.into()),
            ..RunRecord::new(instance_id, engine_name, RunStatus::Error, 0.0)
        }
    }
}

/// Instance id used for an input file: its file stem.
pub fn instance_id_of(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub(crate) fn digest(answer: &str) -> String {
    use sha2::{Digest, Sha256};
    let hash = Sha256::digest(answer.trim().as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
