//! Two-stage selection pipeline: pick a grounder from non-ground features,
//! ground, pick a solver from ground features, solve.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::classify::{ClassifyError, DecisionList, KnnModel, Selector};
use crate::engines::{
    instance_id_of, run_engine_captured, EngineRole, EngineSpec, Format, Limits, RunMode,
    RunRecord, RunStatus,
};
use crate::features::{FeatureVector, GROUND_52, NONGROUND_11};
use crate::ground::{
    emit_numeric, emit_text_ground, extract_ground, parse_numeric, parse_text_ground, GroundError,
};
use crate::nonground::{extract_nonground, parse_nonground, ParseError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("selection failed: {0}")]
    Select(#[from] ClassifyError),
    #[error("selected {role} `{name}` is not a {role} in the registry")]
    UnknownEngine { name: String, role: &'static str },
    #[error("grounder `{engine}` failed ({}): {}", record.status, record.diagnostic.as_deref().unwrap_or("no diagnostic"))]
    Grounding {
        engine: String,
        record: Box<RunRecord>,
    },
    #[error("format bridge: {0}")]
    Bridge(#[from] GroundError),
    #[error("{0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BridgeMode {
    /// Convert ground text to numeric in-process.
    #[default]
    Canonical,
    /// Obtain numeric ground programs by grounding the input a second time
    /// with a numeric-output grounder.
    Reground,
}

impl std::str::FromStr for BridgeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(BridgeMode::Canonical),
            "reground" => Ok(BridgeMode::Reground),
            other => Err(format!("unknown bridge mode `{other}`")),
        }
    }
}

#[derive(Clone)]
pub struct PipelineConfig {
    pub grounder_selector: Arc<dyn Selector>,
    pub solver_selector: Arc<dyn Selector>,
    pub registry: Vec<EngineSpec>,
    pub limits: Limits,
    pub bridge_mode: BridgeMode,
}

impl PipelineConfig {
    pub fn new(
        grounder_model: DecisionList,
        solver_model: KnnModel,
        registry: Vec<EngineSpec>,
        limits: Limits,
    ) -> Result<Self, PipelineError> {
        if grounder_model.manifest().id() != NONGROUND_11 {
            return Err(PipelineError::Config(format!(
                "grounder model uses manifest `{}`, expected {NONGROUND_11}",
                grounder_model.manifest().id()
            )));
        }
        if solver_model.manifest().id() != GROUND_52 {
            return Err(PipelineError::Config(format!(
                "solver model uses manifest `{}`, expected {GROUND_52}",
                solver_model.manifest().id()
            )));
        }
        Ok(Self::with_selectors(
            Arc::new(grounder_model),
            Arc::new(solver_model),
            registry,
            limits,
        ))
    }

    /// Uses arbitrary selectors, e.g. fixed choices or an oracle.
    pub fn with_selectors(
        grounder_selector: Arc<dyn Selector>,
        solver_selector: Arc<dyn Selector>,
        registry: Vec<EngineSpec>,
        limits: Limits,
    ) -> Self {
        PipelineConfig {
            grounder_selector,
            solver_selector,
            registry,
            limits,
            bridge_mode: BridgeMode::Canonical,
        }
    }

    fn engine(&self, name: &str, grounding: bool) -> Result<&EngineSpec, PipelineError> {
        self.registry
            .iter()
            .find(|e| {
                e.name == name
                    && if grounding {
                        e.role.can_ground()
                    } else {
                        e.role.can_solve()
                    }
            })
            .ok_or_else(|| PipelineError::UnknownEngine {
                name: name.to_string(),
                role: if grounding { "grounder" } else { "solver" },
            })
    }

    fn numeric_grounder(&self) -> Option<&EngineSpec> {
        let numeric =
            |e: &&EngineSpec| e.role.can_ground() && e.output_format == Format::GroundNumeric;
        let mut it = self.registry.iter().filter(numeric);
        let first = it.clone().next();
        it.find(|e| e.role == EngineRole::Grounder).or(first)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    NongroundFeatures,
    GrounderSelection,
    Grounding,
    GroundFeatures,
    SolverSelection,
    Solving,
}

impl Step {
    pub const ALL: [Step; 6] = [
        Step::NongroundFeatures,
        Step::GrounderSelection,
        Step::Grounding,
        Step::GroundFeatures,
        Step::SolverSelection,
        Step::Solving,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Step::NongroundFeatures => "nonground_features",
            Step::GrounderSelection => "grounder_selection",
            Step::Grounding => "grounding",
            Step::GroundFeatures => "ground_features",
            Step::SolverSelection => "solver_selection",
            Step::Solving => "solving",
        }
    }

    /// Steps that belong to selection overhead rather than engine work.
    pub fn is_overhead(self) -> bool {
        !matches!(self, Step::Grounding | Step::Solving)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepTiming {
    pub step: Step,
    pub wall_seconds: f64,
    /// CPU time charged by the engine, for grounding and solving.
    pub engine_cpu: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineTrace {
    pub instance_id: String,
    pub steps: Vec<StepTiming>,
    pub nonground_features: Option<FeatureVector>,
    pub ground_features: Option<FeatureVector>,
    pub selected_grounder: Option<String>,
    pub selected_solver: Option<String>,
    pub grounding: Option<RunRecord>,
    /// Second grounding done by a reground bridge.
    pub regrounding: Option<RunRecord>,
    /// How the solver input was produced: `identity`, `text-to-numeric`,
    /// `numeric-to-text`, `regrounded:<engine>`, `original-program` or
    /// `combined`.
    pub bridge: String,
    /// Format the ground features were computed from.
    pub ground_features_source: Option<Format>,
}

impl PipelineTrace {
    pub fn step(&self, step: Step) -> Option<&StepTiming> {
        self.steps.iter().find(|s| s.step == step)
    }

    /// Wall time of feature extraction and selection.
    pub fn overhead_seconds(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.step.is_overhead())
            .map(|s| s.wall_seconds)
            .sum()
    }

    /// CPU time charged by engines, including any regrounding.
    pub fn engine_cpu_seconds(&self) -> f64 {
        self.steps.iter().filter_map(|s| s.engine_cpu).sum::<f64>()
            + self.regrounding.as_ref().map_or(0.0, |r| r.cpu_seconds)
    }

    /// `key: value` lines.
    pub fn to_text(&self, answer: &RunRecord) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance: {}", self.instance_id);
        for s in &self.steps {
            let _ = write!(out, "step.{}: {:.6}", s.step.as_str(), s.wall_seconds);
            if let Some(c) = s.engine_cpu {
                let _ = write!(out, " cpu={c}");
            }
            out.push('\n');
        }
        let opt = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "selected_grounder: {}", opt(&self.selected_grounder));
        let _ = writeln!(out, "selected_solver: {}", opt(&self.selected_solver));
        if let Some(g) = &self.grounding {
            let _ = writeln!(out, "grounding: {} cpu={}", g.status, g.cpu_seconds);
        }
        if let Some(g) = &self.regrounding {
            let _ = writeln!(
                out,
                "regrounding: {} {} cpu={}",
                g.engine_name, g.status, g.cpu_seconds
            );
        }
        let _ = writeln!(
            out,
            "bridge: {}",
            if self.bridge.is_empty() {
                "-"
            } else {
                &self.bridge
            }
        );
        if let Some(f) = self.ground_features_source {
            let _ = writeln!(out, "ground_features_source: {f}");
        }
        for (key, fv) in [
            ("nonground_features", &self.nonground_features),
            ("ground_features", &self.ground_features),
        ] {
            if let Some(fv) = fv {
                let vals: Vec<String> = fv.iter().map(|(n, v)| format!("{n}={v}")).collect();
                let _ = writeln!(out, "{key}: {}", vals.join(" "));
            }
        }
        let _ = writeln!(out, "status: {}", answer.status);
        let _ = writeln!(out, "solver_cpu_seconds: {}", answer.cpu_seconds);
        if let Some(d) = &answer.answer_digest {
            let _ = writeln!(out, "answer_digest: {d}");
        }
        if let Some(d) = &answer.diagnostic {
            let _ = writeln!(out, "diagnostic: {d}");
        }
        let _ = writeln!(out, "overhead_seconds: {:.6}", self.overhead_seconds());
        let _ = writeln!(out, "engine_cpu_seconds: {}", self.engine_cpu_seconds());
        out
    }

    pub fn csv_header() -> String {
        let mut cols = vec![
            "instance",
            "grounder",
            "solver",
            "status",
            "solver_cpu_seconds",
            "engine_cpu_seconds",
            "overhead_seconds",
            "bridge",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        cols.extend(Step::ALL.iter().map(|s| format!("t_{}", s.as_str())));
        cols.join(",")
    }

    pub fn csv_row(&self, answer: &RunRecord) -> String {
        let mut cols = vec![
            self.instance_id.clone(),
            self.selected_grounder.clone().unwrap_or_default(),
            self.selected_solver.clone().unwrap_or_default(),
            answer.status.to_string(),
            answer.cpu_seconds.to_string(),
            self.engine_cpu_seconds().to_string(),
            format!("{:.6}", self.overhead_seconds()),
            self.bridge.clone(),
        ];
        cols.extend(Step::ALL.iter().map(|s| {
            self.step(*s)
                .map_or(String::new(), |t| format!("{:.6}", t.wall_seconds))
        }));
        cols.join(",")
    }
}

/// Process exit code for a pipeline outcome.
pub fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::SolvedSat => 10,
        RunStatus::SolvedUnsat => 20,
        RunStatus::Timeout => 124,
        RunStatus::Memout | RunStatus::Error => 1,
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ground program converted for a solver.
#[derive(Clone, Debug)]
pub struct Bridged {
    pub bytes: Vec<u8>,
    /// Record of the extra grounding run in reground mode.
    pub regrounding: Option<RunRecord>,
    pub path: String,
}

/// Converts ground output between ground formats. In reground mode a
/// text-to-numeric conversion re-grounds `program` with a numeric-output
/// grounder from the registry instead of converting in-process.
pub fn bridge_formats(
    ground_output: &[u8],
    from: Format,
    to: Format,
    cfg: &PipelineConfig,
    program: &Path,
) -> Result<Bridged, PipelineError> {
    if !from.is_ground() || !to.is_ground() {
        return Err(PipelineError::Config(format!(
            "cannot bridge {from} to {to}"
        )));
    }
    let done = |bytes: Vec<u8>, path: &str| Bridged {
        bytes,
        regrounding: None,
        path: path.to_string(),
    };
    match (from, to) {
        _ if from == to => Ok(done(ground_output.to_vec(), "identity")),
        (Format::GroundText, Format::GroundNumeric) => match cfg.bridge_mode {
            BridgeMode::Canonical => Ok(done(
                emit_numeric(&parse_text_ground(ground_output)?),
                "text-to-numeric",
            )),
            BridgeMode::Reground => {
                let g = cfg.numeric_grounder().ok_or_else(|| {
                    PipelineError::Config("reground bridge needs a numeric grounder".into())
                })?;
                let out = run_engine_captured(g, program, cfg.limits, RunMode::Ground);
                if !out.record.status.is_solved() {
                    return Err(PipelineError::Grounding {
                        engine: g.name.clone(),
                        record: Box::new(out.record),
                    });
                }
                Ok(Bridged {
                    bytes: out.output,
                    path: format!("regrounded:{}", g.name),
                    regrounding: Some(out.record),
                })
            }
        },
        _ => Ok(done(
            emit_text_ground(&parse_numeric(ground_output)?)?,
            "numeric-to-text",
        )),
    }
}

fn timed<T>(steps: &mut Vec<StepTiming>, step: Step, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let v = f();
    steps.push(StepTiming {
        step,
        wall_seconds: start.elapsed().as_secs_f64(),
        engine_cpu: None,
    });
    v
}

/// Runs the six pipeline steps on one non-ground program.
pub fn evaluate(
    program: &Path,
    cfg: &PipelineConfig,
) -> Result<(RunRecord, PipelineTrace), PipelineError> {
    let mut trace = PipelineTrace {
        instance_id: instance_id_of(program),
        ..PipelineTrace::default()
    };
    let io = |e| PipelineError::Io {
        path: program.to_path_buf(),
        source: e,
    };
    let src = std::fs::read(program).map_err(io)?;

    let ng = timed(&mut trace.steps, Step::NongroundFeatures, || {
        parse_nonground(&src).map(|p| extract_nonground(&p))
    })?;
    trace.nonground_features = Some(ng.clone());

    let gname = timed(&mut trace.steps, Step::GrounderSelection, || {
        cfg.grounder_selector.select(&ng)
    })?;
    let grounder = cfg.engine(&gname, true)?;
    trace.selected_grounder = Some(gname.clone());

    let start = Instant::now();
    let grounded = run_engine_captured(grounder, program, cfg.limits, RunMode::Ground);
    trace.steps.push(StepTiming {
        step: Step::Grounding,
        wall_seconds: start.elapsed().as_secs_f64(),
        engine_cpu: Some(grounded.record.cpu_seconds),
    });
    trace.grounding = Some(grounded.record.clone());
    if !grounded.record.status.is_solved() {
        return Err(PipelineError::Grounding {
            engine: gname,
            record: Box::new(grounded.record),
        });
    }
    let ground_fmt = grounder.output_format;

    // Ground features come from the numeric form when the grounder emits it
    // or the reground bridge produces it, from the text otherwise.
    let start = Instant::now();
    let mut numeric: Option<Vec<u8>> = None;
    let gp = match (ground_fmt, cfg.bridge_mode) {
        (Format::GroundNumeric, _) => parse_numeric(&grounded.output)?,
        (_, BridgeMode::Reground) => {
            let b = bridge_formats(
                &grounded.output,
                ground_fmt,
                Format::GroundNumeric,
                cfg,
                program,
            )?;
            trace.regrounding = b.regrounding;
            trace.bridge = b.path;
            let gp = parse_numeric(&b.bytes)?;
            numeric = Some(b.bytes);
            gp
        }
        _ => parse_text_ground(&grounded.output)?,
    };
    let gf = extract_ground(&gp);
    trace.ground_features_source = Some(if numeric.is_some() {
        Format::GroundNumeric
    } else {
        ground_fmt
    });
    trace.steps.push(StepTiming {
        step: Step::GroundFeatures,
        wall_seconds: start.elapsed().as_secs_f64(),
        engine_cpu: None,
    });
    trace.ground_features = Some(gf.clone());

    let sname = timed(&mut trace.steps, Step::SolverSelection, || {
        cfg.solver_selector.select(&gf)
    })?;
    let solver = cfg.engine(&sname, false)?;
    trace.selected_solver = Some(sname.clone());

    let start = Instant::now();
    let combined = solver.role == EngineRole::Both && sname == gname;
    let answer = if combined || solver.input_format == Format::NongroundText {
        trace.bridge = if combined {
            "combined"
        } else {
            "original-program"
        }
        .to_string();
        run_engine_captured(solver, program, cfg.limits, RunMode::Solve).record
    } else {
        let bytes = match (&numeric, solver.input_format) {
            (Some(n), Format::GroundNumeric) => n.clone(),
            _ => {
                let b = bridge_formats(
                    &grounded.output,
                    ground_fmt,
                    solver.input_format,
                    cfg,
                    program,
                )?;
                if trace.regrounding.is_none() {
                    trace.regrounding = b.regrounding;
                }
                if trace.bridge.is_empty() {
                    trace.bridge = b.path;
                }
                b.bytes
            }
        };
        let dir = tempfile::tempdir().map_err(|e| PipelineError::Io {
            path: std::env::temp_dir(),
            source: e,
        })?;
        let ext = if solver.input_format == Format::GroundNumeric {
            "sm"
        } else {
            "gtxt"
        };
        let ground_path = dir.path().join(format!("{}.{ext}", trace.instance_id));
        std::fs::write(&ground_path, &bytes).map_err(|e| PipelineError::Io {
            path: ground_path.clone(),
            source: e,
        })?;
        let mut rec = run_engine_captured(solver, &ground_path, cfg.limits, RunMode::Solve).record;
        rec.instance_id = trace.instance_id.clone();
        rec
    };
    trace.steps.push(StepTiming {
        step: Step::Solving,
        wall_seconds: start.elapsed().as_secs_f64(),
        engine_cpu: Some(answer.cpu_seconds),
    });
    Ok((answer, trace))
}
