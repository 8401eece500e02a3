use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use measp::classify::{load_model, save_model, train_knn, train_part, InductiveModel, Selector};
use measp::engines::{check_limits_supported, instance_id_of, registry_load, EngineSpec, Limits};
use measp::features::{self, FeatureVector, Manifest};
use measp::ground::{extract_ground, parse_numeric, parse_text_ground};
use measp::harness::{self, Algorithm, CsvAppender, Instance, RuntimeTable};
use measp::nonground::{extract_nonground, parse_nonground};
use measp::pipeline::{self, BridgeMode, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "measp",
    version,
    about = "Per-instance grounder and solver selection for ASP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground features of ground programs, as CSV.
    ExtractGround {
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = GroundFormat::Auto)]
        format: GroundFormat,
    },
    /// Non-ground features of programs, as CSV.
    ExtractNonground { files: Vec<PathBuf> },
    /// Train a selector from features and a runtime table.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Output model file.
        #[arg(long)]
        model: PathBuf,
    },
    /// Predict an engine for each input.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Read feature vectors from this CSV instead of program files.
        #[arg(long)]
        features: Option<PathBuf>,
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = GroundFormat::Auto)]
        format: GroundFormat,
    },
    /// Select a grounder, ground, select a solver and solve.
    Solve {
        program: PathBuf,
        #[arg(long)]
        engines: PathBuf,
        /// The grounder model (nonground-11) and the solver model
        /// (ground-52), in either order.
        #[arg(long, num_args = 1, required = true)]
        model: Vec<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, default_value = "canonical")]
        bridge: BridgeMode,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        trace: TraceFormat,
    },
    /// Run every engine on every instance and record a runtime table.
    Bench {
        instances: Vec<PathBuf>,
        #[arg(long)]
        engines: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Runtime table to write; existing rows are kept and skipped.
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-engine and virtual-best statistics of a runtime table.
    Stats { table: PathBuf },
    /// Cactus-plot CSV of a runtime table.
    Cactus { table: PathBuf },
    /// Cross-validate a selector.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Feature CSV as written by the extract commands.
    #[arg(long)]
    features: PathBuf,
    /// Runtime table used to label instances.
    #[arg(long)]
    runtimes: PathBuf,
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, value_enum, default_value_t = Algo::Knn)]
    algo: Algo,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    min_leaf: usize,
}

impl AlgoArgs {
    fn algorithm(&self) -> Algorithm {
        match self.algo {
            Algo::Knn => Algorithm::Knn { k: self.k },
            Algo::Part => Algorithm::Part {
                min_leaf: self.min_leaf,
            },
        }
    }
}

#[derive(Args)]
struct LimitArgs {
    /// CPU seconds per engine run.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    /// Address-space limit per engine run, in MiB.
    #[arg(long, default_value_t = 2048)]
    memory: u64,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits> {
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            bail!("--timeout must be positive");
        }
        check_limits_supported()?;
        Ok(Limits::new(self.timeout, self.memory))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Knn,
    Part,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroundFormat {
    Auto,
    Numeric,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Csv,
}

fn ground_features(path: &Path, format: GroundFormat) -> Result<FeatureVector> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let numeric = match format {
        GroundFormat::Numeric => true,
        GroundFormat::Text => false,
        GroundFormat::Auto => bytes
            .iter()
            .find(|b| !b.is_ascii_whitespace())
            .is_some_and(u8::is_ascii_digit),
    };
    let p = if numeric {
        parse_numeric(&bytes)
    } else {
        parse_text_ground(&bytes)
    }
    .with_context(|| format!("parsing {}", path.display()))?;
    Ok(extract_ground(&p))
}

fn nonground_features(path: &Path) -> Result<FeatureVector> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let p = parse_nonground(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(extract_nonground(&p))
}

fn write_features(rows: &[(String, FeatureVector)]) -> Result<()> {
    features::write_csv(io::stdout().lock(), rows)?;
    Ok(())
}

fn labeled_data(data: &DataArgs) -> Result<measp::classify::TrainingSet> {
    let file = std::fs::File::open(&data.features)
        .with_context(|| format!("reading {}", data.features.display()))?;
    let rows = features::read_csv(io::BufReader::new(file))?;
    let Some((_, first)) = rows.first() else {
        bail!("{} has no rows", data.features.display());
    };
    let manifest = first.manifest().clone();
    let feats: BTreeMap<String, FeatureVector> = rows.into_iter().collect();
    let table = RuntimeTable::load(&data.runtimes)
        .with_context(|| format!("reading {}", data.runtimes.display()))?;
    let labeled = harness::label_training(&table, &feats, &manifest)?;
    if !labeled.unsolved.is_empty() {
        eprintln!(
            "excluded {} instance(s) solved by no engine",
            labeled.unsolved.len()
        );
    }
    if !labeled.missing_features.is_empty() {
        eprintln!(
            "excluded {} instance(s) without features: {}",
            labeled.missing_features.len(),
            labeled.missing_features.join(" ")
        );
    }
    Ok(labeled.data)
}

fn registry(path: &Path) -> Result<Vec<EngineSpec>> {
    let reg = registry_load(path).with_context(|| format!("loading {}", path.display()))?;
    if reg.is_empty() {
        bail!("{} declares no engines", path.display());
    }
    Ok(reg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::ExtractGround { files, format } => {
            let rows = files
                .iter()
                .map(|f| Ok((instance_id_of(f), ground_features(f, format)?)))
                .collect::<Result<Vec<_>>>()?;
            write_features(&rows)?;
        }
        Command::ExtractNonground { files } => {
            let rows = files
                .iter()
                .map(|f| Ok((instance_id_of(f), nonground_features(f)?)))
                .collect::<Result<Vec<_>>>()?;
            write_features(&rows)?;
        }
        Command::Train { data, algo, model } => {
            let set = labeled_data(&data)?;
            let m = match algo.algorithm() {
                Algorithm::Knn { k } => InductiveModel::Knn(train_knn(&set, k)?),
                Algorithm::Part { min_leaf } => InductiveModel::Part(train_part(&set, min_leaf)?),
            };
            save_model(&m, &model).with_context(|| format!("writing {}", model.display()))?;
            eprintln!("trained {} model on {} rows", m.kind(), set.len());
        }
        Command::Predict {
            model,
            features: feature_csv,
            files,
            format,
        } => {
            let m = load_model(&model).with_context(|| format!("loading {}", model.display()))?;
            let rows: Vec<(String, FeatureVector)> = match feature_csv {
                Some(path) => {
                    let file = std::fs::File::open(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    features::read_csv(io::BufReader::new(file))?
                }
                None => files
                    .iter()
                    .map(|f| {
                        let fv = if m.manifest().id() == features::NONGROUND_11 {
                            nonground_features(f)?
                        } else {
                            ground_features(f, format)?
                        };
                        Ok((instance_id_of(f), fv))
                    })
                    .collect::<Result<_>>()?,
            };
            let mut out = io::stdout().lock();
            writeln!(out, "instance,engine")?;
            for (id, fv) in rows {
                writeln!(out, "{id},{}", m.select(&fv)?)?;
            }
        }
        Command::Solve {
            program,
            engines,
            model,
            limits,
            bridge,
            trace,
        } => {
            let limits = limits.limits()?;
            let mut grounder = None;
            let mut solver = None;
            for path in &model {
                match load_model(path).with_context(|| format!("loading {}", path.display()))? {
                    InductiveModel::Part(d) if d.manifest() == &Manifest::nonground11() => grounder = Some(d),
                    InductiveModel::Knn(k) if k.manifest() == &Manifest::ground52() => solver = Some(k),
                    other => bail!(
                        "{}: expected a part model over nonground-11 or a knn model over ground-52, found {} over {}",
                        path.display(),
                        other.kind(),
                        other.manifest().id()
                    ),
                }
            }
            let (Some(g), Some(s)) = (grounder, solver) else {
                bail!("solve needs a grounder model and a solver model (--model twice)");
            };
            let mut cfg = PipelineConfig::new(g, s, registry(&engines)?, limits)?;
            cfg.bridge_mode = bridge;
            let (answer, tr) = pipeline::evaluate(&program, &cfg)?;
            match trace {
                TraceFormat::Text => print!("{}", tr.to_text(&answer)),
                TraceFormat::Csv => println!(
                    "{}\n{}",
                    pipeline::PipelineTrace::csv_header(),
                    tr.csv_row(&answer)
                ),
            }
            return Ok(ExitCode::from(pipeline::exit_code(answer.status) as u8));
        }
        Command::Bench {
            instances,
            engines,
            limits,
            jobs,
            out,
        } => {
            let limits = limits.limits()?;
            let reg = registry(&engines)?;
            let existing = match std::fs::metadata(&out) {
                Ok(m) if m.len() > 0 => Some(
                    RuntimeTable::load(&out)
                        .with_context(|| format!("reading {}", out.display()))?,
                ),
                _ => None,
            };
            let names: Vec<String> = reg.iter().map(|e| e.name.clone()).collect();
            let appender = CsvAppender::open(&out, &names, limits.cpu_seconds)?;
            let insts: Vec<Instance> = instances.into_iter().map(Instance::from_path).collect();
            let table =
                harness::collect_with(&insts, &reg, limits, jobs, existing, |domain, r| {
                    appender.append(domain, r);
                    eprintln!(
                        "{} {} {} {:.3}",
                        r.instance_id, r.engine_name, r.status, r.cpu_seconds
                    );
                })?;
            table.save(&out)?;
        }
        Command::Stats { table } => {
            let t = RuntimeTable::load(&table)
                .with_context(|| format!("reading {}", table.display()))?;
            let mut rows = harness::stats(&t);
            let s = harness::sota(&t);
            rows.push(harness::EngineStats {
                name: "sota".into(),
                n_runs: t.instances().len(),
                n_solved: s.n_solved,
                total_time: s.total_time,
                mean_time_solved: s.mean_time,
            });
            print!("{}", harness::stats_csv(&rows));
        }
        Command::Cactus { table } => {
            let t = RuntimeTable::load(&table)
                .with_context(|| format!("reading {}", table.display()))?;
            print!("{}", harness::cactus(&harness::table_configs(&t)));
        }
        Command::Cv {
            data,
            algo,
            folds,
            seed,
        } => {
            let set = labeled_data(&data)?;
            let r = harness::cross_validate(&set, folds, algo.algorithm(), seed)?;
            let mut out = io::stdout().lock();
            writeln!(out, "accuracy: {:.6}", r.accuracy)?;
            writeln!(out, "mean_fold_accuracy: {:.6}", r.mean_fold_accuracy)?;
            for (i, f) in r.folds.iter().enumerate() {
                writeln!(out, "fold {i}: {}/{}", f.correct, f.size)?;
            }
            for ((actual, predicted), n) in &r.confusion {
                writeln!(out, "confusion {actual} -> {predicted}: {n}")?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("measp: {e:#}");
            ExitCode::from(1)
        }
    }
}
