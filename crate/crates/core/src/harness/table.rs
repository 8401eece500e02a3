use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::HarnessError;
use crate::engines::{run_engine, EngineSpec, Limits, RunRecord, RunStatus, DEFAULT_CPU_SECONDS};

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Benchmark instance on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub domain: String,
    pub path: PathBuf,
}

impl Instance {
    /// Id is the file stem; domain is the parent directory's name.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let domain = path
            .parent()
            .and_then(Path::file_name)
            .map_or_else(|| "-".to_string(), |d| d.to_string_lossy().into_owned());
        Instance {
            id: crate::engines::instance_id_of(&path),
            domain,
            path,
        }
    }
}

/// Outcome of every engine on every instance, under one CPU limit.
#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeTable {
    instances: Vec<(String, String)>,
    engines: Vec<String>,
    records: BTreeMap<(String, String), RunRecord>,
    limit: f64,
}

impl RuntimeTable {
    /// `engines` is in registry order, which also breaks ties between
    /// equally fast engines.
    pub fn new(engines: Vec<String>, limit: f64) -> Self {
        RuntimeTable {
            instances: Vec::new(),
            engines,
            records: BTreeMap::new(),
            limit,
        }
    }

    pub fn instances(&self) -> &[(String, String)] {
        &self.instances
    }

    pub fn engines(&self) -> &[String] {
        &self.engines
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn domain_of(&self, instance: &str) -> Option<&str> {
        self.instances
            .iter()
            .find(|(i, _)| i == instance)
            .map(|(_, d)| d.as_str())
    }

    pub fn add_instance(&mut self, id: &str, domain: &str) {
        if !self.instances.iter().any(|(i, _)| i == id) {
            self.instances.push((id.to_string(), domain.to_string()));
        }
    }

    /// Stores a record, registering its engine if unseen. The instance must
    /// have been added.
    pub fn insert(&mut self, record: RunRecord) -> Result<(), HarnessError> {
        if !self.instances.iter().any(|(i, _)| *i == record.instance_id) {
            return Err(HarnessError::Table(format!(
                "unknown instance `{}`",
                record.instance_id
            )));
        }
        if !self.engines.contains(&record.engine_name) {
            self.engines.push(record.engine_name.clone());
        }
        self.records.insert(
            (record.instance_id.clone(), record.engine_name.clone()),
            record,
        );
        Ok(())
    }

    pub fn get(&self, instance: &str, engine: &str) -> Option<&RunRecord> {
        self.records
            .get(&(instance.to_string(), engine.to_string()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of one engine in instance order.
    pub fn runs_of(&self, engine: &str) -> Vec<&RunRecord> {
        self.instances
            .iter()
            .filter_map(|(i, _)| self.get(i, engine))
            .collect()
    }

    pub fn missing_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, _) in &self.instances {
            for e in &self.engines {
                if self.get(i, e).is_none() {
                    out.push((i.clone(), e.clone()));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_pairs().is_empty()
    }

    pub fn csv_header() -> &'static str {
        "instance,domain,engine,status,cpu_seconds"
    }

    pub fn csv_row(domain: &str, r: &RunRecord) -> String {
        format!(
            "{},{},{},{},{}",
            quote(&r.instance_id),
            quote(domain),
            quote(&r.engine_name),
            r.status,
            r.cpu_seconds
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# limit {}\n# engines {}\n{}\n",
            self.limit,
            self.engines.join(" "),
            Self::csv_header()
        );
        for (i, d) in &self.instances {
            for e in &self.engines {
                if let Some(r) = self.get(i, e) {
                    out.push_str(&Self::csv_row(d, r));
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Parses the CSV written by [`to_csv`](Self::to_csv). Metadata comments
    /// `# limit <s>` and `# engines <names...>` are optional; the limit
    /// defaults to 600 s and engine order to first appearance.
    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut limit = DEFAULT_CPU_SECONDS;
        let mut engines: Vec<String> = Vec::new();
        let mut body = String::new();
        let mut header_seen = false;
        for (n, line) in text.lines().enumerate() {
            let t = line.trim();
            if let Some(meta) = t.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("limit") {
                    limit = v.trim().parse().map_err(|_| HarnessError::Csv {
                        line: n + 1,
                        msg: format!("bad limit `{}`", v.trim()),
                    })?;
                } else if let Some(v) = meta.strip_prefix("engines") {
                    engines = v.split_whitespace().map(String::from).collect();
                }
                body.push('\n');
                continue;
            }
            if !t.is_empty() && !header_seen {
                header_seen = true;
                if t.replace(' ', "") != Self::csv_header() {
                    return Err(HarnessError::Csv {
                        line: n + 1,
                        msg: format!("expected header `{}`", Self::csv_header()),
                    });
                }
            }
            body.push_str(line);
            body.push('\n');
        }
        let mut table = RuntimeTable::new(engines, limit);
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        for row in rdr.records() {
            let row = row.map_err(|e| HarnessError::Csv {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let bad = |msg: String| HarnessError::Csv { line, msg };
            if row.len() != 5 {
                return Err(bad(format!("expected 5 fields, found {}", row.len())));
            }
            let status: RunStatus = row[3].parse().map_err(bad)?;
            let cpu: f64 = row[4]
                .parse()
                .map_err(|_| bad(format!("bad cpu_seconds `{}`", &row[4])))?;
            if !cpu.is_finite() || cpu < 0.0 {
                return Err(bad(format!("bad cpu_seconds `{}`", &row[4])));
            }
            table.add_instance(&row[0], &row[1]);
            table.insert(RunRecord::new(&row[0], &row[2], status, cpu))?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Runs every engine on every instance. Pairs already present in `existing`
/// are skipped, so an interrupted sweep can be resumed from its partial
/// table. Per-run failures are recorded, never raised.
pub fn collect(
    instances: &[Instance],
    registry: &[EngineSpec],
    limits: Limits,
    parallelism: usize,
    existing: Option<RuntimeTable>,
) -> Result<RuntimeTable, HarnessError> {
    collect_with(
        instances,
        registry,
        limits,
        parallelism,
        existing,
        |_, _| {},
    )
}

/// Like [`collect`], calling `sink(domain, record)` as each run finishes.
pub fn collect_with(
    instances: &[Instance],
    registry: &[EngineSpec],
    limits: Limits,
    parallelism: usize,
    existing: Option<RuntimeTable>,
    sink: impl Fn(&str, &RunRecord) + Sync,
) -> Result<RuntimeTable, HarnessError> {
    let names: Vec<String> = registry.iter().map(|e| e.name.clone()).collect();
    let mut table = match existing {
        Some(t) => {
            if (t.limit - limits.cpu_seconds).abs() > 1e-9 && !t.is_empty() {
                return Err(HarnessError::Table(format!(
                    "existing table uses limit {} s, sweep uses {} s",
                    t.limit, limits.cpu_seconds
                )));
            }
            let mut engines = names.clone();
            for e in t.engines() {
                if !engines.contains(e) {
                    engines.push(e.clone());
                }
            }
            RuntimeTable {
                engines,
                limit: limits.cpu_seconds,
                ..t
            }
        }
        None => RuntimeTable::new(names, limits.cpu_seconds),
    };
    let mut seen = BTreeSet::new();
    for inst in instances {
        if !seen.insert(inst.id.clone()) {
            return Err(HarnessError::Table(format!(
                "duplicate instance id `{}`",
                inst.id
            )));
        }
        table.add_instance(&inst.id, &inst.domain);
    }

    let mut pending = Vec::new();
    for inst in instances {
        for spec in registry {
            if table.get(&inst.id, &spec.name).is_none() {
                pending.push((inst, spec));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(pending.len()));
    std::thread::scope(|s| {
        for _ in 0..parallelism.max(1).min(pending.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((inst, spec)) = pending.get(i) else {
                    break;
                };
                let mut rec = run_engine(spec, &inst.path, limits);
                rec.instance_id = inst.id.clone();
                sink(&inst.domain, &rec);
                done.lock().expect("collector lock").push(rec);
            });
        }
    });
    for rec in done.into_inner().expect("collector lock") {
        table.insert(rec)?;
    }
    Ok(table)
}

/// Appends rows to a runtime CSV as runs finish, writing the metadata and
/// header first when the file is new.
pub struct CsvAppender {
    file: Mutex<std::fs::File>,
}

impl CsvAppender {
    pub fn open(
        path: impl AsRef<Path>,
        engines: &[String],
        limit: f64,
    ) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        if fresh {
            write!(
                file,
                "# limit {limit}\n# engines {}\n{}\n",
                engines.join(" "),
                RuntimeTable::csv_header()
            )?;
        }
        Ok(CsvAppender {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, domain: &str, r: &RunRecord) {
        let mut f = self.file.lock().expect("appender lock");
        let _ = writeln!(f, "{}", RuntimeTable::csv_row(domain, r));
        let _ = f.flush();
    }
}
