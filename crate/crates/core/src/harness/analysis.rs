use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{HarnessError, RuntimeTable};
use crate::classify::TrainingSet;
use crate::engines::{RunRecord, RunStatus};
use crate::features::{FeatureVector, Manifest};

/// Fastest engine that solved `instance`, ties going to the engine listed
/// first in the table.
pub fn best_engine(table: &RuntimeTable, instance: &str) -> Option<(String, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for e in table.engines() {
        if let Some(r) = table.get(instance, e) {
            if r.status.is_solved() && best.is_none_or(|(_, t)| r.cpu_seconds < t) {
                best = Some((e, r.cpu_seconds));
            }
        }
    }
    best.map(|(e, t)| (e.to_string(), t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledData {
    pub data: TrainingSet,
    /// Instances solved by no engine.
    pub unsolved: Vec<String>,
    /// Instances without a feature vector.
    pub missing_features: Vec<String>,
}

/// Labels each instance with its fastest solving engine. Unsolved
/// instances and instances without features are left out and listed.
pub fn label_training(
    table: &RuntimeTable,
    features: &BTreeMap<String, FeatureVector>,
    manifest: &Manifest,
) -> Result<LabeledData, HarnessError> {
    let mut rows = Vec::new();
    let mut unsolved = Vec::new();
    let mut missing_features = Vec::new();
    for (inst, _) in table.instances() {
        let Some((label, _)) = best_engine(table, inst) else {
            unsolved.push(inst.clone());
            continue;
        };
        match features.get(inst) {
            Some(fv) => rows.push((fv.clone(), label)),
            None => missing_features.push(inst.clone()),
        }
    }
    Ok(LabeledData {
        data: TrainingSet::new(manifest.clone(), rows)?,
        unsolved,
        missing_features,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SotaReport {
    /// Per instance in table order: best engine and time, if solved.
    pub per_instance: Vec<(String, Option<(String, f64)>)>,
    pub n_solved: usize,
    pub total_time: f64,
    pub mean_time: Option<f64>,
}

impl SotaReport {
    /// Virtual-best runs, one per instance; unsolved instances appear as
    /// timeouts at the table limit.
    pub fn runs(&self, limit: f64) -> Vec<RunRecord> {
        self.per_instance
            .iter()
            .map(|(i, best)| match best {
                Some((e, t)) => RunRecord::new(i, e, RunStatus::SolvedSat, *t),
                None => RunRecord::new(i, "sota", RunStatus::Timeout, limit),
            })
            .collect()
    }
}

/// Virtual best solver over the table.
pub fn sota(table: &RuntimeTable) -> SotaReport {
    let per_instance: Vec<_> = table
        .instances()
        .iter()
        .map(|(i, _)| (i.clone(), best_engine(table, i)))
        .collect();
    let times: Vec<f64> = per_instance
        .iter()
        .filter_map(|(_, b)| b.as_ref().map(|b| b.1))
        .collect();
    let total_time: f64 = times.iter().sum();
    SotaReport {
        n_solved: times.len(),
        mean_time: (!times.is_empty()).then(|| total_time / times.len() as f64),
        total_time,
        per_instance,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineStats {
    pub name: String,
    pub n_runs: usize,
    pub n_solved: usize,
    /// Sum of CPU time over solved runs.
    pub total_time: f64,
    /// `total_time / n_solved`, absent when nothing was solved.
    pub mean_time_solved: Option<f64>,
}

pub fn summarize<'a>(name: &str, runs: impl IntoIterator<Item = &'a RunRecord>) -> EngineStats {
    let mut n_runs = 0;
    let mut n_solved = 0;
    let mut total_time = 0.0;
    for r in runs {
        n_runs += 1;
        if r.status.is_solved() {
            n_solved += 1;
            total_time += r.cpu_seconds;
        }
    }
    EngineStats {
        name: name.to_string(),
        n_runs,
        n_solved,
        total_time,
        mean_time_solved: (n_solved > 0).then(|| total_time / n_solved as f64),
    }
}

/// Per-engine statistics in table order.
pub fn stats(table: &RuntimeTable) -> Vec<EngineStats> {
    table
        .engines()
        .iter()
        .map(|e| summarize(e, table.runs_of(e)))
        .collect()
}

pub fn stats_csv(stats: &[EngineStats]) -> String {
    let mut out = String::from("config,n_runs,n_solved,total_time,mean_time_solved\n");
    for s in stats {
        let mean = s.mean_time_solved.map_or(String::new(), |m| m.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{mean}",
            s.name, s.n_runs, s.n_solved, s.total_time
        );
    }
    out
}

/// Solved runs sorted by CPU time: point k is the time of the k-th solved run.
pub fn cactus_points<'a>(runs: impl IntoIterator<Item = &'a RunRecord>) -> Vec<(usize, f64)> {
    let mut times: Vec<f64> = runs
        .into_iter()
        .filter(|r| r.status.is_solved())
        .map(|r| r.cpu_seconds)
        .collect();
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .enumerate()
        .map(|(i, t)| (i + 1, t))
        .collect()
}

/// Cactus CSV `config,k,cpu_seconds` over named run lists.
pub fn cactus(configs: &[(String, Vec<RunRecord>)]) -> String {
    let mut out = String::from("config,k,cpu_seconds\n");
    for (name, runs) in configs {
        for (k, t) in cactus_points(runs) {
            let _ = writeln!(out, "{name},{k},{t}");
        }
    }
    out
}

/// One run list per engine plus the virtual best, named `sota`.
pub fn table_configs(table: &RuntimeTable) -> Vec<(String, Vec<RunRecord>)> {
    let mut out: Vec<(String, Vec<RunRecord>)> = table
        .engines()
        .iter()
        .map(|e| (e.clone(), table.runs_of(e).into_iter().cloned().collect()))
        .collect();
    out.push(("sota".to_string(), sota(table).runs(table.limit())));
    out
}
