//! Benchmark sweeps and their analysis: runtime tables, training labels,
//! the virtual best solver, summary statistics, cactus data and
//! cross-validation.

mod analysis;
mod cv;
mod table;

use thiserror::Error;

use crate::classify::ClassifyError;

pub use analysis::{
    best_engine, cactus, cactus_points, label_training, sota, stats, stats_csv, summarize,
    table_configs, EngineStats, LabeledData, SotaReport,
};
pub use cv::{cross_validate, stratified_folds, Algorithm, CvReport, FoldReport};
pub use table::{collect, collect_with, CsvAppender, Instance, RuntimeTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("runtime table line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("runtime table: {0}")]
    Table(String),
    #[error("{folds} folds out of range for {n} rows")]
    FoldsOutOfRange { folds: usize, n: usize },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
