//! Per-instance engine selectors.
//!
//! Solver selection uses [`KnnModel`] and grounder selection uses a PART-style
//! [`DecisionList`]. Both are trained from a [`TrainingSet`] of labeled
//! feature vectors and persisted with [`save_model`] / [`load_model`].

mod knn;
mod model_io;
mod part;

use thiserror::Error;

use crate::features::{FeatureError, FeatureVector, Manifest};

pub use knn::{train_knn, train_knn_with_priority, KnnModel};
pub use model_io::{load_model, parse_model, save_model, write_model};
pub use part::{train_part, Condition, DecisionList, DecisionRule};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k = {k} out of range for {n} exemplars")]
    KOutOfRange { k: usize, n: usize },
    #[error("label `{0}` must be a non-empty token without whitespace")]
    BadLabel(String),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error("unsupported model version `{0}`")]
    Version(String),
    #[error("corrupt model file, line {line}: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Labeled feature vectors sharing one manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    manifest: Manifest,
    rows: Vec<(FeatureVector, String)>,
}

impl TrainingSet {
    pub fn new(
        manifest: Manifest,
        rows: Vec<(FeatureVector, String)>,
    ) -> Result<Self, ClassifyError> {
        for (fv, label) in &rows {
            fv.check_manifest(&manifest)?;
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(ClassifyError::BadLabel(label.clone()));
            }
        }
        Ok(TrainingSet { manifest, rows })
    }

    /// Builds a training set from raw rows over a custom manifest.
    pub fn from_raw(names: &[&str], rows: Vec<(Vec<f64>, &str)>) -> Result<Self, ClassifyError> {
        let manifest = Manifest::custom("custom", names.iter().map(|s| s.to_string()).collect());
        let rows = rows
            .into_iter()
            .map(|(v, l)| Ok((FeatureVector::new(manifest.clone(), v)?, l.to_string())))
            .collect::<Result<Vec<_>, ClassifyError>>()?;
        TrainingSet::new(manifest, rows)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn rows(&self) -> &[(FeatureVector, String)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (_, l) in &self.rows {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn subset(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            manifest: self.manifest.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Anything that maps a feature vector to an engine name.
pub trait Selector: Send + Sync {
    fn select(&self, x: &FeatureVector) -> Result<String, ClassifyError>;
}

#[derive(Clone, Debug, PartialEq)]
pub enum InductiveModel {
    Knn(KnnModel),
    Part(DecisionList),
}

impl InductiveModel {
    pub fn manifest(&self) -> &Manifest {
        match self {
            InductiveModel::Knn(m) => m.manifest(),
            InductiveModel::Part(d) => d.manifest(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InductiveModel::Knn(_) => "knn",
            InductiveModel::Part(_) => "part",
        }
    }
}

impl Selector for InductiveModel {
    fn select(&self, x: &FeatureVector) -> Result<String, ClassifyError> {
        match self {
            InductiveModel::Knn(m) => m.predict(x),
            InductiveModel::Part(d) => d.predict(x),
        }
    }
}

impl Selector for KnnModel {
    fn select(&self, x: &FeatureVector) -> Result<String, ClassifyError> {
        self.predict(x)
    }
}

impl Selector for DecisionList {
    fn select(&self, x: &FeatureVector) -> Result<String, ClassifyError> {
        self.predict(x)
    }
}

/// Always answers with the same engine.
#[derive(Clone, Debug)]
pub struct FixedSelector(pub String);

impl Selector for FixedSelector {
    fn select(&self, _: &FeatureVector) -> Result<String, ClassifyError> {
        Ok(self.0.clone())
    }
}
