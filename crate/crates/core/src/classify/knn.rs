use std::collections::BTreeMap;

use super::{ClassifyError, TrainingSet};
use crate::features::{FeatureVector, Manifest};

/// k-nearest-neighbor selector over min-max normalized features.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel {
    pub(crate) k: usize,
    pub(crate) manifest: Manifest,
    /// Per-feature (min, max) fitted on the training data.
    pub(crate) normalization: Vec<(f64, f64)>,
    pub(crate) exemplars: Vec<(Vec<f64>, String)>,
    /// Vote ties go to the label listed first.
    pub(crate) label_priority: Vec<String>,
}

pub fn train_knn(data: &TrainingSet, k: usize) -> Result<KnnModel, ClassifyError> {
    train_knn_with_priority(data, k, &data.labels())
}

/// Like [`train_knn`], with an explicit tie-break order for vote ties.
/// Labels missing from `priority` rank after it in first-appearance order.
pub fn train_knn_with_priority(
    data: &TrainingSet,
    k: usize,
    priority: &[String],
) -> Result<KnnModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    if k == 0 || k > data.len() {
        return Err(ClassifyError::KOutOfRange { k, n: data.len() });
    }
    let dims = data.manifest().len();
    let mut normalization = vec![(f64::INFINITY, f64::NEG_INFINITY); dims];
    for (fv, _) in data.rows() {
        for (range, &v) in normalization.iter_mut().zip(fv.values()) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    let exemplars = data
        .rows()
        .iter()
        .map(|(fv, label)| (normalize(&normalization, fv.values()), label.clone()))
        .collect();

    let mut label_priority: Vec<String> = priority.to_vec();
    for l in data.labels() {
        if !label_priority.contains(&l) {
            label_priority.push(l);
        }
    }

    Ok(KnnModel {
        k,
        manifest: data.manifest().clone(),
        normalization,
        exemplars,
        label_priority,
    })
}

fn normalize(ranges: &[(f64, f64)], values: &[f64]) -> Vec<f64> {
    ranges
        .iter()
        .zip(values)
        .map(|(&(lo, hi), &v)| {
            if hi > lo {
                ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn normalization(&self) -> &[(f64, f64)] {
        &self.normalization
    }

    pub fn exemplars(&self) -> &[(Vec<f64>, String)] {
        &self.exemplars
    }

    pub fn label_priority(&self) -> &[String] {
        &self.label_priority
    }

    /// Returns a copy with a different `k`.
    pub fn with_k(&self, k: usize) -> Result<KnnModel, ClassifyError> {
        if k == 0 || k > self.exemplars.len() {
            return Err(ClassifyError::KOutOfRange {
                k,
                n: self.exemplars.len(),
            });
        }
        Ok(KnnModel { k, ..self.clone() })
    }

    /// Majority label among the `k` nearest exemplars. Distance ties are
    /// broken by exemplar order, vote ties by `label_priority`.
    pub fn predict(&self, x: &FeatureVector) -> Result<String, ClassifyError> {
        x.check_manifest(&self.manifest)?;
        let q = normalize(&self.normalization, x.values());
        let mut dist: Vec<(f64, usize)> = self
            .exemplars
            .iter()
            .enumerate()
            .map(|(i, (e, _))| (euclidean(&q, e), i))
            .collect();
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(self.k);
        }

        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for &(_, i) in &dist {
            *votes.entry(self.exemplars[i].1.as_str()).or_default() += 1;
        }
        let best = votes.values().copied().max().unwrap_or(0);
        let winner = self
            .label_priority
            .iter()
            .find(|l| votes.get(l.as_str()) == Some(&best))
            .expect("every exemplar label is in label_priority");
        Ok(winner.clone())
    }
}
