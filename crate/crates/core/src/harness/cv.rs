use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::classify::{train_knn, train_part, Selector, TrainingSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Knn { k: usize },
    Part { min_leaf: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldReport {
    pub size: usize,
    pub correct: usize,
}

impl FoldReport {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.size as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    /// Correct predictions over all rows.
    pub accuracy: f64,
    /// Unweighted mean of per-fold accuracies.
    pub mean_fold_accuracy: f64,
    pub folds: Vec<FoldReport>,
    /// Fold index of every row.
    pub assignment: Vec<usize>,
    /// (actual, predicted) → count.
    pub confusion: BTreeMap<(String, String), usize>,
}

/// Assigns rows to folds: rows are grouped by label, each group is shuffled
/// with `seed`, and groups are dealt round-robin so every label spreads
/// evenly across folds.
pub fn stratified_folds(data: &TrainingSet, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, (_, l)) in data.rows().iter().enumerate() {
        by_label.entry(l.as_str()).or_default().push(i);
    }
    let mut assignment = vec![0; data.len()];
    let mut slot = 0;
    for group in by_label.values_mut() {
        group.shuffle(&mut rng);
        for &i in group.iter() {
            assignment[i] = slot % folds;
            slot += 1;
        }
    }
    assignment
}

pub fn cross_validate(
    data: &TrainingSet,
    folds: usize,
    algo: Algorithm,
    seed: u64,
) -> Result<CvReport, HarnessError> {
    if folds < 2 || folds > data.len() {
        return Err(HarnessError::FoldsOutOfRange {
            folds,
            n: data.len(),
        });
    }
    let assignment = stratified_folds(data, folds, seed);
    let mut reports = Vec::with_capacity(folds);
    let mut confusion = BTreeMap::new();
    for f in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..data.len()).partition(|&i| assignment[i] == f);
        let train = data.subset(&train);
        let model: Box<dyn Selector> = match algo {
            Algorithm::Knn { k } => Box::new(train_knn(&train, k)?),
            Algorithm::Part { min_leaf } => Box::new(train_part(&train, min_leaf)?),
        };
        let mut correct = 0;
        for &i in &test {
            let (fv, actual) = &data.rows()[i];
            let predicted = model.select(fv)?;
            if &predicted == actual {
                correct += 1;
            }
            *confusion.entry((actual.clone(), predicted)).or_insert(0) += 1;
        }
        reports.push(FoldReport {
            size: test.len(),
            correct,
        });
    }
    let correct: usize = reports.iter().map(|r| r.correct).sum();
    Ok(CvReport {
        accuracy: correct as f64 / data.len() as f64,
        mean_fold_accuracy: reports.iter().map(FoldReport::accuracy).sum::<f64>() / folds as f64,
        folds: reports,
        assignment,
        confusion,
    })
}
