//! PART-style decision lists: separate-and-conquer over partial decision
//! trees with binary numeric splits. No error-based pruning.

use std::fmt;

use super::{ClassifyError, TrainingSet};
use crate::features::{FeatureVector, Manifest};

/// `feature <= threshold` when `le`, otherwise `feature > threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub feature: usize,
    pub le: bool,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, values: &[f64]) -> bool {
        let v = values[self.feature];
        if self.le {
            v <= self.threshold
        } else {
            v > self.threshold
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRule {
    pub conditions: Vec<Condition>,
    pub label: String,
    /// Training rows removed by this rule when it was generated.
    pub coverage: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionList {
    pub(crate) manifest: Manifest,
    pub(crate) rules: Vec<DecisionRule>,
    pub(crate) default_label: String,
}

impl DecisionList {
    pub fn new(manifest: Manifest, rules: Vec<DecisionRule>, default_label: String) -> Self {
        DecisionList {
            manifest,
            rules,
            default_label,
        }
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    pub fn default_label(&self) -> &str {
        &self.default_label
    }

    /// Index of the first rule whose conditions all hold, `None` for the
    /// default.
    pub fn firing_rule(&self, values: &[f64]) -> Option<usize> {
        self.rules
            .iter()
            .position(|r| r.conditions.iter().all(|c| c.holds(values)))
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<String, ClassifyError> {
        x.check_manifest(&self.manifest)?;
        Ok(match self.firing_rule(x.values()) {
            Some(i) => self.rules[i].label.clone(),
            None => self.default_label.clone(),
        })
    }
}

impl fmt::Display for DecisionList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.manifest.names();
        for (i, r) in self.rules.iter().enumerate() {
            f.write_str(if i == 0 { "if " } else { "else if " })?;
            for (j, c) in r.conditions.iter().enumerate() {
                if j > 0 {
                    f.write_str(" and ")?;
                }
                let op = if c.le { "<=" } else { ">" };
                write!(f, "{} {op} {}", names[c.feature], c.threshold)?;
            }
            writeln!(f, " then {}  ({} rows)", r.label, r.coverage)?;
        }
        let prefix = if self.rules.is_empty() { "" } else { "else " };
        writeln!(f, "{prefix}{}", self.default_label)
    }
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

struct Split {
    feature: usize,
    threshold: f64,
}

struct Builder<'a> {
    values: Vec<&'a [f64]>,
    labels: Vec<usize>,
    n_labels: usize,
    min_leaf: usize,
}

struct Leaf {
    path: Vec<Condition>,
    rows: Vec<usize>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_labels];
        for &r in rows {
            c[self.labels[r]] += 1;
        }
        c
    }

    /// Majority label; ties go to the smaller label index.
    fn majority(&self, rows: &[usize]) -> usize {
        let c = self.counts(rows);
        let mut best = 0;
        for (i, &n) in c.iter().enumerate() {
            if n > c[best] {
                best = i;
            }
        }
        best
    }

    /// Best binary split by gain ratio among candidates whose information
    /// gain is positive and at least the average gain.
    fn best_split(&self, rows: &[usize]) -> Option<Split> {
        const EPS: f64 = 1e-12;
        let parent = self.counts(rows);
        let h_parent = entropy(&parent);
        let n = rows.len() as f64;
        let dims = self.values[rows[0]].len();

        // (feature, threshold, gain, gain ratio)
        let mut candidates: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for f in 0..dims {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.values[r][f], self.labels[r])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0; self.n_labels];
            let mut right = parent.clone();
            for i in 0..sorted.len() - 1 {
                let (v, l) = sorted[i];
                left[l] += 1;
                right[l] -= 1;
                let next = sorted[i + 1].0;
                if next <= v {
                    continue;
                }
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                let n_left = (i + 1) as f64;
                let p_left = n_left / n;
                let h_children = p_left * entropy(&left) + (1.0 - p_left) * entropy(&right);
                let gain = h_parent - h_children;
                if gain <= EPS {
                    continue;
                }
                let split_info = entropy(&[i + 1, sorted.len() - i - 1]);
                candidates.push((f, threshold, gain, gain / split_info));
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let avg_gain = candidates.iter().map(|c| c.2).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<&(usize, f64, f64, f64)> = None;
        for c in candidates.iter().filter(|c| c.2 >= avg_gain - EPS) {
            // candidates are generated in (feature, threshold) order, so a
            // strict comparison keeps the earliest of equal ratios
            if best.is_none_or(|b| c.3 > b.3) {
                best = Some(c);
            }
        }
        best.map(|&(feature, threshold, _, _)| Split { feature, threshold })
    }

    /// Expands a node of the partial tree. Returns true if the node ended as
    /// a leaf. Children are expanded in order of increasing entropy until one
    /// of them turns into a subtree.
    fn expand(&self, rows: Vec<usize>, path: Vec<Condition>, leaves: &mut Vec<Leaf>) -> bool {
        let pure = self.counts(&rows).iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || rows.len() < self.min_leaf {
            None
        } else {
            self.best_split(&rows)
        };
        let Some(split) = split else {
            leaves.push(Leaf { path, rows });
            return true;
        };

        let (le, gt): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.values[r][split.feature] <= split.threshold);
        let mut children = [(le, true), (gt, false)];
        let h: Vec<f64> = children
            .iter()
            .map(|(c, _)| entropy(&self.counts(c)))
            .collect();
        if h[1] < h[0] {
            children.swap(0, 1);
        }
        for (child_rows, is_le) in children {
            let mut child_path = path.clone();
            child_path.push(Condition {
                feature: split.feature,
                le: is_le,
                threshold: split.threshold,
            });
            if !self.expand(child_rows, child_path, leaves) {
                break;
            }
        }
        false
    }
}

/// Generates a decision list by repeatedly building a partial tree on the
/// remaining rows, turning its largest leaf into a rule and removing the rows
/// it covers. Once the remaining rows share one label (or admit no useful
/// split) their majority label becomes the default.
pub fn train_part(data: &TrainingSet, min_leaf: usize) -> Result<DecisionList, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let label_names = data.labels();
    let builder = Builder {
        values: data.rows().iter().map(|(fv, _)| fv.values()).collect(),
        labels: data
            .rows()
            .iter()
            .map(|(_, l)| label_names.iter().position(|n| n == l).unwrap())
            .collect(),
        n_labels: label_names.len(),
        min_leaf: min_leaf.max(1),
    };

    let mut remaining: Vec<usize> = (0..data.len()).collect();
    let mut rules = Vec::new();
    let default = loop {
        if remaining.is_empty() {
            let all: Vec<usize> = (0..data.len()).collect();
            break builder.majority(&all);
        }
        let counts = builder.counts(&remaining);
        if counts.iter().filter(|&&c| c > 0).count() == 1 {
            break builder.majority(&remaining);
        }
        let mut leaves = Vec::new();
        builder.expand(remaining.clone(), Vec::new(), &mut leaves);
        let mut best = &leaves[0];
        for leaf in &leaves[1..] {
            if leaf.rows.len() > best.rows.len() {
                best = leaf;
            }
        }
        if best.path.is_empty() {
            break builder.majority(&remaining);
        }
        let label = builder.majority(&best.rows);
        rules.push(DecisionRule {
            conditions: best.path.clone(),
            label: label_names[label].clone(),
            coverage: best.rows.len(),
        });
        let covered = &best.rows;
        remaining.retain(|r| !covered.contains(r));
    };

    Ok(DecisionList {
        manifest: data.manifest().clone(),
        rules,
        default_label: label_names[default].clone(),
    })
}
