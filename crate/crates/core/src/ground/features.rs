use super::{GroundProgram, GroundRule, RuleKind};
use crate::features::{FeatureVector, Manifest};

#[derive(Default)]
struct Counts {
    horn: u64,
    unary: u64,
    binary: u64,
    ternary: u64,
    true_facts: u64,
    disj_facts: u64,
    constraints: u64,
    normal: u64,
}

impl Counts {
    fn add(&mut self, r: &GroundRule) {
        if let RuleKind::Unknown(_) = r.kind {
            return;
        }
        let body = r.body_len();
        match body {
            1 => self.unary += 1,
            2 => self.binary += 1,
            3 => self.ternary += 1,
            _ => {}
        }
        let horn_shape = r.head.len() <= 1 && r.neg_body.is_empty();
        match r.kind {
            RuleKind::Basic => {
                self.normal += 1;
                if horn_shape {
                    self.horn += 1;
                }
                if body == 0 {
                    self.true_facts += 1;
                }
            }
            RuleKind::Constraint => {
                self.constraints += 1;
                if horn_shape {
                    self.horn += 1;
                }
            }
            RuleKind::Disjunctive if body == 0 => self.disj_facts += 1,
            _ => {}
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Computes the `ground-52` feature vector.
///
/// Horn rules are basic rules and constraints without negative body
/// literals; unary/binary/ternary count total body literals; true facts are
/// bodiless basic rules, disjunctive facts bodiless disjunctive rules; normal
/// rules are basic rules that are not constraints. Unknown rule types count
/// towards `n_rules` only. Divisions by zero yield 0.
pub fn extract_ground(p: &GroundProgram) -> FeatureVector {
    let mut c = Counts::default();
    for r in p.rules() {
        c.add(r);
    }
    let n_rules = p.rules().len() as f64;
    let n_atoms = p.n_atoms() as f64;
    let counts = [
        c.horn,
        c.unary,
        c.binary,
        c.ternary,
        c.true_facts,
        c.disj_facts,
        c.constraints,
        c.normal,
    ]
    .map(|v| v as f64);

    let mut values = Vec::with_capacity(52);
    values.push(n_rules);
    values.push(n_atoms);
    values.extend_from_slice(&counts);
    let ratios = counts.map(|v| ratio(v, n_rules));
    values.extend_from_slice(&ratios);
    values.push(ratio(n_rules, n_atoms));
    values.push(ratio(n_atoms, n_rules));
    for i in 0..ratios.len() {
        for j in i + 1..ratios.len() {
            values.push(ratios[i] * ratios[j]);
        }
    }
    values.push(n_rules.ln_1p());
    values.push(n_atoms.ln_1p());
    values.push(ratio(counts[4] + counts[5], n_rules));
    values.push(ratio(counts[1] + counts[2] + counts[3], n_rules));

    FeatureVector::new(Manifest::ground52(), values).expect("ground features are finite")
}
