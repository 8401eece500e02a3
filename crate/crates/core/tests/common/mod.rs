#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use measp::classify::DecisionList;
use measp::engines::{RunRecord, RunStatus};
use measp::ground::{AtomId, Compute, GroundProgram, GroundRule, RuleKind};
use measp::harness::RuntimeTable;
use rand::seq::SliceRandom;
use rand::Rng;

fn distinct_atoms(rng: &mut impl Rng, pool: AtomId, n: usize) -> Vec<AtomId> {
    let mut all: Vec<AtomId> = (1..=pool).collect();
    all.shuffle(rng);
    all.truncate(n.min(pool as usize));
    all
}

fn body(rng: &mut impl Rng, pool: AtomId, max_len: usize) -> (Vec<AtomId>, Vec<AtomId>) {
    let n = rng.gen_range(0..=max_len);
    let atoms = distinct_atoms(rng, pool, n);
    let split = rng.gen_range(0..=atoms.len());
    (atoms[..split].to_vec(), atoms[split..].to_vec())
}

/// Random ground program. With `textual` only rule kinds expressible in the
/// text dialect are generated and every atom is named.
pub fn random_ground_program(rng: &mut impl Rng, max_rules: usize, textual: bool) -> GroundProgram {
    let pool: AtomId = rng.gen_range(1..=12);
    let n_rules = rng.gen_range(0..=max_rules);
    let mut rules = Vec::with_capacity(n_rules);
    for _ in 0..n_rules {
        let kinds = if textual { 3 } else { 7 };
        let (pos, neg) = body(rng, pool, 4);
        let rule = match rng.gen_range(0..kinds) {
            0 => {
                let head = rng.gen_range(1..=pool);
                let pos = pos
                    .into_iter()
                    .filter(|&a| a != head || rng.gen_bool(0.5))
                    .collect();
                GroundRule::basic(head, pos, neg)
            }
            1 => GroundRule::constraint(pos, neg),
            2 => {
                let h = rng.gen_range(1..=3);
                GroundRule::disjunctive(distinct_atoms(rng, pool, h), pos, neg)
            }
            3 => {
                let h = rng.gen_range(0..=3);
                GroundRule::with_kind(RuleKind::Choice, distinct_atoms(rng, pool, h), pos, neg)
            }
            4 => {
                let mut r = GroundRule::with_kind(
                    RuleKind::Weight,
                    vec![rng.gen_range(1..=pool)],
                    pos,
                    neg,
                );
                r.bound = Some(rng.gen_range(0..=r.body_len() as i64));
                r
            }
            5 => {
                let mut r = GroundRule::with_kind(
                    RuleKind::Weight,
                    vec![rng.gen_range(1..=pool)],
                    pos,
                    neg,
                );
                r.bound = Some(rng.gen_range(0..20));
                r.weights = Some((0..r.body_len()).map(|_| rng.gen_range(0..10)).collect());
                r
            }
            _ => {
                let mut r = GroundRule::with_kind(RuleKind::Minimize, vec![], pos, neg);
                r.weights = Some((0..r.body_len()).map(|_| rng.gen_range(0..10)).collect());
                r
            }
        };
        rules.push(rule);
    }
    let mut symbols = BTreeMap::new();
    for a in 1..=pool {
        if textual || rng.gen_bool(0.7) {
            symbols.insert(a, format!("p{a}"));
        }
    }
    GroundProgram::new(rules, symbols, None, Compute::default())
        .expect("generator builds valid programs")
}

pub type Edges = Vec<(usize, usize)>;

/// Random digraph as (positive edges, negative edges), self-loops allowed.
pub fn random_digraph(rng: &mut impl Rng, n: usize, density: f64) -> (Edges, Edges) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(density) {
                pos.push((a, b));
            }
            if rng.gen_bool(density / 3.0) {
                neg.push((a, b));
            }
        }
    }
    (pos, neg)
}

/// Random runtime table. Solved runs get a time below `limit`; timeouts are
/// charged the limit.
pub fn random_table(
    rng: &mut impl Rng,
    n_instances: usize,
    n_engines: usize,
    limit: f64,
) -> RuntimeTable {
    let engines: Vec<String> = (0..n_engines).map(|e| format!("e{e}")).collect();
    let mut t = RuntimeTable::new(engines.clone(), limit);
    for i in 0..n_instances {
        let id = format!("i{i:04}");
        t.add_instance(&id, if i % 2 == 0 { "even" } else { "odd" });
        for e in &engines {
            let r = match rng.gen_range(0..10) {
                0..=5 => {
                    // coarse grid so exact ties happen
                    let cpu = if rng.gen_bool(0.3) {
                        rng.gen_range(1..10) as f64
                    } else {
                        rng.gen_range(0.0..limit)
                    };
                    let st = if rng.gen_bool(0.5) {
                        RunStatus::SolvedSat
                    } else {
                        RunStatus::SolvedUnsat
                    };
                    RunRecord::new(&id, e, st, cpu)
                }
                6 | 7 => RunRecord::new(&id, e, RunStatus::Timeout, limit),
                8 => RunRecord::new(&id, e, RunStatus::Memout, rng.gen_range(0.0..limit)),
                _ => RunRecord::new(&id, e, RunStatus::Error, 0.0),
            };
            t.insert(r).unwrap();
        }
    }
    t
}

/// Reflexive-transitive closure by Floyd-Warshall.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        let via = r[k].clone();
        for row in r.iter_mut().filter(|row| row[k]) {
            for (cell, &v) in row.iter_mut().zip(&via) {
                *cell |= v;
            }
        }
    }
    r
}

pub fn closure_partition(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let r = closure(n, edges);
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| r[i][j] && r[j][i]).collect();
        for &j in &comp {
            seen[j] = true;
        }
        out.push(comp);
    }
    out
}

/// Stratified iff no negative edge a→b has a path back b→*a.
pub fn stratified_by_reachability(
    n: usize,
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
) -> bool {
    let all: Vec<_> = pos.iter().chain(neg).copied().collect();
    let r = closure(n, &all);
    neg.iter().all(|&(a, b)| !r[b][a])
}

/// Stratified iff no simple cycle uses a negative edge; cycles enumerated
/// explicitly by DFS from each start node over larger-indexed nodes.
pub fn stratified_by_cycles(n: usize, pos: &[(usize, usize)], neg: &[(usize, usize)]) -> bool {
    let negs: BTreeSet<_> = neg.iter().copied().collect();
    let mut succ = vec![BTreeSet::new(); n];
    for &(a, b) in pos.iter().chain(neg) {
        succ[a].insert(b);
    }
    fn negative_cycle(
        start: usize,
        v: usize,
        used_neg: bool,
        on_path: &mut [bool],
        succ: &[BTreeSet<usize>],
        negs: &BTreeSet<(usize, usize)>,
    ) -> bool {
        for &w in &succ[v] {
            let is_neg = negs.contains(&(v, w));
            if w == start && (used_neg || is_neg) {
                return true;
            }
            if w > start && !on_path[w] {
                on_path[w] = true;
                if negative_cycle(start, w, used_neg || is_neg, on_path, succ, negs) {
                    return true;
                }
                on_path[w] = false;
            }
        }
        false
    }
    (0..n).all(|s| {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        !negative_cycle(s, s, false, &mut on_path, &succ, &negs)
    })
}

/// Exhaustive kNN: normalize from the raw rows, sort every exemplar by
/// (distance, index), vote over the first k, break vote ties by `priority`.
pub fn knn_oracle(rows: &[(Vec<f64>, String)], q: &[f64], k: usize, priority: &[String]) -> String {
    let d = q.len();
    let lo: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r.0[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|j| {
            rows.iter()
                .map(|r| r.0[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let norm = |v: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|j| {
                if hi[j] > lo[j] {
                    ((v[j] - lo[j]) / (hi[j] - lo[j])).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let nq = norm(q);
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let e = norm(&r.0);
            (
                e.iter()
                    .zip(&nq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
                i,
            )
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for &(_, i) in &order[..k] {
        *votes.entry(rows[i].1.as_str()).or_default() += 1;
    }
    let best = *votes.values().max().unwrap();
    priority
        .iter()
        .find(|l| votes.get(l.as_str()) == Some(&best))
        .unwrap()
        .clone()
}

/// First rule whose every condition holds, evaluated straight from the
/// rule fields.
pub fn interpret_decision_list(list: &DecisionList, v: &[f64]) -> String {
    for r in list.rules() {
        let ok = r.conditions.iter().all(|c| {
            let x = v[c.feature];
            (c.le && x <= c.threshold) || (!c.le && x > c.threshold)
        });
        if ok {
            return r.label.clone();
        }
    }
    list.default_label().to_string()
}
