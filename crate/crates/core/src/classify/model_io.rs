//! Versioned text format for trained models.
//!
//! ```text
//! measp-model v1 knn ground-52
//! k 1
//! labels clasp cmodels
//! norm n_rules 0 1200
//! ...
//! row 0.25 ... 1 clasp
//!
//! measp-model v1 part nonground-11
//! features n_disj_rules has_query ...
//! rule gringo [12] n_rules<=3.5 & has_query>0.5
//! default dlv
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{ClassifyError, Condition, DecisionList, DecisionRule, InductiveModel, KnnModel};
use crate::features::Manifest;

const MAGIC: &str = "measp-model";
const VERSION: &str = "v1";

fn check_label(l: &str) -> Result<(), ClassifyError> {
    if l.is_empty() || l.chars().any(char::is_whitespace) {
        Err(ClassifyError::BadLabel(l.to_string()))
    } else {
        Ok(())
    }
}

pub fn write_model(model: &InductiveModel) -> Result<String, ClassifyError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{MAGIC} {VERSION} {} {}",
        model.kind(),
        model.manifest().id()
    );
    match model {
        InductiveModel::Knn(m) => {
            let _ = writeln!(out, "k {}", m.k);
            for l in &m.label_priority {
                check_label(l)?;
            }
            let _ = writeln!(out, "labels {}", m.label_priority.join(" "));
            for (name, (lo, hi)) in m.manifest.names().iter().zip(&m.normalization) {
                let _ = writeln!(out, "norm {name} {lo} {hi}");
            }
            for (values, label) in &m.exemplars {
                out.push_str("row");
                for v in values {
                    let _ = write!(out, " {v}");
                }
                let _ = writeln!(out, " {label}");
            }
        }
        InductiveModel::Part(d) => {
            let _ = writeln!(out, "features {}", d.manifest.names().join(" "));
            let names = d.manifest.names();
            for r in &d.rules {
                check_label(&r.label)?;
                let conds: Vec<String> = r
                    .conditions
                    .iter()
                    .map(|c| {
                        let op = if c.le { "<=" } else { ">" };
                        format!("{}{op}{}", names[c.feature], c.threshold)
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "rule {} [{}] {}",
                    r.label,
                    r.coverage,
                    conds.join(" & ")
                );
            }
            check_label(&d.default_label)?;
            let _ = writeln!(out, "default {}", d.default_label);
        }
    }
    Ok(out)
}

pub fn save_model(model: &InductiveModel, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
    std::fs::write(path, write_model(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<InductiveModel, ClassifyError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

fn corrupt(line: usize, msg: impl Into<String>) -> ClassifyError {
    ClassifyError::Corrupt {
        line,
        msg: msg.into(),
    }
}

fn num(line: usize, tok: &str) -> Result<f64, ClassifyError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| corrupt(line, format!("bad number `{tok}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(corrupt(line, format!("non-finite number `{tok}`")))
    }
}

fn manifest_for(id: &str, names: Vec<String>, line: usize) -> Result<Manifest, ClassifyError> {
    match Manifest::builtin(id) {
        Ok(m) if m.names() == names.as_slice() => Ok(m),
        Ok(_) => Err(corrupt(
            line,
            format!("feature names do not match manifest `{id}`"),
        )),
        Err(_) => Ok(Manifest::custom(id, names)),
    }
}

pub fn parse_model(text: &str) -> Result<InductiveModel, ClassifyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| corrupt(1, "empty model file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.first() != Some(&MAGIC) {
        return Err(corrupt(1, "missing `measp-model` header"));
    }
    match head.get(1) {
        Some(&VERSION) => {}
        Some(v) => return Err(ClassifyError::Version(v.to_string())),
        None => return Err(corrupt(1, "missing version")),
    }
    if head.len() != 4 {
        return Err(corrupt(
            1,
            "header must be `measp-model v1 <kind> <manifest>`",
        ));
    }
    let (kind, manifest_id) = (head[2], head[3]);

    match kind {
        "knn" => {
            let mut k = None;
            let mut labels: Vec<String> = Vec::new();
            let mut names = Vec::new();
            let mut normalization = Vec::new();
            let mut rows: Vec<(usize, Vec<f64>, String)> = Vec::new();
            for (n, line) in lines {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks[0] {
                    "k" if toks.len() == 2 => {
                        k = Some(toks[1].parse::<usize>().map_err(|_| corrupt(n, "bad k"))?)
                    }
                    "labels" => labels = toks[1..].iter().map(|s| s.to_string()).collect(),
                    "norm" if toks.len() == 4 => {
                        names.push(toks[1].to_string());
                        normalization.push((num(n, toks[2])?, num(n, toks[3])?));
                    }
                    "row" if toks.len() >= 3 => {
                        let values = toks[1..toks.len() - 1]
                            .iter()
                            .map(|t| num(n, t))
                            .collect::<Result<Vec<_>, _>>()?;
                        rows.push((n, values, toks[toks.len() - 1].to_string()));
                    }
                    other => return Err(corrupt(n, format!("unexpected `{other}` line"))),
                }
            }
            let k = k.ok_or_else(|| corrupt(1, "missing `k` line"))?;
            let manifest = manifest_for(manifest_id, names, 1)?;
            let mut exemplars = Vec::with_capacity(rows.len());
            for (n, values, label) in rows {
                if values.len() != manifest.len() {
                    return Err(corrupt(
                        n,
                        format!(
                            "row has {} values, expected {}",
                            values.len(),
                            manifest.len()
                        ),
                    ));
                }
                if !labels.contains(&label) {
                    return Err(corrupt(n, format!("label `{label}` missing from `labels`")));
                }
                exemplars.push((values, label));
            }
            if k == 0 || k > exemplars.len() {
                return Err(ClassifyError::KOutOfRange {
                    k,
                    n: exemplars.len(),
                });
            }
            Ok(InductiveModel::Knn(KnnModel {
                k,
                manifest,
                normalization,
                exemplars,
                label_priority: labels,
            }))
        }
        "part" => {
            let mut manifest = None;
            let mut rules = Vec::new();
            let mut default = None;
            for (n, line) in lines {
                let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                match key {
                    "features" => {
                        let names = rest.split_whitespace().map(String::from).collect();
                        manifest = Some(manifest_for(manifest_id, names, n)?);
                    }
                    "rule" => {
                        let m = manifest
                            .as_ref()
                            .ok_or_else(|| corrupt(n, "`rule` before `features`"))?;
                        rules.push(parse_rule(n, rest, m)?);
                    }
                    "default" if !rest.trim().is_empty() => default = Some(rest.trim().to_string()),
                    other => return Err(corrupt(n, format!("unexpected `{other}` line"))),
                }
            }
            let manifest = match manifest {
                Some(m) => m,
                None => Manifest::builtin(manifest_id)
                    .map_err(|_| corrupt(1, "missing `features` line"))?,
            };
            let default_label = default.ok_or_else(|| corrupt(1, "missing `default` line"))?;
            Ok(InductiveModel::Part(DecisionList {
                manifest,
                rules,
                default_label,
            }))
        }
        other => Err(corrupt(1, format!("unknown model kind `{other}`"))),
    }
}

fn parse_rule(n: usize, rest: &str, m: &Manifest) -> Result<DecisionRule, ClassifyError> {
    let mut toks = rest.splitn(3, char::is_whitespace);
    let label = toks
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| corrupt(n, "rule without label"))?;
    let coverage = toks
        .next()
        .and_then(|c| {
            c.strip_prefix('[')?
                .strip_suffix(']')?
                .parse::<usize>()
                .ok()
        })
        .ok_or_else(|| corrupt(n, "rule without `[coverage]`"))?;
    let conds = toks.next().unwrap_or("").trim();
    let mut conditions = Vec::new();
    if !conds.is_empty() {
        for c in conds.split('&') {
            let c = c.trim();
            let (name, le, value) = if let Some((a, b)) = c.split_once("<=") {
                (a, true, b)
            } else if let Some((a, b)) = c.split_once('>') {
                (a, false, b)
            } else {
                return Err(corrupt(n, format!("bad condition `{c}`")));
            };
            let feature = m
                .index_of(name.trim())
                .ok_or_else(|| corrupt(n, format!("unknown feature `{}`", name.trim())))?;
            conditions.push(Condition {
                feature,
                le,
                threshold: num(n, value.trim())?,
            });
        }
    }
    Ok(DecisionRule {
        conditions,
        label: label.to_string(),
        coverage,
    })
}
