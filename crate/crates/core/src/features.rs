//! Feature manifests and feature vectors shared by the ground and non-ground
//! extractors and by the classifiers.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub const GROUND_52: &str = "ground-52";
pub const NONGROUND_11: &str = "nonground-11";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("unknown feature manifest `{0}`")]
    UnknownManifest(String),
    #[error("manifest `{manifest}` expects {expected} values, got {got}")]
    Length {
        manifest: String,
        expected: usize,
        got: usize,
    },
    #[error("feature `{0}` is not finite")]
    NotFinite(String),
    #[error("manifest mismatch: expected `{expected}`, got `{got}`")]
    Mismatch { expected: String, got: String },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// An ordered list of feature names identified by a manifest id.
#[derive(Clone, PartialEq, Eq)]
pub struct Manifest {
    id: String,
    names: Arc<[String]>,
}

impl fmt::Debug for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Manifest({}, {} features)", self.id, self.names.len())
    }
}

impl Manifest {
    /// Builds a manifest outside of the two built-in ones. Used for synthetic
    /// data sets and tests.
    pub fn custom(id: impl Into<String>, names: Vec<String>) -> Self {
        Manifest {
            id: id.into(),
            names: names.into(),
        }
    }

    pub fn ground52() -> Self {
        static M: OnceLock<Manifest> = OnceLock::new();
        M.get_or_init(|| Manifest::custom(GROUND_52, ground52_names()))
            .clone()
    }

    pub fn nonground11() -> Self {
        static M: OnceLock<Manifest> = OnceLock::new();
        M.get_or_init(|| {
            Manifest::custom(
                NONGROUND_11,
                NONGROUND_11_NAMES.iter().map(|s| s.to_string()).collect(),
            )
        })
        .clone()
    }

    /// Looks up one of the built-in manifests by id.
    pub fn builtin(id: &str) -> Result<Self, FeatureError> {
        match id {
            GROUND_52 => Ok(Self::ground52()),
            NONGROUND_11 => Ok(Self::nonground11()),
            other => Err(FeatureError::UnknownManifest(other.to_string())),
        }
    }

    /// Finds the built-in manifest with exactly these names, or makes a
    /// custom one.
    pub fn from_names(id_hint: Option<&str>, names: Vec<String>) -> Self {
        for builtin in [Self::ground52(), Self::nonground11()] {
            if *builtin.names == names[..] {
                return builtin;
            }
        }
        Manifest::custom(id_hint.unwrap_or("custom"), names)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// The canonical ordered name list of a built-in manifest.
pub fn manifest(id: &str) -> Result<Vec<String>, FeatureError> {
    Manifest::builtin(id).map(|m| m.names().to_vec())
}

/// Base counts of the ground manifest, entries 1-10.
pub const GROUND_COUNTS: [&str; 10] = [
    "n_rules",
    "n_atoms",
    "n_horn",
    "n_unary",
    "n_binary",
    "n_ternary",
    "n_true_facts",
    "n_disj_facts",
    "n_constraints",
    "n_normal",
];

/// Rule ratios, entries 11-18; each is the count at the same offset in
/// `GROUND_COUNTS[2..]` divided by `n_rules`.
pub const GROUND_RATIOS: [&str; 8] = [
    "ratio_horn",
    "ratio_unary",
    "ratio_binary",
    "ratio_ternary",
    "ratio_true_facts",
    "ratio_disj_facts",
    "frac_constraints",
    "frac_normal",
];

fn ground52_names() -> Vec<String> {
    let mut names: Vec<String> = GROUND_COUNTS.iter().map(|s| s.to_string()).collect();
    names.extend(GROUND_RATIOS.iter().map(|s| s.to_string()));
    names.push("rules_per_atom".into());
    names.push("atoms_per_rule".into());
    for (i, a) in GROUND_RATIOS.iter().enumerate() {
        for b in &GROUND_RATIOS[i + 1..] {
            names.push(format!("{a}_x_{b}"));
        }
    }
    names.extend(
        [
            "log_n_rules",
            "log_n_atoms",
            "facts_ratio",
            "short_rule_ratio",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    debug_assert_eq!(names.len(), 52);
    names
}

pub const NONGROUND_11_NAMES: [&str; 11] = [
    "n_disj_rules",
    "has_query",
    "n_functions",
    "n_predicates",
    "n_scc",
    "n_hcf_components",
    "is_stratified",
    "n_rules",
    "n_constraints",
    "max_predicate_arity",
    "frac_disj_rules",
];

/// A fixed-length vector of finite feature values in manifest order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    manifest: Manifest,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(manifest: Manifest, values: Vec<f64>) -> Result<Self, FeatureError> {
        if values.len() != manifest.len() {
            return Err(FeatureError::Length {
                manifest: manifest.id().to_string(),
                expected: manifest.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NotFinite(manifest.names()[i].clone()));
        }
        Ok(FeatureVector { manifest, values })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn manifest_id(&self) -> &str {
        self.manifest.id()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.manifest.index_of(name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.manifest
            .names()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn check_manifest(&self, expected: &Manifest) -> Result<(), FeatureError> {
        if self.manifest.id() != expected.id() || self.manifest.names() != expected.names() {
            return Err(FeatureError::Mismatch {
                expected: expected.id().to_string(),
                got: self.manifest.id().to_string(),
            });
        }
        Ok(())
    }

    /// `name value` lines, one per feature.
    pub fn to_name_value(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.iter() {
            out.push_str(&format!("{name} {value}\n"));
        }
        out
    }

    pub fn from_name_value(text: &str) -> Result<Self, FeatureError> {
        let mut names = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) =
                line.split_once(char::is_whitespace)
                    .ok_or_else(|| FeatureError::Format {
                        line: i + 1,
                        msg: "expected `name value`".into(),
                    })?;
            let value: f64 = value.trim().parse().map_err(|_| FeatureError::Format {
                line: i + 1,
                msg: format!("bad value for `{name}`"),
            })?;
            names.push(name.to_string());
            values.push(value);
        }
        FeatureVector::new(Manifest::from_names(None, names), values)
    }
}

/// Writes feature rows as CSV: header `instance_id,<names>`, then one row per
/// instance. All rows must share the manifest of the first.
pub fn write_csv<W: Write>(out: W, rows: &[(String, FeatureVector)]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(out);
    if let Some((_, first)) = rows.first() {
        let mut header = vec!["instance_id".to_string()];
        header.extend(first.manifest().names().iter().cloned());
        w.write_record(&header)?;
        for (id, fv) in rows {
            fv.check_manifest(first.manifest())?;
            let mut rec = vec![id.clone()];
            rec.extend(fv.values().iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<(String, FeatureVector)>, FeatureError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("instance_id") {
        return Err(FeatureError::Format {
            line: 1,
            msg: "header must start with `instance_id`".into(),
        });
    }
    let manifest = Manifest::from_names(None, header.iter().skip(1).map(String::from).collect());
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let id = rec.get(0).unwrap_or_default().to_string();
        let values = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| FeatureError::Format {
                    line,
                    msg: format!("non-numeric value `{v}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((id, FeatureVector::new(manifest.clone(), values)?));
    }
    Ok(rows)
}
