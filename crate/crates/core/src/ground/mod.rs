//! Ground (propositional) programs.
//!
//! Two input dialects are supported: the line-oriented numeric format written
//! by lparse-compatible grounders ([`parse_numeric`]) and a textual dialect
//! of facts and rules as printed by DLV-style instantiators
//! ([`parse_text_ground`]). Both produce the same [`GroundProgram`] value.

mod features;
mod numeric;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use features::extract_ground;
pub use numeric::{emit_numeric, parse_numeric};
pub use text::{emit_text_ground, parse_text_ground};

pub type AtomId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("line {line}{}: {msg}", col.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        col: Option<usize>,
        msg: String,
    },
    #[error("invalid ground program: {0}")]
    Invalid(String),
    #[error("construct not representable in the target format: {0}")]
    Unsupported(String),
}

impl GroundError {
    pub(crate) fn at(line: usize, msg: impl Into<String>) -> Self {
        GroundError::Parse {
            line,
            col: None,
            msg: msg.into(),
        }
    }
}

/// Rule kinds of the numeric format. `Unknown` keeps the type code of rules
/// this crate does not interpret.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Basic,
    /// Integrity constraint: a basic rule whose head is the program's false
    /// atom. The head is stored empty.
    Constraint,
    Choice,
    /// Weight rule (type 5), or cardinality rule (type 2) when `weights` is
    /// absent.
    Weight,
    Minimize,
    Disjunctive,
    Unknown(i64),
}

impl RuleKind {
    pub fn type_code(self) -> i64 {
        match self {
            RuleKind::Basic | RuleKind::Constraint => 1,
            RuleKind::Choice => 3,
            RuleKind::Weight => 5,
            RuleKind::Minimize => 6,
            RuleKind::Disjunctive => 8,
            RuleKind::Unknown(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    pub kind: RuleKind,
    pub head: Vec<AtomId>,
    pub pos_body: Vec<AtomId>,
    pub neg_body: Vec<AtomId>,
    pub bound: Option<i64>,
    /// Weights in file order: negative literals first, then positive ones.
    pub weights: Option<Vec<i64>>,
    /// Integer payload of an `Unknown` rule, everything after the type code.
    pub raw: Vec<i64>,
}

impl GroundRule {
    pub fn basic(head: AtomId, pos_body: Vec<AtomId>, neg_body: Vec<AtomId>) -> Self {
        Self::with_kind(RuleKind::Basic, vec![head], pos_body, neg_body)
    }

    pub fn constraint(pos_body: Vec<AtomId>, neg_body: Vec<AtomId>) -> Self {
        Self::with_kind(RuleKind::Constraint, Vec::new(), pos_body, neg_body)
    }

    pub fn disjunctive(head: Vec<AtomId>, pos_body: Vec<AtomId>, neg_body: Vec<AtomId>) -> Self {
        Self::with_kind(RuleKind::Disjunctive, head, pos_body, neg_body)
    }

    pub fn with_kind(
        kind: RuleKind,
        head: Vec<AtomId>,
        pos_body: Vec<AtomId>,
        neg_body: Vec<AtomId>,
    ) -> Self {
        GroundRule {
            kind,
            head,
            pos_body,
            neg_body,
            bound: None,
            weights: None,
            raw: Vec::new(),
        }
    }

    pub fn body_len(&self) -> usize {
        self.pos_body.len() + self.neg_body.len()
    }

    fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.head
            .iter()
            .chain(&self.pos_body)
            .chain(&self.neg_body)
            .copied()
    }

    fn validate(&self) -> Result<(), String> {
        if self.atoms().any(|a| a == 0) {
            return Err("atom id 0 is reserved".into());
        }
        let pos: BTreeSet<_> = self.pos_body.iter().collect();
        if let Some(a) = self.neg_body.iter().find(|a| pos.contains(a)) {
            return Err(format!(
                "atom {a} occurs in both positive and negative body"
            ));
        }
        let body_len = self.body_len();
        let weights_ok = self.weights.as_ref().is_none_or(|w| w.len() == body_len);
        if !weights_ok {
            return Err("weights must align with the body".into());
        }
        let ok = match self.kind {
            RuleKind::Basic => self.head.len() == 1,
            RuleKind::Constraint => self.head.is_empty(),
            RuleKind::Choice => true,
            RuleKind::Weight => self.head.len() == 1 && self.bound.is_some(),
            RuleKind::Minimize => self.head.is_empty() && self.weights.is_some(),
            RuleKind::Disjunctive => !self.head.is_empty(),
            RuleKind::Unknown(code) => {
                code != 0
                    && self.head.is_empty()
                    && self.pos_body.is_empty()
                    && self.neg_body.is_empty()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("malformed {:?} rule", self.kind))
        }
    }
}

/// The compute and model-count trailer of a numeric document. Retained for
/// output only; it carries no features.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compute {
    pub b_plus: Vec<AtomId>,
    pub b_minus: Vec<AtomId>,
    pub models: u64,
}

impl Default for Compute {
    fn default() -> Self {
        Compute {
            b_plus: Vec::new(),
            b_minus: Vec::new(),
            models: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProgram {
    rules: Vec<GroundRule>,
    symbols: BTreeMap<AtomId, String>,
    false_atom: Option<AtomId>,
    compute: Compute,
    n_atoms: usize,
}

impl GroundProgram {
    /// Validates the rules and normalizes the false atom: when constraints are
    /// present and no false atom is given, a fresh id is allocated; the false
    /// atom is always first in the `B-` list.
    pub fn new(
        rules: Vec<GroundRule>,
        symbols: BTreeMap<AtomId, String>,
        false_atom: Option<AtomId>,
        mut compute: Compute,
    ) -> Result<Self, GroundError> {
        for (i, r) in rules.iter().enumerate() {
            r.validate()
                .map_err(|m| GroundError::Invalid(format!("rule {}: {m}", i + 1)))?;
        }
        if symbols.contains_key(&0) {
            return Err(GroundError::Invalid("symbol table uses atom id 0".into()));
        }

        let mut atoms: BTreeSet<AtomId> = rules.iter().flat_map(|r| r.atoms()).collect();
        atoms.extend(symbols.keys().copied());
        let n_atoms = atoms.len();

        let has_constraints = rules.iter().any(|r| r.kind == RuleKind::Constraint);
        let false_atom = match false_atom {
            Some(f) => Some(f),
            None if has_constraints => {
                let max = atoms
                    .iter()
                    .chain(&compute.b_plus)
                    .chain(&compute.b_minus)
                    .max()
                    .copied()
                    .unwrap_or(0);
                Some(max + 1)
            }
            None => None,
        };
        if let Some(f) = false_atom {
            if f == 0 {
                return Err(GroundError::Invalid("false atom cannot be 0".into()));
            }
            if symbols.contains_key(&f) {
                return Err(GroundError::Invalid(format!("false atom {f} has a name")));
            }
            if rules
                .iter()
                .any(|r| r.pos_body.contains(&f) || r.neg_body.contains(&f))
            {
                return Err(GroundError::Invalid(format!(
                    "false atom {f} occurs in a rule body"
                )));
            }
            if rules
                .iter()
                .any(|r| r.kind == RuleKind::Basic && r.head == [f])
            {
                return Err(GroundError::Invalid(format!(
                    "basic rule with false atom {f} as head must be a constraint"
                )));
            }
            compute.b_minus.retain(|&a| a != f);
            compute.b_minus.insert(0, f);
        }

        Ok(GroundProgram {
            rules,
            symbols,
            false_atom,
            compute,
            n_atoms,
        })
    }

    pub fn empty() -> Self {
        GroundProgram {
            rules: Vec::new(),
            symbols: BTreeMap::new(),
            false_atom: None,
            compute: Compute::default(),
            n_atoms: 0,
        }
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn symbols(&self) -> &BTreeMap<AtomId, String> {
        &self.symbols
    }

    pub fn false_atom(&self) -> Option<AtomId> {
        self.false_atom
    }

    pub fn compute(&self) -> &Compute {
        &self.compute
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn name_of(&self, atom: AtomId) -> Option<&str> {
        self.symbols.get(&atom).map(String::as_str)
    }

    /// Every rule repeated twice, in order. Used by scale tests.
    pub fn with_duplicated_rules(&self) -> Self {
        let mut rules = self.rules.clone();
        rules.extend(self.rules.iter().cloned());
        GroundProgram {
            rules,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlapping_bodies() {
        let r = GroundRule::basic(1, vec![2], vec![2]);
        let err = GroundProgram::new(vec![r], BTreeMap::new(), None, Compute::default());
        assert!(matches!(err, Err(GroundError::Invalid(_))));
    }

    #[test]
    fn allocates_false_atom_for_constraints() {
        let rules = vec![
            GroundRule::basic(2, vec![], vec![]),
            GroundRule::constraint(vec![2], vec![]),
        ];
        let p = GroundProgram::new(rules, BTreeMap::new(), None, Compute::default()).unwrap();
        assert_eq!(p.false_atom(), Some(3));
        assert_eq!(p.compute().b_minus, vec![3]);
        assert_eq!(p.n_atoms(), 1);
    }

    #[test]
    fn false_atom_must_stay_out_of_bodies() {
        let rules = vec![GroundRule::basic(2, vec![1], vec![])];
        let err = GroundProgram::new(rules, BTreeMap::new(), Some(1), Compute::default());
        assert!(err.is_err());
    }

    #[test]
    fn n_atoms_includes_symbol_only_atoms() {
        let mut symbols = BTreeMap::new();
        symbols.insert(7, "lonely".to_string());
        let p = GroundProgram::new(
            vec![GroundRule::basic(2, vec![3], vec![4])],
            symbols,
            None,
            Compute::default(),
        )
        .unwrap();
        assert_eq!(p.n_atoms(), 4);
    }
}
