//! Non-ground programs in an ASP-Core-1 subset, their predicate dependency
//! graph, and the `nonground-11` feature vector.

mod features;
mod graph;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use features::extract_nonground;
pub use graph::{
    dependency_graph, hcf_components, is_stratified, scc, scc_positive, tarjan_scc, DependencyGraph,
};
pub use parser::{parse_nonground, ParseError};

/// A predicate symbol. Strong negation is part of the name (`-p`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pred {
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    Int(i64),
    Str(String),
    Func(String, Vec<Term>),
    Arith(Box<Term>, ArithOp, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Arith(l, _, r) => l.is_ground() && r.is_ground(),
            _ => true,
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) if v != "_" => {
                out.insert(v);
            }
            Term::Func(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Term::Arith(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    fn collect_functions(&self, out: &mut BTreeSet<(String, usize)>) {
        match self {
            Term::Func(name, args) => {
                out.insert((name.clone(), args.len()));
                args.iter().for_each(|t| t.collect_functions(out));
            }
            Term::Arith(l, _, r) => {
                l.collect_functions(out);
                r.collect_functions(out);
            }
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Int(i) => write!(f, "{i}"),
            Term::Str(s) => write!(f, "\"{s}\""),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Arith(l, op, r) => {
                let op = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "/",
                };
                write!(f, "{l}{op}{r}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn pred(&self) -> Pred {
        Pred {
            name: self.predicate.clone(),
            arity: self.args.len(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Builtin {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonGroundRule {
    /// Empty for constraints and queries, two or more atoms for disjunctive
    /// rules.
    pub head: Vec<Atom>,
    pub pos_body: Vec<Atom>,
    pub neg_body: Vec<Atom>,
    pub builtins: Vec<Builtin>,
    pub is_query: bool,
}

impl NonGroundRule {
    pub fn is_disjunctive(&self) -> bool {
        self.head.len() >= 2
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty() && !self.is_query
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head.iter().chain(&self.pos_body).chain(&self.neg_body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NonGroundProgram {
    pub rules: Vec<NonGroundRule>,
    pub predicates: BTreeSet<Pred>,
    /// Function symbols as (name, arity).
    pub functions: BTreeSet<(String, usize)>,
    pub has_query: bool,
    /// Non-fatal findings such as a predicate used with several arities.
    pub warnings: Vec<String>,
}

impl NonGroundProgram {
    /// Builds the program tables from a rule list.
    pub fn from_rules(rules: Vec<NonGroundRule>) -> Self {
        let mut predicates = BTreeSet::new();
        let mut functions = BTreeSet::new();
        for r in &rules {
            for a in r.atoms() {
                predicates.insert(a.pred());
                a.args
                    .iter()
                    .for_each(|t| t.collect_functions(&mut functions));
            }
            for b in &r.builtins {
                b.lhs.collect_functions(&mut functions);
                b.rhs.collect_functions(&mut functions);
            }
        }
        let mut warnings = Vec::new();
        let mut prev: Option<&Pred> = None;
        for p in &predicates {
            if let Some(q) = prev {
                if q.name == p.name {
                    warnings.push(format!(
                        "predicate `{}` used with arities {} and {}",
                        p.name, q.arity, p.arity
                    ));
                }
            }
            prev = Some(p);
        }
        let has_query = rules.iter().any(|r| r.is_query);
        NonGroundProgram {
            rules,
            predicates,
            functions,
            has_query,
            warnings,
        }
    }
}
