//! Table-driven test double for grounders and solvers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::{EngineCommand, EngineError, EngineRole, EngineSpec, Format, RunRecord, RunStatus};
use crate::ground::{emit_numeric, parse_text_ground};
use crate::nonground::{parse_nonground, ArithOp, Atom, Builtin, CmpOp, NonGroundProgram, Term};

/// Recorded outcome per instance id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MockTable {
    entries: BTreeMap<String, (RunStatus, f64)>,
}

impl MockTable {
    pub fn new() -> Self {
        MockTable::default()
    }

    pub fn insert(
        &mut self,
        instance: impl Into<String>,
        status: RunStatus,
        cpu_seconds: f64,
    ) -> Result<(), EngineError> {
        if !cpu_seconds.is_finite() || cpu_seconds < 0.0 {
            return Err(EngineError::MockTable(format!(
                "invalid cpu time {cpu_seconds}"
            )));
        }
        self.entries.insert(instance.into(), (status, cpu_seconds));
        Ok(())
    }

    pub fn get(&self, instance: &str) -> Option<(RunStatus, f64)> {
        self.entries.get(instance).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads a runtime CSV with columns `instance`, `status`, `cpu_seconds`
    /// and optionally `engine`. When `engine` is given and the column is
    /// present, only that engine's rows are kept. `#` lines are skipped.
    pub fn from_csv(path: &Path, engine: Option<&str>) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text, engine)
    }

    pub fn parse_csv(text: &str, engine: Option<&str>) -> Result<Self, EngineError> {
        let bad = |msg: String| EngineError::MockTable(msg);
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(ci), Some(cs), Some(cc)) = (col("instance"), col("status"), col("cpu_seconds"))
        else {
            return Err(bad("header needs instance, status and cpu_seconds".into()));
        };
        let ce = col("engine");
        let mut table = MockTable::new();
        for row in rdr.records() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let line = row.position().map_or(0, |p| p.line());
            if let (Some(ce), Some(want)) = (ce, engine) {
                if row.get(ce) != Some(want) {
                    continue;
                }
            }
            let status: RunStatus = row
                .get(cs)
                .unwrap_or("")
                .parse()
                .map_err(|e| bad(format!("line {line}: {e}")))?;
            let cpu: f64 = row
                .get(cc)
                .unwrap_or("")
                .parse()
                .map_err(|_| bad(format!("line {line}: bad cpu_seconds")))?;
            table
                .insert(row.get(ci).unwrap_or(""), status, cpu)
                .map_err(|e| bad(format!("line {line}: {e}")))?;
        }
        Ok(table)
    }
}

impl FromIterator<(String, (RunStatus, f64))> for MockTable {
    fn from_iter<I: IntoIterator<Item = (String, (RunStatus, f64))>>(iter: I) -> Self {
        MockTable {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MockEngine {
    pub table: MockTable,
}

impl MockEngine {
    /// Replays the table entry for `instance` under `limit` on the simulated
    /// clock: the reported CPU time is exactly the table value, capped to a
    /// timeout at the limit.
    pub fn replay(&self, name: &str, instance: &str, limit: f64) -> RunRecord {
        let Some((status, cpu)) = self.table.get(instance) else {
            return RunRecord::error(
                instance,
                name,
                format!("instance `{instance}` not in mock table"),
            );
        };
        let (status, cpu) = match status {
            RunStatus::Timeout => (RunStatus::Timeout, cpu.max(limit)),
            s if s.is_solved() && cpu >= limit => (RunStatus::Timeout, limit),
            s => (s, cpu),
        };
        RunRecord::new(instance, name, status, cpu)
    }
}

/// In-process mock engine on a simulated clock.
pub fn mock_engine(name: &str, role: EngineRole, table: MockTable) -> EngineSpec {
    let (input_format, output_format) = match role {
        EngineRole::Solver => (Format::GroundNumeric, Format::AnswerSets),
        EngineRole::Grounder | EngineRole::Both => (Format::NongroundText, Format::GroundNumeric),
    };
    EngineSpec {
        name: name.to_string(),
        role,
        command: EngineCommand::Mock(Arc::new(MockEngine { table })),
        input_format,
        output_format,
    }
}

/// Stdout printed by a mock solving run with the given status.
pub fn mock_answer_output(instance: &str, status: RunStatus) -> String {
    match status {
        RunStatus::SolvedSat => format!("Answer: 1\nsolved({instance})\nSATISFIABLE\n"),
        RunStatus::SolvedUnsat => "UNSATISFIABLE\n".to_string(),
        _ => String::new(),
    }
}

/// Upper bound on rule instances produced by [`naive_ground`].
pub const GROUND_LIMIT: usize = 1_000_000;

/// Instantiates every rule over the constants occurring in the program and
/// returns the result in the textual ground dialect. Builtins over integers
/// and constants are evaluated; instances with a false builtin are dropped.
/// Queries are ignored.
pub fn naive_ground(p: &NonGroundProgram) -> Result<String, String> {
    let mut universe: BTreeSet<String> = BTreeSet::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut add = |t: &Term, terms: &mut Vec<Term>| {
        if t.is_ground() {
            let t = eval(t);
            if universe.insert(t.to_string()) {
                terms.push(t);
            }
        }
    };
    for r in &p.rules {
        for a in r.head.iter().chain(&r.pos_body).chain(&r.neg_body) {
            for t in &a.args {
                add(t, &mut terms);
            }
        }
        for b in &r.builtins {
            add(&b.lhs, &mut terms);
            add(&b.rhs, &mut terms);
        }
    }

    let mut out = String::new();
    let mut produced = 0usize;
    for r in p.rules.iter().filter(|r| !r.is_query) {
        let mut vars = BTreeSet::new();
        for a in r.head.iter().chain(&r.pos_body).chain(&r.neg_body) {
            for t in &a.args {
                t.collect_vars(&mut vars);
            }
        }
        for b in &r.builtins {
            b.lhs.collect_vars(&mut vars);
            b.rhs.collect_vars(&mut vars);
        }
        let vars: Vec<String> = vars.into_iter().map(String::from).collect();
        if !vars.is_empty() && terms.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            produced += 1;
            if produced > GROUND_LIMIT {
                return Err(format!("more than {GROUND_LIMIT} rule instances"));
            }
            let sub: BTreeMap<&str, &Term> = vars
                .iter()
                .map(String::as_str)
                .zip(idx.iter().map(|&i| &terms[i]))
                .collect();
            if r.builtins.iter().all(|b| holds(b, &sub)) {
                write_instance(&mut out, &r.head, &r.pos_body, &r.neg_body, &sub);
            }
            let mut carry = true;
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < terms.len() {
                    carry = false;
                    break;
                }
                *slot = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(out)
}

fn write_instance(
    out: &mut String,
    head: &[Atom],
    pos: &[Atom],
    neg: &[Atom],
    sub: &BTreeMap<&str, &Term>,
) {
    let inst = |a: &Atom| {
        let args: Vec<Term> = a.args.iter().map(|t| eval(&substitute(t, sub))).collect();
        Atom {
            predicate: a.predicate.clone(),
            args,
        }
        .to_string()
    };
    let h: Vec<String> = head.iter().map(inst).collect();
    let mut body: Vec<String> = pos.iter().map(inst).collect();
    body.extend(neg.iter().map(|a| format!("not {}", inst(a))));
    out.push_str(&h.join(" | "));
    if !body.is_empty() {
        out.push_str(if h.is_empty() { ":- " } else { " :- " });
        out.push_str(&body.join(", "));
    }
    let _ = writeln!(out, ".");
}

fn substitute(t: &Term, sub: &BTreeMap<&str, &Term>) -> Term {
    match t {
        Term::Var(v) => sub
            .get(v.as_str())
            .map_or_else(|| t.clone(), |&s| s.clone()),
        Term::Func(f, args) => {
            Term::Func(f.clone(), args.iter().map(|a| substitute(a, sub)).collect())
        }
        Term::Arith(a, op, b) => Term::Arith(
            Box::new(substitute(a, sub)),
            *op,
            Box::new(substitute(b, sub)),
        ),
        _ => t.clone(),
    }
}

fn eval(t: &Term) -> Term {
    match t {
        Term::Arith(a, op, b) => match (eval(a), eval(b)) {
            (Term::Int(x), Term::Int(y)) => {
                let v = match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                    ArithOp::Div => x.checked_div(y),
                };
                v.map_or_else(|| t.clone(), Term::Int)
            }
            (a, b) => Term::Arith(Box::new(a), *op, Box::new(b)),
        },
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(eval).collect()),
        _ => t.clone(),
    }
}

fn holds(b: &Builtin, sub: &BTreeMap<&str, &Term>) -> bool {
    let l = eval(&substitute(&b.lhs, sub));
    let r = eval(&substitute(&b.rhs, sub));
    let ord = match (&l, &r) {
        (Term::Int(x), Term::Int(y)) => x.cmp(y),
        _ => l.to_string().cmp(&r.to_string()),
    };
    match b.op {
        CmpOp::Eq => ord.is_eq(),
        CmpOp::Ne => ord.is_ne(),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
    }
}

/// Grounds non-ground source text into the requested ground format.
pub fn ground_source(src: &[u8], format: Format) -> Result<Vec<u8>, String> {
    let p = parse_nonground(src).map_err(|e| e.to_string())?;
    let text = naive_ground(&p)?;
    match format {
        Format::GroundText => Ok(text.into_bytes()),
        Format::GroundNumeric => {
            let g = parse_text_ground(text.as_bytes()).map_err(|e| e.to_string())?;
            Ok(emit_numeric(&g))
        }
        other => Err(format!("cannot ground into {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(src: &str) -> String {
        naive_ground(&parse_nonground(src.as_bytes()).unwrap()).unwrap()
    }

    #[test]
    fn replay_simulated_clock() {
        let mut t = MockTable::new();
        t.insert("i1", RunStatus::SolvedSat, 2.0).unwrap();
        t.insert("i2", RunStatus::SolvedSat, 700.0).unwrap();
        t.insert("i3", RunStatus::Timeout, 3.0).unwrap();
        let m = MockEngine { table: t };
        let r = m.replay("e", "i1", 600.0);
        assert_eq!((r.status, r.cpu_seconds), (RunStatus::SolvedSat, 2.0));
        let r = m.replay("e", "i2", 600.0);
        assert_eq!((r.status, r.cpu_seconds), (RunStatus::Timeout, 600.0));
        let r = m.replay("e", "i3", 600.0);
        assert_eq!((r.status, r.cpu_seconds), (RunStatus::Timeout, 600.0));
        let r = m.replay("e", "nope", 600.0);
        assert_eq!(r.status, RunStatus::Error);
        assert!(r.diagnostic.unwrap().contains("nope"));
    }

    #[test]
    fn csv_table_filters_engine() {
        let text = "# limit 600\ninstance,domain,engine,status,cpu_seconds\ni1,d,a,solved-sat,1.5\ni1,d,b,timeout,600\n";
        let t = MockTable::parse_csv(text, Some("b")).unwrap();
        assert_eq!(t.get("i1"), Some((RunStatus::Timeout, 600.0)));
        assert!(MockTable::parse_csv("instance,status,cpu_seconds\ni,bogus,1\n", None).is_err());
        assert!(MockTable::parse_csv("instance,status,cpu_seconds\ni,error,-1\n", None).is_err());
    }

    #[test]
    fn grounds_over_constants() {
        let g = ground("p(1). p(2). q(X) :- p(X), not r(X).");
        assert_eq!(
            g,
            "p(1).\np(2).\nq(1) :- p(1), not r(1).\nq(2) :- p(2), not r(2).\n"
        );
    }

    #[test]
    fn evaluates_builtins_and_arithmetic() {
        let g = ground("n(1). n(2). s(X, Y) :- n(X), n(Y), X < Y. t(X+1) :- n(X), X = 2.");
        assert!(g.contains("s(1,2) :- n(1), n(2).\n"), "{g}");
        assert!(!g.contains("s(2,1)"), "{g}");
        assert!(g.contains("t(3) :- n(2).\n"), "{g}");
    }

    #[test]
    fn disjunction_constraints_and_numeric() {
        let src = b"a | b. :- a, not c.";
        assert_eq!(
            ground(std::str::from_utf8(src).unwrap()),
            "a | b.\n:- a, not c.\n"
        );
        let num = ground_source(src, Format::GroundNumeric).unwrap();
        let g = crate::ground::parse_numeric(&num).unwrap();
        assert_eq!(g.rules().len(), 2);
    }
}
