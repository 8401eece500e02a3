//! The numeric (smodels/lparse) ground format.
//!
//! ```text
//! 1 <head> <#lits> <#neg> <neg...> <pos...>                 basic
//! 2 <head> <#lits> <#neg> <bound> <neg...> <pos...>         cardinality
//! 3 <#heads> <heads...> <#lits> <#neg> <neg...> <pos...>    choice
//! 5 <head> <bound> <#lits> <#neg> <neg...> <pos...> <w...>  weight
//! 6 0 <#lits> <#neg> <neg...> <pos...> <w...>               minimize
//! 8 <#heads> <heads...> <#lits> <#neg> <neg...> <pos...>    disjunctive
//! 0
//! <id> <name>                                                symbol table
//! 0
//! B+ <ids...> 0 B- <ids...> 0 <models>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{AtomId, Compute, GroundError, GroundProgram, GroundRule, RuleKind};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), GroundError> {
        self.next().ok_or_else(|| {
            GroundError::at(
                self.last + 1,
                format!("truncated document: expected {what}"),
            )
        })
    }
}

struct Fields<'a> {
    line: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn int(&mut self, what: &str) -> Result<i64, GroundError> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| GroundError::at(self.line, format!("missing {what}")))?;
        tok.parse::<i64>()
            .map_err(|_| GroundError::at(self.line, format!("non-integer token `{tok}`")))
    }

    fn count(&mut self, what: &str) -> Result<usize, GroundError> {
        let n = self.int(what)?;
        usize::try_from(n).map_err(|_| GroundError::at(self.line, format!("negative {what}")))
    }

    fn atom(&mut self) -> Result<AtomId, GroundError> {
        let n = self.int("atom id")?;
        if n <= 0 {
            return Err(GroundError::at(
                self.line,
                format!("atom id must be positive, got {n}"),
            ));
        }
        AtomId::try_from(n)
            .map_err(|_| GroundError::at(self.line, format!("atom id {n} too large")))
    }

    fn atoms(&mut self, n: usize) -> Result<Vec<AtomId>, GroundError> {
        let mut v = Vec::new();
        for _ in 0..n {
            v.push(self.atom()?);
        }
        Ok(v)
    }

    fn ints(&mut self, n: usize, what: &str) -> Result<Vec<i64>, GroundError> {
        let mut v = Vec::new();
        for _ in 0..n {
            v.push(self.int(what)?);
        }
        Ok(v)
    }

    fn finish(mut self) -> Result<(), GroundError> {
        match self.tokens.next() {
            None => Ok(()),
            Some(t) => Err(GroundError::at(
                self.line,
                format!("unexpected trailing token `{t}`"),
            )),
        }
    }
}

type Body = (Vec<AtomId>, Vec<AtomId>, Option<i64>, usize);

/// `#lits #neg neg... pos...`
fn body(f: &mut Fields<'_>, with_bound: bool) -> Result<Body, GroundError> {
    let lits = f.count("literal count")?;
    let neg = f.count("negative literal count")?;
    if neg > lits {
        return Err(GroundError::at(
            f.line,
            "more negative literals than literals",
        ));
    }
    let bound = if with_bound {
        Some(f.int("bound")?)
    } else {
        None
    };
    let neg_body = f.atoms(neg)?;
    let pos_body = f.atoms(lits - neg)?;
    Ok((pos_body, neg_body, bound, lits))
}

fn parse_rule(line: usize, text: &str) -> Result<GroundRule, GroundError> {
    let mut f = Fields {
        line,
        tokens: text.split_whitespace(),
    };
    let code = f.int("rule type")?;
    let rule = match code {
        1 => {
            let head = f.atom()?;
            let (pos, neg, _, _) = body(&mut f, false)?;
            GroundRule::basic(head, pos, neg)
        }
        2 => {
            let head = f.atom()?;
            let (pos, neg, bound, _) = body(&mut f, true)?;
            let mut r = GroundRule::with_kind(RuleKind::Weight, vec![head], pos, neg);
            r.bound = bound;
            r
        }
        3 | 8 => {
            let n_heads = f.count("head count")?;
            let heads = f.atoms(n_heads)?;
            let (pos, neg, _, _) = body(&mut f, false)?;
            let kind = if code == 3 {
                RuleKind::Choice
            } else {
                RuleKind::Disjunctive
            };
            GroundRule::with_kind(kind, heads, pos, neg)
        }
        5 => {
            let head = f.atom()?;
            let bound = f.int("bound")?;
            let (pos, neg, _, lits) = body(&mut f, false)?;
            let weights = f.ints(lits, "weight")?;
            let mut r = GroundRule::with_kind(RuleKind::Weight, vec![head], pos, neg);
            r.bound = Some(bound);
            r.weights = Some(weights);
            r
        }
        6 => {
            let zero = f.int("minimize marker")?;
            if zero != 0 {
                return Err(GroundError::at(line, "minimize rule must start with `6 0`"));
            }
            let (pos, neg, _, lits) = body(&mut f, false)?;
            let weights = f.ints(lits, "weight")?;
            let mut r = GroundRule::with_kind(RuleKind::Minimize, Vec::new(), pos, neg);
            r.weights = Some(weights);
            r
        }
        other => {
            let mut raw = Vec::new();
            for tok in f.tokens.by_ref() {
                raw.push(
                    tok.parse::<i64>()
                        .map_err(|_| GroundError::at(line, format!("non-integer token `{tok}`")))?,
                );
            }
            let mut r = GroundRule::with_kind(RuleKind::Unknown(other), vec![], vec![], vec![]);
            r.raw = raw;
            return Ok(r);
        }
    };
    f.finish()?;
    let pos: BTreeSet<_> = rule.pos_body.iter().collect();
    if let Some(a) = rule.neg_body.iter().find(|a| pos.contains(a)) {
        return Err(GroundError::at(
            line,
            format!("atom {a} occurs in both positive and negative body"),
        ));
    }
    Ok(rule)
}

fn atom_block(lines: &mut Lines<'_>, header: &str) -> Result<Vec<AtomId>, GroundError> {
    let mut atoms = Vec::new();
    loop {
        let (n, line) = lines.expect(&format!("`0` closing the {header} block"))?;
        let mut f = Fields {
            line: n,
            tokens: line.split_whitespace(),
        };
        let v = f.int("atom id")?;
        f.finish()?;
        match v {
            0 => return Ok(atoms),
            v if v < 0 => {
                return Err(GroundError::at(
                    n,
                    format!("atom id must be positive, got {v}"),
                ))
            }
            v => atoms.push(
                AtomId::try_from(v)
                    .map_err(|_| GroundError::at(n, format!("atom id {v} too large")))?,
            ),
        }
    }
}

/// Parses a numeric-format document.
///
/// The `B+`/`B-`/model-count trailer may be omitted entirely; once `B+` is
/// present, both blocks must be closed by `0`.
pub fn parse_numeric(input: &[u8]) -> Result<GroundProgram, GroundError> {
    let text = String::from_utf8_lossy(input);
    let mut lines = Lines::new(&text);

    let mut rules = Vec::new();
    loop {
        let (n, line) = lines.expect("`0` closing the rule section")?;
        if line == "0" {
            break;
        }
        rules.push(parse_rule(n, line)?);
    }

    let mut symbols = BTreeMap::new();
    loop {
        let (n, line) = lines.expect("`0` closing the symbol table")?;
        if line == "0" {
            break;
        }
        let (id, name) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let id: i64 = id
            .parse()
            .map_err(|_| GroundError::at(n, format!("non-integer token `{id}`")))?;
        if id <= 0 {
            return Err(GroundError::at(
                n,
                format!("atom id must be positive, got {id}"),
            ));
        }
        let id = AtomId::try_from(id)
            .map_err(|_| GroundError::at(n, format!("atom id {id} too large")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(GroundError::at(n, "symbol table entry without a name"));
        }
        symbols.insert(id, name.to_string());
    }

    let mut compute = Compute::default();
    if let Some((n, line)) = lines.next() {
        if line != "B+" {
            return Err(GroundError::at(n, format!("expected `B+`, found `{line}`")));
        }
        compute.b_plus = atom_block(&mut lines, "B+")?;
        let (n, line) = lines.expect("`B-`")?;
        if line != "B-" {
            return Err(GroundError::at(n, format!("expected `B-`, found `{line}`")));
        }
        compute.b_minus = atom_block(&mut lines, "B-")?;
        if let Some((n, line)) = lines.next() {
            compute.models = line
                .parse()
                .map_err(|_| GroundError::at(n, format!("bad model count `{line}`")))?;
            if let Some((n, extra)) = lines.next() {
                return Err(GroundError::at(n, format!("unexpected content `{extra}`")));
            }
        }
    }

    let false_atom = find_false_atom(&rules, &symbols, &compute);
    if let Some(f) = false_atom {
        for r in rules.iter_mut() {
            if r.kind == RuleKind::Basic && r.head == [f] {
                r.kind = RuleKind::Constraint;
                r.head.clear();
            }
        }
    }

    GroundProgram::new(rules, symbols, false_atom, compute)
}

/// The first `B-` atom that has no name and never occurs in a rule body.
fn find_false_atom(
    rules: &[GroundRule],
    symbols: &BTreeMap<AtomId, String>,
    compute: &Compute,
) -> Option<AtomId> {
    let in_body: BTreeSet<AtomId> = rules
        .iter()
        .flat_map(|r| r.pos_body.iter().chain(&r.neg_body).copied())
        .collect();
    compute
        .b_minus
        .iter()
        .copied()
        .find(|a| !symbols.contains_key(a) && !in_body.contains(a))
}

fn push_list(out: &mut String, atoms: &[AtomId]) {
    for a in atoms {
        let _ = write!(out, " {a}");
    }
}

/// Canonical numeric serialization. Tokens are separated by single spaces and
/// every line ends with `\n`.
pub fn emit_numeric(p: &GroundProgram) -> Vec<u8> {
    let mut out = String::new();
    for r in p.rules() {
        let lits = r.body_len();
        let neg = r.neg_body.len();
        match r.kind {
            RuleKind::Basic | RuleKind::Constraint => {
                let head = if r.kind == RuleKind::Constraint {
                    p.false_atom().expect("constraints imply a false atom")
                } else {
                    r.head[0]
                };
                let _ = write!(out, "1 {head} {lits} {neg}");
            }
            RuleKind::Weight if r.weights.is_none() => {
                let _ = write!(out, "2 {} {lits} {neg} {}", r.head[0], r.bound.unwrap_or(0));
            }
            RuleKind::Weight => {
                let _ = write!(out, "5 {} {} {lits} {neg}", r.head[0], r.bound.unwrap_or(0));
            }
            RuleKind::Choice | RuleKind::Disjunctive => {
                let _ = write!(out, "{} {}", r.kind.type_code(), r.head.len());
                push_list(&mut out, &r.head);
                let _ = write!(out, " {lits} {neg}");
            }
            RuleKind::Minimize => {
                let _ = write!(out, "6 0 {lits} {neg}");
            }
            RuleKind::Unknown(code) => {
                let _ = write!(out, "{code}");
                for v in &r.raw {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
                continue;
            }
        }
        push_list(&mut out, &r.neg_body);
        push_list(&mut out, &r.pos_body);
        if let Some(w) = &r.weights {
            for v in w {
                let _ = write!(out, " {v}");
            }
        }
        out.push('\n');
    }
    out.push_str("0\n");
    for (id, name) in p.symbols() {
        let _ = writeln!(out, "{id} {name}");
    }
    out.push_str("0\nB+\n");
    for a in &p.compute().b_plus {
        let _ = writeln!(out, "{a}");
    }
    out.push_str("0\nB-\n");
    for a in &p.compute().b_minus {
        let _ = writeln!(out, "{a}");
    }
    let _ = writeln!(out, "0\n{}", p.compute().models);
    out.into_bytes()
}
