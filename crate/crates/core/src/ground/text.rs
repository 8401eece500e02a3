//! Textual ground dialect: `h1 | h2 :- b1, not b2.`, facts `a.`, constraints
//! `:- body.`, `%` comments. DLV's `v` head separator is accepted too.

use std::collections::BTreeMap;

use super::{AtomId, Compute, GroundError, GroundProgram, GroundRule, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Atom(String),
    Not,
    If,
    Bar,
    Comma,
    Dot,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> GroundError {
        GroundError::Parse {
            line,
            col: Some(col),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    /// Next token with its starting line and column.
    fn next(&mut self) -> Result<Option<(Tok, usize, usize)>, GroundError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            b'.' => {
                self.bump();
                Tok::Dot
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'|' => {
                self.bump();
                Tok::Bar
            }
            b':' => {
                self.bump();
                if self.peek() != Some(b'-') {
                    return Err(self.err(line, col, "expected `:-`"));
                }
                self.bump();
                Tok::If
            }
            c if c == b'-' || c == b'"' || c.is_ascii_alphanumeric() || c == b'_' => {
                let name = self.atom(line, col)?;
                match name.as_str() {
                    "not" => Tok::Not,
                    _ => Tok::Atom(name),
                }
            }
            other => {
                return Err(self.err(
                    line,
                    col,
                    format!("unexpected character `{}`", other as char),
                ))
            }
        };
        Ok(Some((tok, line, col)))
    }

    /// An atom: optional `-`, identifier, optional parenthesized argument
    /// list (nested parentheses and quoted strings allowed). Whitespace
    /// outside quotes is dropped from the name.
    fn atom(&mut self, line: usize, col: usize) -> Result<String, GroundError> {
        let mut name = String::new();
        if self.peek() == Some(b'-') {
            name.push('-');
            self.bump();
        }
        let start = name.len();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                name.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        if name.len() == start {
            return Err(self.err(line, col, "expected an atom"));
        }
        let mut depth = 0usize;
        loop {
            self.skip_inline_space(depth);
            match self.peek() {
                Some(b'(') => {
                    depth += 1;
                    name.push('(');
                    self.bump();
                }
                Some(b')') if depth > 0 => {
                    depth -= 1;
                    name.push(')');
                    self.bump();
                    if depth == 0 {
                        break;
                    }
                }
                Some(b'"') if depth > 0 => {
                    name.push('"');
                    self.bump();
                    loop {
                        match self.bump() {
                            Some(b'"') => break,
                            Some(b'\\') => {
                                name.push('\\');
                                if let Some(c) = self.bump() {
                                    name.push(c as char);
                                }
                            }
                            Some(c) => name.push(c as char),
                            None => return Err(self.err(line, col, "unterminated string")),
                        }
                    }
                    name.push('"');
                }
                Some(c) if depth > 0 && (c.is_ascii_alphanumeric() || b"_,-+*/'".contains(&c)) => {
                    name.push(c as char);
                    self.bump();
                }
                Some(c) if depth > 0 => {
                    return Err(self.err(
                        self.line,
                        self.col,
                        format!("unexpected `{}` in atom", c as char),
                    ))
                }
                None if depth > 0 => return Err(self.err(line, col, "unbalanced parentheses")),
                _ => break,
            }
        }
        Ok(name)
    }

    fn skip_inline_space(&mut self, depth: usize) {
        if depth == 0 {
            return;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }
}

struct Interner {
    ids: BTreeMap<String, AtomId>,
    next: AtomId,
}

impl Interner {
    fn id(&mut self, name: String) -> AtomId {
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        self.next += 1;
        self.ids.insert(name, self.next);
        self.next
    }
}

/// Parses the textual ground dialect. Atom names are interned to ids
/// `1, 2, ...` in order of first occurrence.
pub fn parse_text_ground(input: &[u8]) -> Result<GroundProgram, GroundError> {
    #[derive(PartialEq)]
    enum State {
        Start,
        HeadAtom,
        HeadSep,
        BodyStart,
        BodyNot,
        BodyLit,
    }

    let mut lx = Lexer {
        src: input,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut atoms = Interner {
        ids: BTreeMap::new(),
        next: 0,
    };
    let mut rules = Vec::new();
    let mut head: Vec<AtomId> = Vec::new();
    let mut pos: Vec<AtomId> = Vec::new();
    let mut neg: Vec<AtomId> = Vec::new();
    let mut state = State::Start;
    let mut stmt_start = (1, 1);

    while let Some((tok, line, col)) = lx.next()? {
        if state == State::Start {
            stmt_start = (line, col);
        }
        state = match (state, tok) {
            (State::Start | State::HeadSep, Tok::Atom(a)) => {
                head.push(atoms.id(a));
                State::HeadAtom
            }
            (State::HeadAtom, Tok::Bar) => State::HeadSep,
            // DLV prints disjunction as `a v b`
            (State::HeadAtom, Tok::Atom(v)) if v == "v" => State::HeadSep,
            (State::Start | State::HeadAtom, Tok::If) => State::BodyStart,
            (s @ (State::BodyStart | State::BodyNot), Tok::Atom(a)) => {
                let id = atoms.id(a);
                let (same, other) = if s == State::BodyNot {
                    (&mut neg, &pos)
                } else {
                    (&mut pos, &neg)
                };
                if other.contains(&id) {
                    return Err(lx.err(line, col, "atom occurs both positively and negatively"));
                }
                if !same.contains(&id) {
                    same.push(id);
                }
                State::BodyLit
            }
            (State::BodyStart, Tok::Not) => State::BodyNot,
            (State::BodyLit, Tok::Comma) => State::BodyStart,
            (State::HeadAtom | State::BodyLit, Tok::Dot) => {
                finish(&mut rules, &mut head, &mut pos, &mut neg);
                State::Start
            }
            // `:- .` is the empty constraint
            (State::BodyStart, Tok::Dot) if pos.is_empty() && neg.is_empty() => {
                finish(&mut rules, &mut head, &mut pos, &mut neg);
                State::Start
            }
            (_, tok) => {
                return Err(lx.err(line, col, format!("unexpected {}", describe(&tok))));
            }
        };
    }
    if state != State::Start {
        return Err(lx.err(
            stmt_start.0,
            stmt_start.1,
            "unterminated rule (missing `.`)",
        ));
    }

    let symbols = atoms.ids.into_iter().map(|(name, id)| (id, name)).collect();
    GroundProgram::new(rules, symbols, None, Compute::default())
}

fn finish(
    rules: &mut Vec<GroundRule>,
    head: &mut Vec<AtomId>,
    pos: &mut Vec<AtomId>,
    neg: &mut Vec<AtomId>,
) {
    let pos = std::mem::take(pos);
    let neg = std::mem::take(neg);
    let rule = match head.len() {
        0 => GroundRule::constraint(pos, neg),
        1 => GroundRule::basic(head[0], pos, neg),
        _ => GroundRule::disjunctive(head.clone(), pos, neg),
    };
    head.clear();
    rules.push(rule);
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Atom(a) => format!("atom `{a}`"),
        Tok::Not => "`not`".into(),
        Tok::If => "`:-`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
    }
}

fn atom_name(p: &GroundProgram, a: AtomId) -> String {
    p.name_of(a)
        .map(str::to_string)
        .unwrap_or_else(|| format!("atom__{a}"))
}

/// Prints a ground program in the textual dialect. Unnamed atoms are printed
/// as `atom__<id>`. Choice, weight, minimize and unknown rules have no
/// textual form.
pub fn emit_text_ground(p: &GroundProgram) -> Result<Vec<u8>, GroundError> {
    let mut out = String::new();
    for (i, r) in p.rules().iter().enumerate() {
        match r.kind {
            RuleKind::Basic | RuleKind::Constraint | RuleKind::Disjunctive => {}
            other => {
                return Err(GroundError::Unsupported(format!(
                    "rule {} is a {other:?} rule",
                    i + 1
                )))
            }
        }
        let head: Vec<String> = r.head.iter().map(|&a| atom_name(p, a)).collect();
        out.push_str(&head.join(" | "));
        if r.body_len() > 0 {
            if !head.is_empty() {
                out.push(' ');
            }
            out.push_str(":- ");
            let lits: Vec<String> = r
                .pos_body
                .iter()
                .map(|&a| atom_name(p, a))
                .chain(
                    r.neg_body
                        .iter()
                        .map(|&a| format!("not {}", atom_name(p, a))),
                )
                .collect();
            out.push_str(&lits.join(", "));
        } else if head.is_empty() {
            out.push_str(":- ");
        }
        out.push_str(".\n");
    }
    Ok(out.into_bytes())
}
