//! Recursive-descent parser for the supported ASP-Core-1 subset:
//!
//! ```text
//! program  = (rule | query)*
//! rule     = [head] [":-" body] "."
//! head     = atom (("|" | "v") atom)*
//! body     = literal ("," literal)*
//! literal  = ["not"] atom | term cmp term
//! atom     = ["-"] name ["(" terms ")"]
//! term     = variable | name | integer | string | name "(" terms ")" | term op term
//! query    = atom "?"
//! ```

use thiserror::Error;

use super::{ArithOp, Atom, Builtin, CmpOp, NonGroundProgram, NonGroundRule, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Bar,
    Query,
    Cmp(CmpOp),
    Op(ArithOp),
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                adv(1, &mut i, &mut col);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let tok = match (c, two.as_str()) {
            (_, ":-") => {
                adv(2, &mut i, &mut col);
                Tok::If
            }
            (_, ":~") => return Err(err(l0, c0, "weak constraints are not supported".into())),
            (_, "!=") | (_, "<>") => {
                adv(2, &mut i, &mut col);
                Tok::Cmp(CmpOp::Ne)
            }
            (_, "==") => {
                adv(2, &mut i, &mut col);
                Tok::Cmp(CmpOp::Eq)
            }
            (_, "<=") => {
                adv(2, &mut i, &mut col);
                Tok::Cmp(CmpOp::Le)
            }
            (_, ">=") => {
                adv(2, &mut i, &mut col);
                Tok::Cmp(CmpOp::Ge)
            }
            ('=', _) | ('<', _) | ('>', _) => {
                adv(1, &mut i, &mut col);
                Tok::Cmp(match c {
                    '=' => CmpOp::Eq,
                    '<' => CmpOp::Lt,
                    _ => CmpOp::Gt,
                })
            }
            ('(', _) | (')', _) | (',', _) | ('.', _) | ('|', _) | ('?', _) => {
                adv(1, &mut i, &mut col);
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '|' => Tok::Bar,
                    _ => Tok::Query,
                }
            }
            ('+', _) | ('-', _) | ('*', _) | ('/', _) => {
                adv(1, &mut i, &mut col);
                Tok::Op(match c {
                    '+' => ArithOp::Add,
                    '-' => ArithOp::Sub,
                    '*' => ArithOp::Mul,
                    _ => ArithOp::Div,
                })
            }
            ('"', _) => {
                let mut s = String::new();
                adv(1, &mut i, &mut col);
                loop {
                    match chars.get(i) {
                        None | Some('\n') => return Err(err(l0, c0, "unterminated string".into())),
                        Some('"') => {
                            adv(1, &mut i, &mut col);
                            break;
                        }
                        Some('\\') if i + 1 < chars.len() => {
                            s.push('\\');
                            s.push(chars[i + 1]);
                            adv(2, &mut i, &mut col);
                        }
                        Some(&ch) => {
                            s.push(ch);
                            adv(1, &mut i, &mut col);
                        }
                    }
                }
                Tok::Str(s)
            }
            (c, _) if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    adv(1, &mut i, &mut col);
                }
                let text: String = chars[start..i].iter().collect();
                Tok::Int(
                    text.parse()
                        .map_err(|_| err(l0, c0, format!("integer `{text}` out of range")))?,
                )
            }
            (c, _) if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    adv(1, &mut i, &mut col);
                }
                let text: String = chars[start..i].iter().collect();
                if c.is_uppercase() || c == '_' {
                    Tok::Var(text)
                } else {
                    Tok::Ident(text)
                }
            }
            ('#', _) => {
                return Err(err(
                    l0,
                    c0,
                    "directives and aggregates (`#...`) are not supported".into(),
                ))
            }
            (other, _) => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned {
            tok,
            line: l0,
            col: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

enum Literal {
    Pos(Atom),
    Neg(Atom),
    Builtin(Builtin),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Eof => "end of input".into(),
            t => format!("{t:?}"),
        };
        self.error(format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn program(&mut self) -> Result<Vec<NonGroundRule>, ParseError> {
        let mut rules = Vec::new();
        while *self.peek() != Tok::Eof {
            rules.push(self.statement()?);
        }
        Ok(rules)
    }

    fn statement(&mut self) -> Result<NonGroundRule, ParseError> {
        let mut rule = NonGroundRule {
            head: Vec::new(),
            pos_body: Vec::new(),
            neg_body: Vec::new(),
            builtins: Vec::new(),
            is_query: false,
        };
        if *self.peek() != Tok::If {
            rule.head.push(self.atom()?);
            loop {
                match self.peek() {
                    Tok::Bar => {
                        self.bump();
                    }
                    Tok::Ident(v) if v == "v" && self.starts_atom_at(1) => {
                        self.bump();
                    }
                    _ => break,
                }
                rule.head.push(self.atom()?);
            }
            if *self.peek() == Tok::Query {
                if rule.head.len() != 1 {
                    return Err(self.error("a query must be a single atom"));
                }
                self.bump();
                rule.is_query = true;
                rule.pos_body = std::mem::take(&mut rule.head);
                return Ok(rule);
            }
        }
        if *self.peek() == Tok::If {
            self.bump();
            loop {
                match self.literal()? {
                    Literal::Pos(a) => rule.pos_body.push(a),
                    Literal::Neg(a) => rule.neg_body.push(a),
                    Literal::Builtin(b) => rule.builtins.push(b),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(rule)
    }

    fn starts_atom_at(&self, n: usize) -> bool {
        match self.peek_at(n) {
            Tok::Ident(_) => true,
            Tok::Op(ArithOp::Sub) => matches!(self.peek_at(n + 1), Tok::Ident(_)),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let mut name = String::new();
        if *self.peek() == Tok::Op(ArithOp::Sub) {
            self.bump();
            name.push('-');
        }
        match self.peek().clone() {
            Tok::Ident(n) if n != "not" => {
                self.bump();
                name.push_str(&n);
            }
            _ => return Err(self.unexpected("an atom")),
        }
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            self.terms()?
        } else {
            Vec::new()
        };
        Ok(Atom {
            predicate: name,
            args,
        })
    }

    /// Terms up to and including the closing parenthesis.
    fn terms(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            terms.push(self.term()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(terms)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if *self.peek() == Tok::Ident("not".into()) {
            self.bump();
            return Ok(Literal::Neg(self.atom()?));
        }
        if *self.peek() == Tok::Op(ArithOp::Sub) && matches!(self.peek_at(1), Tok::Ident(_)) {
            return Ok(Literal::Pos(self.atom()?));
        }
        let start = self.pos;
        let lhs = self.term()?;
        if let Tok::Cmp(op) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            return Ok(Literal::Builtin(Builtin { lhs, op, rhs }));
        }
        match lhs {
            Term::Const(name) => Ok(Literal::Pos(Atom {
                predicate: name,
                args: Vec::new(),
            })),
            Term::Func(name, args) => Ok(Literal::Pos(Atom {
                predicate: name,
                args,
            })),
            _ => {
                self.pos = start;
                Err(self.unexpected("an atom or comparison"))
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.product()?;
        while let Tok::Op(op @ (ArithOp::Add | ArithOp::Sub)) = *self.peek() {
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Arith(Box::new(lhs), op, Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.simple_term()?;
        while let Tok::Op(op @ (ArithOp::Mul | ArithOp::Div)) = *self.peek() {
            self.bump();
            let rhs = self.simple_term()?;
            lhs = Term::Arith(Box::new(lhs), op, Box::new(rhs));
        }
        Ok(lhs)
    }

    fn simple_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Str(s))
            }
            Tok::Op(ArithOp::Sub) if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Int(i) => Ok(Term::Int(-i)),
                    _ => unreachable!(),
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(n) if n != "not" => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    Ok(Term::Func(n, self.terms()?))
                } else {
                    Ok(Term::Const(n))
                }
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

/// Parses a non-ground program. Predicates used with several arities are
/// reported in [`NonGroundProgram::warnings`], not as errors.
pub fn parse_nonground(input: &[u8]) -> Result<NonGroundProgram, ParseError> {
    let text = std::str::from_utf8(input).map_err(|e| ParseError {
        line: 1 + input[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        col: 1,
        msg: "input is not valid UTF-8".into(),
    })?;
    let toks = lex(text)?;
    let rules = Parser { toks, pos: 0 }.program()?;
    Ok(NonGroundProgram::from_rules(rules))
}
