//! Text form of programs.
//!
//! ```text
//! program   := (statement '.')*
//! statement := fact | rule | paramrule
//! fact      := annlit '<-'
//! rule      := annlit '<-' annlit (',' annlit)*
//! annlit    := ['~'] IDENT ':' '[' NUM ',' NUM ']'
//! paramrule := 'param' IDENT '(' INT ')' ':' ['~'] IDENT '<-' cand (',' cand)*
//! cand      := '?' ['~'] IDENT ['=' ('1' | '-1')]
//! ```
//!
//! `NUM` is a decimal (`0.25`, `-1`) or a fraction (`1/3`); values are read in
//! the program's lattice mode and must land on the grid. A candidate without
//! `=` has weight `1`. `//` starts a comment running to the end of the line.

use std::fmt::Write as _;

use crate::error::{ParseError, ProgramError};
use crate::lattice::{Interval, LatticeConfig};
use crate::program::{
    AnnotationExpr, BodyCondition, Diagnostic, DiagnosticKind, Gate, Literal, Program, Rule, RuleKind,
    SymbolTable, INCON,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralRef {
    pub name: String,
    pub negated: bool,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Number {
    pub text: String,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedLiteral {
    pub literal: LiteralRef,
    pub lower: Number,
    pub upper: Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub literal: LiteralRef,
    pub gate: Gate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    /// A fact when `body` is empty.
    Rule {
        head: AnnotatedLiteral,
        body: Vec<AnnotatedLiteral>,
    },
    Param {
        label: String,
        index: u32,
        head: LiteralRef,
        candidates: Vec<Candidate>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located {
    pub pos: Position,
    pub statement: Statement,
}

/// Parsed but not yet checked program text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub statements: Vec<Located>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Param,
    Tilde,
    Colon,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Arrow,
    Dot,
    Question,
    Equals,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Param => "`param`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Question => "`?`".into(),
            Tok::Equals => "`=`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') {
                    out.push((Tok::Arrow, pos));
                    advance(2, &mut i, &mut col);
                } else {
                    return Err(err(line, col, "expected `<-`".into()));
                }
            }
            '~' | ':' | '[' | ']' | '(' | ')' | ',' | '.' | '?' | '=' => {
                let tok = match c {
                    '~' => Tok::Tilde,
                    ':' => Tok::Colon,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '?' => Tok::Question,
                    _ => Tok::Equals,
                };
                out.push((tok, pos));
                advance(1, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i + 1;
                let digits = |j: &mut usize| {
                    while *j < chars.len() && chars[*j].is_ascii_digit() {
                        *j += 1;
                    }
                };
                digits(&mut j);
                // a '.' is part of the number only when a digit follows it
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    j += 1;
                    digits(&mut j);
                } else if chars.get(j) == Some(&'/') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    j += 1;
                    digits(&mut j);
                }
                let s: String = chars[start..j].iter().collect();
                out.push((Tok::Num(s), pos));
                advance(j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                out.push((if s == "param" { Tok::Param } else { Tok::Ident(s) }, pos));
                advance(j - start, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    end: Position,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Position {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn error(&self, expected: &str) -> ParseError {
        let pos = self.pos();
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".into(),
        };
        ParseError {
            line: pos.line,
            column: pos.column,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn number(&mut self) -> Result<Number, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Num(s)) => {
                let text = s.clone();
                self.at += 1;
                Ok(Number { text, pos })
            }
            _ => Err(self.error("a number")),
        }
    }

    fn literal(&mut self) -> Result<LiteralRef, ParseError> {
        let pos = self.pos();
        let negated = self.eat(&Tok::Tilde);
        let name = self.ident()?;
        Ok(LiteralRef { name, negated, pos })
    }

    fn annotated(&mut self) -> Result<AnnotatedLiteral, ParseError> {
        let literal = self.literal()?;
        self.expect(Tok::Colon)?;
        self.expect(Tok::LBracket)?;
        let lower = self.number()?;
        self.expect(Tok::Comma)?;
        let upper = self.number()?;
        self.expect(Tok::RBracket)?;
        Ok(AnnotatedLiteral { literal, lower, upper })
    }

    fn candidate(&mut self) -> Result<Candidate, ParseError> {
        self.expect(Tok::Question)?;
        let literal = self.literal()?;
        let gate = if self.eat(&Tok::Equals) {
            let n = self.number()?;
            match n.text.as_str() {
                "1" => Gate::On,
                "-1" => Gate::Off,
                _ => {
                    return Err(ParseError {
                        line: n.pos.line,
                        column: n.pos.column,
                        message: format!("weight must be 1 or -1, found `{}`", n.text),
                    })
                }
            }
        } else {
            Gate::On
        };
        Ok(Candidate { literal, gate })
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if self.eat(&Tok::Param) {
            let label = self.ident()?;
            self.expect(Tok::LParen)?;
            let n = self.number()?;
            let index = n.text.parse::<u32>().map_err(|_| ParseError {
                line: n.pos.line,
                column: n.pos.column,
                message: format!("rule index must be a non-negative integer, found `{}`", n.text),
            })?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Colon)?;
            let head = self.literal()?;
            self.expect(Tok::Arrow)?;
            let mut candidates = vec![self.candidate()?];
            while self.eat(&Tok::Comma) {
                candidates.push(self.candidate()?);
            }
            return Ok(Statement::Param {
                label,
                index,
                head,
                candidates,
            });
        }
        let head = self.annotated()?;
        self.expect(Tok::Arrow)?;
        let mut body = Vec::new();
        if self.peek() != Some(&Tok::Dot) {
            body.push(self.annotated()?);
            while self.eat(&Tok::Comma) {
                body.push(self.annotated()?);
            }
        }
        Ok(Statement::Rule { head, body })
    }
}

/// Parse program text without checking it against a lattice.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    let lines = text.split('\n').count();
    let last_len = text.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0);
    let mut p = Parser {
        toks,
        at: 0,
        end: Position {
            line: lines,
            column: last_len + 1,
        },
    };
    let mut doc = Document::default();
    while p.peek().is_some() {
        let pos = p.pos();
        let statement = p.statement()?;
        p.expect(Tok::Dot)?;
        doc.statements.push(Located { pos, statement });
    }
    Ok(doc)
}

/// Parse `lit:[l,u]` against an existing program's symbols and lattice.
pub fn parse_query(text: &str, program: &Program) -> Result<(Literal, Interval), ProgramError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: Position {
            line: 1,
            column: text.chars().count() + 1,
        },
    };
    let ann = p.annotated()?;
    if p.peek().is_some() {
        return Err(p.error("end of query").into());
    }
    let name = if ann.literal.negated {
        format!("~{}", ann.literal.name)
    } else {
        ann.literal.name.clone()
    };
    let lit = match program.symbols().literal(&name) {
        Some(l) => l,
        None => return Err(ProgramError::UnknownLiteral(name)),
    };
    let cfg = program.config();
    let lower = cfg.parse_value(&ann.lower.text)?;
    let upper = cfg.parse_value(&ann.upper.text)?;
    Ok((lit, cfg.interval(lower, upper)?))
}

/// Every diagnostic for `doc` read on lattice `cfg`.
pub fn validate(doc: &Document, cfg: LatticeConfig) -> Vec<Diagnostic> {
    build(doc, cfg).err().unwrap_or_default()
}

fn build(doc: &Document, cfg: LatticeConfig) -> Result<Program, Vec<Diagnostic>> {
    let mut program = Program::new(cfg);
    let mut diags = Vec::new();
    for (pos, located) in doc.statements.iter().enumerate() {
        let line = Some(located.pos.line);
        let mut local = Vec::new();
        let interval = |n_lo: &Number, n_hi: &Number, local: &mut Vec<DiagnosticKind>| {
            let lo = cfg.parse_value(&n_lo.text);
            let hi = cfg.parse_value(&n_hi.text);
            match (lo, hi) {
                (Ok(l), Ok(u)) => match cfg.interval(l, u) {
                    Ok(mu) => Some(mu),
                    Err(_) => {
                        local.push(DiagnosticKind::NotAnElement(format!("[{},{}]", n_lo.text, n_hi.text)));
                        None
                    }
                },
                (lo, hi) => {
                    for (r, n) in [(lo, n_lo), (hi, n_hi)] {
                        if r.is_err() {
                            local.push(DiagnosticKind::OffGrid(n.text.clone()));
                        }
                    }
                    None
                }
            }
        };
        let mut lit = |l: &LiteralRef| {
            let atom = program.atom(&l.name);
            if l.negated {
                Literal::neg(atom)
            } else {
                Literal::pos(atom)
            }
        };
        let rule = match &located.statement {
            Statement::Rule { head, body } => {
                let h = lit(&head.literal);
                let mu = interval(&head.lower, &head.upper, &mut local);
                let mut conds = Vec::new();
                for b in body {
                    let l = lit(&b.literal);
                    if let Some(m) = interval(&b.lower, &b.upper, &mut local) {
                        conds.push((l, m));
                    }
                }
                mu.filter(|_| conds.len() == body.len())
                    .map(|mu| Rule::classical(h, mu, conds))
            }
            Statement::Param {
                label,
                index,
                head,
                candidates,
            } => {
                let h = lit(head);
                let lits: Vec<_> = candidates.iter().map(|c| lit(&c.literal)).collect();
                let theta = candidates.iter().map(|c| c.gate).collect();
                Some(Rule::parametrized(label.clone(), *index, h, lits, theta))
            }
        };
        diags.extend(local.into_iter().map(|kind| Diagnostic { rule: pos, line, kind }));
        if let Some(rule) = rule {
            let found = crate::program::validate_rule(&program, &rule, pos);
            if found.is_empty() {
                program.add_rule(rule).expect("validated rule");
            } else {
                diags.extend(found.into_iter().map(|d| Diagnostic { line, ..d }));
            }
        }
    }
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}

/// Parse and validate program text.
pub fn parse_program(text: &str, cfg: LatticeConfig) -> Result<Program, ProgramError> {
    let doc = parse_document(text)?;
    build(&doc, cfg).map_err(ProgramError::Invalid)
}

/// DSL text for `program`.
///
/// Generated `incon` detectors have no surface syntax and are written as a
/// trailing comment.
pub fn serialize(program: &Program) -> String {
    let cfg = program.config();
    let symbols = program.symbols();
    let mut out = format!("// annolog program ({cfg})\n");
    let mut detectors = 0usize;
    for rule in program.rules() {
        match (&rule.kind, &rule.head_anno) {
            (_, AnnotationExpr::SignSum) => detectors += 1,
            (RuleKind::Parametrized { label, index, theta }, _) => {
                let _ = write!(out, "param {label}({index}) : {} <- ", symbols.literal_name(rule.head));
                let cands: Vec<String> = rule
                    .body
                    .iter()
                    .zip(theta)
                    .map(|(b, g)| match g {
                        Gate::On => format!("?{}", symbols.literal_name(b.literal)),
                        Gate::Off => format!("?{}=-1", symbols.literal_name(b.literal)),
                    })
                    .collect();
                let _ = writeln!(out, "{}.", cands.join(", "));
            }
            (RuleKind::Classical, AnnotationExpr::Const(mu)) => {
                let _ = write!(out, "{} : {mu} <-", symbols.literal_name(rule.head));
                let body: Vec<String> = rule
                    .body
                    .iter()
                    .map(|b| match b.condition {
                        BodyCondition::Annotated(m) => format!("{} : {m}", symbols.literal_name(b.literal)),
                        BodyCondition::Binding => symbols.literal_name(b.literal),
                    })
                    .collect();
                if body.is_empty() {
                    out.push_str(" .\n");
                } else {
                    let _ = writeln!(out, " {}.", body.join(", "));
                }
            }
            (RuleKind::Classical, AnnotationExpr::BinAnd) => unreachable!("rejected by validation"),
        }
    }
    if detectors > 0 {
        let _ = writeln!(out, "// + {detectors} generated {INCON} detectors");
    }
    out
}

/// Name lookup helper shared with the CLI and trainer.
pub fn resolve_literal(symbols: &SymbolTable, text: &str) -> Option<Literal> {
    symbols.literal(text)
}
