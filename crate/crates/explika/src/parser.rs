//! Text frontend for theory files and atom queries, plus the renderers
//! used everywhere output must be deterministic.
//!
//! The statement forms are:
//!
//! ```text
//! pred Heard/1(one).          # predicate, arity, parameter modes
//! pred Flu/0.                 # propositional symbol; modes default to na
//! const loud_bell, bell.      # constants
//! isa loud_bell -> bell.      # taxonomy link (constants, props or preds)
//! cause Flu => Fever.         # unit causal statement
//! fact !(A & B).              # classical background formula
//! fact (A => B) | (A => C).   # causal formula; causal atoms in parens
//! ```
//!
//! Connective precedence, loosest to tightest: `<->`, `->`, `|`, `&`, `!`;
//! `->` and `<->` associate to the right. `#` starts a comment running to
//! the end of the line. Names must be declared before use; predicates and
//! constants are told apart by their declarations, not by capitalization.

use std::fmt;

use thiserror::Error;

use crate::model::{
    CausalFormula, CausalLeaf, ClassicalFormula, ExplanationAtom, Formula, GroundAtom, ModelError,
    OntoLink, ParamMode, Symbols, Theory, TheoryBuilder,
};

/// Byte range plus 1-based line/column of the range start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}", line = span.line, column = span.column)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }
}

const KEYWORDS: [&str; 5] = ["pred", "const", "isa", "cause", "fact"];

/// Grounding is exponential in arity; anything near this bound is
/// already unusable, so reject it at parse time.
const MAX_ARITY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Dot,
    Comma,
    Slash,
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Arrow,    // ->
    FatArrow, // =>
    IffOp,    // <->
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::FatArrow => f.write_str("`=>`"),
            Tok::IffOp => f.write_str("`<->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn span_here(&self, len: usize) -> SourceSpan {
        SourceSpan {
            start: self.pos,
            end: (self.pos + len).min(self.text.len()),
            line: self.line,
            column: self.col,
        }
    }

    fn bump(&mut self, n: usize) {
        for _ in 0..n {
            if self.pos >= self.bytes.len() {
                break;
            }
            if self.bytes[self.pos] == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            self.pos += 1;
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.bytes.len() {
                let b = self.bytes[self.pos];
                if b.is_ascii_whitespace() {
                    self.bump(1);
                } else if b == b'#' {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.bump(1);
                    }
                } else {
                    break;
                }
            }
            if self.pos >= self.bytes.len() {
                out.push((Tok::Eof, self.span_here(0)));
                return Ok(out);
            }
            let b = self.bytes[self.pos];
            let span1 = self.span_here(1);
            let (tok, len) = match b {
                b'.' => (Tok::Dot, 1),
                b',' => (Tok::Comma, 1),
                b'/' => (Tok::Slash, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'!' => (Tok::Bang, 1),
                b'&' => (Tok::Amp, 1),
                b'|' => (Tok::Pipe, 1),
                b'-' => {
                    if self.bytes.get(self.pos + 1) == Some(&b'>') {
                        (Tok::Arrow, 2)
                    } else {
                        return Err(ParseError::new("expected `->`", span1));
                    }
                }
                b'=' => {
                    if self.bytes.get(self.pos + 1) == Some(&b'>') {
                        (Tok::FatArrow, 2)
                    } else {
                        return Err(ParseError::new("expected `=>`", span1));
                    }
                }
                b'<' => {
                    if self.text[self.pos..].starts_with("<->") {
                        (Tok::IffOp, 3)
                    } else {
                        return Err(ParseError::new("expected `<->`", span1));
                    }
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    let mut end = self.pos;
                    while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
                        end += 1;
                    }
                    let text = &self.text[start..end];
                    let n: usize = text.parse().map_err(|_| {
                        ParseError::new(format!("number `{text}` out of range"), span1)
                    })?;
                    (Tok::Int(n), end - start)
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    let start = self.pos;
                    let mut end = self.pos;
                    while end < self.bytes.len()
                        && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = self.text[start..end].to_string();
                    (Tok::Ident(name), end - start)
                }
                _ => {
                    let ch = self.text[self.pos..].chars().next().unwrap();
                    return Err(ParseError::new(
                        format!("unexpected character `{ch}`"),
                        span1,
                    ));
                }
            };
            let span = self.span_here(len);
            self.bump(len);
            out.push((tok, span));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<SourceSpan, ParseError> {
        if self.peek() == want {
            Ok(self.next().1)
        } else {
            Err(ParseError::new(
                format!("expected {want}, found {}", self.peek()),
                self.peek_span(),
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.next() {
            (Tok::Ident(s), sp) => Ok((s, sp)),
            (t, sp) => Err(ParseError::new(format!("expected a name, found {t}"), sp)),
        }
    }

    fn symbol_name(&mut self) -> Result<(String, SourceSpan), ParseError> {
        let (name, sp) = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                format!("`{name}` is a keyword and cannot name a symbol"),
                sp,
            ));
        }
        Ok((name, sp))
    }
}

fn model_err(e: ModelError, span: SourceSpan) -> ParseError {
    ParseError::new(e.to_string(), span)
}

/// Parses and validates a full theory file.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let mut b = TheoryBuilder::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) => {
                let kw_span = p.peek_span();
                match kw.as_str() {
                    "pred" => {
                        p.next();
                        let (name, nsp) = p.symbol_name()?;
                        p.expect(&Tok::Slash)?;
                        let (arity, asp) = match p.next() {
                            (Tok::Int(n), sp) => (n, sp),
                            (t, sp) => {
                                return Err(ParseError::new(
                                    format!("expected an arity, found {t}"),
                                    sp,
                                ))
                            }
                        };
                        if arity > MAX_ARITY {
                            return Err(ParseError::new(
                                format!("arity {arity} exceeds the maximum of {MAX_ARITY}"),
                                asp,
                            ));
                        }
                        let modes = if *p.peek() == Tok::LParen {
                            p.next();
                            let mut modes = Vec::new();
                            loop {
                                let (m, msp) = p.ident()?;
                                let mode = match m.as_str() {
                                    "one" => ParamMode::One,
                                    "all" => ParamMode::All,
                                    "na" => ParamMode::Na,
                                    other => {
                                        return Err(ParseError::new(
                                            format!(
                                                "expected mode `one`, `all` or `na`, found `{other}`"
                                            ),
                                            msp,
                                        ))
                                    }
                                };
                                modes.push(mode);
                                if *p.peek() == Tok::Comma {
                                    p.next();
                                } else {
                                    break;
                                }
                            }
                            p.expect(&Tok::RParen)?;
                            if modes.len() != arity {
                                return Err(ParseError::new(
                                    format!(
                                        "predicate `{name}` has arity {arity} but {} mode(s)",
                                        modes.len()
                                    ),
                                    asp,
                                ));
                            }
                            modes
                        } else {
                            vec![ParamMode::Na; arity]
                        };
                        p.expect(&Tok::Dot)?;
                        b.declare_pred(&name, modes).map_err(|e| model_err(e, nsp))?;
                    }
                    "const" => {
                        p.next();
                        loop {
                            let (name, nsp) = p.symbol_name()?;
                            b.declare_const(&name).map_err(|e| model_err(e, nsp))?;
                            if *p.peek() == Tok::Comma {
                                p.next();
                            } else {
                                break;
                            }
                        }
                        p.expect(&Tok::Dot)?;
                    }
                    "isa" => {
                        p.next();
                        let (left, lsp) = p.symbol_name()?;
                        p.expect(&Tok::Arrow)?;
                        let (right, _) = p.symbol_name()?;
                        p.expect(&Tok::Dot)?;
                        b.add_isa(&left, &right).map_err(|e| model_err(e, lsp))?;
                    }
                    "cause" => {
                        p.next();
                        let cause = parse_atom_inner(&mut p, &mut b)?;
                        p.expect(&Tok::FatArrow)?;
                        let effect = parse_atom_inner(&mut p, &mut b)?;
                        p.expect(&Tok::Dot)?;
                        b.add_causal_atom(cause, effect);
                    }
                    "fact" => {
                        p.next();
                        let f = parse_formula(&mut p, &mut b, 0)?;
                        p.expect(&Tok::Dot)?;
                        match strip_causal(&f) {
                            Some(classical) => b.add_classical(classical),
                            None => b.add_causal(f),
                        }
                    }
                    other => {
                        return Err(ParseError::new(
                            format!(
                                "expected `pred`, `const`, `isa`, `cause` or `fact`, found `{other}`"
                            ),
                            kw_span,
                        ))
                    }
                }
            }
            t => {
                return Err(ParseError::new(
                    format!("expected a statement, found {t}"),
                    p.peek_span(),
                ))
            }
        }
    }
    let end = SourceSpan {
        start: text.len(),
        end: text.len(),
        line: 1,
        column: 1,
    };
    b.validate().map_err(|e| model_err(e, end))
}

/// Parses a single ground atom such as `On(alarm)` or `Flu` against an
/// existing theory's declarations.
pub fn parse_atom(text: &str, theory: &Theory) -> Result<GroundAtom, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let (name, nsp) = p.symbol_name()?;
    let mut args: Vec<String> = Vec::new();
    if *p.peek() == Tok::LParen {
        p.next();
        loop {
            let (a, _) = p.symbol_name()?;
            args.push(a);
            if *p.peek() == Tok::Comma {
                p.next();
            } else {
                break;
            }
        }
        p.expect(&Tok::RParen)?;
    }
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(
            format!("trailing input after atom: {}", p.peek()),
            p.peek_span(),
        ));
    }
    let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    theory
        .resolve_atom(&name, &arg_refs)
        .map_err(|e| model_err(e, nsp))
}

fn parse_atom_inner(p: &mut Parser, b: &mut TheoryBuilder) -> Result<GroundAtom, ParseError> {
    let (name, nsp) = p.symbol_name()?;
    let mut args: Vec<String> = Vec::new();
    if *p.peek() == Tok::LParen {
        p.next();
        loop {
            let (a, _) = p.symbol_name()?;
            args.push(a);
            if *p.peek() == Tok::Comma {
                p.next();
            } else {
                break;
            }
        }
        p.expect(&Tok::RParen)?;
    }
    let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    b.intern_atom(&name, &arg_refs).map_err(|e| model_err(e, nsp))
}

// Precedence levels: 1 <->, 2 ->, 3 |, 4 &, 5 !.
fn parse_formula(
    p: &mut Parser,
    b: &mut TheoryBuilder,
    min_prec: u8,
) -> Result<CausalFormula, ParseError> {
    let mut lhs = parse_unary(p, b)?;
    loop {
        let (prec, right_assoc) = match p.peek() {
            Tok::IffOp => (1, true),
            Tok::Arrow => (2, true),
            Tok::Pipe => (3, false),
            Tok::Amp => (4, false),
            _ => break,
        };
        if prec < min_prec {
            break;
        }
        let op = p.next().0;
        let next_min = if right_assoc { prec } else { prec + 1 };
        let rhs = parse_formula(p, b, next_min)?;
        lhs = match op {
            Tok::IffOp => Formula::iff(lhs, rhs),
            Tok::Arrow => Formula::implies(lhs, rhs),
            Tok::Pipe => Formula::or(lhs, rhs),
            Tok::Amp => Formula::and(lhs, rhs),
            _ => unreachable!(),
        };
    }
    Ok(lhs)
}

fn parse_unary(p: &mut Parser, b: &mut TheoryBuilder) -> Result<CausalFormula, ParseError> {
    match p.peek() {
        Tok::Bang => {
            p.next();
            Ok(Formula::not(parse_unary(p, b)?))
        }
        Tok::LParen => {
            p.next();
            let inner = parse_formula(p, b, 0)?;
            if *p.peek() == Tok::FatArrow {
                let sp = p.peek_span();
                let Formula::Leaf(CausalLeaf::Atom(cause)) = inner else {
                    return Err(ParseError::new(
                        "left side of `=>` must be a single atom",
                        sp,
                    ));
                };
                p.next();
                let effect = parse_atom_inner(p, b)?;
                p.expect(&Tok::RParen)?;
                Ok(Formula::Leaf(CausalLeaf::Causal(crate::model::CausalAtom {
                    cause,
                    effect,
                })))
            } else {
                p.expect(&Tok::RParen)?;
                Ok(inner)
            }
        }
        Tok::Ident(_) => {
            let atom = parse_atom_inner(p, b)?;
            Ok(Formula::Leaf(CausalLeaf::Atom(atom)))
        }
        t => Err(ParseError::new(
            format!("expected a formula, found {t}"),
            p.peek_span(),
        )),
    }
}

/// Downgrades a causal formula to a classical one when it contains no
/// causal atom.
fn strip_causal(f: &CausalFormula) -> Option<ClassicalFormula> {
    match f {
        Formula::Leaf(CausalLeaf::Atom(a)) => Some(Formula::Leaf(a.clone())),
        Formula::Leaf(CausalLeaf::Causal(_)) => None,
        Formula::Not(a) => Some(Formula::not(strip_causal(a)?)),
        Formula::And(a, b) => Some(Formula::and(strip_causal(a)?, strip_causal(b)?)),
        Formula::Or(a, b) => Some(Formula::or(strip_causal(a)?, strip_causal(b)?)),
        Formula::Implies(a, b) => Some(Formula::implies(strip_causal(a)?, strip_causal(b)?)),
        Formula::Iff(a, b) => Some(Formula::iff(strip_causal(a)?, strip_causal(b)?)),
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn prec_of<L>(f: &Formula<L>) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        Formula::Leaf(_) => 6,
    }
}

fn render_rec<L>(
    f: &Formula<L>,
    min_prec: u8,
    leaf: &impl Fn(&L) -> String,
    out: &mut String,
) {
    let prec = prec_of(f);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match f {
        Formula::Leaf(l) => out.push_str(&leaf(l)),
        Formula::Not(a) => {
            out.push('!');
            render_rec(a, 5, leaf, out);
        }
        Formula::And(a, b) => {
            render_rec(a, 4, leaf, out);
            out.push_str(" & ");
            render_rec(b, 5, leaf, out);
        }
        Formula::Or(a, b) => {
            render_rec(a, 3, leaf, out);
            out.push_str(" | ");
            render_rec(b, 4, leaf, out);
        }
        Formula::Implies(a, b) => {
            render_rec(a, 3, leaf, out);
            out.push_str(" -> ");
            render_rec(b, 2, leaf, out);
        }
        Formula::Iff(a, b) => {
            render_rec(a, 2, leaf, out);
            out.push_str(" <-> ");
            render_rec(b, 1, leaf, out);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn render_classical(sym: &Symbols, f: &ClassicalFormula) -> String {
    let mut s = String::new();
    render_rec(f, 0, &|a: &GroundAtom| sym.atom_text(a), &mut s);
    s
}

pub fn render_causal(sym: &Symbols, f: &CausalFormula) -> String {
    let mut s = String::new();
    let leaf = |l: &CausalLeaf| match l {
        CausalLeaf::Atom(a) => sym.atom_text(a),
        CausalLeaf::Causal(c) => format!(
            "({} => {})",
            sym.atom_text(&c.cause),
            sym.atom_text(&c.effect)
        ),
    };
    render_rec(f, 0, &leaf, &mut s);
    s
}

/// Renders `A explains B because_possible {P1, ..., Pn}` with the proviso
/// atoms in lexicographic order of their rendered text.
pub fn render_explanation(sym: &Symbols, atom: &ExplanationAtom) -> String {
    let mut proviso: Vec<String> = atom.proviso.iter().map(|a| sym.atom_text(a)).collect();
    proviso.sort();
    format!(
        "{} explains {} because_possible {{{}}}",
        sym.atom_text(&atom.explanans),
        sym.atom_text(&atom.explanandum),
        proviso.join(", ")
    )
}

/// Canonical text form of a theory: declarations first, then taxonomy
/// links, unit causal statements and facts, each group sorted. Parsing
/// the result reproduces the theory, and rendering is a fixpoint.
pub fn render_theory(t: &Theory) -> String {
    let sym = t.symbols();
    let mut out = String::new();

    let mut pred_lines: Vec<String> = sym
        .preds()
        .map(|(_, d)| {
            if d.modes.iter().all(|m| *m == ParamMode::Na) {
                format!("pred {}/{}.", d.name, d.arity())
            } else {
                let modes: Vec<String> = d.modes.iter().map(|m| m.to_string()).collect();
                format!("pred {}/{}({}).", d.name, d.arity(), modes.join(", "))
            }
        })
        .collect();
    pred_lines.sort();
    for l in pred_lines {
        out.push_str(&l);
        out.push('\n');
    }

    let mut const_names: Vec<&str> = sym.consts().map(|(_, n)| n).collect();
    const_names.sort();
    if !const_names.is_empty() {
        out.push_str(&format!("const {}.\n", const_names.join(", ")));
    }

    let mut isa_lines: Vec<String> = t
        .links()
        .iter()
        .map(|link| match *link {
            OntoLink::Const(l, r) => {
                format!("isa {} -> {}.", sym.const_name(l), sym.const_name(r))
            }
            OntoLink::Prop(l, r) | OntoLink::Pred(l, r) => {
                format!("isa {} -> {}.", sym.pred(l).name, sym.pred(r).name)
            }
        })
        .collect();
    isa_lines.sort();
    isa_lines.dedup();
    for l in isa_lines {
        out.push_str(&l);
        out.push('\n');
    }

    let mut cause_lines = Vec::new();
    let mut causal_fact_lines = Vec::new();
    for f in t.causal() {
        match f.as_unit_causal() {
            Some(c) => cause_lines.push(format!(
                "cause {} => {}.",
                sym.atom_text(&c.cause),
                sym.atom_text(&c.effect)
            )),
            None => causal_fact_lines.push(format!("fact {}.", render_causal(sym, f))),
        }
    }
    cause_lines.sort();
    cause_lines.dedup();
    for l in cause_lines {
        out.push_str(&l);
        out.push('\n');
    }

    let mut fact_lines: Vec<String> = t
        .classical()
        .iter()
        .map(|f| format!("fact {}.", render_classical(sym, f)))
        .collect();
    fact_lines.sort();
    fact_lines.dedup();
    causal_fact_lines.sort();
    causal_fact_lines.dedup();
    for l in fact_lines.into_iter().chain(causal_fact_lines) {
        out.push_str(&l);
        out.push('\n');
    }

    out
}
