//! Concrete syntax for terms, types and memories, and the matching printers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::machine::{Memory, Stack};
use crate::syntax::{name, ConstSym, Loc, Term};
use crate::types::{MemoryType, SimpleType, TypeVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    pub expected: Vec<String>,
}

fn expected_suffix(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", e.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tk {
    Dot,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    LParen,
    RParen,
    Colon,
    Assign,
    Star,
    Semi,
    Eq,
    Pipe,
    Plus,
    OPlus,
    Comma,
    Backslash,
    Bang,
    Lambda,
    Eps,
    Ident(String),
    Int(i64),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub kind: Tk,
    pub span: SourceSpan,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let span_at = |start: usize, end: usize, line: usize, col: usize| SourceSpan { start, end, line, col };
    while i < chars.len() {
        let (off, c) = chars[i];
        let (l0, c0) = (line, col);
        let byte_end = |j: usize| if j < chars.len() { chars[j].0 } else { src.len() };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '.' => Some(Tk::Dot),
            '[' => Some(Tk::LBrack),
            ']' => Some(Tk::RBrack),
            '<' => Some(Tk::LAngle),
            '>' => Some(Tk::RAngle),
            ')' => Some(Tk::RParen),
            '*' => Some(Tk::Star),
            ';' => Some(Tk::Semi),
            '=' => Some(Tk::Eq),
            '|' => Some(Tk::Pipe),
            '+' => Some(Tk::Plus),
            ',' => Some(Tk::Comma),
            '\\' => Some(Tk::Backslash),
            '!' => Some(Tk::Bang),
            'λ' => Some(Tk::Lambda),
            'ε' => Some(Tk::Eps),
            _ => None,
        };
        if let Some(k) = single {
            out.push(Token { kind: k, span: span_at(off, byte_end(i + 1), l0, c0) });
            i += 1;
            col += 1;
            continue;
        }
        if c == ':' {
            if i + 1 < chars.len() && chars[i + 1].1 == '=' {
                out.push(Token { kind: Tk::Assign, span: span_at(off, byte_end(i + 2), l0, c0) });
                i += 2;
                col += 2;
            } else {
                out.push(Token { kind: Tk::Colon, span: span_at(off, byte_end(i + 1), l0, c0) });
                i += 1;
                col += 1;
            }
            continue;
        }
        if c == '(' {
            if i + 2 < chars.len() && chars[i + 1].1 == '+' && chars[i + 2].1 == ')' {
                out.push(Token { kind: Tk::OPlus, span: span_at(off, byte_end(i + 3), l0, c0) });
                i += 3;
                col += 3;
            } else {
                out.push(Token { kind: Tk::LParen, span: span_at(off, byte_end(i + 1), l0, c0) });
                i += 1;
                col += 1;
            }
            continue;
        }
        let neg = c == '-' && i + 1 < chars.len() && chars[i + 1].1.is_ascii_digit();
        if c.is_ascii_digit() || neg {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let text = &src[off..byte_end(j)];
            let n: i64 = text.parse().map_err(|_| ParseError {
                message: format!("integer literal `{text}` out of range"),
                span: span_at(off, byte_end(j), l0, c0),
                expected: vec![],
            })?;
            out.push(Token { kind: Tk::Int(n), span: span_at(off, byte_end(j), l0, c0) });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_' || chars[j].1 == '\'') {
                j += 1;
            }
            let text = src[off..byte_end(j)].to_string();
            out.push(Token { kind: Tk::Ident(text), span: span_at(off, byte_end(j), l0, c0) });
            col += j - i;
            i = j;
            continue;
        }
        return Err(ParseError {
            message: format!("unexpected character `{c}`"),
            span: span_at(off, byte_end(i + 1), l0, c0),
            expected: vec![],
        });
    }
    let (line_e, col_e) = (line, col);
    out.push(Token { kind: Tk::Eof, span: SourceSpan { start: src.len(), end: src.len(), line: line_e, col: col_e } });
    Ok(out)
}

const RESERVED: &[&str] = &["mul", "if", "true", "false"];

pub(crate) struct Cursor {
    pub toks: Vec<Token>,
    pub pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Cursor {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tk {
        &self.toks[self.pos].kind
    }

    pub fn peek_at(&self, k: usize) -> &Tk {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].kind
    }

    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    pub fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub fn bump(&mut self) -> Tk {
        let k = self.toks[self.pos].kind.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        k
    }

    pub fn eat(&mut self, k: &Tk) -> bool {
        if self.peek() == k {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn err(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            message: message.into(),
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn expect(&mut self, k: &Tk, what: &str) -> Result<(), ParseError> {
        if self.eat(k) {
            Ok(())
        } else {
            Err(self.err(format!("unexpected {}", describe(self.peek())), &[what]))
        }
    }

    pub fn at_end(&self) -> bool {
        matches!(self.peek(), Tk::Eof)
    }
}

pub(crate) fn describe(k: &Tk) -> String {
    match k {
        Tk::Ident(s) => format!("identifier `{s}`"),
        Tk::Int(n) => format!("integer `{n}`"),
        Tk::Eof => "end of input".into(),
        other => format!("`{}`", tk_text(other)),
    }
}

fn tk_text(k: &Tk) -> &'static str {
    match k {
        Tk::Dot => ".",
        Tk::LBrack => "[",
        Tk::RBrack => "]",
        Tk::LAngle => "<",
        Tk::RAngle => ">",
        Tk::LParen => "(",
        Tk::RParen => ")",
        Tk::Colon => ":",
        Tk::Assign => ":=",
        Tk::Star => "*",
        Tk::Semi => ";",
        Tk::Eq => "=",
        Tk::Pipe => "|",
        Tk::Plus => "+",
        Tk::OPlus => "(+)",
        Tk::Comma => ",",
        Tk::Backslash => "\\",
        Tk::Bang => "!",
        Tk::Lambda => "λ",
        Tk::Eps => "ε",
        Tk::Ident(_) | Tk::Int(_) | Tk::Eof => "",
    }
}

/// A parsed term plus the source span of every node, indexed in preorder
/// (node, then push argument, then continuation).
#[derive(Clone, Debug)]
pub struct Spanned {
    pub term: Term,
    pub spans: Vec<SourceSpan>,
}

enum Seg {
    Unit,
    Var(String),
    Push(Box<Spanned>, Loc),
    Pop(Loc, String, Option<SimpleType>),
    Const(ConstSym),
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    parse_term_spanned(src).map(|s| s.term)
}

pub fn parse_term_spanned(src: &str) -> Result<Spanned, ParseError> {
    let mut c = Cursor::new(lex(src)?);
    let t = term(&mut c)?;
    if !c.at_end() {
        return Err(c.err(format!("unexpected {}", describe(c.peek())), &["`.`", "end of input"]));
    }
    Ok(t)
}

pub(crate) fn term(c: &mut Cursor) -> Result<Spanned, ParseError> {
    let mut segs = vec![seg(c)?];
    while c.eat(&Tk::Dot) {
        segs.push(seg(c)?);
    }
    let end = {
        let s = c.prev_span();
        SourceSpan { start: s.end, end: s.end, line: s.line, col: s.col + (s.end - s.start) }
    };
    // build right to left; spans are collected in preorder afterwards
    let mut acc = Spanned { term: Term::Nil, spans: vec![end] };
    for (sg, sp) in segs.into_iter().rev() {
        acc = match sg {
            Seg::Unit => acc,
            Seg::Var(x) => Spanned {
                term: Term::Var(name(&x), Arc::new(acc.term)),
                spans: prepend(sp, acc.spans),
            },
            Seg::Const(k) => Spanned { term: Term::Const(k, Arc::new(acc.term)), spans: prepend(sp, acc.spans) },
            Seg::Pop(a, x, ty) => Spanned {
                term: Term::Pop(a, name(&x), ty, Arc::new(acc.term)),
                spans: prepend(sp, acc.spans),
            },
            Seg::Push(arg, a) => {
                let mut spans = vec![sp];
                spans.extend(arg.spans);
                spans.extend(acc.spans);
                Spanned { term: Term::Push(Arc::new(arg.term), a, Arc::new(acc.term)), spans }
            }
        };
    }
    Ok(acc)
}

fn prepend(s: SourceSpan, mut rest: Vec<SourceSpan>) -> Vec<SourceSpan> {
    rest.insert(0, s);
    rest
}

fn ident_loc(c: &Cursor, s: &str) -> Result<Loc, ParseError> {
    if RESERVED.contains(&s) {
        return Err(c.err(format!("reserved word `{s}` cannot name a location"), &["location"]));
    }
    Ok(Loc::named(s))
}

fn seg(c: &mut Cursor) -> Result<(Seg, SourceSpan), ParseError> {
    let start = c.span();
    let with_end = |c: &Cursor| {
        let e = c.prev_span();
        SourceSpan { start: start.start, end: e.end, line: start.line, col: start.col }
    };
    match c.peek().clone() {
        Tk::Star => {
            c.bump();
            Ok((Seg::Unit, with_end(c)))
        }
        Tk::LBrack => {
            c.bump();
            let inner = term(c)?;
            c.expect(&Tk::RBrack, "`]`")?;
            let loc = if let Tk::Ident(s) = c.peek().clone() {
                if c.peek_at(1) == &Tk::LAngle {
                    return Err(c.err("a location after `]` cannot start a pop; separate with `.`", &["`.`"]));
                }
                c.bump();
                ident_loc(c, &s)?
            } else {
                Loc::Main
            };
            Ok((Seg::Push(Box::new(inner), loc), with_end(c)))
        }
        Tk::LAngle => {
            let (x, ty) = binder(c)?;
            Ok((Seg::Pop(Loc::Main, x, ty), with_end(c)))
        }
        Tk::Int(n) => {
            c.bump();
            Ok((Seg::Const(ConstSym::Int(n)), with_end(c)))
        }
        Tk::Plus => {
            c.bump();
            Ok((Seg::Const(ConstSym::add()), with_end(c)))
        }
        Tk::Ident(s) => {
            c.bump();
            if c.peek() == &Tk::LAngle {
                let loc = ident_loc(c, &s)?;
                let (x, ty) = binder(c)?;
                return Ok((Seg::Pop(loc, x, ty), with_end(c)));
            }
            if let Some(k) = ConstSym::builtin(&s) {
                return Ok((Seg::Const(k), with_end(c)));
            }
            Ok((Seg::Var(s), with_end(c)))
        }
        other => Err(c.err(
            format!("unexpected {}", describe(&other)),
            &["`*`", "variable", "`[`", "`<`", "constant"],
        )),
    }
}

fn binder(c: &mut Cursor) -> Result<(String, Option<SimpleType>), ParseError> {
    c.expect(&Tk::LAngle, "`<`")?;
    let x = match c.bump() {
        Tk::Ident(s) if !RESERVED.contains(&s.as_str()) => s,
        other => {
            c.pos -= 1;
            return Err(c.err(format!("unexpected {}", describe(&other)), &["variable"]));
        }
    };
    let ty = if c.eat(&Tk::Colon) { Some(type_atom(c)?) } else { None };
    c.expect(&Tk::RAngle, "`>`")?;
    Ok((x, ty))
}

pub fn parse_type(src: &str) -> Result<SimpleType, ParseError> {
    let mut c = Cursor::new(lex(src)?);
    let t = full_type(&mut c)?;
    if !c.at_end() {
        return Err(c.err(format!("unexpected {}", describe(c.peek())), &["end of input"]));
    }
    Ok(t)
}

pub(crate) fn full_type(c: &mut Cursor) -> Result<SimpleType, ParseError> {
    let input = memvec(c)?;
    if c.eat(&Tk::RAngle) {
        let output = memvec(c)?;
        return Ok(SimpleType::Arrow(Arc::new(reverse_mem(input)), Arc::new(output)));
    }
    // a lone atom is a type in its own right
    let mut it = input.0.iter();
    match (it.next(), it.next()) {
        (Some((Loc::Main, v)), None) if v.0.len() == 1 => Ok(v.0[0].clone()),
        _ => Err(c.err(format!("unexpected {}", describe(c.peek())), &["`>`"])),
    }
}

fn reverse_mem(m: MemoryType) -> MemoryType {
    MemoryType(m.0.into_iter().map(|(l, v)| (l, TypeVector(v.0.into_iter().rev().collect()))).collect())
}

fn memvec(c: &mut Cursor) -> Result<MemoryType, ParseError> {
    let mut map: BTreeMap<Loc, Vec<SimpleType>> = BTreeMap::new();
    loop {
        match c.peek().clone() {
            Tk::Ident(s) if c.peek_at(1) == &Tk::LParen && {
                let t0 = &c.toks[c.pos];
                let t1 = &c.toks[c.pos + 1];
                t0.span.end == t1.span.start
            } =>
            {
                c.bump();
                c.bump();
                let loc = ident_loc(c, &s)?;
                let entry = map.entry(loc).or_default();
                while c.peek() != &Tk::RParen {
                    entry.push(type_atom(c)?);
                }
                c.expect(&Tk::RParen, "`)`")?;
            }
            Tk::Ident(_) | Tk::LParen => {
                let t = type_atom(c)?;
                map.entry(Loc::Main).or_default().push(t);
            }
            _ => break,
        }
    }
    Ok(MemoryType(map.into_iter().filter(|(_, v)| !v.is_empty()).map(|(l, v)| (l, TypeVector(v))).collect()))
}

pub(crate) fn type_atom(c: &mut Cursor) -> Result<SimpleType, ParseError> {
    match c.peek().clone() {
        Tk::Ident(s) => {
            c.bump();
            Ok(SimpleType::Base(name(&s)))
        }
        Tk::LParen => {
            c.bump();
            let t = full_type(c)?;
            c.expect(&Tk::RParen, "`)`")?;
            Ok(t)
        }
        other => Err(c.err(format!("unexpected {}", describe(&other)), &["base type", "`(`"])),
    }
}

/// Parse `loc = t1 t2 ... ; loc2 = ...`; top of stack rightmost, `λ` names the main location.
pub fn parse_memory(src: &str) -> Result<Memory, ParseError> {
    let toks = lex(src)?;
    let mut mem = Memory::default();
    let mut c = Cursor::new(toks);
    if c.at_end() {
        return Ok(mem);
    }
    loop {
        let loc = match c.bump() {
            Tk::Lambda => Loc::Main,
            Tk::Ident(s) if s == "lambda" => Loc::Main,
            Tk::Ident(s) => ident_loc(&c, &s)?,
            other => {
                c.pos -= 1;
                return Err(c.err(format!("unexpected {}", describe(&other)), &["location"]));
            }
        };
        c.expect(&Tk::Eq, "`=`")?;
        let mut stack = Stack::default();
        loop {
            match c.peek() {
                Tk::Semi | Tk::Pipe | Tk::Eof => break,
                Tk::Eps => {
                    c.bump();
                }
                _ => {
                    let item = memory_item(&mut c)?;
                    stack.push(item);
                }
            }
        }
        mem.extend_stack(loc, stack);
        match c.bump() {
            Tk::Eof => break,
            Tk::Semi | Tk::Pipe => {
                if c.at_end() {
                    break;
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(mem)
}

/// One whitespace-delimited term inside a memory literal.
fn memory_item(c: &mut Cursor) -> Result<Term, ParseError> {
    // collect a token window: stop at depth 0 on whitespace gaps not adjacent to a dot
    let start = c.pos;
    let mut depth: Vec<Tk> = Vec::new();
    let mut end = start;
    loop {
        let k = c.toks[end].kind.clone();
        if matches!(k, Tk::Eof) || depth.is_empty() && matches!(k, Tk::Semi | Tk::Pipe) {
            break;
        }
        match k {
            Tk::LBrack | Tk::LParen | Tk::LAngle => depth.push(k),
            Tk::RBrack | Tk::RParen => {
                depth.pop();
            }
            Tk::RAngle => {
                if depth.last() == Some(&Tk::LAngle) {
                    depth.pop();
                }
            }
            _ => {}
        }
        end += 1;
        if depth.is_empty() {
            let cur = &c.toks[end - 1];
            let next = &c.toks[end];
            let gap = cur.span.end != next.span.start;
            let dotted = matches!(cur.kind, Tk::Dot) || matches!(next.kind, Tk::Dot);
            if gap && !dotted {
                break;
            }
        }
    }
    let mut window: Vec<Token> = c.toks[start..end].to_vec();
    let eof_span = c.toks[end].span;
    window.push(Token { kind: Tk::Eof, span: eof_span });
    let mut sub = Cursor::new(window);
    let t = term(&mut sub)?;
    if !sub.at_end() {
        return Err(sub.err(format!("unexpected {}", describe(sub.peek())), &["whitespace", "`;`"]));
    }
    c.pos = end;
    Ok(t.term)
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, false, &mut s);
    s
}

/// Printer that keeps binder annotations.
pub fn print_term_annotated(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, true, &mut s);
    s
}

fn write_term(t: &Term, ann: bool, out: &mut String) {
    if t.is_nil() {
        out.push('*');
        return;
    }
    let mut cur = t;
    let mut first = true;
    while !cur.is_nil() {
        if !first {
            out.push('.');
        }
        first = false;
        match cur {
            Term::Nil => unreachable!(),
            Term::Var(x, k) => {
                out.push_str(x);
                cur = k;
            }
            Term::Push(n, a, k) => {
                out.push('[');
                write_term(n, ann, out);
                out.push(']');
                out.push_str(a.label());
                cur = k;
            }
            Term::Pop(a, x, ty, k) => {
                out.push_str(a.label());
                out.push('<');
                out.push_str(x);
                if let (true, Some(ty)) = (ann, ty) {
                    out.push(':');
                    out.push_str(&print_type_atom(ty));
                }
                out.push('>');
                cur = k;
            }
            Term::Const(c, k) => {
                out.push_str(&c.name());
                cur = k;
            }
        }
    }
}

pub fn print_type(t: &SimpleType) -> String {
    match t {
        SimpleType::Base(b) => b.to_string(),
        SimpleType::Arrow(i, o) => {
            let left = print_memvec(i, true);
            let right = print_memvec(o, false);
            match (left.is_empty(), right.is_empty()) {
                (true, true) => ">".into(),
                (true, false) => format!("> {right}"),
                (false, true) => format!("{left} >"),
                (false, false) => format!("{left} > {right}"),
            }
        }
    }
}

fn print_type_atom(t: &SimpleType) -> String {
    match t {
        SimpleType::Base(b) => b.to_string(),
        SimpleType::Arrow(..) => format!("({})", print_type(t)),
    }
}

/// Named locations first in name order, then the main location as bare atoms.
/// Inputs are written top first.
fn print_memvec(m: &MemoryType, input: bool) -> String {
    let mut parts = Vec::new();
    let order = |v: &TypeVector| -> Vec<String> {
        let mut xs: Vec<String> = v.0.iter().map(print_type_atom).collect();
        if input {
            xs.reverse();
        }
        xs
    };
    for (l, v) in m.0.iter() {
        if let Loc::Named(n) = l {
            if !v.0.is_empty() {
                parts.push(format!("{n}({})", order(v).join(" ")));
            }
        }
    }
    if let Some(v) = m.0.get(&Loc::Main) {
        parts.extend(order(v));
    }
    parts.join(" ")
}

/// Memory as `loc = a b c ; ...`, top rightmost, `ε` for an empty stack.
pub fn print_memory(m: &Memory, sep: &str) -> String {
    m.iter()
        .map(|(l, s)| {
            let items = if s.is_empty() {
                "ε".to_string()
            } else {
                s.iter().map(print_term).collect::<Vec<_>>().join(" ")
            };
            format!("{l} = {items}")
        })
        .collect::<Vec<_>>()
        .join(sep)
}
