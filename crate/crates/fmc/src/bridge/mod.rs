//! Translations between the calculus and neighbouring languages: an effectful
//! call-by-value λ-calculus, and the λ-calculus with tuples and patterns.

pub mod cbv;
pub mod lambda;
pub mod translate;

use crate::parser::{ParseError, SourceSpan};

pub use cbv::{encode_cbv, parse_cbv, CbvTerm};
pub use lambda::{lambda_beta_eta_eq, lambda_normalize, parse_lambda, print_lambda, LTerm, LType, Pattern};
pub use translate::{fmc_to_lambda, lambda_to_fmc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

/// Shared tokenizer for the two surface languages.
pub(crate) struct Lexer {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

const SYMBOLS: [&str; 12] = ["(+)", ":=", "->", "\\", "λ", ".", "(", ")", ",", ";", "!", "+"];

impl Lexer {
    pub(crate) fn new(src: &str) -> Result<Lexer, ParseError> {
        let mut toks = Vec::new();
        let (mut line, mut col) = (1, 1);
        let mut i = 0;
        let bytes = src.as_bytes();
        while i < src.len() {
            let rest = &src[i..];
            let c = rest.chars().next().expect("non-empty");
            let span = SourceSpan { start: i, end: i + c.len_utf8(), line, col };
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                col += 1;
                i += c.len_utf8();
                continue;
            }
            if c == '#' {
                while i < src.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            if c.is_ascii_digit() || (c == '-' && rest[1..].starts_with(|d: char| d.is_ascii_digit())) {
                let len = 1 + rest[1..].find(|d: char| !d.is_ascii_digit()).unwrap_or(rest.len() - 1);
                let n: i64 = rest[..len].parse().map_err(|_| ParseError {
                    message: format!("integer literal `{}` out of range", &rest[..len]),
                    span: SourceSpan { end: i + len, ..span },
                    expected: vec![],
                })?;
                toks.push((Tok::Int(n), SourceSpan { end: i + len, ..span }));
                i += len;
                col += len;
                continue;
            }
            if c.is_alphabetic() && c != 'λ' || c == '_' {
                let len = rest.find(|d: char| !(d.is_alphanumeric() || d == '_' || d == '\'')).unwrap_or(rest.len());
                toks.push((Tok::Ident(rest[..len].to_string()), SourceSpan { end: i + len, ..span }));
                i += len;
                col += rest[..len].chars().count();
                continue;
            }
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    toks.push((Tok::Sym(s), SourceSpan { end: i + s.len(), ..span }));
                    i += s.len();
                    col += s.chars().count();
                }
                None => {
                    return Err(ParseError { message: format!("unexpected character `{c}`"), span, expected: vec![] });
                }
            }
        }
        toks.push((Tok::Eof, SourceSpan { start: src.len(), end: src.len(), line, col }));
        Ok(Lexer { toks, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    pub(crate) fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn error(&self, msg: &str, expected: &[&str]) -> ParseError {
        ParseError {
            message: msg.to_string(),
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub(crate) fn expect(&mut self, s: &'static str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`"), &[s]))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.next();
                Ok(x)
            }
            _ => Err(self.error("expected an identifier", &["identifier"])),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}
