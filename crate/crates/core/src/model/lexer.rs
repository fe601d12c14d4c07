use std::fmt;

use super::ast::Span;
use super::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// `'quoted atom'`
    Quoted(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    /// `[]`, non-deterministic choice (or an empty list)
    Box,
    Comma,
    Dot,
    DotDot,
    Colon,
    ColonColon,
    /// `:-`
    Neck,
    /// `:=`
    Assign,
    /// `=>`
    Arrow,
    Semi,
    Plus,
    Minus,
    Star,
    Cmp(crate::model::CmpOp),
    /// `/\` or `#/\`
    And,
    /// `\/` or `#\/`
    Or,
    /// `\+` or `#\`
    Not,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Quoted(s) => write!(f, "label '{s}'"),
            TokenKind::Int(n) => write!(f, "integer {n}"),
            TokenKind::Cmp(op) => write!(f, "`{}`", op.token()),
            TokenKind::Eof => write!(f, "end of input"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

impl TokenKind {
    pub fn text(&self) -> &'static str {
        match self {
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Box => "[]",
            TokenKind::Comma => ",",
            TokenKind::Dot => ".",
            TokenKind::DotDot => "..",
            TokenKind::Colon => ":",
            TokenKind::ColonColon => "::",
            TokenKind::Neck => ":-",
            TokenKind::Assign => ":=",
            TokenKind::Arrow => "=>",
            TokenKind::Semi => ";",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::And => "/\\",
            TokenKind::Or => "\\/",
            TokenKind::Not => "\\+",
            TokenKind::Cmp(op) => op.token(),
            TokenKind::Ident(_) => "identifier",
            TokenKind::Quoted(_) => "label",
            TokenKind::Int(_) => "integer",
            TokenKind::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    Lexer { src: source.as_bytes(), text: source, pos: 0, line: 1, col: 1 }.run()
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col, start) = (self.line, self.col, self.pos);
            let Some(c) = self.peek(0) else {
                out.push(Token { kind: TokenKind::Eof, span: Span::new(line, col, start, 0) });
                return Ok(out);
            };
            let kind = self.lex_one(c, line, col)?;
            out.push(Token { kind, span: Span::new(line, col, start, self.pos - start) });
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn bump(&mut self, n: usize) {
        for _ in 0..n {
            if self.src[self.pos] == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            self.pos += 1;
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek(0) {
            if c.is_ascii_whitespace() {
                self.bump(1);
            } else if c == b'%' {
                while let Some(c) = self.peek(0) {
                    if c == b'\n' {
                        break;
                    }
                    self.bump(1);
                }
            } else {
                break;
            }
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn lex_one(&mut self, c: u8, line: u32, col: u32) -> Result<TokenKind, ParseError> {
        use crate::model::CmpOp;

        // Longest match first.
        const FIXED: &[(&str, TokenKind)] = &[
            ("#\\=", TokenKind::Cmp(CmpOp::Ne)),
            ("#\\/", TokenKind::Or),
            ("#/\\", TokenKind::And),
            ("#=<", TokenKind::Cmp(CmpOp::Le)),
            ("#>=", TokenKind::Cmp(CmpOp::Ge)),
            ("#\\", TokenKind::Not),
            ("#=", TokenKind::Cmp(CmpOp::Eq)),
            ("#<", TokenKind::Cmp(CmpOp::Lt)),
            ("#>", TokenKind::Cmp(CmpOp::Gt)),
            ("/\\", TokenKind::And),
            ("\\/", TokenKind::Or),
            ("\\+", TokenKind::Not),
            ("::", TokenKind::ColonColon),
            (":-", TokenKind::Neck),
            (":=", TokenKind::Assign),
            ("=>", TokenKind::Arrow),
            ("..", TokenKind::DotDot),
            ("[]", TokenKind::Box),
            ("(", TokenKind::LParen),
            (")", TokenKind::RParen),
            ("[", TokenKind::LBracket),
            ("]", TokenKind::RBracket),
            (",", TokenKind::Comma),
            (".", TokenKind::Dot),
            (":", TokenKind::Colon),
            (";", TokenKind::Semi),
            ("+", TokenKind::Plus),
            ("-", TokenKind::Minus),
            ("*", TokenKind::Star),
        ];

        if c.is_ascii_digit() {
            let start = self.pos;
            while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                self.bump(1);
            }
            let digits = &self.text[start..self.pos];
            return digits.parse::<i64>().map(TokenKind::Int).map_err(|_| ParseError {
                span: Span::new(line, col, start, self.pos - start),
                expected: vec!["integer literal within 64-bit range".into()],
                found: digits.to_string(),
            });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                self.bump(1);
            }
            return Ok(TokenKind::Ident(self.text[start..self.pos].to_string()));
        }
        if c == b'\'' {
            let start = self.pos;
            self.bump(1);
            let body = self.pos;
            while let Some(c) = self.peek(0) {
                if c == b'\'' {
                    let atom = self.text[body..self.pos].to_string();
                    self.bump(1);
                    return Ok(TokenKind::Quoted(atom));
                }
                if c == b'\n' {
                    break;
                }
                self.bump(1);
            }
            return Err(ParseError {
                span: Span::new(line, col, start, self.pos - start),
                expected: vec!["closing `'`".into()],
                found: "end of line".into(),
            });
        }
        for (text, kind) in FIXED {
            if self.starts_with(text) {
                self.bump(text.len());
                return Ok(kind.clone());
            }
        }
        let ch = self.text[self.pos..].chars().next().unwrap_or('?');
        Err(ParseError {
            span: Span::new(line, col, self.pos, ch.len_utf8()),
            expected: vec!["a token".into()],
            found: format!("character `{ch}`"),
        })
    }
}
