//! Recursive-descent parser for `.as` models.
//!
//! Guards and bodies share a prefix (`(`), so the parser backtracks between
//! the two readings. The error reported on failure is the one that got
//! furthest into the input, with the expected sets of all alternatives that
//! failed at that position merged.

use super::ast::*;
use super::error::{ModelError, ParseError};
use super::lexer::{tokenize, Token, TokenKind};

type PResult<T> = Result<T, ParseError>;

/// Parses the concrete syntax only; the result still needs validation.
pub(crate) fn parse_unvalidated(source: &str) -> Result<(Model, Span), ModelError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0, furthest: None };
    parser.model().map_err(|e| ModelError::Parse(parser.best_error(e)))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    furthest: Option<ParseError>,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    /// Remember a failed alternative so the final report can use it.
    fn record(&mut self, err: ParseError) {
        match &mut self.furthest {
            Some(best) if best.span.offset > err.span.offset => {}
            Some(best) if best.span.offset == err.span.offset => {
                for e in err.expected {
                    if !best.expected.contains(&e) {
                        best.expected.push(e);
                    }
                }
            }
            _ => self.furthest = Some(err),
        }
    }

    fn best_error(&mut self, err: ParseError) -> ParseError {
        self.record(err);
        self.furthest.take().expect("just recorded")
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Span> {
        if *self.peek() == kind {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[&format!("`{}`", kind.text())]))
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Span> {
        match self.peek() {
            TokenKind::Ident(w) if w == word => Ok(self.advance().span),
            _ => Err(self.error(&[&format!("`{word}`")])),
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(w) if w == word)
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            TokenKind::Ident(name) => Ok((name, self.advance().span)),
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn label(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            TokenKind::Ident(name) | TokenKind::Quoted(name) => Ok((name, self.advance().span)),
            _ => Err(self.error(&["action label"])),
        }
    }

    fn signed_int(&mut self) -> PResult<(i64, Span)> {
        let start = self.span();
        let negative = self.eat(&TokenKind::Minus);
        match *self.peek() {
            TokenKind::Int(n) => {
                let end = self.advance().span;
                Ok((if negative { -n } else { n }, start.to(end)))
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    /// Runs `f`, rewinding on failure.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let saved = self.pos;
        match f(self) {
            Ok(v) => Some(v),
            Err(e) => {
                self.record(e);
                self.pos = saved;
                None
            }
        }
    }

    // ----- declarations -------------------------------------------------

    fn model(&mut self) -> PResult<(Model, Span)> {
        let mut model = Model {
            types: Vec::new(),
            vars: Vec::new(),
            state_def: Vec::new(),
            init: Vec::new(),
            actions: Vec::new(),
            dood: Vec::new(),
        };
        let mut seen_state_def = false;
        let mut seen_init = false;
        loop {
            if self.is_keyword("type") {
                model.types.push(self.type_def()?);
            } else if self.is_keyword("var") {
                model.vars.extend(self.var_decl()?);
            } else if self.is_keyword("state_def") && !seen_state_def {
                self.advance();
                self.expect(TokenKind::LParen)?;
                model.state_def = self.ident_list()?.into_iter().map(|(n, _)| n).collect();
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Dot)?;
                seen_state_def = true;
            } else if self.is_keyword("init") && !seen_init {
                self.advance();
                self.expect(TokenKind::LParen)?;
                model.init = self.int_list()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Dot)?;
                seen_init = true;
            } else if self.is_keyword("as") {
                break;
            } else {
                let mut expected = vec!["`type`", "`var`"];
                if !seen_state_def {
                    expected.push("`state_def`");
                }
                if !seen_init {
                    expected.push("`init`");
                }
                expected.push("`as`");
                return Err(self.error(&expected));
            }
        }
        let as_span = self.keyword("as")?;
        self.expect(TokenKind::Neck)?;
        self.keyword("actions")?;
        self.expect(TokenKind::LParen)?;
        if *self.peek() != TokenKind::RParen {
            model.actions.push(self.action()?);
            while self.eat(&TokenKind::Comma) {
                model.actions.push(self.action()?);
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Comma)?;
        self.keyword("dood")?;
        self.expect(TokenKind::LParen)?;
        if *self.peek() != TokenKind::RParen {
            model.dood.push(self.dood_entry()?);
            while self.eat(&TokenKind::Box) {
                model.dood.push(self.dood_entry()?);
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Dot)?;
        if *self.peek() != TokenKind::Eof {
            return Err(self.error(&["end of input"]));
        }
        if !seen_state_def {
            return Err(ParseError {
                span: as_span,
                expected: vec!["`state_def` clause".into()],
                found: "`as`".into(),
            });
        }
        if !seen_init {
            return Err(ParseError {
                span: as_span,
                expected: vec!["`init` clause".into()],
                found: "`as`".into(),
            });
        }
        Ok((model, as_span))
    }

    /// `type(t, X) :- X in lo..hi.`
    fn type_def(&mut self) -> PResult<TypeDef> {
        let start = self.keyword("type")?;
        self.expect(TokenKind::LParen)?;
        let (name, _) = self.ident()?;
        self.expect(TokenKind::Comma)?;
        let (binder, _) = self.ident()?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Neck)?;
        match self.peek().clone() {
            TokenKind::Ident(b) if b == binder => {
                self.advance();
            }
            _ => return Err(self.error(&[&format!("`{binder}`")])),
        }
        self.keyword("in")?;
        let (lo, _) = self.signed_int()?;
        self.expect(TokenKind::DotDot)?;
        let (hi, _) = self.signed_int()?;
        let end = self.expect(TokenKind::Dot)?;
        Ok(TypeDef { name, lo, hi, span: start.to(end) })
    }

    /// `var([a, b], t).`
    fn var_decl(&mut self) -> PResult<Vec<VarDecl>> {
        self.keyword("var")?;
        self.expect(TokenKind::LParen)?;
        let names = self.ident_list()?;
        self.expect(TokenKind::Comma)?;
        let (ty, _) = self.ident()?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Dot)?;
        Ok(names.into_iter().map(|(name, span)| VarDecl { name, ty: ty.clone(), span }).collect())
    }

    fn ident_list(&mut self) -> PResult<Vec<(String, Span)>> {
        if self.eat(&TokenKind::Box) {
            return Ok(Vec::new());
        }
        self.expect(TokenKind::LBracket)?;
        let mut out = vec![self.ident()?];
        while self.eat(&TokenKind::Comma) {
            out.push(self.ident()?);
        }
        self.expect(TokenKind::RBracket)?;
        Ok(out)
    }

    fn int_list(&mut self) -> PResult<Vec<i64>> {
        if self.eat(&TokenKind::Box) {
            return Ok(Vec::new());
        }
        self.expect(TokenKind::LBracket)?;
        let mut out = vec![self.signed_int()?.0];
        while self.eat(&TokenKind::Comma) {
            out.push(self.signed_int()?.0);
        }
        self.expect(TokenKind::RBracket)?;
        Ok(out)
    }

    // ----- actions ------------------------------------------------------

    /// `L::g => B`
    fn action(&mut self) -> PResult<Action> {
        let (label, start) = self.label()?;
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) {
            loop {
                let (name, span) = self.ident()?;
                params.push(Param { name, ty: String::new(), lo: 0, hi: 0, span });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::RParen)?;
        }
        self.expect(TokenKind::ColonColon)?;
        let guard = self.guard()?;
        self.expect(TokenKind::Arrow)?;
        let body = self.body()?;
        let span = start.to(body.span);
        Ok(Action { label, params, guard, body, span })
    }

    fn dood_entry(&mut self) -> PResult<DoodEntry> {
        let start = self.span();
        if self.eat(&TokenKind::LBracket) {
            let mut bindings = Vec::new();
            loop {
                let (binder, _) = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let (ty, _) = self.ident()?;
                bindings.push((binder, ty));
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::RBracket)?;
            self.expect(TokenKind::Colon)?;
            let (label, _) = self.label()?;
            self.expect(TokenKind::LParen)?;
            let mut args = vec![self.ident()?.0];
            while self.eat(&TokenKind::Comma) {
                args.push(self.ident()?.0);
            }
            let end = self.expect(TokenKind::RParen)?;
            Ok(DoodEntry { label, bindings, args, span: start.to(end) })
        } else {
            let (label, span) = self.label()?;
            Ok(DoodEntry { label, bindings: Vec::new(), args: Vec::new(), span })
        }
    }

    /// `seq ([] seq)*`
    fn body(&mut self) -> PResult<Body> {
        let first = self.seq()?;
        if *self.peek() != TokenKind::Box {
            return Ok(first);
        }
        let start = first.span;
        let mut parts = vec![first];
        while self.eat(&TokenKind::Box) {
            parts.push(self.seq()?);
        }
        let span = start.to(self.prev_span());
        Ok(Body { kind: BodyKind::Choice(parts), span })
    }

    /// `unit (; unit)*`
    fn seq(&mut self) -> PResult<Body> {
        let first = self.unit()?;
        if *self.peek() != TokenKind::Semi {
            return Ok(first);
        }
        let start = first.span;
        let mut parts = vec![first];
        while self.eat(&TokenKind::Semi) {
            parts.push(self.unit()?);
        }
        let span = start.to(self.prev_span());
        Ok(Body { kind: BodyKind::Seq(parts), span })
    }

    /// `g => unit | v := e | ( body )`
    fn unit(&mut self) -> PResult<Body> {
        let start = self.span();
        let guarded = self.attempt(|p| {
            let guard = p.guard()?;
            p.expect(TokenKind::Arrow)?;
            Ok(guard)
        });
        if let Some(guard) = guarded {
            let inner = self.unit()?;
            let span = start.to(inner.span);
            return Ok(Body { kind: BodyKind::Guarded(guard, Box::new(inner)), span });
        }
        if let TokenKind::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == TokenKind::Assign {
                self.advance();
                self.advance();
                let value = self.expr()?;
                let span = start.to(value.span);
                return Ok(Body { kind: BodyKind::Assign { target: name, value }, span });
            }
        }
        if self.eat(&TokenKind::LParen) {
            let inner = self.body()?;
            self.expect(TokenKind::RParen)?;
            return Ok(inner);
        }
        Err(self.error(&["guard", "assignment", "`(`"]))
    }

    // ----- guards -------------------------------------------------------

    fn guard(&mut self) -> PResult<Guard> {
        let first = self.guard_and()?;
        if *self.peek() != TokenKind::Or {
            return Ok(first);
        }
        let start = first.span;
        let mut parts = vec![first];
        while self.eat(&TokenKind::Or) {
            parts.push(self.guard_and()?);
        }
        Ok(Guard { kind: GuardKind::Or(parts), span: start.to(self.prev_span()) })
    }

    fn guard_and(&mut self) -> PResult<Guard> {
        let first = self.guard_not()?;
        if *self.peek() != TokenKind::And {
            return Ok(first);
        }
        let start = first.span;
        let mut parts = vec![first];
        while self.eat(&TokenKind::And) {
            parts.push(self.guard_not()?);
        }
        Ok(Guard { kind: GuardKind::And(parts), span: start.to(self.prev_span()) })
    }

    fn guard_not(&mut self) -> PResult<Guard> {
        let start = self.span();
        if self.eat(&TokenKind::Not) {
            let inner = self.guard_not()?;
            let span = start.to(inner.span);
            return Ok(Guard { kind: GuardKind::Not(Box::new(inner)), span });
        }
        self.guard_atom()
    }

    fn guard_atom(&mut self) -> PResult<Guard> {
        let start = self.span();
        for (word, value) in [("true", true), ("false", false)] {
            if self.is_keyword(word) {
                self.advance();
                return Ok(Guard { kind: GuardKind::Lit(value), span: start });
            }
        }
        if *self.peek() == TokenKind::LParen {
            let nested = self.attempt(|p| {
                p.advance();
                let inner = p.guard()?;
                p.expect(TokenKind::RParen)?;
                Ok(inner)
            });
            if let Some(inner) = nested {
                return Ok(inner);
            }
        }
        let lhs = self.expr()?;
        let op = match *self.peek() {
            TokenKind::Cmp(op) => {
                self.advance();
                op
            }
            _ => return Err(self.error(&["comparison operator"])),
        };
        let rhs = self.expr()?;
        let span = start.to(rhs.span);
        Ok(Guard { kind: GuardKind::Cmp(op, lhs, rhs), span })
    }

    // ----- expressions --------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == TokenKind::Star {
            self.advance();
            let rhs = self.factor()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            TokenKind::Int(_) | TokenKind::Minus => {
                let (value, span) = self.signed_int()?;
                Ok(Expr { kind: ExprKind::Const(value), span })
            }
            TokenKind::Ident(name) if name != "true" && name != "false" => {
                let span = self.advance().span;
                Ok(Expr { kind: ExprKind::Var(name), span })
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}
