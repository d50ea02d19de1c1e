//! Recursive-descent parser. A syntax error abandons the current statement
//! only: the parser skips to the next `;` and keeps going, so one run reports
//! every broken statement.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::span::{Diagnostic, Span};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a whole session. On failure returns every diagnostic found.
pub fn parse(source: &str) -> Result<Session, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(source);
    let mut p = Parser { tokens, pos: 0 };
    let mut stmts = Vec::new();
    while !p.at(&Tok::Eof) {
        match p.stmt() {
            Ok(s) => stmts.push(s),
            Err(d) => {
                diags.push(d);
                p.synchronize();
            }
        }
    }
    diags.extend(duplicates(&stmts));
    if diags.is_empty() {
        Ok(Session { stmts })
    } else {
        diags.sort_by_key(|d| d.span.start);
        Err(diags)
    }
}

/// Parses a single expression (used by tests and `--exec` helpers).
pub fn parse_expr(source: &str) -> Result<Expr, Vec<Diagnostic>> {
    let (tokens, diags) = lex(source);
    if !diags.is_empty() {
        return Err(diags);
    }
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr().map_err(|d| vec![d])?;
    if !p.at(&Tok::Eof) {
        return Err(vec![p.unexpected("end of expression")]);
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const STATEMENTS: &str = "a declaration or command";

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == w)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::expected(t.span, format!("unexpected {}", t.tok.describe()), expected)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{}`", t.text())))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.at_word(w) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let name = s.clone();
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// A user-chosen name: rejects the reserved words.
    fn name(&mut self, what: &str) -> PResult<Ident> {
        let id = self.ident(what)?;
        if RESERVED.contains(&id.name.as_str()) {
            return Err(Diagnostic::new(id.span, format!("`{}` is reserved and cannot be used as a name", id.name)));
        }
        Ok(id)
    }

    fn int(&mut self, what: &str) -> PResult<(u64, Span)> {
        match self.peek().tok {
            Tok::Int(n) => Ok((n, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }

    fn small_int(&mut self, what: &str) -> PResult<u32> {
        let (n, span) = self.int(what)?;
        u32::try_from(n).map_err(|_| Diagnostic::new(span, "integer is out of range"))
    }

    fn range(&mut self) -> PResult<Range> {
        let start = self.peek().span;
        let lo = self.small_int("an integer")?;
        self.expect(Tok::DotDot)?;
        let hi = self.small_int("an integer")?;
        if lo > hi || lo == 0 {
            return Err(Diagnostic::new(
                start.to(Span::new(self.prev_end(), self.prev_end())),
                "ranges are 1-based and must not be empty",
            ));
        }
        Ok(Range { lo, hi })
    }

    fn synchronize(&mut self) {
        while !self.at(&Tok::Eof) {
            if self.bump().tok == Tok::Semi {
                return;
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span.start;
        let keyword = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected(STATEMENTS)),
        };
        let kind = match keyword.as_str() {
            "coord" => {
                self.bump();
                self.coord()?
            }
            "index" => {
                self.bump();
                let mut names = vec![self.name("an index name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.name("an index name")?);
                }
                self.expect(Tok::Eq)?;
                StmtKind::Index { names, range: self.range()? }
            }
            "symbol" => {
                self.bump();
                self.symbol()?
            }
            "degree" => {
                self.bump();
                StmtKind::Degree(self.small_int("the degree of the symplectic structure")?)
            }
            "pair" => {
                self.bump();
                self.pair()?
            }
            "lift" => {
                self.bump();
                self.lift()?
            }
            "lagrangian" => {
                self.bump();
                let mut names = vec![self.name("a coordinate family")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.name("a coordinate family")?);
                }
                StmtKind::Lagrangian(names)
            }
            "theta" | "alpha" if self.peek_at(1) == &Tok::Eq => {
                self.bump();
                self.bump();
                let e = self.expr()?;
                if keyword == "theta" {
                    StmtKind::Theta(e)
                } else {
                    StmtKind::Alpha(e)
                }
            }
            "relation" => {
                self.bump();
                let binder = if self.at(&Tok::LBracket) { self.binder(Tok::LBracket, Tok::RBracket)? } else { vec![] };
                let lhs = self.expr()?;
                let rhs = if self.eat(&Tok::Eq) { Some(self.expr()?) } else { None };
                StmtKind::Relation { binder, lhs, rhs }
            }
            "closed" => {
                self.bump();
                StmtKind::Closed(self.name("a symbol name")?)
            }
            "current" | "basis" => {
                self.bump();
                let name = self.name("a current name")?;
                let binder = if self.at(&Tok::LBracket) { self.binder(Tok::LBracket, Tok::RBracket)? } else { vec![] };
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                StmtKind::Current { name, binder, expr, twisted: keyword == "basis" }
            }
            _ => StmtKind::Command(self.command()?),
        };
        self.expect(Tok::Semi)?;
        Ok(Stmt { kind, span: Span::new(start, self.prev_end()) })
    }

    fn coord(&mut self) -> PResult<StmtKind> {
        let mut specs = Vec::new();
        loop {
            let name = self.name("a coordinate name")?;
            let range = if self.eat(&Tok::LBracket) {
                let r = self.range()?;
                self.expect(Tok::RBracket)?;
                Some(r)
            } else {
                None
            };
            specs.push(CoordSpec { name, range });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect_word("deg")?;
        if self.at(&Tok::Minus) {
            let span = self.bump().span;
            let end = if matches!(self.peek().tok, Tok::Int(_)) { self.bump().span } else { span };
            return Err(Diagnostic::new(span.to(end), "degree must be non-negative"));
        }
        let degree = self.small_int("a non-negative degree")?;
        Ok(StmtKind::Coord { specs, degree })
    }

    fn symbol(&mut self) -> PResult<StmtKind> {
        let name = self.name("a symbol name")?;
        let arity = if self.eat(&Tok::LBracket) {
            let a = self.small_int("the number of indices")?;
            self.expect(Tok::RBracket)?;
            a
        } else {
            0
        };
        let mut attrs = Vec::new();
        loop {
            let span = self.peek().span;
            if self.at_word("sym") || self.at_word("antisym") {
                let antisym = self.at_word("antisym");
                self.bump();
                let positions = if self.eat(&Tok::LParen) {
                    let r = self.range()?;
                    self.expect(Tok::RParen)?;
                    Some(r)
                } else {
                    None
                };
                attrs.push(SymAttr::Symmetry { antisym, positions, span: span.to(Span::new(span.end, self.prev_end())) });
            } else if self.at_word("const") {
                self.bump();
                attrs.push(SymAttr::Const);
            } else if self.at_word("inverse") {
                self.bump();
                attrs.push(SymAttr::Inverse(self.name("a symbol name")?));
            } else if self.at(&Tok::Semi) {
                break;
            } else {
                return Err(self.unexpected("`sym`, `antisym`, `const`, `inverse` or `;`"));
            }
        }
        Ok(StmtKind::Symbol { name, arity, attrs })
    }

    fn pair(&mut self) -> PResult<StmtKind> {
        let left = self.name("a coordinate family")?;
        self.expect(Tok::Comma)?;
        let right = self.name("a coordinate family")?;
        let modifier = if self.at_word("sign") {
            self.bump();
            let negative = self.eat(&Tok::Minus);
            let (n, span) = self.int("`1` or `-1`")?;
            if n != 1 {
                return Err(Diagnostic::new(span, "a pairing sign is 1 or -1"));
            }
            Some(PairMod::Sign(if negative { -1 } else { 1 }))
        } else if self.at_word("weight") {
            self.bump();
            Some(PairMod::Weight(self.name("a symbol name")?))
        } else {
            None
        };
        Ok(StmtKind::Pair { left, right, modifier })
    }

    fn lift(&mut self) -> PResult<StmtKind> {
        let n = self.small_int("the degree n of the small manifold")?;
        self.expect(Tok::Colon)?;
        let mut items = Vec::new();
        loop {
            let family = self.name("a coordinate family")?;
            self.expect(Tok::Arrow)?;
            let conjugate = self.name("a name for the conjugate family")?;
            let weight = if self.at_word("weight") {
                self.bump();
                Some(self.name("a symbol name")?)
            } else {
                None
            };
            items.push(LiftItem { family, conjugate, weight });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(StmtKind::Lift { n, items })
    }

    fn command(&mut self) -> PResult<Command> {
        let word = self.ident(STATEMENTS)?;
        let two = |p: &mut Parser| -> PResult<(Expr, Expr)> {
            let a = p.expr()?;
            p.expect(Tok::Comma)?;
            Ok((a, p.expr()?))
        };
        let by = |p: &mut Parser| -> PResult<Option<Expr>> {
            if p.at_word("by") {
                p.bump();
                Ok(Some(p.expr()?))
            } else {
                Ok(None)
            }
        };
        Ok(match word.name.as_str() {
            "bracket" => {
                let (a, b) = two(self)?;
                Command::Bracket(a, b)
            }
            "derived" => {
                let (a, b) = two(self)?;
                Command::Derived(a, b)
            }
            "commutator" => {
                let (a, b) = two(self)?;
                Command::Commutator(a, b)
            }
            "twist" => {
                let e = self.expr()?;
                Command::Twist(e, by(self)?)
            }
            "preserves" => Command::Preserves(by(self)?),
            "master" => Command::Master,
            "canonical" => Command::Canonical,
            "small" => Command::Small,
            "render" => Command::Render(self.expr()?),
            "show" => Command::Show(self.expr()?),
            "table" => {
                let mut names = vec![self.name("a current name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.name("a current name")?);
                }
                Command::Table(names)
            }
            _ => {
                return Err(Diagnostic::expected(
                    word.span,
                    format!("unknown statement `{}`", word.name),
                    STATEMENTS,
                ))
            }
        })
    }

    fn binder(&mut self, open: Tok, close: Tok) -> PResult<Vec<BindVar>> {
        self.expect(open)?;
        let mut vars = Vec::new();
        loop {
            let name = self.name("an index variable")?;
            let range = if self.eat(&Tok::Eq) { Some(self.range()?) } else { None };
            vars.push(BindVar { name, range });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(close)?;
        Ok(vars)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            let span = start.to(inner.span);
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), span });
        }
        if self.at_word("sum") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            let vars = self.binder(Tok::LParen, Tok::RParen)?;
            let body = self.term()?;
            let span = start.to(body.span);
            return Ok(Expr { kind: ExprKind::Sum(vars, Box::new(body)), span });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let (n, span) = self.int("an integer exponent")?;
            let n = u32::try_from(n).map_err(|_| Diagnostic::new(span, "exponent is out of range"))?;
            let span = base.span.to(span);
            return Ok(Expr { kind: ExprKind::Pow(Box::new(base), n), span });
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr { kind: ExprKind::Int(n), span: start })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.bump();
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                let end = self.expect(Tok::RBrace)?;
                Ok(Expr { kind: ExprKind::Bracket(Box::new(a), Box::new(b)), span: start.to(end) })
            }
            Tok::Ident(w) => match w.as_str() {
                "theta" => {
                    self.bump();
                    Ok(Expr { kind: ExprKind::Theta, span: start })
                }
                "alpha" => {
                    self.bump();
                    Ok(Expr { kind: ExprKind::Alpha, span: start })
                }
                "restrict" | "twist" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let e = Box::new(self.expr()?);
                    let end = self.expect(Tok::RParen)?;
                    let kind = if w == "restrict" { ExprKind::Restrict(e) } else { ExprKind::Twist(e) };
                    Ok(Expr { kind, span: start.to(end) })
                }
                "d" if self.peek_at(1) == &Tok::LBracket => {
                    self.bump();
                    let derivs = self.indices()?;
                    let mut e = self.name_ref()?;
                    if let ExprKind::Name { derivs: d, .. } = &mut e.kind {
                        *d = Some(derivs);
                    }
                    e.span = start.to(e.span);
                    Ok(e)
                }
                _ => self.name_ref(),
            },
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn name_ref(&mut self) -> PResult<Expr> {
        let name = self.name("a name")?;
        let mut span = name.span;
        let indices = if self.at(&Tok::LBracket) {
            let idx = self.indices()?;
            span = span.to(Span::new(span.end, self.prev_end()));
            Some(idx)
        } else {
            None
        };
        Ok(Expr { kind: ExprKind::Name { name, indices, derivs: None }, span })
    }

    fn indices(&mut self) -> PResult<Vec<Index>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        loop {
            match self.peek().tok.clone() {
                Tok::Int(_) => out.push(Index::Lit(self.small_int("an index")?)),
                Tok::Ident(_) => out.push(Index::Var(self.name("an index")?)),
                _ => return Err(self.unexpected("an index")),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }
}

/// Names declared twice in the same namespace (coordinate families, symbols,
/// index variables and currents share one namespace).
fn duplicates(stmts: &[Stmt]) -> Vec<Diagnostic> {
    fn declare<'a>(seen: &mut HashMap<&'a str, Span>, id: &'a Ident, out: &mut Vec<Diagnostic>) {
        if seen.contains_key(id.name.as_str()) {
            out.push(Diagnostic::new(id.span, format!("`{}` is already declared", id.name)));
        } else {
            seen.insert(&id.name, id.span);
        }
    }
    let mut seen: HashMap<&str, Span> = HashMap::new();
    let mut out = Vec::new();
    let seen = &mut seen;
    for s in stmts {
        match &s.kind {
            StmtKind::Coord { specs, .. } => specs.iter().for_each(|c| declare(seen, &c.name, &mut out)),
            StmtKind::Index { names, .. } => names.iter().for_each(|n| declare(seen, n, &mut out)),
            StmtKind::Symbol { name, .. } => declare(seen, name, &mut out),
            StmtKind::Lift { items, .. } => items.iter().for_each(|i| declare(seen, &i.conjugate, &mut out)),
            StmtKind::Current { name, .. } => declare(seen, name, &mut out),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates() {
        let s = parse("coord x[1..2] deg 0; coord p[1..2] deg 1;").unwrap();
        assert_eq!(s.stmts.len(), 2);
        match &s.stmts[0].kind {
            StmtKind::Coord { specs, degree } => {
                assert_eq!(specs[0].range, Some(Range { lo: 1, hi: 2 }));
                assert_eq!(*degree, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_degree() {
        let src = "coord q deg -1;";
        let d = parse(src).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "degree must be non-negative");
        assert_eq!(&src[d[0].span.start..d[0].span.end], "-1");
    }

    #[test]
    fn recovery_reports_every_statement() {
        let d = parse("coord x deg ;\nsymbol f[1] sideways;\ncoord y deg 0;\nshow x +;").unwrap_err();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|d| d.expected.is_some()));
    }

    #[test]
    fn duplicate_declaration() {
        let d = parse("coord x deg 0; symbol x;").unwrap_err();
        assert_eq!(d[0].message, "`x` is already declared");
    }

    #[test]
    fn derivative_prefix_and_sum() {
        let e = parse_expr("sum(K = 1..3) d[K]pi[I,J] * x[K] + 1").unwrap();
        let ExprKind::Binary(BinOp::Add, lhs, _) = e.kind else { panic!() };
        let ExprKind::Sum(vars, body) = lhs.kind else { panic!() };
        assert_eq!(vars[0].range, Some(Range { lo: 1, hi: 3 }));
        let ExprKind::Binary(BinOp::Mul, f, _) = body.kind else { panic!() };
        match f.kind {
            ExprKind::Name { name, derivs: Some(d), indices: Some(i) } => {
                assert_eq!(name.name, "pi");
                assert_eq!(d.len(), 1);
                assert_eq!(i.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reserved_words() {
        assert!(parse("coord d deg 0;").is_err());
        assert!(parse("symbol theta;").is_err());
    }
}
