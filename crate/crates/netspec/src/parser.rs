//! Recursive-descent parser with one token of lookahead.

use crate::ast::{Composition, Document, ExoDef, Expr, Item, List, Matrix, Name, Number, SpaceKind, TripleBody};
use crate::diag::{Code, Diagnostic, Loc, Pos, Result};
use crate::lexer::{tokenize, Tok, Token};

pub struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            tokens: tokenize(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn loc(&self) -> Loc {
        Loc(self.pos())
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::new(
            Code::UnexpectedToken,
            t.pos,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos> {
        if self.is_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn name(&mut self) -> Result<Name> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let text = s.clone();
                let loc = self.loc();
                self.bump();
                Ok(Name { text, loc })
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn uint(&mut self) -> Result<usize> {
        match self.peek().tok {
            Tok::Number {
                value,
                imag: false,
                integer: true,
            } if value <= u32::MAX as f64 => {
                self.bump();
                Ok(value as usize)
            }
            _ => Err(self.unexpected("a non-negative integer")),
        }
    }

    fn signed_real(&mut self) -> Result<f64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().tok {
            Tok::Number { value, imag: false, .. } => {
                self.bump();
                Ok(if neg { -value } else { value })
            }
            _ => Err(self.unexpected("a real number")),
        }
    }

    pub fn at_end(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    // expr := term { ("+"|"-") term }
    pub fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Sum(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Diff(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary { "*" unary }
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::Prod(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    // unary := "-" unary | factor
    fn unary(&mut self) -> Result<Expr> {
        let loc = self.loc();
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?), loc));
        }
        self.factor()
    }

    // factor := atom [ "^" uint ]
    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        let loc = self.loc();
        if self.eat(&Tok::Caret) {
            let k = self.uint()?;
            return Ok(Expr::Pow(Box::new(base), k as u32, loc));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let loc = self.loc();
        match self.peek().tok.clone() {
            Tok::Number { value, imag, .. } => {
                self.bump();
                Ok(Expr::Num(if imag { Number::Imag(value) } else { Number::Real(value) }, loc))
            }
            Tok::Complex { re, im } => {
                self.bump();
                Ok(Expr::Num(Number::Complex(re, im), loc))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "adj" => {
                self.bump();
                self.expect(Tok::LParen, "`(` after `adj`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Adj(Box::new(e), loc))
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect(Tok::At, "`@` and a space label")?;
                let label = self.name()?.text;
                Ok(Expr::Symbol { name, label, loc })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn list(&mut self) -> Result<List> {
        let loc = self.loc();
        self.expect(Tok::LBracket, "`[`")?;
        let mut items = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                items.push(self.expr()?);
                if self.eat(&Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `]`")?;
            }
        }
        Ok(List { items, loc })
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let loc = self.loc();
        self.expect(Tok::LBracket, "`[`")?;
        let mut rows = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                rows.push(self.list()?.items);
                if self.eat(&Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `]`")?;
            }
        }
        Ok(Matrix { rows, loc })
    }

    fn real_list(&mut self) -> Result<Vec<f64>> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                out.push(self.signed_real()?);
                if self.eat(&Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `]`")?;
            }
        }
        Ok(out)
    }

    fn triple_body(&mut self) -> Result<TripleBody> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = TripleBody::default();
        while !self.eat(&Tok::RBrace) {
            let field = self.name()?;
            self.expect(Tok::Eq, "`=`")?;
            let dup = || Diagnostic::new(Code::DuplicateName, field.loc.0, format!("field `{}` given twice", field.text));
            match field.text.as_str() {
                "S" if body.s.is_none() => body.s = Some(self.matrix()?),
                "L" if body.l.is_none() => body.l = Some(self.list()?),
                "H" if body.h.is_none() => body.h = Some(self.expr()?),
                "S" | "L" | "H" => return Err(dup()),
                other => {
                    return Err(Diagnostic::new(
                        Code::UnexpectedToken,
                        field.loc.0,
                        format!("expected `S`, `L` or `H`, found `{other}`"),
                    ))
                }
            }
            if !self.eat(&Tok::Semi) && self.peek().tok != Tok::RBrace {
                return Err(self.unexpected("`;` or `}`"));
            }
        }
        Ok(body)
    }

    fn exo_def(&mut self) -> Result<ExoDef> {
        if self.peek().tok == Tok::LBrace {
            return Ok(ExoDef::Block(self.triple_body()?));
        }
        self.expect(Tok::Eq, "`=` or `{`")?;
        let loc = self.loc();
        if self.is_keyword("trivial") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let channels = self.uint()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(ExoDef::Trivial { channels, loc });
        }
        self.keyword("amplitudes")?;
        self.expect(Tok::LParen, "`(`")?;
        let channels = self.uint()?;
        let mut grid = None;
        let mut coupling = None;
        while self.eat(&Tok::Comma) {
            let key = self.name()?;
            self.expect(Tok::Eq, "`=`")?;
            match key.text.as_str() {
                "grid" if grid.is_none() => grid = Some(self.real_list()?),
                "K" if coupling.is_none() => coupling = Some(self.list()?),
                "grid" | "K" => {
                    return Err(Diagnostic::new(Code::DuplicateName, key.loc.0, format!("`{}` given twice", key.text)))
                }
                other => {
                    return Err(Diagnostic::new(
                        Code::UnexpectedToken,
                        key.loc.0,
                        format!("expected `grid` or `K`, found `{other}`"),
                    ))
                }
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(ExoDef::Amplitudes {
            channels,
            grid,
            coupling,
            loc,
        })
    }

    fn composition(&mut self) -> Result<Composition> {
        if self.is_keyword("lft") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let a = self.name()?;
            self.expect(Tok::Comma, "`,`")?;
            let loc = self.loc();
            let k = self.uint()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Composition::Lft(a, k, loc));
        }
        if self.is_keyword("wedge") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let plant = self.name()?;
            self.expect(Tok::Comma, "`,`")?;
            let exo = self.name()?;
            let coupling = if self.eat(&Tok::Comma) {
                self.keyword("K")?;
                self.expect(Tok::Eq, "`=`")?;
                let k = self.list()?;
                self.expect(Tok::Comma, "`,`")?;
                self.keyword("v")?;
                self.expect(Tok::Eq, "`=`")?;
                let v = self.list()?;
                Some((k, v))
            } else {
                None
            };
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Composition::Wedge { plant, exo, coupling });
        }
        let a = self.name()?;
        if self.is_keyword("boxplus") {
            self.bump();
            Ok(Composition::Boxplus(a, self.name()?))
        } else if self.is_keyword("series") {
            self.bump();
            Ok(Composition::Series(a, self.name()?))
        } else {
            Err(self.unexpected("`boxplus` or `series`"))
        }
    }

    fn item(&mut self) -> Result<Item> {
        let loc = self.loc();
        let kw = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a declaration")),
        };
        match kw.as_str() {
            "space" => {
                self.bump();
                let name = self.name()?;
                let kind = if self.is_keyword("qubit") {
                    self.bump();
                    SpaceKind::Qubit
                } else if self.is_keyword("fock") {
                    self.bump();
                    SpaceKind::Fock(self.uint()?)
                } else {
                    return Err(self.unexpected("`fock` or `qubit`"));
                };
                Ok(Item::Space { name, kind, loc })
            }
            "system" => {
                self.bump();
                let name = self.name()?;
                Ok(Item::System {
                    name,
                    body: self.triple_body()?,
                })
            }
            "exosystem" => {
                self.bump();
                let name = self.name()?;
                Ok(Item::Exosystem {
                    name,
                    def: self.exo_def()?,
                })
            }
            "observable" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq, "`=`")?;
                Ok(Item::Observable { name, expr: self.expr()? })
            }
            "compose" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq, "`=`")?;
                Ok(Item::Compose {
                    name,
                    def: self.composition()?,
                })
            }
            "top" => {
                self.bump();
                Ok(Item::Top(self.name()?))
            }
            _ => Err(self.unexpected("`space`, `system`, `exosystem`, `observable`, `compose` or `top`")),
        }
    }

    pub fn document(&mut self) -> Result<Document> {
        let mut items = Vec::new();
        while !self.at_end() {
            items.push(self.item()?);
        }
        Ok(Document { items, end: self.loc() })
    }
}

pub fn parse_document(src: &str) -> Result<Document> {
    Parser::new(src)?.document()
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}
