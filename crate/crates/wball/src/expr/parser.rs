//! Recursive-descent parser for objective expressions.
//!
//! Grammar (tightest binding last):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?
//! atom   := NUMBER | COORD | call | "(" expr ")"
//! call   := NAME "(" expr ("," expr)* ")" | "norm" "(" "x" ")"
//! ```
//!
//! `COORD` is `x1`, `x2`, ... up to the declared dimension. A minus applied
//! directly to a numeric literal folds into the literal.

use super::ast::Expr;
use super::lexer::{lex, Token, TokenKind};
use crate::error::{ParseError, ParseErrorKind};

pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, cursor: 0, dim };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.cursor].clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        t
    }

    fn err(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position: pos, kind }
    }

    fn syntax(&self, pos: usize, msg: impl Into<String>) -> ParseError {
        self.err(pos, ParseErrorKind::Syntax(msg.into()))
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        match &self.peek().kind {
            TokenKind::Eof => Ok(()),
            k => Err(self.syntax(self.peek().pos, format!("unexpected trailing {}", describe(k)))),
        }
    }

    fn expect(&mut self, want: TokenKind, what: &str) -> Result<(), ParseError> {
        if self.peek().kind == want {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(
                self.peek().pos,
                format!("expected {what}, found {}", describe(&self.peek().kind)),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    e = Expr::Add(Box::new(e), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    e = Expr::Sub(Box::new(e), Box::new(self.term()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    e = Expr::Div(Box::new(e), Box::new(self.unary()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            let inner = self.unary()?;
            // Fold a minus on a literal into the literal so printing a
            // negative constant round-trips to the identical tree.
            return Ok(match inner {
                Expr::Number(v) => Expr::Number(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().kind == TokenKind::Caret {
            self.bump();
            // The exponent is a unary production, so `x^-2` and `x^y^z`
            // (right-associative) both parse.
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Number(v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            TokenKind::Ident(name) => self.ident(tok.pos, name),
            k => Err(self.syntax(tok.pos, format!("expected an expression, found {}", describe(&k)))),
        }
    }

    fn ident(&mut self, pos: usize, name: String) -> Result<Expr, ParseError> {
        if let Some(idx) = coord_index(&name) {
            if idx == 0 || idx > self.dim {
                return Err(self.err(
                    pos,
                    ParseErrorKind::CoordOutOfRange {
                        index: idx,
                        dim: self.dim,
                    },
                ));
            }
            return Ok(Expr::Coord(idx - 1));
        }
        match name.as_str() {
            "norm" => {
                self.expect(TokenKind::LParen, "`(` after `norm`")?;
                let arg = self.bump();
                match arg.kind {
                    TokenKind::Ident(a) if a == "x" => {}
                    k => {
                        return Err(self.syntax(
                            arg.pos,
                            format!(
                                "norm takes the whole point written `norm(x)`, found {}",
                                describe(&k)
                            ),
                        ))
                    }
                }
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(Expr::Norm)
            }
            "abs" | "sqrt" | "exp" | "log" => {
                let args = self.call_args(&name)?;
                if args.len() != 1 {
                    return Err(self.err(
                        pos,
                        ParseErrorKind::Arity {
                            name,
                            expected: "1",
                            got: args.len(),
                        },
                    ));
                }
                let a = Box::new(args.into_iter().next().unwrap());
                Ok(match name.as_str() {
                    "abs" => Expr::Abs(a),
                    "sqrt" => Expr::Sqrt(a),
                    "exp" => Expr::Exp(a),
                    _ => Expr::Log(a),
                })
            }
            "min" | "max" => {
                let args = self.call_args(&name)?;
                if args.len() < 2 {
                    return Err(self.err(
                        pos,
                        ParseErrorKind::Arity {
                            name,
                            expected: "at least 2",
                            got: args.len(),
                        },
                    ));
                }
                Ok(if name == "min" {
                    Expr::Min(args)
                } else {
                    Expr::Max(args)
                })
            }
            "x" => Err(self.syntax(
                pos,
                "the point identifier `x` is only valid inside norm(...)",
            )),
            _ => Err(self.err(pos, ParseErrorKind::UnknownIdentifier(name))),
        }
    }

    fn call_args(&mut self, name: &str) -> Result<Vec<Expr>, ParseError> {
        self.expect(TokenKind::LParen, &format!("`(` after `{name}`"))?;
        let mut args = vec![self.expr()?];
        while self.peek().kind == TokenKind::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(args)
    }
}

/// `x<digits>` names a coordinate; anything else does not.
fn coord_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn describe(k: &TokenKind) -> String {
    match k {
        TokenKind::Number(v) => format!("number `{v}`"),
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::Plus => "`+`".into(),
        TokenKind::Minus => "`-`".into(),
        TokenKind::Star => "`*`".into(),
        TokenKind::Slash => "`/`".into(),
        TokenKind::Caret => "`^`".into(),
        TokenKind::LParen => "`(`".into(),
        TokenKind::RParen => "`)`".into(),
        TokenKind::Comma => "`,`".into(),
        TokenKind::Eof => "end of input".into(),
    }
}
