//! Recursive-descent parser for the formula language.
//!
//! Grammar (also documented in `docs/formula_grammar.md`):
//!
//! ```text
//! formula    := "=" comparison | comparison
//! comparison := additive { ("=" | "<>" | "<" | "<=" | ">" | ">=") additive }
//! additive   := multiplic { ("+" | "-") multiplic }
//! multiplic  := power { ("*" | "/") power }
//! power      := unary [ "^" power ]              (right-associative)
//! unary      := ("-" | "+") unary | primary
//! primary    := NUMBER | STRING | "TRUE" | "FALSE"
//!             | CELL [ ":" CELL ]
//!             | IDENT "(" arglist ")"            (IDENT must be a builtin)
//!             | IDENT                            (named range)
//!             | "(" comparison ")"
//! arglist    := [ arg { "," arg } ]
//! arg        := comparison | (empty)             (empty only where allowed)
//! ```
//!
//! Unary minus binds tighter than `^` on the base side, so `-2^2` parses as
//! `(-2)^2` = 4, while exponents parse at full unary strength: `2^-3` works.

use super::lexer::{tokenize, SpannedToken, Token};
use super::{Arg, BinOp, Builtin, Expr, UnOp};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("{func} expects {expected} argument(s), got {got}")]
    BadArity { func: &'static str, expected: String, got: usize },
    #[error("{func} does not accept empty arguments")]
    EmptyArg { func: &'static str },
}

/// Parses a formula, with or without its leading `=`.
pub fn parse_formula(text: &str) -> Result<Expr, FormulaError> {
    let body = text.strip_prefix('=').unwrap_or(text);
    let toks = tokenize(body)?;
    let mut p = Parser { toks, i: 0, len: body.len() };
    let expr = p.comparison()?;
    if let Some(t) = p.peek() {
        return Err(FormulaError::Syntax { pos: t.pos, msg: "unexpected trailing input".into() });
    }
    Ok(expr)
}

struct Parser {
    toks: Vec<SpannedToken>,
    i: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&SpannedToken> {
        self.toks.get(self.i)
    }

    fn next(&mut self) -> Option<SpannedToken> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> FormulaError {
        let pos = self.peek().map(|t| t.pos).unwrap_or(self.len);
        FormulaError::Syntax { pos, msg: msg.into() }
    }

    fn comparison(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Token::Eq) => BinOp::Eq,
                Some(Token::Ne) => BinOp::Ne,
                Some(Token::Lt) => BinOp::Lt,
                Some(Token::Le) => BinOp::Le,
                Some(Token::Gt) => BinOp::Gt,
                Some(Token::Ge) => BinOp::Ge,
                _ => return Ok(lhs),
            };
            self.i += 1;
            let rhs = self.additive()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn additive(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.i += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.i += 1;
            let rhs = self.power()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> Result<Expr, FormulaError> {
        let base = self.unary()?;
        if self.eat(&Token::Caret) {
            let exponent = self.power()?; // right-associative
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, FormulaError> {
        match self.peek().map(|t| &t.tok) {
            Some(Token::Minus) => {
                self.i += 1;
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            Some(Token::Plus) => {
                self.i += 1;
                Ok(Expr::Unary(UnOp::Plus, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, FormulaError> {
        let t = self.next().ok_or_else(|| self.err_here("expected an expression"))?;
        match t.tok {
            Token::Number(v) => Ok(Expr::Number(v)),
            Token::Text(s) => Ok(Expr::Text(s)),
            Token::Bool(b) => Ok(Expr::Bool(b)),
            Token::Cell(a) => {
                if self.eat(&Token::Colon) {
                    match self.next() {
                        Some(SpannedToken { tok: Token::Cell(b), .. }) => Ok(Expr::Range(a, b)),
                        _ => Err(self.err_here("expected a cell after `:`")),
                    }
                } else {
                    Ok(Expr::Cell(a))
                }
            }
            Token::Ident(name) => {
                if self.peek().map(|t| &t.tok) == Some(&Token::LParen) {
                    self.i += 1;
                    let builtin = Builtin::lookup(&name).ok_or(FormulaError::UnknownFunction(name))?;
                    let args = self.arglist(builtin)?;
                    Ok(Expr::Call(builtin, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Token::LParen => {
                let inner = self.comparison()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.err_here("expected `)`"));
                }
                Ok(inner)
            }
            other => Err(FormulaError::Syntax { pos: t.pos, msg: format!("unexpected token `{other:?}`") }),
        }
    }

    fn arglist(&mut self, builtin: Builtin) -> Result<Vec<Arg>, FormulaError> {
        let mut args = Vec::new();
        if self.eat(&Token::RParen) {
            return check_arity(builtin, args);
        }
        loop {
            let at_sep = matches!(self.peek().map(|t| &t.tok), Some(Token::Comma) | Some(Token::RParen));
            if at_sep {
                args.push(Arg::Empty);
            } else {
                args.push(Arg::Expr(self.comparison()?));
            }
            match self.next() {
                Some(SpannedToken { tok: Token::Comma, .. }) => continue,
                Some(SpannedToken { tok: Token::RParen, .. }) => break,
                _ => return Err(self.err_here("expected `,` or `)` in argument list")),
            }
        }
        check_arity(builtin, args)
    }
}

fn check_arity(builtin: Builtin, args: Vec<Arg>) -> Result<Vec<Arg>, FormulaError> {
    let (lo, hi) = builtin.arity();
    if args.len() < lo || args.len() > hi {
        let expected = if hi == usize::MAX {
            format!("at least {lo}")
        } else if lo == hi {
            format!("{lo}")
        } else {
            format!("{lo} to {hi}")
        };
        return Err(FormulaError::BadArity { func: builtin.name(), expected, got: args.len() });
    }
    let empty_ok_from = builtin.empty_args_from();
    for (i, a) in args.iter().enumerate() {
        if matches!(a, Arg::Empty) && empty_ok_from.map_or(true, |from| i < from) {
            return Err(FormulaError::EmptyArg { func: builtin.name() });
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::format_expr;

    #[test]
    fn precedence_unary_minus_vs_power() {
        // -2^2 reads as (-2)^2, matching spreadsheet convention.
        let e = parse_formula("=-2^2").unwrap();
        assert_eq!(format_expr(&e), "-2^2");
        match e {
            Expr::Binary(BinOp::Pow, base, _) => assert!(matches!(*base, Expr::Unary(UnOp::Neg, _))),
            other => panic!("expected power at root, got {other:?}"),
        }
        // ...but binary minus is weaker: 1-x^2 is 1-(x^2).
        let e = parse_formula("1-A1^2").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn exponent_accepts_unary_and_right_associates() {
        assert_eq!(format_expr(&parse_formula("2^-3").unwrap()), "2^-3");
        let e = parse_formula("2^3^2").unwrap();
        // Right associative: 2^(3^2).
        match e {
            Expr::Binary(BinOp::Pow, _, rhs) => assert!(matches!(*rhs, Expr::Binary(BinOp::Pow, _, _))),
            other => panic!("expected right-nested power, got {other:?}"),
        }
    }

    #[test]
    fn comparisons_bind_loosest() {
        let e = parse_formula("ru=0").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Eq, _, _)));
        let e = parse_formula("A1+1>B1*2").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Gt, _, _)));
    }

    #[test]
    fn trailing_empty_offset_args_are_omitted() {
        let e = parse_formula("OFFSET(TrData,itc,)").unwrap();
        match &e {
            Expr::Call(Builtin::Offset, args) => {
                assert_eq!(args.len(), 3);
                assert!(matches!(args[2], Arg::Empty));
            }
            other => panic!("expected OFFSET call, got {other:?}"),
        }
        // Empty arguments are not allowed elsewhere.
        assert!(matches!(parse_formula("MOD(1,)"), Err(FormulaError::EmptyArg { .. })));
        assert!(matches!(parse_formula("OFFSET(,1,1)"), Err(FormulaError::EmptyArg { .. })));
    }

    #[test]
    fn unknown_functions_are_rejected() {
        assert_eq!(parse_formula("TRANPOSE(A1)"), Err(FormulaError::UnknownFunction("TRANPOSE".into())));
        assert_eq!(parse_formula("LINEST(A1:B2)"), Err(FormulaError::UnknownFunction("LINEST".into())));
    }

    #[test]
    fn arity_is_checked_at_parse_time() {
        assert!(matches!(parse_formula("MMULT(A1:B2)"), Err(FormulaError::BadArity { .. })));
        assert!(matches!(parse_formula("RAND(1)"), Err(FormulaError::BadArity { .. })));
        assert!(matches!(parse_formula("IF(A1,1)"), Err(FormulaError::BadArity { .. })));
        assert!(parse_formula("SUM(1,2,3,4,5)").is_ok());
    }

    #[test]
    fn case_insensitive_functions() {
        assert_eq!(format_expr(&parse_formula("tanh(a1)").unwrap()), "TANH(A1)");
        assert_eq!(format_expr(&parse_formula("=if(true,1,2)").unwrap()), "IF(TRUE,1,2)");
    }

    #[test]
    fn ranges_and_names() {
        assert_eq!(format_expr(&parse_formula("C9:F11").unwrap()), "C9:F11");
        assert!(matches!(parse_formula("w_1A").unwrap(), Expr::Name(_)));
        assert!(parse_formula("A1:").is_err());
        assert!(parse_formula("A1:name").is_err());
    }
}
