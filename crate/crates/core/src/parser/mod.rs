//! Superpotential expression language.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" integer)*        (right-associative)
//! atom   := number | "q" | func "(" expr ")" | "(" expr ")"
//! func   := "exp" | "sin" | "cos" | "tanh" | "sinh" | "cosh"
//! ```
//!
//! Error positions are 1-based byte columns; an error at end of input is
//! reported one past the last byte.

mod ast;
mod lexer;

pub use ast::{Expr, Func, SuperpotentialAst};

use lexer::{Lexer, Token, TokenKind};
use thiserror::Error;

use crate::lattice::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("lexical error at byte {position}: {message}")]
    Lexical { position: usize, message: String },
    #[error("syntax error at byte {position}: unbalanced parenthesis")]
    UnbalancedParenthesis { position: usize },
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("syntax error at byte {position}: exponent must be a non-negative integer")]
    NonIntegerExponent { position: usize },
}

impl ParseError {
    /// 1-based byte column of the offending input, if any.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Lexical { position, .. }
            | ParseError::UnbalancedParenthesis { position }
            | ParseError::Syntax { position, .. }
            | ParseError::NonIntegerExponent { position } => Some(*position),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("superpotential is not finite at q = {q} (grid index {index}): value {value}")]
pub struct EvalError {
    pub index: usize,
    pub q: f64,
    pub value: f64,
}

pub fn parse_superpotential(text: &str) -> Result<SuperpotentialAst, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        depth: 0,
    };
    let root = parser.expr()?;
    match parser.peek() {
        Token {
            kind: TokenKind::Eof,
            ..
        } => Ok(SuperpotentialAst::new(root)),
        Token {
            kind: TokenKind::RParen,
            offset,
        } => Err(ParseError::UnbalancedParenthesis {
            position: offset + 1,
        }),
        tok => Err(ParseError::Syntax {
            position: tok.offset + 1,
            message: format!("unexpected {}", tok.kind.describe()),
        }),
    }
}

pub fn differentiate(ast: &SuperpotentialAst) -> SuperpotentialAst {
    SuperpotentialAst::new(ast.root().derivative())
}

/// Samples the expression on every grid node.
pub fn evaluate_on_grid(ast: &SuperpotentialAst, grid: &Grid) -> Result<Vec<f64>, EvalError> {
    grid.points()
        .enumerate()
        .map(|(index, q)| {
            let value = ast.eval(q);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(EvalError { index, q, value })
            }
        })
        .collect()
}

const MAX_DEPTH: usize = 256;

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.cursor].clone();
        if !matches!(tok.kind, TokenKind::Eof) {
            self.cursor += 1;
        }
        tok
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().kind, TokenKind::Minus) {
            let tok = self.bump();
            self.enter(tok.offset)?;
            let inner = self.factor();
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        let mut exponents = Vec::new();
        while matches!(self.peek().kind, TokenKind::Caret) {
            self.bump();
            exponents.push(self.integer_exponent()?);
        }
        let Some((&last, rest)) = exponents.split_last() else {
            return Ok(base);
        };
        let mut exponent = last.0;
        for &(e, offset) in rest.iter().rev() {
            exponent = e.checked_pow(exponent).ok_or(ParseError::Syntax {
                position: offset + 1,
                message: "exponent overflow".into(),
            })?;
        }
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn integer_exponent(&mut self) -> Result<(u32, usize), ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Number { value, integral } => {
                if !integral {
                    return Err(ParseError::NonIntegerExponent {
                        position: tok.offset + 1,
                    });
                }
                // integral literals are plain digit strings
                u32::try_from(value as u64)
                    .ok()
                    .filter(|_| value <= f64::from(u32::MAX))
                    .map(|e| (e, tok.offset))
                    .ok_or(ParseError::Syntax {
                        position: tok.offset + 1,
                        message: "exponent too large".into(),
                    })
            }
            TokenKind::Minus | TokenKind::Plus => Err(ParseError::NonIntegerExponent {
                position: tok.offset + 1,
            }),
            other => Err(ParseError::Syntax {
                position: tok.offset + 1,
                message: format!("expected integer exponent, found {}", other.describe()),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Number { value, .. } => Ok(Expr::Const(value)),
            TokenKind::Var => Ok(Expr::Var),
            TokenKind::Func(func) => {
                let open = self.bump();
                if !matches!(open.kind, TokenKind::LParen) {
                    return Err(ParseError::Syntax {
                        position: open.offset + 1,
                        message: format!("expected '(' after {}", func.name()),
                    });
                }
                let inner = self.parenthesized(open.offset)?;
                Ok(Expr::Call(func, Box::new(inner)))
            }
            TokenKind::LParen => self.parenthesized(tok.offset),
            TokenKind::RParen => Err(ParseError::UnbalancedParenthesis {
                position: tok.offset + 1,
            }),
            other => Err(ParseError::Syntax {
                position: tok.offset + 1,
                message: format!("expected operand, found {}", other.describe()),
            }),
        }
    }

    /// Parses `expr ")"` after an opening parenthesis has been consumed.
    fn parenthesized(&mut self, open_offset: usize) -> Result<Expr, ParseError> {
        self.enter(open_offset)?;
        let inner = self.expr();
        self.depth -= 1;
        let inner = inner?;
        let close = self.bump();
        match close.kind {
            TokenKind::RParen => Ok(inner),
            TokenKind::Eof => Err(ParseError::UnbalancedParenthesis {
                position: close.offset + 1,
            }),
            other => Err(ParseError::Syntax {
                position: close.offset + 1,
                message: format!("expected ')', found {}", other.describe()),
            }),
        }
    }

    fn enter(&mut self, offset: usize) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return Err(ParseError::Syntax {
                position: offset + 1,
                message: "expression nested too deeply".into(),
            });
        }
        Ok(())
    }
}
