use super::{Func, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub(super) enum TokenKind {
    /// `integral` is set when the literal is a plain digit string.
    Number { value: f64, integral: bool },
    Var,
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl TokenKind {
    pub(super) fn describe(&self) -> String {
        match self {
            TokenKind::Number { value, .. } => format!("number {value}"),
            TokenKind::Var => "'q'".into(),
            TokenKind::Func(f) => format!("function '{}'", f.name()),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

/// A token with its 0-based byte offset.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

pub(super) struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            let tok = self.next_token()?;
            let done = tok.kind == TokenKind::Eof;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        while self.peek_byte().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let offset = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok(Token {
                kind: TokenKind::Eof,
                offset,
            });
        };
        let single = match b {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            self.pos += 1;
            return Ok(Token { kind, offset });
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(offset);
        }
        if b.is_ascii_alphabetic() {
            while self.peek_byte().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                self.pos += 1;
            }
            let word = &self.src[offset..self.pos];
            let kind = if word == "q" {
                TokenKind::Var
            } else if let Some(f) = Func::from_name(word) {
                TokenKind::Func(f)
            } else {
                return Err(ParseError::Lexical {
                    position: offset + 1,
                    message: format!("unknown identifier '{word}'"),
                });
            };
            return Ok(Token { kind, offset });
        }
        let ch = self.src[offset..].chars().next().unwrap_or('?');
        Err(ParseError::Lexical {
            position: offset + 1,
            message: format!("unexpected character '{ch}'"),
        })
    }

    fn number(&mut self, offset: usize) -> Result<Token, ParseError> {
        let digits = |lx: &mut Self| {
            let start = lx.pos;
            while lx.peek_byte().is_some_and(|b| b.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - start
        };
        let mut integral = true;
        let mut count = digits(self);
        if self.peek_byte() == Some(b'.') {
            integral = false;
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(ParseError::Lexical {
                position: offset + 1,
                message: "malformed number".into(),
            });
        }
        if matches!(self.peek_byte(), Some(b'e' | b'E')) {
            integral = false;
            self.pos += 1;
            if matches!(self.peek_byte(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(ParseError::Lexical {
                    position: self.pos + 1,
                    message: "missing digits in exponent".into(),
                });
            }
        }
        let text = &self.src[offset..self.pos];
        let value: f64 = text.parse().map_err(|_| ParseError::Lexical {
            position: offset + 1,
            message: format!("malformed number '{text}'"),
        })?;
        Ok(Token {
            kind: TokenKind::Number { value, integral },
            offset,
        })
    }
}
