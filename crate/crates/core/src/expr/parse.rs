//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! exponent := factor
//! base     := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//! ```
//!
//! `^` is right-associative. Unary minus binds to a `base`, so `-x^2` reads
//! as `(-x)^2`; write `-(x^2)` for the other reading.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Expr, Func, Kind, Number};

#[derive(Clone, Debug, PartialEq)]
pub enum ParseError {
    /// Malformed input; `pos` is a character offset.
    Syntax { pos: usize, message: String },
    /// An identifier that is neither a declared coordinate nor a function.
    UnknownIdentifier { pos: usize, name: String },
    /// A decimal literal with more digits than an exact `i64` rational holds.
    LiteralTooLong { pos: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { pos, message } => write!(f, "syntax error at {pos}: {message}"),
            ParseError::UnknownIdentifier { pos, name } => {
                write!(f, "unknown identifier '{name}' at {pos}")
            }
            ParseError::LiteralTooLong { pos } => {
                write!(f, "numeric literal at {pos} cannot be stored exactly")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(Number),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((start, tok));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_end = i;
            let mut frac_len = 0;
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    frac_len += 1;
                }
            }
            if int_end == start && frac_len == 0 {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: "expected digits".to_string(),
                });
            }
            let digits: String = chars[start..i].iter().filter(|c| **c != '.').collect();
            let mantissa: i64 = digits
                .parse()
                .map_err(|_| ParseError::LiteralTooLong { pos: start })?;
            let den = 10i64
                .checked_pow(frac_len)
                .ok_or(ParseError::LiteralTooLong { pos: start })?;
            out.push((start, Token::Number(Number::ratio(mantissa, den))));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else {
            return Err(ParseError::Syntax {
                pos: start,
                message: alloc::format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    coordinates: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.offset(),
            message: message.to_string(),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::from_kind(Kind::Add(lhs, rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::from_kind(Kind::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::from_kind(Kind::Mul(lhs, rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::from_kind(Kind::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr::from_kind(Kind::Pow(base, exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Token::Number(n)) => {
                self.pos += 1;
                Ok(Expr::number(n))
            }
            Some(Token::Minus) => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(Expr::from_kind(Kind::Neg(inner)))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Token::RParen, "expected ')'")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Token::LParen) {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ParseError::UnknownIdentifier { pos: at, name });
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "expected ')' after function argument")?;
                    Ok(Expr::from_kind(Kind::Call(f, arg)))
                } else if self.coordinates.contains(&name) {
                    Ok(Expr::var(&name))
                } else {
                    Err(ParseError::UnknownIdentifier { pos: at, name })
                }
            }
            Some(_) => Err(self.syntax("expected a number, identifier, '(' or '-'")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

/// Parses `text`, accepting only the given coordinate names as variables.
///
/// Decimal literals become exact rationals (`0.25` is `1/4`). No folding is
/// applied, so the tree mirrors the text.
pub fn parse(text: &str, coordinates: &[String]) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
        coordinates,
    };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn coords(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0", &[]).unwrap(), Expr::int(0));
    }

    #[test]
    fn product_of_power_and_call() {
        let e = parse("x^2 * sin(y)", &coords(&["x", "y"])).unwrap();
        let Kind::Mul(lhs, rhs) = e.kind() else {
            panic!("expected product, got {e}");
        };
        assert!(matches!(lhs.kind(), Kind::Pow(_, _)));
        assert!(matches!(rhs.kind(), Kind::Call(Func::Sin, _)));
    }

    #[test]
    fn unknown_identifier_is_named() {
        let err = parse("sin(q)", &coords(&["x", "y"])).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                pos: 4,
                name: "q".to_string()
            }
        );
        let err = parse("foo(x)", &coords(&["x"])).unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { pos: 0, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert!(matches!(
            parse("x + * y", &coords(&["x", "y"])),
            Err(ParseError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse("(x", &coords(&["x"])),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
        assert!(matches!(parse("x $", &coords(&["x"])), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("", &[]), Err(ParseError::Syntax { pos: 0, .. })));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.01", &[]).unwrap(), Expr::ratio(1, 100));
        assert!(matches!(
            parse("3.14159265358979323846", &[]),
            Err(ParseError::LiteralTooLong { pos: 0 })
        ));
    }

    #[test]
    fn power_is_right_associative_and_minus_binds_to_base() {
        let c = coords(&["x"]);
        let e = parse("2^3^x", &c).unwrap();
        let Kind::Pow(_, exp) = e.kind() else { panic!() };
        assert!(matches!(exp.kind(), Kind::Pow(_, _)));
        let e = parse("-x^2", &c).unwrap();
        let Kind::Pow(base, _) = e.kind() else { panic!() };
        assert!(matches!(base.kind(), Kind::Neg(_)));
        assert!(parse("x^-2", &c).is_ok());
        assert_eq!(
            parse("a_1 * θ", &coords(&["a_1", "θ"])).unwrap().variables(),
            vec!["a_1".to_string(), "θ".to_string()]
        );
    }
}
