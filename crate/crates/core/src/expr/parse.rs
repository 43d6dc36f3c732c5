use thiserror::Error;

use super::{Expr, Function, Terminal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{token}` at byte {offset}")]
    UnknownSymbol { token: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} arguments, found {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownSymbol { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Number(&'a str),
    LParen,
    RParen,
    Comma,
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' | b'-' | b'*' | b'/' => Tok::Op(c as char),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = scan(bytes, start, |b| b.is_ascii_alphanumeric() || b == b'_');
                self.pos = end;
                return Ok((Tok::Ident(&self.src[start..end]), start));
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let end = scan(bytes, start, |b| {
                    b.is_ascii_alphanumeric() || b == b'.' || b == b'_'
                });
                self.pos = end;
                return Ok((Tok::Number(&self.src[start..end]), start));
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

fn scan(bytes: &[u8], start: usize, keep: impl Fn(u8) -> bool) -> usize {
    let mut end = start;
    while end < bytes.len() && keep(bytes[end]) {
        end += 1;
    }
    end
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok<'a>, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<&(Tok<'a>, usize), ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    fn bump(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next(),
        }
    }

    fn expect(&mut self, want: Tok<'static>, what: &str) -> Result<usize, ParseError> {
        let (tok, off) = self.bump()?;
        if tok == want {
            Ok(off)
        } else {
            Err(unexpected(&tok, off, what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let f = match self.peek()?.0 {
                Tok::Op('+') => Function::Add,
                Tok::Op('-') => Function::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::node(f, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let f = match self.peek()?.0 {
                Tok::Op('*') => Function::Mul,
                Tok::Op('/') => Function::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.factor()?;
            lhs = Expr::node(f, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let (tok, off) = self.bump()?;
        match tok {
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let is_call = self.peek()?.0 == Tok::LParen;
                if is_call {
                    let f = match name {
                        "min" => Function::Min,
                        "max" => Function::Max,
                        _ => {
                            return Err(ParseError::UnknownSymbol {
                                token: name.to_string(),
                                offset: off,
                            })
                        }
                    };
                    self.bump()?;
                    self.call(f, name, off)
                } else if let Some(t) = Terminal::from_symbol(name) {
                    Ok(Expr::Leaf(t))
                } else if name == "min" || name == "max" {
                    Err(ParseError::Syntax {
                        offset: off,
                        message: format!("`{name}` must be followed by `(`"),
                    })
                } else {
                    Err(ParseError::UnknownSymbol {
                        token: name.to_string(),
                        offset: off,
                    })
                }
            }
            Tok::Number(text) => Err(ParseError::UnknownSymbol {
                token: text.to_string(),
                offset: off,
            }),
            other => Err(unexpected(&other, off, "a terminal, `min(`, `max(` or `(`")),
        }
    }

    fn call(&mut self, f: Function, name: &str, off: usize) -> Result<Expr, ParseError> {
        let mut args = vec![self.expr()?];
        loop {
            let (tok, at) = self.bump()?;
            match tok {
                Tok::Comma => args.push(self.expr()?),
                Tok::RParen => break,
                other => return Err(unexpected(&other, at, "`,` or `)`")),
            }
        }
        if args.len() != f.arity() {
            return Err(ParseError::Arity {
                name: name.to_string(),
                offset: off,
                expected: f.arity(),
                found: args.len(),
            });
        }
        let b = args.pop().expect("two args");
        let a = args.pop().expect("two args");
        Ok(Expr::node(f, a, b))
    }
}

fn unexpected(tok: &Tok<'_>, offset: usize, what: &str) -> ParseError {
    let found = match tok {
        Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    };
    ParseError::Syntax {
        offset,
        message: format!("expected {what}, found {found}"),
    }
}

/// Parses the infix rule grammar:
///
/// ```text
/// expr   := term (("+" | "-") term)*
/// term   := factor (("*" | "/") factor)*
/// factor := TERMINAL | "min(" expr "," expr ")" | "max(" expr "," expr ")" | "(" expr ")"
/// ```
///
/// Numeric literals are not part of the language.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        peeked: None,
    };
    let e = p.expr()?;
    let (tok, off) = p.bump()?;
    if tok != Tok::End {
        return Err(unexpected(&tok, off, "end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::format;
    use crate::expr::Terminal::*;

    #[test]
    fn parses_call() {
        let e = parse("max(PT, WIQ)").unwrap();
        assert_eq!(e, Expr::node(Function::Max, Expr::Leaf(Pt), Expr::Leaf(Wiq)));
    }

    #[test]
    fn precedence() {
        let e = parse("(PT + WIQ) / NIQ").unwrap();
        assert_eq!(
            e,
            Expr::node(
                Function::Div,
                Expr::node(Function::Add, Expr::Leaf(Pt), Expr::Leaf(Wiq)),
                Expr::Leaf(Niq)
            )
        );
        assert_eq!(format(&parse("PT + WIQ * NIQ").unwrap()), "(PT + (WIQ * NIQ))");
        assert_eq!(format(&parse("PT - WIQ - NIQ").unwrap()), "((PT - WIQ) - NIQ)");
        assert_eq!(format(&parse("PT / W * rDD").unwrap()), "((PT / W) * rDD)");
    }

    #[test]
    fn unknown_function() {
        assert_eq!(
            parse("foo(PT)").unwrap_err(),
            ParseError::UnknownSymbol { token: "foo".into(), offset: 0 }
        );
        assert_eq!(
            parse("PT + exp(PT)").unwrap_err(),
            ParseError::UnknownSymbol { token: "exp".into(), offset: 5 }
        );
    }

    #[test]
    fn unknown_terminal_and_case() {
        assert_eq!(
            parse("max(PT, wiq)").unwrap_err(),
            ParseError::UnknownSymbol { token: "wiq".into(), offset: 8 }
        );
        assert!(matches!(parse("RDD").unwrap_err(), ParseError::UnknownSymbol { .. }));
        assert!(parse("rDD").is_ok());
    }

    #[test]
    fn literals_rejected() {
        assert_eq!(
            parse("PT * 2.5").unwrap_err(),
            ParseError::UnknownSymbol { token: "2.5".into(), offset: 5 }
        );
    }

    #[test]
    fn arity() {
        assert_eq!(
            parse("min(PT)").unwrap_err(),
            ParseError::Arity { name: "min".into(), offset: 0, expected: 2, found: 1 }
        );
        assert!(matches!(
            parse("max(PT, W, NIQ)").unwrap_err(),
            ParseError::Arity { found: 3, .. }
        ));
    }

    #[test]
    fn syntax_errors_are_located() {
        assert_eq!(parse("PT +").unwrap_err().offset(), 4);
        assert_eq!(parse("(PT + W").unwrap_err().offset(), 7);
        assert_eq!(parse("PT W").unwrap_err().offset(), 3);
        assert_eq!(parse("PT $ W").unwrap_err().offset(), 3);
        assert_eq!(parse("").unwrap_err().offset(), 0);
        assert!(matches!(parse("min + PT").unwrap_err(), ParseError::Syntax { .. }));
        assert!(matches!(parse("-PT").unwrap_err(), ParseError::Syntax { .. }));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" min( PT ,\n\tW ) ").unwrap(), parse("min(PT,W)").unwrap());
    }
}
