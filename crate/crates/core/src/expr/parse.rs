//! Recursive-descent parser for the statistic language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ['^' exponent]
//! atom   := integer | ident | ident '(' expr ')' | '(' expr ')'
//! exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{rat, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("exponent at {pos} is not a rational literal")]
    NonRationalExponent { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'.' || bytes[i] == b'e' || bytes[i] == b'E') {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: "decimal literals are not supported; write an exact fraction".into(),
                });
            }
            out.push((start, Tok::Int(text[start..i].parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '.' {
            return Err(ParseError::Syntax {
                pos: i,
                msg: "decimal literals are not supported; write an exact fraction".into(),
            });
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

const FUNCTIONS: [&str; 4] = ["exp", "sqrt", "Phi", "phi"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{op}`")))
        }
    }

    fn syntax(&self, msg: String) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let rhs = self.factor()?;
                acc = Expr::mul(vec![acc, rhs]);
            } else if self.eat('/') {
                let rhs = self.factor()?;
                acc = Expr::mul(vec![acc, Expr::powi(rhs, -1)]);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<BigRational, ParseError> {
        let pos = self.pos();
        let non_rational = ParseError::NonRationalExponent { pos };
        let signed_int = |p: &mut Parser| -> Result<BigInt, ParseError> {
            let neg = p.eat('-');
            match p.bump() {
                Tok::Int(i) => Ok(if neg { -i } else { i }),
                _ => Err(ParseError::NonRationalExponent { pos }),
            }
        };
        if self.eat('(') {
            let num = signed_int(self)?;
            let den = if self.eat('/') {
                match self.bump() {
                    Tok::Int(d) if !d.is_zero() => d,
                    _ => return Err(non_rational),
                }
            } else {
                BigInt::one()
            };
            if !self.eat(')') {
                return Err(non_rational);
            }
            Ok(BigRational::new(num, den))
        } else {
            Ok(BigRational::from_integer(signed_int(self)?))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(i) => Ok(Expr::Const(BigRational::from_integer(i))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    if !FUNCTIONS.contains(&name.as_str()) {
                        return Err(ParseError::UnknownIdentifier { pos, name });
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(match name.as_str() {
                        "exp" => Expr::exp(arg),
                        "sqrt" => Expr::pow(arg, rat(1, 2)),
                        "Phi" => Expr::norm_cdf(arg),
                        _ => Expr::norm_pdf(arg),
                    });
                }
                if FUNCTIONS.contains(&name.as_str()) {
                    return Err(ParseError::UnknownIdentifier { pos, name });
                }
                if let Some(idx) = var_index(&name) {
                    if idx == 0 {
                        return Err(ParseError::Syntax { pos, msg: "variable slots start at x1".into() });
                    }
                    return Ok(Expr::Var(idx));
                }
                Ok(Expr::sym(&name))
            }
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

fn var_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses `text` into a canonical expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.syntax("trailing input".into()));
    }
    Ok(e)
}
