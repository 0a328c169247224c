//! Recursive-descent parser for rational-function expressions.
//!
//! Grammar (juxtaposition such as `2x` is read as multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | atom-start unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := integer | var | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::One;

use super::poly::Poly;
use super::ratfn::RatFn;
use super::scalar::Rat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            toks.push(Tok::Int(digits.parse().expect("ascii digits")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            toks.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatFn> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFn> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = acc.checked_div(&d)?;
            } else if matches!(
                self.peek(),
                Some(Tok::Int(_) | Tok::Ident(_) | Tok::Op('('))
            ) {
                acc = &acc * &self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFn> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFn> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let e: i64 = n
                    .try_into()
                    .map_err(|_| Error::Parse("exponent too large".into()))?;
                base.pow(if neg { -e } else { e })
            }
            other => Err(Error::Parse(format!(
                "expected integer exponent, found {other:?}"
            ))),
        }
    }

    fn atom(&mut self) -> Result<RatFn> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(RatFn::constant(Rat::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == self.var {
                    Ok(RatFn::from_poly(Poly::monomial(Rat::one(), 1)))
                } else {
                    Err(Error::Parse(format!(
                        "unknown symbol {name:?} (variable is {:?})",
                        self.var
                    )))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

pub(crate) fn parse_ratfn(s: &str, var: &str) -> Result<RatFn> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, var };
    let value = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {:?}",
            p.toks[p.pos]
        )));
    }
    Ok(value)
}

/// Parses a rational constant such as `-3/4`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let value = parse_ratfn(s, "\u{0}")?;
    value
        .as_constant()
        .ok_or_else(|| Error::Parse(format!("{s:?} is not a constant")))
}
