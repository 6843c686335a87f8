//! Recursive-descent parser for series expressions.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := integer | 'x' | 'log' '(' sum ')' | 'O' '(' sum ')' | '(' sum ')'
//! ```
//!
//! Power exponents must fold to rational constants. `O(m)` stands for the
//! unknown tail at and below the monomial `m`.

use std::fmt;

use malachite_base::num::arithmetic::traits::Pow;
use malachite_nz::integer::Integer;
use thiserror::Error;

use crate::exponents::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Rational(Q),
    X,
    Log(Box<Expr>),
    /// Truncation marker `O(m)`.
    BigO(Box<Expr>),
    Power(Box<Expr>, Q),
    Neg(Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rational(r) => write!(f, "{r}"),
            Expr::X => f.write_str("x"),
            Expr::Log(e) => write!(f, "log({e})"),
            Expr::BigO(e) => write!(f, "O({e})"),
            Expr::Power(b, r) => write!(f, "({b})^({r})"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Sum(a, b) => write!(f, "({a} + {b})"),
            Expr::Difference(a, b) => write!(f, "({a} - {b})"),
            Expr::Product(a, b) => write!(f, "({a} * {b})"),
            Expr::Quotient(a, b) => write!(f, "({a} / {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(Integer),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(n) => write!(f, "{n}"),
            Token::Ident(s) => write!(f, "{s:?}"),
            Token::Sym(c) => write!(f, "'{c}'"),
            Token::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(input: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut end = at;
            while let Some(&(i, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                end = i + d.len_utf8();
                chars.next();
            }
            let n = input[at..end].parse().map_err(|_| SyntaxError {
                offset: at,
                expected: vec!["integer"],
                found: input[at..end].to_string(),
            })?;
            out.push((at, Token::Int(n)));
        } else if c.is_alphabetic() {
            let mut end = at;
            while let Some(&(i, d)) = chars.peek().filter(|(_, d)| d.is_alphanumeric() || *d == '_') {
                end = i + d.len_utf8();
                chars.next();
            }
            out.push((at, Token::Ident(input[at..end].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((at, Token::Sym(c)));
            chars.next();
        } else {
            return Err(SyntaxError { offset: at, expected: vec!["operator", "operand"], found: format!("{c:?}") });
        }
    }
    out.push((input.len(), Token::End));
    Ok(out)
}

const OPERAND: [&str; 6] = ["integer", "'x'", "'log'", "'O'", "'('", "'-'"];

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn error(&self, expected: &[&'static str]) -> SyntaxError {
        SyntaxError { offset: self.offset(), expected: expected.to_vec(), found: self.peek().to_string() }
    }

    fn eat(&mut self, c: char) -> bool {
        let hit = *self.peek() == Token::Sym(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn sum(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Sum(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Difference(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Product(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Quotient(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.offset();
        let exponent = self.unary()?;
        let r = fold_constant(&exponent).ok_or_else(|| SyntaxError {
            offset: at,
            expected: vec!["rational exponent"],
            found: exponent.to_string(),
        })?;
        Ok(Expr::Power(Box::new(base), r))
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Token::Int(n) => {
                self.pos += 1;
                Ok(Expr::Rational(Q::from(n)))
            }
            Token::Ident(name) if name == "x" => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Token::Ident(name) if name == "log" || name == "O" => {
                self.pos += 1;
                self.expect('(', "'('")?;
                let arg = Box::new(self.sum()?);
                self.expect(')', "')'")?;
                Ok(if name == "log" { Expr::Log(arg) } else { Expr::BigO(arg) })
            }
            Token::Sym('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(')', "')'")?;
                Ok(inner)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }
}

/// Value of an expression built from rational constants only.
pub fn fold_constant(e: &Expr) -> Option<Q> {
    Some(match e {
        Expr::Rational(r) => r.clone(),
        Expr::Neg(a) => -fold_constant(a)?,
        Expr::Sum(a, b) => fold_constant(a)? + fold_constant(b)?,
        Expr::Difference(a, b) => fold_constant(a)? - fold_constant(b)?,
        Expr::Product(a, b) => fold_constant(a)? * fold_constant(b)?,
        Expr::Quotient(a, b) => {
            let d = fold_constant(b)?;
            if d == 0u32 {
                return None;
            }
            fold_constant(a)? / d
        }
        Expr::Power(a, r) => {
            let n = i64::try_from(r).ok()?;
            let base = fold_constant(a)?;
            if base == 0u32 && n < 0 {
                return None;
            }
            base.pow(n)
        }
        Expr::X | Expr::Log(_) | Expr::BigO(_) => return None,
    })
}

pub fn parse(input: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser { tokens: tokenize(input)?, pos: 0 };
    let e = p.sum()?;
    match p.peek() {
        Token::End => Ok(e),
        _ => Err(p.error(&["operator", "end of input"])),
    }
}
