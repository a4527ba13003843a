//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?        -- right associative
//! primary := number | ident | ident '\''* '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to a rational constant. A declared opaque function
//! may carry trailing apostrophes to name its derivatives (`f'(v)`).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::expr::{Expr, Func, BUILTIN_FUNCTIONS};
use super::ExprError;

/// Names an expression may reference.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub symbols: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

impl Scope {
    pub fn new<S: AsRef<str>>(symbols: &[S]) -> Scope {
        Scope {
            symbols: symbols.iter().map(|s| s.as_ref().to_string()).collect(),
            functions: BTreeSet::new(),
        }
    }

    pub fn with_functions<S: AsRef<str>>(mut self, functions: &[S]) -> Scope {
        self.functions.extend(functions.iter().map(|s| s.as_ref().to_string()));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Prime,
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let mut int_part = String::new();
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                int_part.push(bytes[i] as char);
                i += 1;
            }
            let mut frac_part = String::new();
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    frac_part.push(bytes[i] as char);
                    i += 1;
                }
            }
            let digits = format!("{}{}", int_part, frac_part);
            let numer: BigInt = digits.parse().map_err(|_| ExprError::Syntax {
                position: start,
                message: "malformed number".into(),
            })?;
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((start, Tok::Num(BigRational::new(numer, denom))));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '\'' => Tok::Prime,
            _ => {
                return Err(ExprError::Syntax {
                    position: start,
                    message: format!("unexpected character '{}'", c),
                })
            }
        };
        out.push((start, tok));
        i += c.len_utf8();
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { position: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let t = self.term()?;
            terms.push(if op == '-' { t.neg() } else { t });
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '/' { acc.div(rhs) } else { acc * rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            let exponent = self.unary()?;
            return match exponent.as_const() {
                Some(e) => Ok(Expr::pow(base, e.clone())),
                None => Err(ExprError::Syntax {
                    position: at,
                    message: "exponent must be a rational constant".into(),
                }),
            };
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Num(r) => {
                self.pos += 1;
                Ok(Expr::constant(r))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let mut primes = 0u32;
                while let Some(Tok::Prime) = self.peek() {
                    primes += 1;
                    self.pos += 1;
                }
                if let Some(Tok::LParen) = self.peek() {
                    let func = self.resolve_function(&name, primes)?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(match func {
                        None => arg.sqrt(),
                        Some(f) => Expr::call(f, arg),
                    });
                }
                if primes > 0 {
                    return self.err("derivative marks must be followed by a call");
                }
                if self.scope.symbols.contains(&name) {
                    Ok(Expr::sym(&name))
                } else {
                    Err(ExprError::UnknownSymbol(name))
                }
            }
            _ => self.err("expected a number, identifier or '('"),
        }
    }

    /// `None` stands for `sqrt`, which lowers to a half power.
    fn resolve_function(&self, name: &str, primes: u32) -> Result<Option<Func>, ExprError> {
        if self.scope.functions.contains(name) {
            return Ok(Some(Func::Opaque { name: name.into(), order: primes }));
        }
        if primes == 0 {
            if name == "sqrt" {
                return Ok(None);
            }
            if let Some(f) = Func::builtin(name) {
                return Ok(Some(f));
            }
        }
        Err(ExprError::UnknownSymbol(name.to_string()))
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected ')'"),
        }
    }
}

/// Parses `text` against `scope`.
pub fn parse(text: &str, scope: &Scope) -> Result<Expr, ExprError> {
    for f in &scope.functions {
        if BUILTIN_FUNCTIONS.contains(&f.as_str()) || scope.symbols.contains(f) {
            return Err(ExprError::NameClash(f.clone()));
        }
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), scope };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses a rational literal such as `3`, `-2/5` or `0.25`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let e = parse(text, &Scope::default()).ok()?;
    e.as_const().cloned()
}
