//! Textual grammar for nonlinearities.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 's' | ident | '(' expr ')' | call
//! call    := name '(' args ')'
//! ```
//!
//! `a^b` is the same as `pow(a,b)` (right associative, binds tighter
//! than unary minus). Functions: `pow(a,b)`, `log`, `exp`, `sin`, `cos`, `abs`, `min(a,b)`,
//! `max(a,b)`, `ilog(m,K,x)` (iterated log `log_m(K+x)`),
//! `piecewise(e0, b1, e1, b2, e2, ...)` and
//! `pwpow(e0, lnb1, lnv1, e1, lnb2, e2, ...)` (log-anchored piecewise power;
//! only the first anchor value is given, the rest follow by continuity).
//! Other identifiers are looked up in the parameter map. `pi` is predefined.
//!
//! Printing uses the shortest round-trip float representation, so
//! `parse(print(e)) == e` for every tree.

use std::collections::BTreeMap;
use std::fmt;

use super::expr::{Expr, PiecewisePower};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Parse { position: start, message: format!("bad number '{text}'") })?;
                out.push((start, Token::Num(v)));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            _ => return Err(Error::Parse { position: i, message: format!("unexpected character '{c}'") }),
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    params: &'a BTreeMap<String, f64>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.offset(), message: message.into() })
    }

    fn expect(&mut self, tok: Token) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {tok:?}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = lhs * self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            // A literal directly after '-' is a negative constant.
            if let Some(Token::Num(v)) = self.peek() {
                if self.tokens.get(self.pos + 1).map(|(_, t)| t) != Some(&Token::Caret) {
                    let v = *v;
                    self.pos += 1;
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Token::LParen) {
                    self.pos += 1;
                    let args = self.args()?;
                    self.call(&name, args)
                } else if name == "s" {
                    Ok(Expr::Var)
                } else if name == "pi" {
                    Ok(Expr::Const(std::f64::consts::PI))
                } else if let Some(v) = self.params.get(&name) {
                    Ok(Expr::Const(*v))
                } else {
                    self.pos -= 1;
                    self.err(format!("unknown identifier '{name}'"))
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            match self.peek() {
                Some(Token::Comma) => self.pos += 1,
                Some(Token::RParen) => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
    }

    fn number(&self, e: &Expr, what: &str) -> Result<f64> {
        if !e.is_constant() {
            return self.err(format!("{what} must be a constant"));
        }
        Ok(e.eval_scalar(f64::NAN))
    }

    fn call(&self, name: &str, mut args: Vec<Expr>) -> Result<Expr> {
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse { position: self.offset(), message: format!("{name} takes {n} argument(s), got {}", args.len()) })
            }
        };
        match name {
            "pow" => {
                arity(2)?;
                let e = args.pop().unwrap();
                let b = args.pop().unwrap();
                Ok(b.pow(e))
            }
            "min" | "max" => {
                arity(2)?;
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(if name == "min" { a.min(b) } else { a.max(b) })
            }
            "log" | "exp" | "sin" | "cos" | "abs" => {
                arity(1)?;
                let a = args.pop().unwrap();
                Ok(match name {
                    "log" => a.ln(),
                    "exp" => a.exp(),
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    _ => a.abs(),
                })
            }
            "ilog" => {
                arity(3)?;
                let arg = args.pop().unwrap();
                let shift = self.number(&args[1], "ilog shift")?;
                let depth = self.number(&args[0], "ilog depth")?;
                if depth.fract() != 0.0 || depth < 1.0 {
                    return self.err("ilog depth must be a positive integer");
                }
                arg.iterated_log(depth as u32, shift)
            }
            "piecewise" => {
                if args.len() < 3 || args.len().is_multiple_of(2) {
                    return self.err("piecewise(e0, b1, e1, ...) needs an odd number >= 3 of arguments");
                }
                let mut pieces = Vec::new();
                let mut breaks = Vec::new();
                for (i, a) in args.into_iter().enumerate() {
                    if i % 2 == 0 {
                        pieces.push(a);
                    } else {
                        breaks.push(self.number(&a, "breakpoint")?);
                    }
                }
                Expr::piecewise(breaks, pieces)
            }
            "pwpow" => {
                if args.len() < 4 || !(args.len() - 4).is_multiple_of(2) {
                    return self.err("pwpow(e0, lnb1, lnv1, e1, lnb2, e2, ...) has a malformed argument list");
                }
                let nums = args.iter().map(|a| self.number(a, "pwpow argument")).collect::<Result<Vec<f64>>>()?;
                let mut exponents = vec![nums[0], nums[3]];
                let mut ln_breaks = vec![nums[1]];
                let ln_first = nums[2];
                for pair in nums[4..].chunks(2) {
                    ln_breaks.push(pair[0]);
                    exponents.push(pair[1]);
                }
                Ok(Expr::PiecewisePower(PiecewisePower::from_exponents(ln_breaks, ln_first, exponents)?))
            }
            _ => self.err(format!("unknown function '{name}'")),
        }
    }
}

/// Parses an expression in `s` without free parameters.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with_params(src, &BTreeMap::new())
}

/// Parses an expression, substituting named parameters by their values.
pub fn parse_with_params(src: &str, params: &BTreeMap<String, f64>) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, params, end: src.len() };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// printing

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        // Negative literals print with a leading '-' and bind like a unary.
        Expr::Neg(_) => 3,
        Expr::Const(c) if c.is_sign_negative() => 3,
        _ => 4,
    }
}

fn num(c: f64) -> String {
    format!("{c:?}")
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, b: &Expr, op: &str, prec: u8| -> fmt::Result {
        if precedence(a) < prec {
            write!(f, "(")?;
            write_expr(a, f)?;
            write!(f, ")")?;
        } else {
            write_expr(a, f)?;
        }
        write!(f, "{op}")?;
        // Right operand needs parentheses at equal precedence (left-assoc),
        // and a negative literal on the right is fine as is.
        if precedence(b) <= prec {
            write!(f, "(")?;
            write_expr(b, f)?;
            write!(f, ")")
        } else {
            write_expr(b, f)
        }
    };
    match e {
        Expr::Const(c) => write!(f, "{}", num(*c)),
        Expr::Var => write!(f, "s"),
        Expr::Neg(a) => {
            write!(f, "-(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Expr::Add(a, b) => binary(f, a, b, "+", 1),
        Expr::Sub(a, b) => binary(f, a, b, "-", 1),
        Expr::Mul(a, b) => binary(f, a, b, "*", 2),
        Expr::Div(a, b) => binary(f, a, b, "/", 2),
        Expr::Pow(a, b) => {
            write!(f, "pow(")?;
            write_expr(a, f)?;
            write!(f, ",")?;
            write_expr(b, f)?;
            write!(f, ")")
        }
        Expr::Log(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Abs(a) => {
            let name = match e {
                Expr::Log(_) => "log",
                Expr::Exp(_) => "exp",
                Expr::Sin(_) => "sin",
                Expr::Cos(_) => "cos",
                _ => "abs",
            };
            write!(f, "{name}(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Expr::Min(a, b) | Expr::Max(a, b) => {
            write!(f, "{}(", if matches!(e, Expr::Min(..)) { "min" } else { "max" })?;
            write_expr(a, f)?;
            write!(f, ",")?;
            write_expr(b, f)?;
            write!(f, ")")
        }
        Expr::IteratedLog { depth, shift, arg } => {
            write!(f, "ilog({depth},{},", num(*shift))?;
            write_expr(arg, f)?;
            write!(f, ")")
        }
        Expr::Piecewise { breaks, pieces } => {
            write!(f, "piecewise(")?;
            write_expr(&pieces[0], f)?;
            for (b, p) in breaks.iter().zip(&pieces[1..]) {
                write!(f, ",{},", num(*b))?;
                write_expr(p, f)?;
            }
            write!(f, ")")
        }
        Expr::PiecewisePower(pw) => {
            write!(f, "pwpow({},{},{},{}", num(pw.exponents[0]), num(pw.ln_breaks[0]), num(pw.ln_values[0]), num(pw.exponents[1]))?;
            for (b, e) in pw.ln_breaks[1..].iter().zip(&pw.exponents[2..]) {
                write!(f, ",{},{}", num(*b), num(*e))?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}
