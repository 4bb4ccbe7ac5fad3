//! A small closed expression language for the integrand `f(x)`.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;            (* right-associative *)
//! primary = number | "x" | "(" expr ")"
//!         | func1 "(" expr ")"
//!         | func2 "(" expr "," expr ")" ;
//! func1   = "exp" | "ln" | "abs" | "sin" | "cos" | "sqrt" ;
//! func2   = "min" | "max" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! Whitespace between tokens is ignored.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("non-finite result at x = {x}")]
    NonFinite { x: f64 },
    #[error("negative base {base} raised to non-integer power {exponent} at x = {x}")]
    ComplexPower { x: f64, base: f64, exponent: f64 },
}

impl EvalError {
    /// The evaluation point that triggered the failure.
    pub fn x(&self) -> f64 {
        match *self {
            EvalError::NonFinite { x } | EvalError::ComplexPower { x, .. } => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Abs,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Abs => v.abs(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates at `x`, failing on the first non-finite intermediate.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Expr::Sub(l, r) => l.eval(x)? - r.eval(x)?,
            Expr::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Expr::Div(l, r) => l.eval(x)? / r.eval(x)?,
            Expr::Pow(l, r) => {
                let base = l.eval(x)?;
                let exponent = r.eval(x)?;
                if base < 0.0 && exponent.fract() != 0.0 {
                    return Err(EvalError::ComplexPower { x, base, exponent });
                }
                base.powf(exponent)
            }
            Expr::Call(func, e) => func.apply(e.eval(x)?),
            Expr::Min(l, r) => l.eval(x)?.min(r.eval(x)?),
            Expr::Max(l, r) => l.eval(x)?.max(r.eval(x)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Serializes with the minimal parenthesization that reparses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let infix = |f: &mut fmt::Formatter<'_>, l: &Expr, op: &str, r: &Expr, prec: u8| {
            write_operand(f, l, l.precedence() < prec)?;
            write!(f, " {op} ")?;
            write_operand(f, r, r.precedence() <= prec)
        };
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "({v})"),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_operand(f, e, e.precedence() < 3)
            }
            Expr::Add(l, r) => infix(f, l, "+", r, 1),
            Expr::Sub(l, r) => infix(f, l, "-", r, 1),
            Expr::Mul(l, r) => infix(f, l, "*", r, 2),
            Expr::Div(l, r) => infix(f, l, "/", r, 2),
            Expr::Pow(l, r) => {
                write_operand(f, l, l.precedence() <= 4)?;
                f.write_str("^")?;
                write_operand(f, r, r.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Min(l, r) => write!(f, "min({l}, {r})"),
            Expr::Max(l, r) => write!(f, "max({l}, {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::End => "end of input".into(),
        }
    }
}

const EXPECT_OPERAND: &[&str] = &["number", "`x`", "function name", "`(`", "`-`"];
const EXPECT_OPERATOR: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac_start {
                    return Err(ParseError::Syntax {
                        offset: i,
                        expected: vec!["digit"],
                        found: found_at(src, i),
                    });
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                let exp_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == exp_start {
                    return Err(ParseError::Syntax {
                        offset: i,
                        expected: vec!["exponent digits"],
                        found: found_at(src, i),
                    });
                }
            }
            let value: f64 = src[start..i].parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: vec!["number"],
                found: src[start..i].to_string(),
            })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["finite number"],
                    found: src[start..i].to_string(),
                });
            }
            out.push((Token::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(src[start..i].to_string()), start));
            continue;
        }
        return Err(ParseError::Syntax {
            offset: start,
            expected: EXPECT_OPERAND.to_vec(),
            found: found_at(src, start),
        });
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

fn found_at(src: &str, offset: usize) -> String {
    match src[offset..].chars().next() {
        Some(c) => format!("`{c}`"),
        None => "end of input".into(),
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Token, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                let unary = match name.as_str() {
                    "x" => {
                        self.bump();
                        return Ok(Expr::X);
                    }
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    "abs" => Some(Func::Abs),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "sqrt" => Some(Func::Sqrt),
                    "min" | "max" => None,
                    _ => return Err(ParseError::UnknownIdentifier { name, offset }),
                };
                self.bump();
                self.expect(Token::LParen, "`(`")?;
                let first = self.expr()?;
                let node = match unary {
                    Some(func) => Expr::Call(func, Box::new(first)),
                    None => {
                        self.expect(Token::Comma, "`,`")?;
                        let second = self.expr()?;
                        if name == "min" {
                            Expr::Min(Box::new(first), Box::new(second))
                        } else {
                            Expr::Max(Box::new(first), Box::new(second))
                        }
                    }
                };
                self.expect(Token::RParen, "`)`")?;
                Ok(node)
            }
            _ => Err(self.error(EXPECT_OPERAND)),
        }
    }
}

/// Parses an expression in the variable `x`.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(src)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(EXPECT_OPERATOR));
    }
    Ok(expr)
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("power transform exponent must be at least 1, got {0}")]
pub struct ExponentError(pub f64);

/// A parsed integrand together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    source: String,
    expr: Expr,
}

impl FunctionSpec {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Ok(Self {
            source: source.to_string(),
            expr: parse_expr(source)?,
        })
    }

    pub fn from_expr(expr: Expr) -> Self {
        Self {
            source: expr.to_string(),
            expr,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.expr.eval(x)
    }

    /// Builds `|f|^s`.
    pub fn power_transform(&self, s: f64) -> Result<FunctionSpec, ExponentError> {
        if !(s.is_finite() && s >= 1.0) {
            return Err(ExponentError(s));
        }
        let abs = Expr::Call(Func::Abs, Box::new(self.expr.clone()));
        Ok(Self::from_expr(Expr::Pow(
            Box::new(abs),
            Box::new(Expr::Num(s)),
        )))
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for FunctionSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval endpoints must be finite with a < b, got [{a}, {b}]")]
    Empty { a: f64, b: f64 },
    #[error("left endpoint {a} is negative; pass the negative-endpoint override to allow it")]
    NegativeLeft { a: f64 },
}

/// A closed interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    /// Requires `0 <= a < b < ∞`.
    pub fn new(a: f64, b: f64) -> Result<Self, IntervalError> {
        Self::with_override(a, b, false)
    }

    /// Like [`Interval::new`]; `allow_negative` lifts the `a >= 0` requirement.
    pub fn with_override(a: f64, b: f64, allow_negative: bool) -> Result<Self, IntervalError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(IntervalError::Empty { a, b });
        }
        if a < 0.0 && !allow_negative {
            return Err(IntervalError::NegativeLeft { a });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}
