//! The expression language for target functions of `x`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*'? factor)*          // juxtaposition multiplies
//! factor := '-' factor | atom ('^' uint)?
//! atom   := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Division is rejected so every expressible function is smooth on the whole
//! real line.

use std::fmt;

use thiserror::Error;

use crate::cheb::{cheb_roots, fit_at_roots, TRIM_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowInt(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(char),
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("invalid number literal")]
    InvalidNumber,
    #[error("exponent must be a non-negative integer")]
    BadExponent,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Whether an expression is a polynomial, and its degree when it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PolyInfo {
    pub is_polynomial: bool,
    pub degree: usize,
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.unexpected(c)),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn unexpected(&self, c: u8) -> ParseError {
        match c {
            b'/' => self.err(ParseErrorKind::UnsupportedOperator('/')),
            _ => self.err(ParseErrorKind::UnexpectedChar(c as char)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => return Err(self.err(ParseErrorKind::UnsupportedOperator('/'))),
                Some(c) if c.is_ascii_alphanumeric() || c == b'.' || c == b'(' => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(ParseError { offset: start, kind: ParseErrorKind::BadExponent });
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
            let e: u32 = digits.parse().map_err(|_| ParseError { offset: start, kind: ParseErrorKind::BadExponent })?;
            return Ok(Expr::PowInt(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect_close()?;
            return Ok(inner);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                self.pos += 1;
            }
            let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
            let wrap: fn(Box<Expr>) -> Expr = match ident {
                "x" => return Ok(Expr::Var),
                "sin" => Expr::Sin,
                "cos" => Expr::Cos,
                "exp" => Expr::Exp,
                _ => return Err(ParseError { offset: start, kind: ParseErrorKind::UnknownIdent(ident.to_string()) }),
            };
            self.skip_ws();
            match self.peek() {
                Some(b'(') => self.pos += 1,
                Some(_) => return Err(self.err(ParseErrorKind::Expected("'('"))),
                None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            }
            let arg = self.expr()?;
            self.expect_close()?;
            return Ok(wrap(Box::new(arg)));
        }
        Err(self.unexpected(c))
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) if c == b'/' => Err(self.unexpected(c)),
            Some(_) => Err(self.err(ParseErrorKind::Expected("')'"))),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(ParseError { offset: start, kind: ParseErrorKind::InvalidNumber });
        }
        // An exponent only when 'e' is followed by digits, so "2exp(x)" still
        // reads as 2 * exp(x).
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let v: f64 = text.parse().map_err(|_| ParseError { offset: start, kind: ParseErrorKind::InvalidNumber })?;
        if !v.is_finite() {
            return Err(ParseError { offset: start, kind: ParseErrorKind::InvalidNumber });
        }
        Ok(Expr::Const(v))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "x"),
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::PowInt(a, e) => match **a {
                Expr::PowInt(..) => write!(f, "({a})^{e}"),
                _ => write!(f, "{a}^{e}"),
            },
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Var => x,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::PowInt(a, e) => powi(a.eval(x), *e),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Var | Expr::Const(_) => false,
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => true,
            Expr::Neg(a) | Expr::PowInt(a, _) => a.is_transcendental(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_transcendental() || b.is_transcendental(),
        }
    }

    /// Upper bound on the polynomial degree, read off the tree. Only meaningful
    /// for expressions without transcendental nodes.
    pub fn syntactic_degree(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) => a.syntactic_degree().max(b.syntactic_degree()),
            Expr::Mul(a, b) => a.syntactic_degree() + b.syntactic_degree(),
            Expr::Neg(a) => a.syntactic_degree(),
            Expr::PowInt(a, e) => a.syntactic_degree() * *e as usize,
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => 0,
        }
    }

    /// `sum a_k x^k`, with negative coefficients written through `Neg`.
    pub fn from_monomial(coeffs: &[f64]) -> Expr {
        let term = |k: usize, a: f64| -> Expr {
            let c = Expr::Const(a.abs());
            match k {
                0 => c,
                1 => Expr::Mul(Box::new(c), Box::new(Expr::Var)),
                _ => Expr::Mul(Box::new(c), Box::new(Expr::PowInt(Box::new(Expr::Var), k as u32))),
            }
        };
        let mut acc: Option<Expr> = None;
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let t = term(k, a);
            acc = Some(match (acc, a < 0.0) {
                (None, false) => t,
                (None, true) => Expr::Neg(Box::new(t)),
                (Some(s), false) => Expr::Add(Box::new(s), Box::new(t)),
                (Some(s), true) => Expr::Sub(Box::new(s), Box::new(t)),
            });
        }
        acc.unwrap_or(Expr::Const(0.0))
    }

    pub fn scaled(&self, alpha: f64) -> Expr {
        let c = Box::new(Expr::Const(alpha.abs()));
        let m = Expr::Mul(c, Box::new(self.clone()));
        if alpha < 0.0 {
            Expr::Neg(Box::new(m))
        } else {
            m
        }
    }
}

// Exponentiation by squaring, matching the jet implementation's product order.
pub(crate) fn powi(base: f64, e: u32) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        e >>= 1;
        if e > 0 {
            b *= b;
        }
    }
    result
}

pub fn eval_scalar(ast: &Expr, x: f64) -> f64 {
    ast.eval(x)
}

/// Polynomial iff no transcendental node; the degree comes from expanding in
/// the Chebyshev basis at the syntactic bound and trimming.
pub fn poly_detect(ast: &Expr) -> PolyInfo {
    if ast.is_transcendental() {
        return PolyInfo { is_polynomial: false, degree: 0 };
    }
    let bound = ast.syntactic_degree();
    let roots = cheb_roots(bound + 1).expect("positive node count");
    let samples: Vec<f64> = roots.points().iter().map(|&x| ast.eval(x)).collect();
    let series = fit_at_roots(&samples, bound).expect("matching sample count");
    PolyInfo { is_polynomial: true, degree: series.trimmed_relative(TRIM_THRESHOLD).degree() }
}
