//! The eta-quotient expression language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' '-'? int)?
//! atom     := int | 'q' | 'f' int | '(' expr ')'
//! ```
//!
//! Binding strength is `^` > unary `-` > `* /` > `+ -`, binary operators are
//! left-associative, whitespace is insignificant and there is no implicit
//! multiplication: `f2^14f8^4` is an error, `f2^14*f8^4` is not.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::pochhammer::{self, EtaError, EtaQuotient};
use crate::series::{CoefficientRing, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("evaluating `{expr}`: {source}")]
    Eval { expr: String, source: SeriesError },
    #[error("`{0}` is not a single eta quotient")]
    NotMonomial(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprAst {
    Int(BigUint),
    Q,
    /// `f_r`, with `r >= 1`.
    F(u64),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i64),
    Neg(Box<ExprAst>),
}

#[allow(clippy::should_implement_trait)]
impl ExprAst {
    pub fn int(v: u64) -> Self {
        ExprAst::Int(BigUint::from(v))
    }

    pub fn add(a: ExprAst, b: ExprAst) -> Self {
        ExprAst::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: ExprAst, b: ExprAst) -> Self {
        ExprAst::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ExprAst, b: ExprAst) -> Self {
        ExprAst::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: ExprAst, b: ExprAst) -> Self {
        ExprAst::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: ExprAst, e: i64) -> Self {
        ExprAst::Pow(Box::new(a), e)
    }

    pub fn neg(a: ExprAst) -> Self {
        ExprAst::Neg(Box::new(a))
    }

    /// Collapses a product/quotient/power of integers, `q` and `f_r` into an
    /// [`EtaQuotient`]. Sums, fractional scalars and negative powers of `q`
    /// are rejected.
    pub fn to_eta_quotient(&self) -> Result<EtaQuotient, ExprError> {
        let not_monomial = || ExprError::NotMonomial(format(self));
        match self {
            ExprAst::Int(v) => {
                let scalar = v.to_i64().ok_or_else(not_monomial)?;
                Ok(EtaQuotient::one().with_scalar(scalar))
            }
            ExprAst::Q => Ok(EtaQuotient::one().with_qshift(1)),
            ExprAst::F(r) => EtaQuotient::from_factors([(*r, 1)]).map_err(|_| not_monomial()),
            ExprAst::Mul(a, b) => Ok(a.to_eta_quotient()?.mul(&b.to_eta_quotient()?)),
            ExprAst::Div(a, b) => {
                let inv = quotient_pow(&b.to_eta_quotient()?, -1).ok_or_else(not_monomial)?;
                Ok(a.to_eta_quotient()?.mul(&inv))
            }
            ExprAst::Pow(a, e) => quotient_pow(&a.to_eta_quotient()?, *e).ok_or_else(not_monomial),
            ExprAst::Neg(a) => {
                let inner = a.to_eta_quotient()?;
                let scalar = inner.scalar().checked_neg().ok_or_else(not_monomial)?;
                Ok(inner.with_scalar(scalar))
            }
            ExprAst::Add(..) | ExprAst::Sub(..) => Err(not_monomial()),
        }
    }
}

/// `eq^e`, or `None` when the power leaves the monomial form (a non-unit
/// scalar or a `q` factor under a negative exponent, or overflow).
fn quotient_pow(eq: &EtaQuotient, e: i64) -> Option<EtaQuotient> {
    if e < 0 && (eq.scalar().abs() != 1 || eq.qshift() != 0) {
        return None;
    }
    let scalar = if e < 0 {
        if e % 2 == 0 {
            1
        } else {
            eq.scalar()
        }
    } else {
        eq.scalar().checked_pow(u32::try_from(e).ok()?)?
    };
    let qshift = if e < 0 {
        0
    } else {
        eq.qshift().checked_mul(usize::try_from(e).ok()?)?
    };
    let mut factors = Vec::new();
    for (r, x) in eq.factors() {
        factors.push((r, x.checked_mul(e)?));
    }
    Some(
        EtaQuotient::from_factors(factors)
            .ok()?
            .with_scalar(scalar)
            .with_qshift(qshift),
    )
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(BigUint),
    Q,
    F(u64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Int(v) => format!("integer {v}"),
            Token::Q => "`q`".into(),
            Token::F(r) => format!("`f{r}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let skip_ws = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        i
    };
    let digits = |start: usize| {
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        end
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            _ if c.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                i = digits(i);
                Token::Int(text[start..i].parse().expect("ascii digits"))
            }
            b'q' => {
                i += 1;
                Token::Q
            }
            b'f' => {
                let at = skip_ws(i + 1);
                let end = digits(at);
                if end == at {
                    return Err(syntax(at, "expected an index after `f`"));
                }
                let r: u64 = text[at..end]
                    .parse()
                    .map_err(|_| syntax(at, "index of `f` is too large"))?;
                if r == 0 {
                    return Err(syntax(start, "`f0` is not defined; indices start at 1"));
                }
                i = end;
                Token::F(r)
            }
            b'+' => {
                i += 1;
                Token::Plus
            }
            b'-' => {
                i += 1;
                Token::Minus
            }
            b'*' => {
                i += 1;
                Token::Star
            }
            b'/' => {
                i += 1;
                Token::Slash
            }
            b'^' => {
                i += 1;
                Token::Caret
            }
            b'(' => {
                i += 1;
                Token::LParen
            }
            b')' => {
                i += 1;
                Token::RParen
            }
            _ => {
                let ch = text[start..].chars().next().expect("nonempty remainder");
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        tokens.push((start, token));
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = ExprAst::add(lhs, self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = ExprAst::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = ExprAst::mul(lhs, self.unary()?);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = ExprAst::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(ExprAst::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let negative = self.peek() == Some(&Token::Minus);
        if negative {
            self.pos += 1;
        }
        let at = self.position();
        let magnitude = match self.next() {
            Some(Token::Int(v)) => v,
            Some(t) => {
                return Err(syntax(
                    at,
                    format!("expected an integer exponent, found {}", t.describe()),
                ))
            }
            None => {
                return Err(syntax(
                    at,
                    "expected an integer exponent, found end of input",
                ))
            }
        };
        let e = magnitude
            .to_i64()
            .ok_or_else(|| syntax(at, "exponent is too large"))?;
        let e = if negative { -e } else { e };
        if base == ExprAst::Q && e < 0 {
            return Err(syntax(at, "negative powers of q are not series"));
        }
        Ok(ExprAst::pow(base, e))
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        let at = self.position();
        match self.next() {
            Some(Token::Int(v)) => Ok(ExprAst::Int(v)),
            Some(Token::Q) => Ok(ExprAst::Q),
            Some(Token::F(r)) => Ok(ExprAst::F(r)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                let close = self.position();
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(syntax(close, "expected `)`")),
                }
            }
            Some(t) => Err(syntax(
                at,
                format!("expected an operand, found {}", t.describe()),
            )),
            None => Err(syntax(at, "expected an operand, found end of input")),
        }
    }
}

pub fn parse(text: &str) -> Result<ExprAst, ExprError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let ast = parser.expr()?;
    if let Some(t) = parser.peek() {
        let msg = match t {
            Token::F(_) | Token::Q | Token::Int(_) | Token::LParen => format!(
                "unexpected {}; multiplication must be written with `*`",
                t.describe()
            ),
            _ => format!("unexpected {}", t.describe()),
        };
        return Err(syntax(parser.position(), msg));
    }
    Ok(ast)
}

// Binding strength, loosest first.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(ast: &ExprAst) -> u8 {
    match ast {
        ExprAst::Add(..) | ExprAst::Sub(..) => SUM,
        ExprAst::Mul(..) | ExprAst::Div(..) => PRODUCT,
        ExprAst::Neg(_) => UNARY,
        ExprAst::Pow(..) => POWER,
        ExprAst::Int(_) | ExprAst::Q | ExprAst::F(_) => ATOM,
    }
}

/// Canonical text with only the parentheses the grammar needs.
pub fn format(ast: &ExprAst) -> String {
    let mut out = String::new();
    write_expr(ast, 0, &mut out);
    out
}

fn write_expr(ast: &ExprAst, min: u8, out: &mut String) {
    let wrap = precedence(ast) < min;
    if wrap {
        out.push('(');
    }
    match ast {
        ExprAst::Int(v) => out.push_str(&v.to_string()),
        ExprAst::Q => out.push('q'),
        ExprAst::F(r) => out.push_str(&format!("f{r}")),
        ExprAst::Add(a, b) | ExprAst::Sub(a, b) => {
            write_expr(a, SUM, out);
            out.push(if matches!(ast, ExprAst::Add(..)) {
                '+'
            } else {
                '-'
            });
            write_expr(b, PRODUCT, out);
        }
        ExprAst::Mul(a, b) | ExprAst::Div(a, b) => {
            write_expr(a, PRODUCT, out);
            out.push(if matches!(ast, ExprAst::Mul(..)) {
                '*'
            } else {
                '/'
            });
            write_expr(b, UNARY, out);
        }
        ExprAst::Neg(a) => {
            out.push('-');
            write_expr(a, UNARY, out);
        }
        ExprAst::Pow(a, e) => {
            write_expr(a, ATOM, out);
            out.push_str(&format!("^{e}"));
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Evaluates an expression to `order` coefficients over `ring`.
///
/// Products, quotients and powers that collapse to a single eta quotient go
/// through the sparse expander; everything else recurses structurally.
pub fn evaluate(
    ast: &ExprAst,
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, ExprError> {
    let ctx = |source: SeriesError| ExprError::Eval {
        expr: format(ast),
        source,
    };
    if matches!(ast, ExprAst::Mul(..) | ExprAst::Div(..) | ExprAst::Pow(..)) {
        if let Ok(eq) = ast.to_eta_quotient() {
            return pochhammer::expand(&eq, order, ring).map_err(|e| match e {
                EtaError::Series(s) => ctx(s),
                other => ExprError::NotMonomial(other.to_string()),
            });
        }
    }
    match ast {
        ExprAst::Int(v) => {
            TruncatedSeries::constant(BigInt::from(v.clone()), order, ring).map_err(ctx)
        }
        ExprAst::Q => TruncatedSeries::monomial(1, 1, order, ring).map_err(ctx),
        ExprAst::F(r) => pochhammer::pochhammer_series(*r, order, ring).map_err(|e| match e {
            EtaError::Series(s) => ctx(s),
            other => ExprError::NotMonomial(other.to_string()),
        }),
        ExprAst::Add(a, b) => evaluate(a, order, ring)?
            .add(&evaluate(b, order, ring)?)
            .map_err(ctx),
        ExprAst::Sub(a, b) => evaluate(a, order, ring)?
            .sub(&evaluate(b, order, ring)?)
            .map_err(ctx),
        ExprAst::Mul(a, b) => evaluate(a, order, ring)?
            .mul(&evaluate(b, order, ring)?)
            .map_err(ctx),
        ExprAst::Div(a, b) => evaluate(a, order, ring)?
            .div(&evaluate(b, order, ring)?)
            .map_err(ctx),
        ExprAst::Pow(a, e) => evaluate(a, order, ring)?.pow(*e).map_err(ctx),
        ExprAst::Neg(a) => Ok(evaluate(a, order, ring)?.neg()),
    }
}

/// Parses and evaluates in one step.
pub fn evaluate_str(
    text: &str,
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, ExprError> {
    evaluate(&parse(text)?, order, ring)
}

impl ExprAst {
    /// True when the expression is the literal `0`.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, ExprAst::Int(v) if v.is_zero())
    }
}
