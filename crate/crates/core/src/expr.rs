//! Expression mini-language for smooth function families.
//!
//! The grammar is deliberately small and stable, since it doubles as the
//! text format used by scenario configs:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := atom ('^' factor)?          // right-associative
//! atom    := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Recognised functions: `sin cos exp log sqrt`. Identifiers must be
//! declared parameters. `^` with an integer literal exponent is evaluated
//! by repeated multiplication; any other exponent lowers to
//! `exp(log(base)·exponent)` and therefore requires a positive base.

#![allow(clippy::redundant_guards)] // float-literal patterns read worse than guards

use std::fmt;

use thiserror::Error;

use crate::jet::{Jet2, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("arguments must share one jet dimension")]
    MixedDims,
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    fn function_name(name: &str) -> Option<UnaryOp> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree over parameter indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Integer-literal power, evaluated by repeated multiplication.
    PowInt(Box<Expr>, i32),
}

/// Largest exponent still treated as a repeated product.
const MAX_INT_EXPONENT: i32 = 32;

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    // Smart constructors used by `diff` and the ansatz builders. They fold
    // additive/multiplicative identities and literal arithmetic so derivative
    // trees stay compact; parsing never goes through them. Free-function
    // style (two operands by value) fits tree assembly better than the
    // std::ops traits would.

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            (Expr::Num(x), b) if x == 0.0 => b,
            (a, Expr::Num(y)) if y == 0.0 => a,
            (a, b) => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            (a, Expr::Num(y)) if y == 0.0 => a,
            (Expr::Num(x), b) if x == 0.0 => Expr::neg(b),
            (a, b) => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            (Expr::Num(x), _) | (_, Expr::Num(x)) if x == 0.0 => Expr::Num(0.0),
            (Expr::Num(x), b) if x == 1.0 => b,
            (a, Expr::Num(y)) if y == 1.0 => a,
            (a, b) => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), _) if x == 0.0 => Expr::Num(0.0),
            (a, Expr::Num(y)) if y == 1.0 => a,
            (a, b) => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            a => Expr::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn powint(a: Expr, k: i32) -> Expr {
        match k {
            0 => Expr::Num(1.0),
            1 => a,
            _ => Expr::PowInt(Box::new(a), k),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match int_exponent(&b) {
            Some(k) => Expr::powint(a, k),
            None => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Symbolic derivative with respect to parameter `var`.
    ///
    /// No simplification beyond the identity folding of the smart
    /// constructors; exactness is what matters here, not tree size.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(i) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.diff(var);
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => Expr::neg(da),
                    UnaryOp::Sin => Expr::mul(Expr::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => Expr::neg(Expr::mul(Expr::unary(UnaryOp::Sin, a), da)),
                    UnaryOp::Exp => Expr::mul(Expr::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Log => Expr::div(da, a),
                    UnaryOp::Sqrt => Expr::div(
                        da,
                        Expr::mul(Expr::Num(2.0), Expr::unary(UnaryOp::Sqrt, a)),
                    ),
                }
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => Expr::div(
                        Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                        Expr::mul(b.clone(), b),
                    ),
                    BinOp::Pow => {
                        // d(a^b) = a^b · (db·log a + b·da/a)
                        let ab = Expr::Binary(BinOp::Pow, Box::new(a.clone()), Box::new(b.clone()));
                        Expr::mul(
                            ab,
                            Expr::add(
                                Expr::mul(db, Expr::unary(UnaryOp::Log, a.clone())),
                                Expr::div(Expr::mul(b, da), a),
                            ),
                        )
                    }
                }
            }
            Expr::PowInt(a, k) => {
                let da = a.diff(var);
                let a = (**a).clone();
                Expr::mul(
                    Expr::mul(Expr::Num(f64::from(*k)), Expr::powint(a, k - 1)),
                    da,
                )
            }
        }
    }

    /// Replace each `Var(i)` with `args[i]`.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(i) => args[*i].clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.substitute(args))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute(args)),
                Box::new(b.substitute(args)),
            ),
            Expr::PowInt(a, k) => Expr::PowInt(Box::new(a.substitute(args)), *k),
        }
    }
}

fn int_exponent(e: &Expr) -> Option<i32> {
    let v = match e {
        Expr::Num(v) => *v,
        Expr::Unary(UnaryOp::Neg, inner) => match **inner {
            Expr::Num(v) => -v,
            _ => return None,
        },
        _ => return None,
    };
    if v.fract() == 0.0 && v.abs() <= f64::from(MAX_INT_EXPONENT) {
        Some(v as i32)
    } else {
        None
    }
}

/// A parsed, differentiable scalar function of named arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    params: Vec<String>,
    body: Expr,
}

impl SmoothMap {
    /// Parse `source` over the given parameter names.
    pub fn parse(source: &str, params: &[&str]) -> Result<SmoothMap, ParseError> {
        if source.trim().is_empty() {
            return Err(ParseError::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            params,
        };
        let body = parser.parse_expr(0)?;
        let (tok, offset) = parser.peek();
        if !matches!(tok, Tok::Eof) {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(SmoothMap {
            params: params.iter().map(|s| s.to_string()).collect(),
            body,
        })
    }

    /// Assemble a map directly from a tree; used by the ansatz builders.
    pub fn from_parts(params: Vec<String>, body: Expr) -> SmoothMap {
        SmoothMap { params, body }
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// Derivative map with respect to the named parameter slot.
    pub fn diff(&self, param: usize) -> SmoothMap {
        SmoothMap {
            params: self.params.clone(),
            body: self.body.diff(param),
        }
    }

    /// Evaluate on jets; all arguments must share one dimension.
    pub fn eval_jets(&self, args: &[Jet2]) -> Result<Jet2, EvalError> {
        if args.len() != self.params.len() {
            return Err(EvalError::Arity {
                expected: self.params.len(),
                got: args.len(),
            });
        }
        let dim = args.first().map_or(0, Jet2::dim);
        if args.iter().any(|a| a.dim() != dim) {
            return Err(EvalError::MixedDims);
        }
        eval_jet(&self.body, args, dim)
    }

    /// Plain scalar evaluation; the independent path used by the
    /// finite-difference oracles.
    pub fn eval_scalar(&self, args: &[f64]) -> Result<f64, EvalError> {
        if args.len() != self.params.len() {
            return Err(EvalError::Arity {
                expected: self.params.len(),
                got: args.len(),
            });
        }
        eval_scalar(&self.body, args)
    }

    /// Body with each parameter replaced by the supplied expression,
    /// for embedding this map into a larger parameter space.
    pub fn substituted(&self, args: &[Expr]) -> Result<Expr, EvalError> {
        if args.len() != self.params.len() {
            return Err(EvalError::Arity {
                expected: self.params.len(),
                got: args.len(),
            });
        }
        Ok(self.body.substitute(args))
    }
}

fn eval_jet(e: &Expr, args: &[Jet2], dim: usize) -> Result<Jet2, EvalError> {
    Ok(match e {
        Expr::Num(v) => Jet2::constant(*v, dim),
        Expr::Var(i) => args[*i].clone(),
        Expr::Unary(op, a) => {
            let a = eval_jet(a, args, dim)?;
            match op {
                UnaryOp::Neg => a.neg(),
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => a.ln()?,
                UnaryOp::Sqrt => a.sqrt()?,
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_jet(a, args, dim)?;
            let b = eval_jet(b, args, dim)?;
            match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b)?,
                // exp(log(a)·b), hence positive base.
                BinOp::Pow => a.ln()?.mul(&b).exp(),
            }
        }
        Expr::PowInt(a, k) => eval_jet(a, args, dim)?.powi(*k)?,
    })
}

fn eval_scalar(e: &Expr, args: &[f64]) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Var(i) => args[*i],
        Expr::Unary(op, a) => {
            let a = eval_scalar(a, args)?;
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => {
                    if a <= 0.0 {
                        return Err(JetError::Domain { op: "log", value: a }.into());
                    }
                    a.ln()
                }
                UnaryOp::Sqrt => {
                    if a <= 0.0 {
                        return Err(JetError::Domain { op: "sqrt", value: a }.into());
                    }
                    a.sqrt()
                }
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_scalar(a, args)?;
            let b = eval_scalar(b, args)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(JetError::Domain { op: "inv", value: b }.into());
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a <= 0.0 {
                        return Err(JetError::Domain { op: "pow", value: a }.into());
                    }
                    (a.ln() * b).exp()
                }
            }
        }
        Expr::PowInt(a, k) => {
            let a = eval_scalar(a, args)?;
            if *k < 0 && a == 0.0 {
                return Err(JetError::Domain { op: "inv", value: a }.into());
            }
            let mut acc = 1.0;
            for _ in 0..k.unsigned_abs() {
                acc *= a;
            }
            if *k < 0 {
                acc = 1.0 / acc;
            }
            acc
        }
    })
}

// ---------------------------------------------------------------------------
// Lexer and Pratt parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
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
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("invalid number `{text}`"),
                })?;
                out.push((Tok::Num(value), start));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    params: &'a [&'a str],
}

// Binding powers: additive 10, multiplicative 20, prefix minus 26,
// power 30/31 (right-associative).
const BP_PREFIX: u8 = 26;

impl Parser<'_> {
    fn peek(&self) -> (&Tok, usize) {
        let (tok, offset) = &self.tokens[self.pos];
        (tok, *offset)
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek().0 {
                Tok::Plus => (BinOp::Add, 10, 11),
                Tok::Minus => (BinOp::Sub, 10, 11),
                Tok::Star => (BinOp::Mul, 20, 21),
                Tok::Slash => (BinOp::Div, 20, 21),
                Tok::Caret => (BinOp::Pow, 31, 30),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.parse_expr(rbp)?;
            lhs = if op == BinOp::Pow {
                Expr::pow(lhs, rhs)
            } else {
                Expr::Binary(op, Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Minus => {
                let operand = self.parse_expr(BP_PREFIX)?;
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(operand)))
            }
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let inner = self.parse_expr(0)?;
                let (tok, offset) = self.bump();
                if tok != Tok::RParen {
                    return Err(ParseError::Syntax {
                        offset,
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if matches!(self.peek().0, Tok::LParen) {
                    let op = UnaryOp::function_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset })?;
                    self.bump(); // consume `(`
                    let arg = self.parse_expr(0)?;
                    let (tok, offset) = self.bump();
                    if tok != Tok::RParen {
                        return Err(ParseError::Syntax {
                            offset,
                            message: "expected `)`".into(),
                        });
                    }
                    Ok(Expr::Unary(op, Box::new(arg)))
                } else {
                    let index = self
                        .params
                        .iter()
                        .position(|p| *p == name)
                        .ok_or(ParseError::UnknownIdentifier { name, offset })?;
                    Ok(Expr::Var(index))
                }
            }
            _ => Err(ParseError::Syntax {
                offset,
                message: "expected an operand".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing: `parse(format!("{map}"))` reproduces the tree exactly.
// ---------------------------------------------------------------------------

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Num(_) | Expr::Var(_) => 100,
        Expr::Unary(UnaryOp::Neg, _) => BP_PREFIX,
        Expr::Unary(..) => 100, // function call carries its own parentheses
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 10,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 20,
        Expr::Binary(BinOp::Pow, ..) | Expr::PowInt(..) => 30,
    }
}

fn fmt_paren_named(
    e: &Expr,
    params: &[String],
    f: &mut fmt::Formatter<'_>,
    needed: bool,
) -> fmt::Result {
    if needed {
        write!(f, "(")?;
        fmt_expr_named(e, params, f)?;
        write!(f, ")")
    } else {
        fmt_expr_named(e, params, f)
    }
}

fn fmt_expr_named(e: &Expr, params: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Var(i) => write!(f, "{}", params[*i]),
        Expr::Unary(UnaryOp::Neg, a) => {
            write!(f, "-")?;
            fmt_paren_named(a, params, f, prec(a) < BP_PREFIX)
        }
        Expr::Unary(op, a) => {
            write!(f, "{}(", op.label())?;
            fmt_expr_named(a, params, f)?;
            write!(f, ")")
        }
        Expr::Binary(op, a, b) => {
            let p = prec(e);
            let symbol = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            if *op == BinOp::Pow {
                fmt_paren_named(a, params, f, prec(a) <= p)?;
                write!(f, "{symbol}")?;
                fmt_paren_named(b, params, f, prec(b) < p)
            } else {
                fmt_paren_named(a, params, f, prec(a) < p)?;
                write!(f, " {symbol} ")?;
                fmt_paren_named(b, params, f, prec(b) <= p)
            }
        }
        Expr::PowInt(a, k) => {
            fmt_paren_named(a, params, f, prec(a) <= 30)?;
            write!(f, "^{k}")
        }
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr_named(&self.body, &self.params, f)
    }
}
