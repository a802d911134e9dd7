//! Damping functions `f(s)` on the spectrum of the elastic operator.
//!
//! Two closed-form families (constant `a` and power `a·s^θ`) plus a small
//! infix expression language evaluated pointwise in the variable `s`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          (right associative)
//! primary := number | "s" | call | "(" expr ")"
//! call    := name "(" expr ("," expr)? ")"
//! name    := "sqrt" | "exp" | "log" | "min" | "max" | "abs"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! Precedence from tightest to loosest: `^`, unary minus, `* /`, `+ -`.
//! So `-2^2` is `-(2^2)` and `2^3^2` is `2^(3^2)`.

use std::fmt;

use thiserror::Error;

/// Maximum nesting depth accepted by the parser.
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("damping must be evaluated at s > 0, got s = {0}")]
    NonPositiveArgument(f64),
    #[error("{op} is undefined for argument {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("non-finite intermediate value in {op}")]
    NonFinite { op: &'static str },
    #[error("damping value f({s}) = {value} is not positive")]
    NonPositive { s: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DampingError {
    #[error("constant damping requires a > 0, got {0}")]
    InvalidConstant(f64),
    #[error("power damping requires a > 0 and 0 <= theta <= 1, got a = {a}, theta = {theta}")]
    InvalidPower { a: f64, theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Min,
    Max,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "min" => Func::Min,
            "max" => Func::Max,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
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

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree over the single variable `s`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Literal(f64),
    Var,
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Func, Vec<ExprNode>),
}

fn finite(op: &'static str, x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

impl ExprNode {
    /// Evaluates the tree at `s`. Any domain violation or non-finite
    /// intermediate is an error; no NaN ever escapes.
    pub fn eval(&self, s: f64) -> Result<f64, EvalError> {
        match self {
            ExprNode::Literal(x) => finite("literal", *x),
            ExprNode::Var => finite("s", s),
            ExprNode::Neg(x) => Ok(-x.eval(s)?),
            ExprNode::Binary(op, l, r) => {
                let l = l.eval(s)?;
                let r = r.eval(s)?;
                match op {
                    BinOp::Add => finite("+", l + r),
                    BinOp::Sub => finite("-", l - r),
                    BinOp::Mul => finite("*", l * r),
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::Domain { op: "/", value: r });
                        }
                        finite("/", l / r)
                    }
                    BinOp::Pow => {
                        if l < 0.0 && r.fract() != 0.0 {
                            return Err(EvalError::Domain { op: "^", value: l });
                        }
                        if l == 0.0 && r < 0.0 {
                            return Err(EvalError::Domain { op: "^", value: l });
                        }
                        finite("^", l.powf(r))
                    }
                }
            }
            ExprNode::Call(func, args) => {
                let x = args[0].eval(s)?;
                match func {
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain {
                                op: "sqrt",
                                value: x,
                            });
                        }
                        Ok(x.sqrt())
                    }
                    Func::Exp => finite("exp", x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "log",
                                value: x,
                            });
                        }
                        finite("log", x.ln())
                    }
                    Func::Abs => Ok(x.abs()),
                    Func::Min => Ok(x.min(args[1].eval(s)?)),
                    Func::Max => Ok(x.max(args[1].eval(s)?)),
                }
            }
        }
    }
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Literal(x) if *x < 0.0 => write!(f, "(-{:?})", -x),
            ExprNode::Literal(x) => write!(f, "{x:?}"),
            ExprNode::Var => f.write_str("s"),
            ExprNode::Neg(x) => write!(f, "(-{x})"),
            ExprNode::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            ExprNode::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

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
    Comma,
    Eof,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
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
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((start, tok));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit
                .parse()
                .map_err(|_| ParseError::new(start, format!("malformed number '{lit}'")))?;
            if !value.is_finite() {
                return Err(ParseError::new(
                    start,
                    format!("number '{lit}' out of range"),
                ));
            }
            out.push((start, Tok::Num(value)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError::new(
            start,
            format!("unexpected character '{ch}'"),
        ));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

// Binding powers: (left, right). Unary minus binds at UNARY_BP.
const UNARY_BP: u8 = 5;

fn infix_bp(tok: &Tok) -> Option<(BinOp, u8, u8)> {
    Some(match tok {
        Tok::Plus => (BinOp::Add, 1, 2),
        Tok::Minus => (BinOp::Sub, 1, 2),
        Tok::Star => (BinOp::Mul, 3, 4),
        Tok::Slash => (BinOp::Div, 3, 4),
        Tok::Caret => (BinOp::Pow, 7, 6),
        _ => return None,
    })
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(self.offset(), format!("expected {what}")))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<ExprNode, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(
                self.offset(),
                "expression nested too deeply",
            ));
        }
        let mut lhs = self.prefix()?;
        while let Some((op, lbp, rbp)) = infix_bp(self.peek()) {
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<ExprNode, ParseError> {
        let (at, tok) = self.bump();
        match tok {
            Tok::Num(x) => Ok(ExprNode::Literal(x)),
            Tok::Minus => Ok(ExprNode::Neg(Box::new(self.expr(UNARY_BP)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "s" => Ok(ExprNode::Var),
            Tok::Ident(name) => {
                let func = Func::from_name(&name)
                    .ok_or_else(|| ParseError::new(at, format!("unknown identifier '{name}'")))?;
                self.expect(Tok::LParen, &format!("'(' after '{name}'"))?;
                let mut args = vec![self.expr(0)?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr(0)?);
                }
                if args.len() != func.arity() {
                    return Err(ParseError::new(
                        at,
                        format!(
                            "'{name}' takes {} argument(s), got {}",
                            func.arity(),
                            args.len()
                        ),
                    ));
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(ExprNode::Call(func, args))
            }
            Tok::Eof => Err(ParseError::new(at, "expected expression")),
            _ => Err(ParseError::new(at, "expected expression")),
        }
    }
}

/// Parses an expression into a bare tree.
pub fn parse_expr(text: &str) -> Result<ExprNode, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError::new(0, "expected expression (empty input)"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let node = p.expr(0)?;
    match p.peek() {
        Tok::Eof => Ok(node),
        Tok::RParen => Err(ParseError::new(p.offset(), "unbalanced ')'")),
        _ => Err(ParseError::new(p.offset(), "unexpected trailing input")),
    }
}

/// The damping function `f : σ(A) → (0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DampingSpec {
    Constant { a: f64 },
    Power { a: f64, theta: f64 },
    Expr(ExprNode),
}

impl DampingSpec {
    pub fn constant(a: f64) -> Result<Self, DampingError> {
        if a.is_finite() && a > 0.0 {
            Ok(DampingSpec::Constant { a })
        } else {
            Err(DampingError::InvalidConstant(a))
        }
    }

    pub fn power(a: f64, theta: f64) -> Result<Self, DampingError> {
        if a.is_finite() && a > 0.0 && (0.0..=1.0).contains(&theta) {
            Ok(DampingSpec::Power { a, theta })
        } else {
            Err(DampingError::InvalidPower { a, theta })
        }
    }

    /// `f(s)`, guaranteed finite and positive on success.
    pub fn eval(&self, s: f64) -> Result<f64, EvalError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(EvalError::NonPositiveArgument(s));
        }
        let value = match self {
            DampingSpec::Constant { a } => *a,
            DampingSpec::Power { a, theta } => a * s.powf(*theta),
            DampingSpec::Expr(node) => node.eval(s)?,
        };
        if !value.is_finite() {
            return Err(EvalError::NonFinite { op: "f(s)" });
        }
        if value <= 0.0 {
            return Err(EvalError::NonPositive { s, value });
        }
        Ok(value)
    }

    /// `(a, θ)` for the closed-form families; constants are `θ = 0`.
    pub fn family(&self) -> Option<(f64, f64)> {
        match self {
            DampingSpec::Constant { a } => Some((*a, 0.0)),
            DampingSpec::Power { a, theta } => Some((*a, *theta)),
            DampingSpec::Expr(_) => None,
        }
    }

    /// Text that `parse_damping` maps back to an equivalent function.
    pub fn canonical_text(&self) -> String {
        match self {
            DampingSpec::Constant { a } => format!("{a:?}"),
            DampingSpec::Power { a, theta } => format!("{a:?}*s^{theta:?}"),
            DampingSpec::Expr(node) => node.to_string(),
        }
    }
}

impl DampingSpec {
    /// Rewrites expressions of the shapes `a`, `s`, `s^θ`, `a*s` and
    /// `a*s^θ` into the matching closed-form family.
    pub fn recognize_family(self) -> DampingSpec {
        fn power_of_s(node: &ExprNode) -> Option<f64> {
            match node {
                ExprNode::Var => Some(1.0),
                ExprNode::Binary(BinOp::Pow, base, exp) => match (&**base, &**exp) {
                    (ExprNode::Var, ExprNode::Literal(t)) => Some(*t),
                    _ => None,
                },
                _ => None,
            }
        }
        let family = match &self {
            DampingSpec::Expr(ExprNode::Literal(a)) => DampingSpec::constant(*a).ok(),
            DampingSpec::Expr(ExprNode::Binary(BinOp::Mul, lhs, rhs)) => match &**lhs {
                ExprNode::Literal(a) => {
                    power_of_s(rhs).and_then(|t| DampingSpec::power(*a, t).ok())
                }
                _ => None,
            },
            DampingSpec::Expr(node) => {
                power_of_s(node).and_then(|t| DampingSpec::power(1.0, t).ok())
            }
            _ => None,
        };
        match family {
            Some(DampingSpec::Power { a, theta: 0.0 }) => DampingSpec::Constant { a },
            Some(f) => f,
            None => self,
        }
    }
}

impl fmt::Display for DampingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

/// Parses `text` into an expression-backed damping.
pub fn parse_damping(text: &str) -> Result<DampingSpec, ParseError> {
    parse_expr(text).map(DampingSpec::Expr)
}

pub fn eval_damping(spec: &DampingSpec, s: f64) -> Result<f64, EvalError> {
    spec.eval(s)
}
