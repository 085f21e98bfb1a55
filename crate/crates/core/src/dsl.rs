//! Scalar expression language for user-defined metrics, surfaces, and stick
//! rows.
//!
//! The grammar covers real literals, named variables, `+ - * / ^`, unary
//! minus, and the functions `sin`, `cos`, `sqrt`, `abs` (plus `sign`, which
//! appears in derivatives of `abs`). Precedence is the usual one:
//!
//! ```text
//! ^  >  unary -  >  * /  >  + -
//! ```
//!
//! with `^` right-associative and everything else left-associative.
//! Symbolic differentiation is supported for every construct except a power
//! whose exponent depends on the differentiation variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Errors from parsing, evaluating, or differentiating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("unknown function '{name}' at column {column}")]
    UnknownFunction { name: String, column: usize },

    #[error("unbound variable '{0}'")]
    UnboundVariable(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),

    #[error("cannot differentiate: {0}")]
    Unsupported(String),
}

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Abs,
    /// Sign of the argument with the convention `sign(0) = 0`. Not part of
    /// the user-facing function set, but produced when differentiating
    /// `abs` and accepted back by the parser so derivative trees round-trip.
    Sign,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "sign" => Some(Func::Sign),
            _ => None,
        }
    }
}

/// Abstract syntax tree of a scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Variable(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fun(Func, Box<Expr>),
}

/// Parse an expression string.
pub fn parse(text: &str) -> Result<Expr, DslError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(DslError::Syntax {
            column: tok.column,
            message: format!("unexpected '{}'", tok.kind),
        }),
    }
}

impl Expr {
    /// Evaluate with a variable binding map.
    pub fn evaluate(&self, env: &BTreeMap<String, f64>) -> Result<f64, DslError> {
        self.eval_with(&|name| env.get(name).copied())
    }

    /// Evaluate with an arbitrary lookup, avoiding map construction in hot
    /// paths (coordinate vectors, bisection probes).
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, DslError> {
        match self {
            Expr::Number(v) => Ok(*v),
            Expr::Variable(name) => lookup(name)
                .ok_or_else(|| DslError::UnboundVariable(name.clone())),
            Expr::Neg(a) => Ok(-a.eval_with(lookup)?),
            Expr::Add(a, b) => Ok(a.eval_with(lookup)? + b.eval_with(lookup)?),
            Expr::Sub(a, b) => Ok(a.eval_with(lookup)? - b.eval_with(lookup)?),
            Expr::Mul(a, b) => Ok(a.eval_with(lookup)? * b.eval_with(lookup)?),
            Expr::Div(a, b) => {
                let num = a.eval_with(lookup)?;
                let den = b.eval_with(lookup)?;
                if den == 0.0 {
                    Err(DslError::DivisionByZero)
                } else {
                    Ok(num / den)
                }
            }
            Expr::Pow(a, b) => Ok(a.eval_with(lookup)?.powf(b.eval_with(lookup)?)),
            Expr::Fun(f, a) => {
                let x = a.eval_with(lookup)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(DslError::NegativeSqrt(x))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Abs => Ok(x.abs()),
                    Func::Sign => Ok(if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }),
                }
            }
        }
    }

    /// Symbolic derivative with respect to `var`, constant-folded.
    ///
    /// `abs` differentiates to `sign(..)` with `sign(0) = 0`; `sign` itself
    /// differentiates to zero (it is constant almost everywhere).
    pub fn differentiate(&self, var: &str) -> Result<Expr, DslError> {
        Ok(self.diff(var)?.fold())
    }

    fn diff(&self, var: &str) -> Result<Expr, DslError> {
        if !self.depends_on(var) {
            return Ok(Expr::Number(0.0));
        }
        Ok(match self {
            Expr::Number(_) => Expr::Number(0.0),
            Expr::Variable(name) => {
                if name == var {
                    Expr::Number(1.0)
                } else {
                    Expr::Number(0.0)
                }
            }
            Expr::Neg(a) => Expr::Neg(Box::new(a.diff(var)?)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.diff(var)?), Box::new(b.diff(var)?)),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.diff(var)?), Box::new(b.diff(var)?)),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(a.diff(var)?), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(b.diff(var)?))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(Expr::Sub(
                    Box::new(Expr::Mul(Box::new(a.diff(var)?), b.clone())),
                    Box::new(Expr::Mul(a.clone(), Box::new(b.diff(var)?))),
                )),
                Box::new(Expr::Mul(b.clone(), b.clone())),
            ),
            Expr::Pow(base, exp) => {
                if exp.depends_on(var) {
                    return Err(DslError::Unsupported(
                        "exponent depends on the differentiation variable".into(),
                    ));
                }
                // d(u^c) = c * u^(c-1) * u'  for c independent of var
                Expr::Mul(
                    Box::new(Expr::Mul(
                        exp.clone(),
                        Box::new(Expr::Pow(
                            base.clone(),
                            Box::new(Expr::Sub(exp.clone(), Box::new(Expr::Number(1.0)))),
                        )),
                    )),
                    Box::new(base.diff(var)?),
                )
            }
            Expr::Fun(f, a) => {
                let inner = a.diff(var)?;
                let outer = match f {
                    Func::Sin => Expr::Fun(Func::Cos, a.clone()),
                    Func::Cos => Expr::Neg(Box::new(Expr::Fun(Func::Sin, a.clone()))),
                    Func::Sqrt => Expr::Div(
                        Box::new(Expr::Number(1.0)),
                        Box::new(Expr::Mul(
                            Box::new(Expr::Number(2.0)),
                            Box::new(Expr::Fun(Func::Sqrt, a.clone())),
                        )),
                    ),
                    Func::Abs => Expr::Fun(Func::Sign, a.clone()),
                    Func::Sign => Expr::Number(0.0),
                };
                Expr::Mul(Box::new(outer), Box::new(inner))
            }
        })
    }

    /// True when `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Number(_) => false,
            Expr::Variable(name) => name == var,
            Expr::Neg(a) | Expr::Fun(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// All variable names occurring in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Number(_) => {}
            Expr::Variable(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(a) | Expr::Fun(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace named variables by numeric constants and fold.
    pub fn substitute(&self, bindings: &BTreeMap<String, f64>) -> Expr {
        let replaced = match self {
            Expr::Number(v) => Expr::Number(*v),
            Expr::Variable(name) => match bindings.get(name) {
                Some(v) => Expr::Number(*v),
                None => Expr::Variable(name.clone()),
            },
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(bindings))),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Expr::Pow(a, b) => Expr::Pow(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Expr::Fun(f, a) => Expr::Fun(*f, Box::new(a.substitute(bindings))),
        };
        replaced.fold()
    }

    /// Constant folding plus the cheap algebraic identities (x+0, 1*x,
    /// x^1, ...). Folding never introduces a non-finite literal and never
    /// removes a division, so evaluation errors are preserved.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Number(v) => Expr::Number(*v),
            Expr::Variable(name) => Expr::Variable(name.clone()),
            Expr::Neg(a) => match a.fold() {
                Expr::Number(v) => Expr::Number(-v),
                Expr::Neg(inner) => *inner,
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Add(a, b) => match (a.fold(), b.fold()) {
                (Expr::Number(x), Expr::Number(y)) if (x + y).is_finite() => Expr::Number(x + y),
                (Expr::Number(z), other) | (other, Expr::Number(z)) if z == 0.0 => other,
                (fa, fb) => Expr::Add(Box::new(fa), Box::new(fb)),
            },
            Expr::Sub(a, b) => match (a.fold(), b.fold()) {
                (Expr::Number(x), Expr::Number(y)) if (x - y).is_finite() => Expr::Number(x - y),
                (fa, Expr::Number(z)) if z == 0.0 => fa,
                (Expr::Number(z), fb) if z == 0.0 => Expr::Neg(Box::new(fb)).fold(),
                (fa, fb) => Expr::Sub(Box::new(fa), Box::new(fb)),
            },
            Expr::Mul(a, b) => match (a.fold(), b.fold()) {
                (Expr::Number(x), Expr::Number(y)) if (x * y).is_finite() => Expr::Number(x * y),
                (Expr::Number(z), _) | (_, Expr::Number(z)) if z == 0.0 => Expr::Number(0.0),
                (Expr::Number(o), other) | (other, Expr::Number(o)) if o == 1.0 => other,
                (fa, fb) => Expr::Mul(Box::new(fa), Box::new(fb)),
            },
            Expr::Div(a, b) => match (a.fold(), b.fold()) {
                (Expr::Number(x), Expr::Number(y)) if y != 0.0 && (x / y).is_finite() => {
                    Expr::Number(x / y)
                }
                (fa, Expr::Number(o)) if o == 1.0 => fa,
                (fa, fb) => Expr::Div(Box::new(fa), Box::new(fb)),
            },
            Expr::Pow(a, b) => match (a.fold(), b.fold()) {
                (Expr::Number(x), Expr::Number(y)) if x.powf(y).is_finite() => {
                    Expr::Number(x.powf(y))
                }
                (fa, Expr::Number(o)) if o == 1.0 => fa,
                (_, Expr::Number(z)) if z == 0.0 => Expr::Number(1.0),
                (fa, fb) => Expr::Pow(Box::new(fa), Box::new(fb)),
            },
            Expr::Fun(f, a) => match (f, a.fold()) {
                (Func::Sin, Expr::Number(v)) => Expr::Number(v.sin()),
                (Func::Cos, Expr::Number(v)) => Expr::Number(v.cos()),
                (Func::Sqrt, Expr::Number(v)) if v >= 0.0 => Expr::Number(v.sqrt()),
                (Func::Abs, Expr::Number(v)) => Expr::Number(v.abs()),
                (Func::Sign, Expr::Number(v)) => Expr::Number(if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }),
                (f, fa) => Expr::Fun(*f, Box::new(fa)),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            // a negative literal prints with a leading minus and must bind
            // like a negation when re-parsed
            Expr::Number(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            Expr::Number(_) | Expr::Variable(_) | Expr::Fun(..) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(
            f: &mut fmt::Formatter<'_>,
            e: &Expr,
            parent: u8,
            parens_on_equal: bool,
        ) -> fmt::Result {
            let needs = e.precedence() < parent || (parens_on_equal && e.precedence() == parent);
            if needs {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Variable(name) => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 3, false)
            }
            // Right children take parens on equal precedence even for + and
            // *: parsing is left-associative and floating-point arithmetic
            // is not associative, so a + (b + c) must keep its grouping.
            Expr::Add(a, b) => {
                child(f, a, 1, false)?;
                write!(f, " + ")?;
                child(f, b, 1, true)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1, false)?;
                write!(f, " - ")?;
                child(f, b, 1, true)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2, false)?;
                write!(f, "*")?;
                child(f, b, 2, true)
            }
            Expr::Div(a, b) => {
                child(f, a, 2, false)?;
                write!(f, "/")?;
                child(f, b, 2, true)
            }
            Expr::Pow(a, b) => {
                // left-side parens on equal precedence: (2^3)^2 vs 2^3^2
                child(f, a, 4, true)?;
                write!(f, "^")?;
                child(f, b, 4, false)
            }
            Expr::Fun(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "{v}"),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Plus => write!(f, "+"),
            TokenKind::Minus => write!(f, "-"),
            TokenKind::Star => write!(f, "*"),
            TokenKind::Slash => write!(f, "/"),
            TokenKind::Caret => write!(f, "^"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    /// 1-based column of the first character.
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token { kind, column });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    if i >= chars.len() || !chars[i].is_ascii_digit() {
                        return Err(DslError::Syntax {
                            column: i + 1,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let literal: String = chars[start..i].iter().collect();
                let value = literal.parse::<f64>().map_err(|_| DslError::Syntax {
                    column,
                    message: format!("invalid number literal '{literal}'"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    column,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                tokens.push(Token {
                    kind: TokenKind::Ident(name),
                    column,
                });
            }
            other => {
                return Err(DslError::Syntax {
                    column,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_column(&self) -> usize {
        match self.tokens.last() {
            Some(tok) => tok.column + tok.kind.to_string().len(),
            None => 1,
        }
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Plus => true,
                TokenKind::Minus => false,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.factor()?;
        while let Some(tok) = self.peek() {
            let mul = match tok.kind {
                TokenKind::Star => true,
                TokenKind::Slash => false,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if mul {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Minus {
                self.pos += 1;
                let inner = self.factor()?;
                return Ok(Expr::Neg(Box::new(inner)));
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Caret {
                self.pos += 1;
                // exponent re-enters factor: right associativity, and
                // exponents may carry a unary minus (x^-2)
                let exponent = self.factor()?;
                return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let tok = match self.advance() {
            Some(tok) => tok,
            None => {
                return Err(DslError::Syntax {
                    column: self.end_column(),
                    message: "unexpected end of expression".into(),
                })
            }
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Number(v)),
            TokenKind::Ident(name) => {
                let is_call = matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    })
                );
                if is_call {
                    let func = Func::from_name(&name).ok_or(DslError::UnknownFunction {
                        name: name.clone(),
                        column: tok.column,
                    })?;
                    self.pos += 1; // consume '('
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Fun(func, Box::new(arg)))
                } else {
                    Ok(Expr::Variable(name))
                }
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            other => Err(DslError::Syntax {
                column: tok.column,
                message: format!("unexpected '{other}'"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), DslError> {
        match self.advance() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(tok) => Err(DslError::Syntax {
                column: tok.column,
                message: format!("expected ')', found '{}'", tok.kind),
            }),
            None => Err(DslError::Syntax {
                column: self.end_column(),
                message: "expected ')'".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn parses_rod_surface() {
        let e = parse("y - L*sin(th)").unwrap();
        assert_eq!(
            e,
            Expr::Sub(
                Box::new(Expr::Variable("y".into())),
                Box::new(Expr::Mul(
                    Box::new(Expr::Variable("L".into())),
                    Box::new(Expr::Fun(Func::Sin, Box::new(Expr::Variable("th".into())))),
                )),
            )
        );
        let v = e
            .evaluate(&env(&[("y", 1.0), ("L", 1.0), ("th", std::f64::consts::FRAC_PI_2)]))
            .unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn caret_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.evaluate(&BTreeMap::new()).unwrap(), 512.0);
    }

    #[test]
    fn caret_binds_tighter_than_unary_minus() {
        let e = parse("-2^2").unwrap();
        assert_eq!(e.evaluate(&BTreeMap::new()).unwrap(), -4.0);
        let e = parse("2^-2").unwrap();
        assert_eq!(e.evaluate(&BTreeMap::new()).unwrap(), 0.25);
    }

    #[test]
    fn incomplete_expression_reports_column() {
        let err = parse("y -").unwrap_err();
        assert_eq!(
            err,
            DslError::Syntax {
                column: 4,
                message: "unexpected end of expression".into()
            }
        );
    }

    #[test]
    fn unknown_function_is_rejected() {
        match parse("y - tan(x)").unwrap_err() {
            DslError::UnknownFunction { name, column } => {
                assert_eq!(name, "tan");
                assert_eq!(column, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn literal_evaluates() {
        assert_eq!(parse("3.5").unwrap().evaluate(&BTreeMap::new()).unwrap(), 3.5);
        assert_eq!(parse("2.5e-1").unwrap().evaluate(&BTreeMap::new()).unwrap(), 0.25);
    }

    #[test]
    fn division_by_zero_errors() {
        let e = parse("x/0").unwrap();
        assert_eq!(e.evaluate(&env(&[("x", 1.0)])).unwrap_err(), DslError::DivisionByZero);
    }

    #[test]
    fn unbound_variable_errors() {
        let e = parse("x + y").unwrap();
        assert_eq!(
            e.evaluate(&env(&[("x", 1.0)])).unwrap_err(),
            DslError::UnboundVariable("y".into())
        );
    }

    #[test]
    fn derivative_of_rod_surface() {
        let e = parse("y - L*sin(th)").unwrap();
        let d = e.differentiate("th").unwrap();
        // equivalent to -L*cos(th)
        for th in [0.3_f64, 1.1, 2.0] {
            let got = d.evaluate(&env(&[("y", 0.7), ("L", 2.0), ("th", th)])).unwrap();
            assert!((got + 2.0 * th.cos()).abs() < 1e-12, "th={th} got={got}");
        }
        let dy = e.differentiate("y").unwrap();
        assert_eq!(dy, Expr::Number(1.0));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let e = parse("3.5 + sin(1)").unwrap();
        assert_eq!(e.differentiate("x").unwrap(), Expr::Number(0.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let exprs = [
            "x^2",
            "x*sin(x) + cos(2*x)",
            "sqrt(x + 2)",
            "x/(1 + x^2)",
            "abs(x - 0.5)",
        ];
        for text in exprs {
            let e = parse(text).unwrap();
            let d = e.differentiate("x").unwrap();
            for x in [-1.3_f64, 0.2, 0.9, 3.0] {
                let h = 1e-6 * (1.0 + x.abs());
                let fp = e.evaluate(&env(&[("x", x + h)])).unwrap();
                let fm = e.evaluate(&env(&[("x", x - h)])).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let sym = d.evaluate(&env(&[("x", x)])).unwrap();
                assert!(
                    (sym - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "{text} at x={x}: sym={sym} fd={fd}"
                );
            }
        }
    }

    #[test]
    fn power_rule_at_three() {
        let d = parse("x^2").unwrap().differentiate("x").unwrap();
        let got = d.evaluate(&env(&[("x", 3.0)])).unwrap();
        assert!((got - 6.0).abs() < 1e-12);
    }

    #[test]
    fn abs_derivative_uses_sign_zero_convention() {
        let d = parse("abs(x)").unwrap().differentiate("x").unwrap();
        assert_eq!(d.evaluate(&env(&[("x", 0.0)])).unwrap(), 0.0);
        assert_eq!(d.evaluate(&env(&[("x", 2.0)])).unwrap(), 1.0);
        assert_eq!(d.evaluate(&env(&[("x", -2.0)])).unwrap(), -1.0);
    }

    #[test]
    fn variable_exponent_is_unsupported() {
        let e = parse("2^x").unwrap();
        assert!(matches!(e.differentiate("x"), Err(DslError::Unsupported(_))));
    }

    #[test]
    fn substitute_folds_parameters() {
        let e = parse("y - L*sin(th)").unwrap();
        let s = e.substitute(&env(&[("L", 2.0)]));
        assert_eq!(s.variables().len(), 2);
        assert!(!s.depends_on("L"));
    }

    #[test]
    fn display_round_trips_structures() {
        let cases = [
            "2^3^2",
            "-2^2",
            "(x + y)*z - 3/(1 - w)",
            "x - (y - z)",
            "sin(x)*cos(y) + sqrt(abs(z))",
            "x^-2",
            "-(x + 1)",
        ];
        for text in cases {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|err| {
                panic!("reparse of '{printed}' (from '{text}') failed: {err}")
            });
            let bindings = env(&[("x", 0.7), ("y", -1.3), ("z", 2.1), ("w", 0.4)]);
            assert_eq!(
                e.evaluate(&bindings).unwrap(),
                reparsed.evaluate(&bindings).unwrap(),
                "mismatch for '{text}' printed as '{printed}'"
            );
        }
    }
}
