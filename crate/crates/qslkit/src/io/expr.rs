//! Recursive-descent parser and evaluator for operator expressions.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary
//! primary := number | 'i' | atom | '(' expr ')'
//!          | 'dag' '(' expr ')' | 'kron' '(' expr ',' expr ')'
//!          | 'sqrt' '(' expr ')'
//! number  := decimal with optional trailing 'i'
//! atom    := sx | sy | sz | sp | sm | id(d) | gm(k) | proj(i,j,d)
//!          | coll_sm(N) | coll_sz(N)
//! ```
//!
//! Values are matrices; a `1x1` matrix acts as a complex scalar. Scalars
//! commute and may multiply matrices from either side; division requires a
//! scalar divisor; `sqrt` requires a nonnegative real scalar. There is no
//! implicit multiplication.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::operators;

/// Byte range of a token or subexpression in the source text.
pub type Span = std::ops::Range<usize>;

/// Parse or evaluation failure, with the byte span it refers to.
#[derive(Debug, Clone, Error)]
#[error("{message} (at byte {})", span.start)]
pub struct ExprError {
    pub message: String,
    pub span: Span,
}

impl ExprError {
    fn new(message: impl Into<String>, span: Span) -> Self {
        Self {
            message: message.into(),
            span,
        }
    }
}

type ExprResult<T> = std::result::Result<T, ExprError>;

/// Operator-expression syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// Real or pure-imaginary literal (from a numeric token or bare `i`).
    Literal(Complex64),
    /// Named operator with optional integer arguments.
    Atom { name: String, args: Vec<usize> },
    Neg(Box<OperatorExpr>),
    Dag(Box<OperatorExpr>),
    Sqrt(Box<OperatorExpr>),
    Binary {
        op: BinOp,
        lhs: Box<OperatorExpr>,
        rhs: Box<OperatorExpr>,
    },
    Kron(Box<OperatorExpr>, Box<OperatorExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl std::fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ExprKind::Literal(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.re == 0.0 && z.im == 1.0 {
                    write!(f, "i")
                } else {
                    write!(f, "{}i", z.im)
                }
            }
            ExprKind::Atom { name, args } => {
                if args.is_empty() {
                    write!(f, "{name}")
                } else {
                    let joined: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    write!(f, "{name}({})", joined.join(","))
                }
            }
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Dag(e) => write!(f, "dag({e})"),
            ExprKind::Sqrt(e) => write!(f, "sqrt({e})"),
            ExprKind::Binary { op, lhs, rhs } => {
                let symbol = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({lhs} {symbol} {rhs})")
            }
            ExprKind::Kron(a, b) => write!(f, "kron({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number { value: f64, imaginary: bool },
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    span: Span,
}

fn tokenize(text: &str) -> ExprResult<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => pos += 1,
            b'(' | b')' | b',' | b'+' | b'-' | b'*' | b'/' => {
                let kind = match b {
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b',' => TokenKind::Comma,
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    _ => TokenKind::Slash,
                };
                tokens.push(Token {
                    kind,
                    span: pos..pos + 1,
                });
                pos += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'.' {
                    pos += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mark = pos;
                    pos += 1;
                    if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                        pos += 1;
                    }
                    if pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    } else {
                        pos = mark; // bare 'e' belongs to an identifier, not this number
                    }
                }
                let value: f64 = text[start..pos].parse().map_err(|_| {
                    ExprError::new(format!("invalid number `{}`", &text[start..pos]), start..pos)
                })?;
                let imaginary = pos < bytes.len() && bytes[pos] == b'i' && {
                    // Trailing 'i' only when not the start of a longer identifier.
                    let after = pos + 1;
                    after >= bytes.len()
                        || !(bytes[after].is_ascii_alphanumeric() || bytes[after] == b'_')
                };
                if imaginary {
                    pos += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Number { value, imaginary },
                    span: start..pos,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[start..pos].to_string()),
                    span: start..pos,
                });
            }
            _ => {
                return Err(ExprError::new(
                    format!("unexpected character `{}`", &text[pos..pos + 1]),
                    pos..pos + 1,
                ))
            }
        }
    }
    Ok(tokens)
}

const MAX_DEPTH: usize = 256;

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Span {
        self.peek()
            .map(|t| t.span.clone())
            .unwrap_or(self.end..self.end)
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> ExprResult<Span> {
        match self.peek() {
            Some(t) if &t.kind == kind => {
                let span = t.span.clone();
                self.pos += 1;
                Ok(span)
            }
            _ => Err(ExprError::new(format!("expected {what}"), self.here())),
        }
    }

    fn expr(&mut self, depth: usize) -> ExprResult<OperatorExpr> {
        if depth > MAX_DEPTH {
            return Err(ExprError::new("expression too deeply nested", self.here()));
        }
        let mut lhs = self.term(depth + 1)?;
        while let Some(t) = self.peek() {
            let op = match t.kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term(depth + 1)?;
            let span = lhs.span.start..rhs.span.end;
            lhs = OperatorExpr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> ExprResult<OperatorExpr> {
        if depth > MAX_DEPTH {
            return Err(ExprError::new("expression too deeply nested", self.here()));
        }
        let mut lhs = self.factor(depth + 1)?;
        while let Some(t) = self.peek() {
            let op = match t.kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor(depth + 1)?;
            let span = lhs.span.start..rhs.span.end;
            lhs = OperatorExpr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self, depth: usize) -> ExprResult<OperatorExpr> {
        if depth > MAX_DEPTH {
            return Err(ExprError::new("expression too deeply nested", self.here()));
        }
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Minus {
                let start = t.span.start;
                self.pos += 1;
                let inner = self.factor(depth + 1)?;
                let span = start..inner.span.end;
                return Ok(OperatorExpr {
                    kind: ExprKind::Neg(Box::new(inner)),
                    span,
                });
            }
        }
        self.primary(depth + 1)
    }

    fn primary(&mut self, depth: usize) -> ExprResult<OperatorExpr> {
        let token = match self.next() {
            Some(t) => t.clone(),
            None => return Err(ExprError::new("unexpected end of expression", self.here())),
        };
        match token.kind {
            TokenKind::Number { value, imaginary } => {
                let z = if imaginary {
                    Complex64::new(0.0, value)
                } else {
                    Complex64::new(value, 0.0)
                };
                Ok(OperatorExpr {
                    kind: ExprKind::Literal(z),
                    span: token.span,
                })
            }
            TokenKind::LParen => {
                let inner = self.expr(depth + 1)?;
                let close = self.expect(&TokenKind::RParen, "`)`")?;
                Ok(OperatorExpr {
                    kind: inner.kind,
                    span: token.span.start..close.end,
                })
            }
            TokenKind::Ident(name) => self.named(name, token.span, depth),
            _ => Err(ExprError::new("expected a value", token.span)),
        }
    }

    fn named(&mut self, name: String, span: Span, depth: usize) -> ExprResult<OperatorExpr> {
        match name.as_str() {
            "i" => Ok(OperatorExpr {
                kind: ExprKind::Literal(Complex64::new(0.0, 1.0)),
                span,
            }),
            "dag" | "sqrt" => {
                self.expect(&TokenKind::LParen, "`(`")?;
                let inner = self.expr(depth + 1)?;
                let close = self.expect(&TokenKind::RParen, "`)`")?;
                let full = span.start..close.end;
                let kind = if name == "dag" {
                    ExprKind::Dag(Box::new(inner))
                } else {
                    ExprKind::Sqrt(Box::new(inner))
                };
                Ok(OperatorExpr { kind, span: full })
            }
            "kron" => {
                self.expect(&TokenKind::LParen, "`(`")?;
                let a = self.expr(depth + 1)?;
                self.expect(&TokenKind::Comma, "`,`")?;
                let b = self.expr(depth + 1)?;
                let close = self.expect(&TokenKind::RParen, "`)`")?;
                Ok(OperatorExpr {
                    kind: ExprKind::Kron(Box::new(a), Box::new(b)),
                    span: span.start..close.end,
                })
            }
            _ => {
                // Plain atom, optionally with integer arguments.
                let mut args = Vec::new();
                let mut end = span.end;
                if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
                    self.pos += 1;
                    loop {
                        let at_end = self.here();
                        let t = self
                            .next()
                            .ok_or_else(|| ExprError::new("expected an integer argument", at_end))?
                            .clone();
                        match t.kind {
                            TokenKind::Number { value, imaginary: false }
                                if value.fract() == 0.0 && value >= 0.0 =>
                            {
                                args.push(value as usize);
                            }
                            _ => {
                                return Err(ExprError::new(
                                    "atom arguments must be nonnegative integers",
                                    t.span,
                                ))
                            }
                        }
                        match self.next().map(|t| (t.kind.clone(), t.span.clone())) {
                            Some((TokenKind::Comma, _)) => continue,
                            Some((TokenKind::RParen, s)) => {
                                end = s.end;
                                break;
                            }
                            other => {
                                let at = other.map(|(_, s)| s).unwrap_or(self.here());
                                return Err(ExprError::new("expected `,` or `)`", at));
                            }
                        }
                    }
                }
                Ok(OperatorExpr {
                    kind: ExprKind::Atom { name, args },
                    span: span.start..end,
                })
            }
        }
    }
}

/// Parses a source string into a syntax tree without evaluating it.
pub fn parse_expression(text: &str) -> ExprResult<OperatorExpr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ExprError::new("empty expression", 0..0));
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr(0)?;
    if let Some(extra) = parser.peek() {
        return Err(ExprError::new("unexpected trailing input", extra.span.clone()));
    }
    Ok(expr)
}

fn scalar(z: Complex64) -> ComplexMatrix {
    ComplexMatrix::new(1, 1, vec![z]).expect("1x1 scalar")
}

fn is_scalar(m: &ComplexMatrix) -> bool {
    m.rows() == 1 && m.cols() == 1
}

fn atom_matrix(name: &str, args: &[usize], span: &Span) -> ExprResult<ComplexMatrix> {
    let arity = |want: usize| -> ExprResult<()> {
        if args.len() != want {
            Err(ExprError::new(
                format!("`{name}` takes {want} argument(s), got {}", args.len()),
                span.clone(),
            ))
        } else {
            Ok(())
        }
    };
    let lifted = |r: crate::Result<ComplexMatrix>| -> ExprResult<ComplexMatrix> {
        r.map_err(|e| ExprError::new(e.to_string(), span.clone()))
    };
    match name {
        "sx" => {
            arity(0)?;
            Ok(operators::sigma_x())
        }
        "sy" => {
            arity(0)?;
            Ok(operators::sigma_y())
        }
        "sz" => {
            arity(0)?;
            Ok(operators::sigma_z())
        }
        "sp" => {
            arity(0)?;
            Ok(operators::sigma_plus())
        }
        "sm" => {
            arity(0)?;
            Ok(operators::sigma_minus())
        }
        "id" => {
            arity(1)?;
            lifted(operators::identity(args[0]))
        }
        "gm" => {
            arity(1)?;
            lifted(operators::gell_mann(args[0]))
        }
        "proj" => {
            arity(3)?;
            lifted(operators::projector(args[0], args[1], args[2]))
        }
        "coll_sm" => {
            arity(1)?;
            lifted(operators::collective_lowering(args[0]))
        }
        "coll_sz" => {
            arity(1)?;
            lifted(operators::collective_dephasing(args[0]))
        }
        _ => Err(ExprError::new(format!("unknown atom `{name}`"), span.clone())),
    }
}

/// Evaluates a syntax tree to a matrix (possibly `1x1`, i.e. a scalar).
pub fn eval(expr: &OperatorExpr) -> ExprResult<ComplexMatrix> {
    match &expr.kind {
        ExprKind::Literal(z) => Ok(scalar(*z)),
        ExprKind::Atom { name, args } => atom_matrix(name, args, &expr.span),
        ExprKind::Neg(inner) => Ok(eval(inner)?.scale_re(-1.0)),
        ExprKind::Dag(inner) => Ok(eval(inner)?.dagger()),
        ExprKind::Sqrt(inner) => {
            let v = eval(inner)?;
            if !is_scalar(&v) {
                return Err(ExprError::new("sqrt needs a scalar argument", expr.span.clone()));
            }
            let z = v[(0, 0)];
            if z.im.abs() > 1e-12 * (1.0 + z.norm()) || z.re < 0.0 {
                return Err(ExprError::new(
                    "sqrt needs a nonnegative real argument",
                    expr.span.clone(),
                ));
            }
            Ok(scalar(Complex64::new(z.re.sqrt(), 0.0)))
        }
        ExprKind::Kron(a, b) => Ok(eval(a)?.kron(&eval(b)?)),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = eval(lhs)?;
            let b = eval(rhs)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
                        return Err(ExprError::new(
                            format!(
                                "cannot {} a {}x{} and a {}x{} value",
                                if *op == BinOp::Add { "add" } else { "subtract" },
                                a.rows(),
                                a.cols(),
                                b.rows(),
                                b.cols()
                            ),
                            expr.span.clone(),
                        ));
                    }
                    Ok(if *op == BinOp::Add { &a + &b } else { &a - &b })
                }
                BinOp::Mul => {
                    if is_scalar(&a) {
                        Ok(b.scale(a[(0, 0)]))
                    } else if is_scalar(&b) {
                        Ok(a.scale(b[(0, 0)]))
                    } else if a.cols() == b.rows() {
                        Ok(&a * &b)
                    } else {
                        Err(ExprError::new(
                            format!(
                                "cannot multiply a {}x{} by a {}x{} matrix",
                                a.rows(),
                                a.cols(),
                                b.rows(),
                                b.cols()
                            ),
                            expr.span.clone(),
                        ))
                    }
                }
                BinOp::Div => {
                    if !is_scalar(&b) {
                        return Err(ExprError::new(
                            "divisor must be a scalar",
                            rhs.span.clone(),
                        ));
                    }
                    let z = b[(0, 0)];
                    if z.norm() == 0.0 {
                        return Err(ExprError::new("division by zero", rhs.span.clone()));
                    }
                    Ok(a.scale(Complex64::new(1.0, 0.0) / z))
                }
            }
        }
    }
}

/// Parses and evaluates an operator expression that must produce a
/// `dim x dim` matrix. A scalar result `c` is promoted to `c · I_dim`, so
/// `hamiltonian = 0` denotes the zero operator.
pub fn parse_operator(text: &str, dim: usize) -> ExprResult<ComplexMatrix> {
    let expr = parse_expression(text)?;
    let value = eval(&expr)?;
    if is_scalar(&value) && dim != 1 {
        return Ok(ComplexMatrix::identity(dim).scale(value[(0, 0)]));
    }
    if value.rows() != dim || value.cols() != dim {
        return Err(ExprError::new(
            format!(
                "expression evaluates to a {}x{} matrix, expected {dim}x{dim}",
                value.rows(),
                value.cols()
            ),
            expr.span,
        ));
    }
    Ok(value)
}

/// Parses and evaluates an expression that must produce a complex scalar.
pub fn parse_scalar(text: &str) -> ExprResult<Complex64> {
    let expr = parse_expression(text)?;
    let value = eval(&expr)?;
    if !is_scalar(&value) {
        return Err(ExprError::new(
            format!(
                "expression evaluates to a {}x{} matrix, expected a scalar",
                value.rows(),
                value.cols()
            ),
            expr.span,
        ));
    }
    Ok(value[(0, 0)])
}
