//! A small arithmetic expression grammar for user-defined nonlinearities.
//!
//! Supported: `+ - * / ^` (with `^` right-associative and binding tighter than
//! unary minus), parentheses, the functions `exp`, `log`, `abs`, numeric
//! literals, and a caller-supplied set of variable names (the CLI exposes
//! `x`, `r`, `z`). Parse errors carry a byte offset for diagnostics.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Exp(Box<Node>),
    Log(Box<Node>),
    Abs(Box<Node>),
}

/// A parsed expression bound to a fixed variable list.
///
/// ```
/// use hessian_kk_core::expr::Expr;
///
/// let e = Expr::parse("exp(z) + 2 * abs(z)", &["z"]).unwrap();
/// assert!((e.eval(&[-1.0]).unwrap() - ((-1.0f64).exp() + 2.0)).abs() < 1e-15);
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Plus => write!(f, "'+'"),
            TokenKind::Minus => write!(f, "'-'"),
            TokenKind::Star => write!(f, "'*'"),
            TokenKind::Slash => write!(f, "'/'"),
            TokenKind::Caret => write!(f, "'^'"),
            TokenKind::LParen => write!(f, "'('"),
            TokenKind::RParen => write!(f, "')'"),
            TokenKind::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token { kind: TokenKind::Plus, pos: i });
                i += 1;
            }
            '-' => {
                tokens.push(Token { kind: TokenKind::Minus, pos: i });
                i += 1;
            }
            '*' => {
                tokens.push(Token { kind: TokenKind::Star, pos: i });
                i += 1;
            }
            '/' => {
                tokens.push(Token { kind: TokenKind::Slash, pos: i });
                i += 1;
            }
            '^' => {
                tokens.push(Token { kind: TokenKind::Caret, pos: i });
                i += 1;
            }
            '(' => {
                tokens.push(Token { kind: TokenKind::LParen, pos: i });
                i += 1;
            }
            ')' => {
                tokens.push(Token { kind: TokenKind::RParen, pos: i });
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && i > start
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| {
                    Error::domain(format!("expression parse error at byte {start}: bad number '{text}'"))
                })?;
                tokens.push(Token { kind: TokenKind::Num(value), pos: start });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    pos: start,
                });
            }
            _ => {
                return Err(Error::domain(format!(
                    "expression parse error at byte {i}: unexpected character '{c}'"
                )))
            }
        }
    }
    tokens.push(Token { kind: TokenKind::End, pos: src.len() });
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, tok: &Token, expected: &str) -> Error {
        Error::domain(format!(
            "expression parse error at byte {}: expected {expected}, found {}",
            tok.pos, tok.kind
        ))
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if matches!(self.peek().kind, TokenKind::Minus) {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if matches!(self.peek().kind, TokenKind::Caret) {
            self.bump();
            // right-associative; exponent may start with unary minus
            let exponent = if matches!(self.peek().kind, TokenKind::Minus) {
                self.bump();
                Node::Neg(Box::new(self.power()?))
            } else {
                self.power()?
            };
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Num(v) => Ok(Node::Num(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if !matches!(close.kind, TokenKind::RParen) {
                    return Err(self.err_at(&close, "')'"));
                }
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if matches!(self.peek().kind, TokenKind::LParen) {
                    self.bump();
                    let arg = self.expr()?;
                    let close = self.bump();
                    if !matches!(close.kind, TokenKind::RParen) {
                        return Err(self.err_at(&close, "')' closing function argument"));
                    }
                    match name.as_str() {
                        "exp" => Ok(Node::Exp(Box::new(arg))),
                        "log" => Ok(Node::Log(Box::new(arg))),
                        "abs" => Ok(Node::Abs(Box::new(arg))),
                        other => Err(Error::domain(format!(
                            "expression parse error at byte {}: unknown function '{other}'",
                            tok.pos
                        ))),
                    }
                } else {
                    match self.vars.iter().position(|v| *v == name) {
                        Some(idx) => Ok(Node::Var(idx)),
                        None => Err(Error::domain(format!(
                            "expression parse error at byte {}: unknown variable '{name}' (allowed: {})",
                            tok.pos,
                            self.vars.join(", ")
                        ))),
                    }
                }
            }
            _ => Err(self.err_at(&tok, "a number, variable, function or '('")),
        }
    }
}

impl Expr {
    /// Parse `source` with the given allowed variable names.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0, vars };
        let root = parser.expr()?;
        let last = parser.bump();
        if !matches!(last.kind, TokenKind::End) {
            return Err(parser.err_at(&last, "end of input"));
        }
        Ok(Expr {
            source: source.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluate with variable values in declaration order.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.vars.len() {
            return Err(Error::domain(format!(
                "expression expects {} variable values, got {}",
                self.vars.len(),
                values.len()
            )));
        }
        let v = eval_node(&self.root, values);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numeric(format!(
                "expression '{}' evaluated to a non-finite value at {:?}",
                self.source, values
            )))
        }
    }

    /// True if the expression never reads the named variable.
    pub fn independent_of(&self, var: &str) -> bool {
        match self.vars.iter().position(|v| v == var) {
            Some(idx) => !reads_var(&self.root, idx),
            None => true,
        }
    }
}

fn reads_var(node: &Node, idx: usize) -> bool {
    match node {
        Node::Num(_) => false,
        Node::Var(i) => *i == idx,
        Node::Neg(a) | Node::Exp(a) | Node::Log(a) | Node::Abs(a) => reads_var(a, idx),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
        | Node::Pow(a, b) => reads_var(a, idx) || reads_var(b, idx),
    }
}

fn eval_node(node: &Node, values: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(i) => values[*i],
        Node::Add(a, b) => eval_node(a, values) + eval_node(b, values),
        Node::Sub(a, b) => eval_node(a, values) - eval_node(b, values),
        Node::Mul(a, b) => eval_node(a, values) * eval_node(b, values),
        Node::Div(a, b) => eval_node(a, values) / eval_node(b, values),
        Node::Pow(a, b) => eval_node(a, values).powf(eval_node(b, values)),
        Node::Neg(a) => -eval_node(a, values),
        Node::Exp(a) => eval_node(a, values).exp(),
        Node::Log(a) => eval_node(a, values).ln(),
        Node::Abs(a) => eval_node(a, values).abs(),
    }
}
