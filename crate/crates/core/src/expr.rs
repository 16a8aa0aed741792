//! Arithmetic objective expressions.
//!
//! Problem files describe the smooth part of the objective as a text
//! expression over variables `x1, x2, ...` (1-based). The grammar is:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right-associative
//! primary := number | 'x'<index> | ('exp' | 'log') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to a non-negative integer constant. Values and exact
//! gradients are computed on a flattened tape (reverse-mode AD).

use std::fmt;

use thiserror::Error;

/// Syntax error raised by [`Expression::parse`]. Positions are 1-based
/// character offsets; end of input is reported as `len + 1`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Hard evaluation failures. Solvers treat these as rejections rather than
/// propagating NaN.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive argument {0}")]
    LogDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("point has {got} entries but x{needed} is referenced")]
    Dimension { needed: usize, got: usize },
    #[error("non-finite objective value at evaluation point")]
    NonFinite,
}

/// Expression tree node. Variable indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    Log(Box<Node>),
}

impl Node {
    pub fn constant(v: f64) -> Node {
        Node::Const(v)
    }

    /// Panics on index 0; use [`Expression::parse`] for untrusted input.
    pub fn var(index: usize) -> Node {
        assert!(index >= 1, "variables are 1-based");
        Node::Var(index)
    }

    pub fn add(a: Node, b: Node) -> Node {
        Node::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Node, b: Node) -> Node {
        Node::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Node, b: Node) -> Node {
        Node::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Node, b: Node) -> Node {
        Node::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Node) -> Node {
        Node::Neg(Box::new(a))
    }

    pub fn pow(a: Node, n: u32) -> Node {
        Node::Pow(Box::new(a), n)
    }

    pub fn exp(a: Node) -> Node {
        Node::Exp(Box::new(a))
    }

    pub fn log(a: Node) -> Node {
        Node::Log(Box::new(a))
    }

    fn max_var(&self) -> usize {
        match self {
            Node::Const(_) => 0,
            Node::Var(i) => *i,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.max_var(),
        }
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Var(i) => out.push(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.collect_vars(out),
        }
    }
}

impl fmt::Display for Node {
    /// Fully parenthesized form that [`Expression::parse`] reads back.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Node::Const(v) => write!(f, "{v:?}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, n) => write!(f, "({a})^{n}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, u32),
    Exp(usize),
    Log(usize),
}

/// Immutable parsed expression with a precompiled evaluation tape.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    tape: Vec<Op>,
    max_var: usize,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expression {
    pub fn new(root: Node) -> Expression {
        let mut tape = Vec::new();
        compile(&root, &mut tape);
        let max_var = root.max_var();
        Expression {
            root,
            tape,
            max_var,
        }
    }

    pub fn parse(text: &str) -> Result<Expression, ParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        let tok = parser.peek();
        if tok.kind != Tok::End {
            return Err(ParseError {
                position: tok.position,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Expression::new(root))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Largest 1-based variable index referenced (0 for constants).
    pub fn max_var(&self) -> usize {
        self.max_var
    }

    /// Sorted, deduplicated 1-based indices of referenced variables.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.root.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn forward(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        if point.len() < self.max_var {
            return Err(EvalError::Dimension {
                needed: self.max_var,
                got: point.len(),
            });
        }
        let mut vals: Vec<f64> = Vec::with_capacity(self.tape.len());
        for op in &self.tape {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(i) => point[i],
                Op::Add(a, b) => vals[a] + vals[b],
                Op::Sub(a, b) => vals[a] - vals[b],
                Op::Mul(a, b) => vals[a] * vals[b],
                Op::Div(a, b) => {
                    if vals[b] == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    vals[a] / vals[b]
                }
                Op::Neg(a) => -vals[a],
                Op::Pow(a, n) => powu(vals[a], n),
                Op::Exp(a) => vals[a].exp(),
                Op::Log(a) => {
                    if vals[a] <= 0.0 {
                        return Err(EvalError::LogDomain(vals[a]));
                    }
                    vals[a].ln()
                }
            };
            vals.push(v);
        }
        Ok(vals)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let vals = self.forward(point)?;
        Ok(*vals.last().expect("tape is never empty"))
    }

    /// Exact gradient; the result has the same length as `point`.
    pub fn gradient(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut grad = vec![0.0; point.len()];
        self.value_and_gradient(point, &mut grad)?;
        Ok(grad)
    }

    /// Writes the gradient into `grad` (overwriting) and returns the value.
    pub fn value_and_gradient(&self, point: &[f64], grad: &mut [f64]) -> Result<f64, EvalError> {
        let vals = self.forward(point)?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut adj = vec![0.0; vals.len()];
        *adj.last_mut().expect("tape is never empty") = 1.0;
        for i in (0..self.tape.len()).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match self.tape[i] {
                Op::Const(_) => {}
                Op::Var(k) => grad[k] += g,
                Op::Add(a, b) => {
                    adj[a] += g;
                    adj[b] += g;
                }
                Op::Sub(a, b) => {
                    adj[a] += g;
                    adj[b] -= g;
                }
                Op::Mul(a, b) => {
                    adj[a] += g * vals[b];
                    adj[b] += g * vals[a];
                }
                Op::Div(a, b) => {
                    adj[a] += g / vals[b];
                    adj[b] -= g * vals[i] / vals[b];
                }
                Op::Neg(a) => adj[a] -= g,
                Op::Pow(a, n) => {
                    if n > 0 {
                        adj[a] += g * n as f64 * powu(vals[a], n - 1);
                    }
                }
                Op::Exp(a) => adj[a] += g * vals[i],
                Op::Log(a) => adj[a] += g / vals[a],
            }
        }
        Ok(*vals.last().expect("tape is never empty"))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

fn powu(x: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

fn compile(node: &Node, tape: &mut Vec<Op>) -> usize {
    let op = match node {
        Node::Const(c) => Op::Const(*c),
        Node::Var(i) => Op::Var(i - 1),
        Node::Add(a, b) => {
            let (a, b) = (compile(a, tape), compile(b, tape));
            Op::Add(a, b)
        }
        Node::Sub(a, b) => {
            let (a, b) = (compile(a, tape), compile(b, tape));
            Op::Sub(a, b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (compile(a, tape), compile(b, tape));
            Op::Mul(a, b)
        }
        Node::Div(a, b) => {
            let (a, b) = (compile(a, tape), compile(b, tape));
            Op::Div(a, b)
        }
        Node::Neg(a) => Op::Neg(compile(a, tape)),
        Node::Pow(a, n) => Op::Pow(compile(a, tape), *n),
        Node::Exp(a) => Op::Exp(compile(a, tape)),
        Node::Log(a) => Op::Log(compile(a, tape)),
    };
    tape.push(op);
    tape.len() - 1
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
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    position: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let position = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token { kind, position });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // optional exponent: e[+-]digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value = lit.parse::<f64>().map_err(|_| ParseError {
                position,
                message: format!("malformed number '{lit}'"),
            })?;
            out.push(Token {
                kind: Tok::Num(value),
                position,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                position,
            });
            continue;
        }
        return Err(ParseError {
            position,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Token {
        kind: Tok::End,
        position: chars.len() + 1,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: Tok) -> Result<(), ParseError> {
        let t = self.bump();
        if t.kind == kind {
            Ok(())
        } else {
            Err(ParseError {
                position: t.position,
                message: format!("expected {}, found {}", kind.describe(), t.kind.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                Tok::Star => {
                    self.bump();
                    lhs = Node::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek().kind == Tok::Minus {
            self.bump();
            return Ok(Node::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek().kind != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let position = self.peek().position;
        let exponent = self.unary()?;
        let value = fold_constant(&exponent).ok_or_else(|| ParseError {
            position,
            message: "exponent must be a constant".into(),
        })?;
        if !(value >= 0.0 && value.fract() == 0.0 && value <= i32::MAX as f64) {
            return Err(ParseError {
                position,
                message: format!("exponent {value} is not a non-negative integer"),
            });
        }
        Ok(Node::pow(base, value as u32))
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let t = self.bump();
        match t.kind {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == "exp" || name == "log" {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(if name == "exp" {
                        Node::exp(arg)
                    } else {
                        Node::log(arg)
                    });
                }
                match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    Some(0) => Err(ParseError {
                        position: t.position,
                        message: "variable indices start at x1".into(),
                    }),
                    Some(i) => Ok(Node::Var(i)),
                    _ => Err(ParseError {
                        position: t.position,
                        message: format!("unknown identifier '{name}'"),
                    }),
                }
            }
            other => Err(ParseError {
                position: t.position,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

fn fold_constant(node: &Node) -> Option<f64> {
    Some(match node {
        Node::Const(c) => *c,
        Node::Var(_) => return None,
        Node::Add(a, b) => fold_constant(a)? + fold_constant(b)?,
        Node::Sub(a, b) => fold_constant(a)? - fold_constant(b)?,
        Node::Mul(a, b) => fold_constant(a)? * fold_constant(b)?,
        Node::Div(a, b) => fold_constant(a)? / fold_constant(b)?,
        Node::Neg(a) => -fold_constant(a)?,
        Node::Pow(a, n) => powu(fold_constant(a)?, *n),
        Node::Exp(a) => fold_constant(a)?.exp(),
        Node::Log(a) => fold_constant(a)?.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_difference(e: &Expression, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn precedence_matches_canonical_tree() {
        let e = Expression::parse("x1^2 + 3*x2").unwrap();
        let expected = Node::add(
            Node::pow(Node::var(1), 2),
            Node::mul(Node::constant(3.0), Node::var(2)),
        );
        assert_eq!(e.root(), &expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expression::parse("-x1^2").unwrap();
        assert_eq!(e.root(), &Node::neg(Node::pow(Node::var(1), 2)));
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = Expression::parse("x1^2^3").unwrap();
        assert_eq!(e.root(), &Node::pow(Node::var(1), 8));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = Expression::parse("x1 - x2 - x3").unwrap();
        assert_eq!(e.eval(&[1.0, 2.0, 3.0]).unwrap(), -4.0);
    }

    #[test]
    fn dangling_operator_reports_end_position() {
        let err = Expression::parse("x1 +").unwrap_err();
        assert_eq!(err.position, 5);
    }

    #[test]
    fn syntax_errors() {
        assert!(Expression::parse("(x1 + 2").is_err());
        assert!(Expression::parse("x1 + 2)").is_err());
        assert_eq!(Expression::parse("y + 1").unwrap_err().position, 1);
        assert_eq!(Expression::parse("2 * sin(x1)").unwrap_err().position, 5);
        assert!(Expression::parse("x0").is_err());
        assert!(Expression::parse("x1^0.5").is_err());
        assert!(Expression::parse("x1^-1").is_err());
        assert!(Expression::parse("x1^x2").is_err());
    }

    #[test]
    fn direct_arithmetic() {
        let e = Expression::parse("2*(x1 - x2)^3").unwrap();
        assert_eq!(e.eval(&[2.0, 1.0]).unwrap(), 2.0);
        let e = Expression::new(Node::pow(Node::var(1), 2));
        assert_eq!(e.eval(&[3.0]).unwrap(), 9.0);
        let e = Expression::parse("0.5*(x1^2+x2^2)").unwrap();
        assert_eq!(e.eval(&[2.0, 2.0]).unwrap(), 4.0);
        let e = Expression::parse("1.5e-1 * 2E1").unwrap();
        assert!((e.eval(&[]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = Expression::new(Node::log(Node::var(1)));
        assert_eq!(e.eval(&[-1.0]), Err(EvalError::LogDomain(-1.0)));
        let e = Expression::parse("1 / (x1 - 1)").unwrap();
        assert_eq!(e.eval(&[1.0]), Err(EvalError::DivisionByZero));
        assert_eq!(e.gradient(&[1.0]), Err(EvalError::DivisionByZero));
        let e = Expression::parse("x3").unwrap();
        assert!(matches!(e.eval(&[1.0]), Err(EvalError::Dimension { .. })));
    }

    #[test]
    fn polynomial_gradient() {
        let e = Expression::parse("x1^2+3*x2").unwrap();
        assert_eq!(e.gradient(&[1.0, 2.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_is_zero() {
        let e = Expression::parse("5").unwrap();
        assert_eq!(e.gradient(&[1.0, -4.0, 2.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn exp_product_matches_finite_differences() {
        let e = Expression::parse("exp(x1*x2)").unwrap();
        let x = [0.3, 0.7];
        let g = e.gradient(&x).unwrap();
        let fd = central_difference(&e, &x, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs());
        }
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (-3.0f64..3.0).prop_map(Node::Const),
            (1usize..=3).prop_map(Node::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::sub(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::mul(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::div(a, b)),
                inner.clone().prop_map(Node::neg),
                (inner.clone(), 0u32..4).prop_map(|(a, n)| Node::pow(a, n)),
                inner.clone().prop_map(Node::exp),
                inner.prop_map(Node::log),
            ]
        })
    }

    /// Every divisor and log argument stays well away from its singularity
    /// in a neighbourhood of the point, so finite differences are valid.
    fn well_conditioned(node: &Node, x: &[f64]) -> bool {
        let e = |n: &Node| Expression::new(n.clone()).eval(x);
        let ok = match node {
            Node::Div(_, b) => matches!(e(b), Ok(v) if v.abs() > 0.2),
            Node::Log(a) => matches!(e(a), Ok(v) if v > 0.2),
            _ => true,
        };
        ok && match node {
            Node::Const(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                well_conditioned(a, x) && well_conditioned(b, x)
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => well_conditioned(a, x),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gradient_matches_central_differences(
            node in arb_node(),
            x in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            prop_assume!(well_conditioned(&node, &x));
            let e = Expression::new(node);
            let value = e.eval(&x);
            prop_assume!(matches!(value, Ok(v) if v.abs() < 1e3));
            let g = e.gradient(&x).unwrap();
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assume!(gmax < 1e4);
            let fd = central_difference(&e, &x, 1e-6);
            let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-5 * (1.0 + gmax), "err {} grad {:?} fd {:?}", err, g, fd);
        }

        #[test]
        fn print_parse_round_trip(node in arb_node()) {
            let e = Expression::new(node);
            let back = Expression::parse(&e.to_string()).unwrap();
            let mut rng_pts = (0..100).map(|k| {
                let t = k as f64 * 0.37;
                vec![t.sin() * 2.0, (1.3 * t).cos() * 2.0, (0.7 * t).sin()]
            });
            for p in rng_pts.by_ref() {
                match (e.eval(&p), back.eval(&p)) {
                    (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
                    (Err(a), Err(b)) => prop_assert_eq!(a, b),
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }
    }
}
