//! Arithmetic expression language for problem-config files.
//!
//! Grammar: real literals, variables `x y z t u`, unary `-`, binary
//! `+ - * / ^`, and the functions `sin cos tan exp log sqrt abs`.
//! Precedence is `^` > unary `-` > `* /` > `+ -`; `^` associates right,
//! everything else left, so `-2^2 == -4` and `2^3^2 == 2^(3^2)`.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
    T,
    U,
}

impl Var {
    pub fn symbol(self) -> char {
        match self {
            Var::X => 'x',
            Var::Y => 'y',
            Var::Z => 'z',
            Var::T => 't',
            Var::U => 'u',
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable assignment for evaluation. Unset variables are errors when read.
#[derive(Debug, Clone, Copy, Default)]
pub struct Assignment {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub t: Option<f64>,
    pub u: Option<f64>,
}

impl Assignment {
    pub fn point(p: [f64; 3]) -> Self {
        Assignment { x: Some(p[0]), y: Some(p[1]), z: Some(p[2]), t: None, u: None }
    }

    pub fn point_time(p: [f64; 3], t: f64) -> Self {
        Assignment { t: Some(t), ..Self::point(p) }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    fn get(&self, v: Var) -> Result<f64> {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::Z => self.z,
            Var::T => self.t,
            Var::U => self.u,
        }
        .ok_or(Error::MissingVariable(v.symbol()))
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let tokens = lex(source)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr(0)?;
        match p.peek() {
            Token::End => Ok(e),
            _ => Err(p.unexpected(&["operator", "end of input"])),
        }
    }

    pub fn eval(&self, vars: &Assignment) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(name) => vars.get(*name)?,
            Expr::Neg(e) => -e.eval(vars)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(vars)?;
                let b = b.eval(vars)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Domain(format!("division by zero: {a} / 0")));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let r = a.powf(b);
                        if !r.is_finite() && a.is_finite() && b.is_finite() {
                            return Err(Error::Domain(format!("{a} ^ {b} is not finite")));
                        }
                        r
                    }
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(vars)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::Domain(format!("log of nonpositive value {v}")));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(Error::Domain(format!("sqrt of negative value {v}")));
                        }
                        v.sqrt()
                    }
                    Func::Abs => v.abs(),
                }
            }
        };
        if v.is_nan() {
            return Err(Error::Domain("expression evaluated to NaN".into()));
        }
        Ok(v)
    }

    /// Free variables, in declaration order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut set = BTreeSet::new();
        self.collect_vars(&mut set);
        [Var::X, Var::Y, Var::Z, Var::T, Var::U]
            .into_iter()
            .filter(|v| set.contains(&v.symbol()))
            .collect()
    }

    fn collect_vars(&self, out: &mut BTreeSet<char>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.symbol());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(v) => write!(f, "{}", v.symbol()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{sym}{b})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
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
    End,
}

fn lex(src: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                out.push((Token::Plus, start));
                i += 1;
            }
            b'-' => {
                out.push((Token::Minus, start));
                i += 1;
            }
            b'*' => {
                out.push((Token::Star, start));
                i += 1;
            }
            b'/' => {
                out.push((Token::Slash, start));
                i += 1;
            }
            b'^' => {
                out.push((Token::Caret, start));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, start));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                let mut saw_digit = false;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                    saw_digit = true;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                        saw_digit = true;
                    }
                }
                if saw_digit && j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                if !saw_digit {
                    return Err(Error::Syntax {
                        offset: start,
                        expected: "digits in numeric literal".into(),
                    });
                }
                let text = &src[i..j];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: "a valid numeric literal".into(),
                })?;
                out.push((Token::Num(v), start));
                i = j;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                out.push((Token::Ident(src[i..j].to_string()), start));
                i = j;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    expected: "number, identifier, operator, or parenthesis".into(),
                });
            }
        }
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

// Binding powers: +,- (1,2); *,/ (3,4); unary - (5); ^ (6,5) right-assoc.
const UNARY_BP: u8 = 5;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        Error::Syntax { offset: self.offset(), expected: expected.join(", ") }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek() {
                Token::Plus => (BinOp::Add, 1, 2),
                Token::Minus => (BinOp::Sub, 1, 2),
                Token::Star => (BinOp::Mul, 3, 4),
                Token::Slash => (BinOp::Div, 3, 4),
                Token::Caret => (BinOp::Pow, 6, 5),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        match self.bump() {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Minus => {
                let e = self.expr(UNARY_BP)?;
                Ok(Expr::Neg(Box::new(e)))
            }
            Token::LParen => {
                let e = self.expr(0)?;
                match self.bump() {
                    Token::RParen => Ok(e),
                    _ => {
                        self.pos -= 1;
                        Err(self.unexpected(&["')'"]))
                    }
                }
            }
            Token::Ident(name) => {
                let ident_offset = self.tokens[self.pos - 1].1;
                if let Some(func) = Func::from_name(&name) {
                    match self.bump() {
                        Token::LParen => {}
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected(&["'(' after function name"]));
                        }
                    }
                    let arg = self.expr(0)?;
                    match self.bump() {
                        Token::RParen => Ok(Expr::Call(func, Box::new(arg))),
                        _ => {
                            self.pos -= 1;
                            Err(self.unexpected(&["')'"]))
                        }
                    }
                } else if name.len() == 1 {
                    match name.as_bytes()[0] {
                        b'x' => Ok(Expr::Var(Var::X)),
                        b'y' => Ok(Expr::Var(Var::Y)),
                        b'z' => Ok(Expr::Var(Var::Z)),
                        b't' => Ok(Expr::Var(Var::T)),
                        b'u' => Ok(Expr::Var(Var::U)),
                        _ => Err(Error::UnknownIdentifier { name, offset: ident_offset }),
                    }
                } else {
                    Err(Error::UnknownIdentifier { name, offset: ident_offset })
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected(&["number", "variable", "function", "'('", "unary '-'"]))
            }
        }
    }
}
