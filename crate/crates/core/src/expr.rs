//! Minimal arithmetic expressions over the chart coordinates.
//!
//! Grammar: `+ - * / ^`, parentheses, `sqrt(..)`, `ln(..)`, numbers, the
//! coordinates `x1 x2 x3` and the radius `r`. `^` binds tighter than unary
//! minus and is right associative, so `-x1^2 = -(x1^2)`.

use std::fmt;

use crate::dual::Real;
use crate::error::{GeometryError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Radius,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Ln(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        match self {
            Expr::Const(c) => T::cst(*c),
            Expr::Coord(i) => x[*i],
            Expr::Radius => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => {
                let base = a.eval(x);
                match b.as_ref() {
                    Expr::Const(c) if c.fract() == 0.0 && c.abs() <= 64.0 => base.powi(*c as i32),
                    Expr::Const(c) => base.powf(*c),
                    _ => (b.eval(x) * base.ln()).exp(),
                }
            }
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Ln(a) => a.eval(x).ln(),
        }
    }

    /// True when no coordinate or radius occurs.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Coord(_) | Expr::Radius => false,
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Ln(a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Replace every coordinate `x_i` by `Σ_j m[i][j]·x_j`; the radius is
    /// left alone, so `m` must be orthogonal for the result to mean
    /// anything.
    pub fn substitute_linear(&self, m: &[[f64; 3]; 3]) -> Expr {
        let rec = |e: &Expr| Box::new(e.substitute_linear(m));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Radius => Expr::Radius,
            Expr::Coord(i) => {
                let mut acc: Option<Expr> = None;
                for (j, &c) in m[*i].iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let term = if c == 1.0 {
                        Expr::Coord(j)
                    } else {
                        Expr::Mul(Box::new(Expr::Const(c)), Box::new(Expr::Coord(j)))
                    };
                    acc = Some(match acc {
                        None => term,
                        Some(a) => Expr::Add(Box::new(a), Box::new(term)),
                    });
                }
                acc.unwrap_or(Expr::Const(0.0))
            }
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
            Expr::Div(a, b) => Expr::Div(rec(a), rec(b)),
            Expr::Pow(a, b) => Expr::Pow(rec(a), rec(b)),
            Expr::Sqrt(a) => Expr::Sqrt(rec(a)),
            Expr::Ln(a) => Expr::Ln(rec(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Radius => write!(f, "r"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> GeometryError {
        GeometryError::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let mut exp = self.unary()?;
            if exp.is_constant() {
                exp = Expr::Const(exp.eval(&[0.0; 3]));
            }
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| GeometryError::Parse {
                position: start,
                message: format!("bad number '{text}'"),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match name {
            "x1" => Ok(Expr::Coord(0)),
            "x2" => Ok(Expr::Coord(1)),
            "x3" => Ok(Expr::Coord(2)),
            "r" => Ok(Expr::Radius),
            "sqrt" | "ln" => {
                if !self.eat(b'(') {
                    return Err(self.err("expected '(' after function name"));
                }
                let arg = Box::new(self.expr()?);
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(if name == "sqrt" {
                    Expr::Sqrt(arg)
                } else {
                    Expr::Ln(arg)
                })
            }
            _ => Err(GeometryError::Parse {
                position: start,
                message: format!("unknown identifier '{name}'"),
            }),
        }
    }
}
