//! θ expressions: `golden`, `p/q`, decimals, `sqrt(d)`, `(a+b*sqrt(d))/c`,
//! `exp(x)`, `pi`, `e`, with `+ - * /`, unary minus and parentheses.
//!
//! Arithmetic stays exact inside one quadratic field and falls back to a
//! Float as soon as a transcendental value (`exp`, `pi`, `e`) is involved.

use super::surd::Quad;
use super::RealParam;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Clone, Debug)]
enum Value {
    Exact(Quad),
    Float(f64),
}

impl Value {
    fn as_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64(),
            Value::Float(x) => *x,
        }
    }
}

/// Parses with the default Float tolerance 1e−15.
pub fn parse_theta(src: &str) -> Result<RealParam> {
    parse_theta_with_eps(src, 1e-15)
}

pub fn parse_theta_with_eps(src: &str, eps: f64) -> Result<RealParam> {
    let mut p = Parser { s: src.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    match v {
        Value::Exact(q) => Ok(RealParam::from_quad(&q)),
        Value::Float(x) => RealParam::float(x, eps),
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.i))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = self.binop(lhs, rhs, Op::Add)?;
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = self.binop(lhs, rhs, Op::Sub)?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = self.binop(lhs, rhs, Op::Mul)?;
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = self.binop(lhs, rhs, Op::Div)?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat(b'-') {
            let v = self.unary()?;
            return Ok(match v {
                Value::Exact(q) => Value::Exact(q.neg()),
                Value::Float(x) => Value::Float(-x),
            });
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected a value")),
        }
    }

    fn number(&mut self) -> Result<Value> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        let mut exp10: i64 = 0;
        let mantissa = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
        if self.i < self.s.len() && (self.s[self.i] == b'e' || self.s[self.i] == b'E') {
            let save = self.i;
            self.i += 1;
            let es = self.i;
            if self.i < self.s.len() && (self.s[self.i] == b'-' || self.s[self.i] == b'+') {
                self.i += 1;
            }
            let ds = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            if ds == self.i {
                self.i = save;
            } else {
                exp10 = std::str::from_utf8(&self.s[es..self.i]).expect("ascii").parse().map_err(|_| self.err("bad exponent"))?;
            }
        }
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((a, b)) => (a, b),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() || mantissa.matches('.').count() > 1 {
            return Err(self.err("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().map_err(|_| self.err("malformed number"))?;
        let scale = exp10 - frac_part.len() as i64;
        if scale.abs() > 4000 {
            return Err(self.err("exponent out of range"));
        }
        let ten = BigInt::from(10u8);
        let r = if scale >= 0 {
            BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Value::Exact(Quad::rational(r)))
    }

    fn ident(&mut self) -> Result<Value> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.i]).expect("ascii").to_ascii_lowercase();
        match name.as_str() {
            "golden" | "phi" => {
                let root5 = Quad::sqrt_of(&BigRational::from_integer(5.into())).expect("positive");
                let v = root5.add(&Quad::from_int(1)).expect("field").div(&Quad::from_int(2)).expect("nonzero");
                Ok(Value::Exact(v))
            }
            "pi" => Ok(Value::Float(std::f64::consts::PI)),
            "e" => Ok(Value::Float(std::f64::consts::E)),
            "sqrt" | "exp" => {
                if !self.eat(b'(') {
                    return Err(self.err("expected '(' after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                if name == "exp" {
                    return Ok(Value::Float(arg.as_f64().exp()));
                }
                match arg {
                    Value::Exact(q) if q.is_rational() => match Quad::sqrt_of(&q.x) {
                        Some(r) => Ok(Value::Exact(r)),
                        None => Err(self.err("square root of a negative number")),
                    },
                    Value::Exact(_) => Err(self.err("nested square roots leave the quadratic field")),
                    Value::Float(x) if x >= 0.0 => Ok(Value::Float(x.sqrt())),
                    Value::Float(_) => Err(self.err("square root of a negative number")),
                }
            }
            _ => Err(self.err(&format!("unknown identifier '{name}'"))),
        }
    }

    fn binop(&self, a: Value, b: Value, op: Op) -> Result<Value> {
        if let (Value::Exact(x), Value::Exact(y)) = (&a, &b) {
            if op == Op::Div && y.is_zero() {
                return Err(self.err("division by zero"));
            }
            let r = match op {
                Op::Add => x.add(y),
                Op::Sub => x.sub(y),
                Op::Mul => x.mul(y),
                Op::Div => x.div(y),
            };
            return r.map(Value::Exact).ok_or_else(|| self.err("mixes two different square roots"));
        }
        let (x, y) = (a.as_f64(), b.as_f64());
        let v = match op {
            Op::Add => x + y,
            Op::Sub => x - y,
            Op::Mul => x * y,
            Op::Div => {
                if y == 0.0 {
                    return Err(self.err("division by zero"));
                }
                x / y
            }
        };
        Ok(Value::Float(v))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}
