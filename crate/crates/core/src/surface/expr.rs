//! Small arithmetic expression language for user-supplied patches.
//!
//! Expressions are parsed once into an AST and evaluated over any [`Real`],
//! so custom surfaces get exact derivatives through the dual-number path.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, the variables
//! `u` and `v`, the constants `pi` and `e`, and the functions `sin cos tan
//! exp ln log sqrt atan asin acos sinh cosh tanh sech csch sec csc cot abs`.

use crate::dual::Real;
use crate::error::{GeomError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    U,
    V,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Atan,
    Asin,
    Acos,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Csch,
    Sec,
    Csc,
    Cot,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            "asin" => Func::Asin,
            "acos" => Func::Acos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "csch" => Func::Csch,
            "sec" => Func::Sec,
            "csc" => Func::Csc,
            "cot" => Func::Cot,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Atan => x.atan(),
            Func::Asin => x.asin(),
            Func::Acos => x.acos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Sech => x.cosh().recip(),
            Func::Csch => x.sinh().recip(),
            Func::Sec => x.cos().recip(),
            Func::Csc => x.sin().recip(),
            Func::Cot => x.cos() / x.sin(),
            Func::Abs => x.abs(),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
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

    pub fn eval<T: Real>(&self, u: T, v: T) -> T {
        match self {
            Expr::Num(x) => T::cst(*x),
            Expr::U => u,
            Expr::V => v,
            Expr::Neg(a) => -a.eval(u, v),
            Expr::Bin(op, a, b) => {
                let x = a.eval(u, v);
                match op {
                    BinOp::Add => x + b.eval(u, v),
                    BinOp::Sub => x - b.eval(u, v),
                    BinOp::Mul => x * b.eval(u, v),
                    BinOp::Div => x / b.eval(u, v),
                    BinOp::Pow => match b.as_ref() {
                        Expr::Num(n) if n.fract() == 0.0 && n.abs() <= 64.0 => x.powi(*n as i32),
                        other => x.powf(other.eval(u, v)),
                    },
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(u, v)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> GeomError {
        GeomError::Expr {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'+' => BinOp::Add,
                b'-' => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'*' => BinOp::Mul,
                b'/' => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // Right-associative; binds tighter than unary minus on its left operand.
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "u" => Ok(Expr::U),
                    "v" => Ok(Expr::V),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => {
                        let f = Func::from_name(name).ok_or_else(|| GeomError::Expr {
                            pos: start,
                            msg: format!("unknown identifier '{name}'"),
                        })?;
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected '(' after function name"));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        self.pos += 1;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut k = self.pos + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                self.pos = k;
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| GeomError::Expr {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn ev(s: &str, u: f64, v: f64) -> f64 {
        Expr::parse(s).unwrap().eval(u, v)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2 ^ 2", 0.0, 0.0), -4.0);
        assert_eq!(ev("(1 - 4) / 2", 0.0, 0.0), -1.5);
        assert_eq!(ev("u - v - 1", 5.0, 2.0), 2.0);
        assert_eq!(ev("2.5e-1 * 4", 0.0, 0.0), 1.0);
    }

    #[test]
    fn functions_and_constants() {
        let u = 0.7;
        assert!((ev("sech(u)", u, 0.0) - 1.0 / u.cosh()).abs() < 1e-15);
        assert!((ev("u - tanh(u)", u, 0.0) - (u - u.tanh())).abs() < 1e-15);
        assert!((ev("cos(pi)", 0.0, 0.0) + 1.0).abs() < 1e-15);
        assert!((ev("ln(e)", 0.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_flow_through_ast() {
        let e = Expr::parse("sin(u) * v^2").unwrap();
        let r = e.eval(Dual::var_u(0.3), Dual::var_v(1.5));
        assert!((r.du - 0.3f64.cos() * 2.25).abs() < 1e-15);
        assert!((r.dv - 0.3f64.sin() * 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        match Expr::parse("1 + foo(u)") {
            Err(GeomError::Expr { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::parse("(u + 1").is_err());
        assert!(Expr::parse("u +").is_err());
        assert!(Expr::parse("u v").is_err());
        assert!(Expr::parse("sin u").is_err());
    }
}
