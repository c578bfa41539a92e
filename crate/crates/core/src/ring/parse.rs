//! Text syntax for polynomials: rational constants, registry variable names,
//! `+ - * /` (division by nonzero constants only), `^` with non-negative
//! integer exponents, and parentheses.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Coeff, Poly, VarRegistry};
use crate::error::{Error, Result};

pub fn parse_poly(src: &str, reg: &VarRegistry) -> Result<Poly> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        reg,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

/// Offset of a parse error inside the parsed string, for callers that want
/// to translate it into their own line/column.
pub fn parse_error_offset(e: &Error) -> Option<usize> {
    match e {
        Error::Parse { column, .. } => Some(column.saturating_sub(1)),
        _ => None,
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    reg: &'a VarRegistry,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: msg.to_string(),
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

    fn nvars(&self) -> usize {
        self.reg.len()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.factor()?;
                    if !d.is_constant() || d.is_zero() {
                        self.pos = at;
                        return Err(self.err("division is only allowed by nonzero constants"));
                    }
                    acc = acc.scale(&(Coeff::from_integer(1.into()) / d.constant_term()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a non-negative integer exponent"));
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = digits.parse().unwrap();
                if n.is_zero() {
                    return Ok(Poly::zero(self.nvars()));
                }
                Ok(Poly::constant(self.nvars(), Coeff::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                while self.pos < self.src.len() && self.src[self.pos] == b'\'' {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.reg.lookup(name) {
                    Ok(v) => Ok(Poly::var(self.nvars(), v)),
                    Err(_) => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable `{name}`")))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
