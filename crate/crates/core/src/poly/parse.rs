use num_complex::Complex64;
use thiserror::Error;

use super::BiPoly;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Parses the ASCII polynomial grammar:
///
/// ```text
/// expr   := ['+'|'-'] term (('+'|'-') term)*
/// term   := coeff | [coeff '*'] factor ('*' factor)*
/// factor := 'z' ['^' uint] | 'zb' ['^' uint]
/// coeff  := decimal | decimal 'i' | '(' decimal ('+'|'-') decimal 'i' ')'
/// ```
///
/// Whitespace between tokens is ignored. Like terms are combined and
/// vanishing coefficients dropped.
pub fn parse_poly(text: &str) -> Result<BiPoly, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<BiPoly, ParseError> {
        if self.peek().is_none() {
            return Err(self.error("empty polynomial"));
        }
        let mut poly = BiPoly::zero();
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            let (p, q, c) = self.term()?;
            poly.add_term(p, q, c * sign);
            sign = match self.peek() {
                Some(b'+') => 1.0,
                Some(b'-') => -1.0,
                _ => break,
            };
            self.pos += 1;
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(u32, u32, Complex64), ParseError> {
        let coeff = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'(' => Some(self.coeff()?),
            Some(b'z') => None,
            Some(_) => return Err(self.error("expected a coefficient or a factor")),
            None => return Err(self.error("expected a term")),
        };
        if let Some(c) = coeff {
            if !self.eat(b'*') {
                return Ok((0, 0, c));
            }
        }
        let (mut p, mut q) = (0u32, 0u32);
        loop {
            let (dp, dq) = self.factor()?;
            p = p
                .checked_add(dp)
                .ok_or_else(|| self.error("exponent overflow"))?;
            q = q
                .checked_add(dq)
                .ok_or_else(|| self.error("exponent overflow"))?;
            if !self.eat(b'*') {
                break;
            }
        }
        Ok((p, q, coeff.unwrap_or(Complex64::new(1.0, 0.0))))
    }

    fn factor(&mut self) -> Result<(u32, u32), ParseError> {
        if !self.eat(b'z') {
            return Err(self.error("expected 'z' or 'zb'"));
        }
        // 'zb' is a single token; no whitespace inside it.
        let conj = self.src.get(self.pos) == Some(&b'b');
        if conj {
            self.pos += 1;
        }
        let e = if self.eat(b'^') { self.uint()? } else { 1 };
        Ok(if conj { (0, e) } else { (e, 0) })
    }

    fn uint(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some(b'-') => return Err(self.error("negative exponents are not allowed")),
            Some(c) if c.is_ascii_digit() => {}
            _ => return Err(self.error("expected an unsigned exponent")),
        }
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse().map_err(|_| ParseError {
            position: start,
            message: format!("exponent {digits} out of range"),
        })
    }

    fn decimal(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("malformed number '{text}'"),
        })
    }

    fn imag_suffix(&mut self) -> bool {
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn coeff(&mut self) -> Result<Complex64, ParseError> {
        if self.eat(b'(') {
            let re_sign = if self.eat(b'-') { -1.0 } else { 1.0 };
            let re = re_sign * self.decimal()?;
            let im_sign = match self.peek() {
                Some(b'+') => 1.0,
                Some(b'-') => -1.0,
                _ => return Err(self.error("expected '+' or '-' inside a complex coefficient")),
            };
            self.pos += 1;
            let im = im_sign * self.decimal()?;
            if !self.imag_suffix() {
                return Err(self.error("expected 'i'"));
            }
            self.expect(b')')?;
            return Ok(Complex64::new(re, im));
        }
        let v = self.decimal()?;
        if self.imag_suffix() {
            Ok(Complex64::new(0.0, v))
        } else {
            Ok(Complex64::new(v, 0.0))
        }
    }
}
