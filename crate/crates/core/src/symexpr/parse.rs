//! Infix grammar for expressions:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          exponent must be a rational constant
//! primary := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Names resolve against the jet space: independents, parameters, jet
//! coordinates (`x_at`, `u_g_b`) and declared functions with optional
//! formal-partial suffix (`P_x(x, y)`). `#` starts a comment to end of line.

use num_traits::Zero;

use super::expr::{Expr, Q};
use super::{JetSpace, SymError};

pub fn parse_expr(js: &JetSpace, src: &str) -> Result<Expr, SymError> {
    let mut p = Parser { js, src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    js: &'a JetSpace,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error_at(&self, pos: usize, msg: impl Into<String>) -> SymError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = 1 + before.iter().filter(|&&c| c == b'\n').count();
        let col = 1 + before.iter().rev().take_while(|&&c| c != b'\n').count();
        SymError::Parse { line, col, msg: msg.into() }
    }

    fn error(&self, msg: impl Into<String>) -> SymError {
        self.error_at(self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                b'#' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
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

    fn expr(&mut self) -> Result<Expr, SymError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(self.error_at(at, "division by zero"));
                }
                acc = &acc / &d;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let ex = self.unary()?;
            let q = ex.as_constant().ok_or_else(|| self.error_at(at, "exponent must be a rational constant"))?;
            if base.is_zero() && q < Q::zero() {
                return Err(self.error_at(at, "division by zero"));
            }
            return Ok(base.pow(q));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SymError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, SymError> {
        let start = self.pos;
        let mut num: i64 = 0;
        let mut den: i64 = 1;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                num = num
                    .checked_mul(10)
                    .and_then(|n| n.checked_add((c - b'0') as i64))
                    .ok_or_else(|| self.error_at(start, "number too large"))?;
                if seen_dot {
                    den = den.checked_mul(10).ok_or_else(|| self.error_at(start, "too many decimals"))?;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start + 1 && seen_dot {
            return Err(self.error_at(start, "malformed number"));
        }
        Ok(Expr::constant(Q::new(num, den)))
    }

    fn name(&mut self) -> Result<Expr, SymError> {
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return self.js.apply_partial(name, args).map_err(|e| self.error_at(start, e.to_string()));
        }
        self.js.var(name).map_err(|e| self.error_at(start, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn js() -> JetSpace {
        JetSpace::new(&["a", "b", "t"], &["x", "y", "u"], 1)
            .unwrap()
            .with_params(&["f", "g"])
            .with_function("R", &["x", "y"])
    }

    #[test]
    fn precedence_and_powers() {
        let js = js();
        let e = parse_expr(&js, "-x_a^2 + 2*x_a*y_b/4").unwrap();
        let xa = js.jet("x", "a").unwrap();
        let yb = js.jet("y", "b").unwrap();
        assert_eq!(e, &(-xa.powi(2)) + &(&xa * &yb).scale(Q::new(1, 2)));
        assert_eq!(parse_expr(&js, "0.5*f").unwrap(), Expr::param("f").scale(Q::new(1, 2)));
    }

    #[test]
    fn round_trip_with_functions() {
        let js = js();
        let src = "(u - R(x, y))*x_t - g/(2*(x_a*y_b - x_b*y_a)) + R_xy(x, y)^(1/2)";
        let e = parse_expr(&js, src).unwrap();
        let again = parse_expr(&js, &e.to_string()).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn errors_carry_position() {
        let js = js();
        match parse_expr(&js, "x_a +\n  zz") {
            Err(SymError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr(&js, "x^y").is_err());
        assert!(parse_expr(&js, "(x").is_err());
    }
}
