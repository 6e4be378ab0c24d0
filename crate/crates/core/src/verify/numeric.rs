//! Numeric evaluation of a closed LaTeX subset.
//!
//! Grammar: decimals, plain `a/b` fractions, `\frac{..}{..}`, `\sqrt{..}`,
//! `\pi`, unary sign, and grouping braces/parens. Values stay exact rationals
//! as long as possible; `\pi` and non-perfect square roots fall back to `f64`,
//! compared with a relative tolerance by the caller.

use super::rational::Rational;

/// Relative tolerance for comparisons that left exact arithmetic.
pub const REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericValue {
    Exact(Rational),
    Approx(f64),
}

impl NumericValue {
    fn to_f64(self) -> f64 {
        match self {
            NumericValue::Exact(r) => r.to_f64(),
            NumericValue::Approx(x) => x,
        }
    }

    fn neg(self) -> NumericValue {
        match self {
            NumericValue::Exact(r) => NumericValue::Exact(r.neg()),
            NumericValue::Approx(x) => NumericValue::Approx(-x),
        }
    }

    fn div(self, other: NumericValue) -> Option<NumericValue> {
        match (self, other) {
            (NumericValue::Exact(a), NumericValue::Exact(b)) => {
                a.checked_div(b).map(NumericValue::Exact)
            }
            (a, b) => {
                let d = b.to_f64();
                if d == 0.0 {
                    None
                } else {
                    Some(NumericValue::Approx(a.to_f64() / d))
                }
            }
        }
    }

    fn sqrt(self) -> Option<NumericValue> {
        match self {
            NumericValue::Exact(r) => {
                if r.is_negative() {
                    None
                } else if let Some(s) = r.perfect_sqrt() {
                    Some(NumericValue::Exact(s))
                } else {
                    Some(NumericValue::Approx(r.to_f64().sqrt()))
                }
            }
            NumericValue::Approx(x) => {
                if x < 0.0 {
                    None
                } else {
                    Some(NumericValue::Approx(x.sqrt()))
                }
            }
        }
    }
}

/// Two floats agree to `REL_TOLERANCE` (relative, exact-equality fast path).
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= REL_TOLERANCE * a.abs().max(b.abs())
}

/// Compare two parsed numeric values: exact when both are rational, else
/// within relative tolerance.
pub fn numeric_values_equal(a: NumericValue, b: NumericValue) -> bool {
    match (a, b) {
        (NumericValue::Exact(x), NumericValue::Exact(y)) => x == y,
        (x, y) => approx_eq(x.to_f64(), y.to_f64()),
    }
}

/// Parse the whole string as one numeric expression. `None` when any part of
/// the input falls outside the subset.
pub fn parse_numeric(input: &str) -> Option<NumericValue> {
    let chars: Vec<char> = input.chars().collect();
    let mut parser = NumParser { chars, pos: 0 };
    let value = parser.expr(0)?;
    parser.skip_ws();
    if parser.pos == parser.chars.len() {
        Some(value)
    } else {
        None
    }
}

struct NumParser {
    chars: Vec<char>,
    pos: usize,
}

const MAX_DEPTH: usize = 64;

impl NumParser {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self, depth: usize) -> Option<NumericValue> {
        if depth > MAX_DEPTH {
            return None;
        }
        self.skip_ws();
        if self.eat('-') {
            return Some(self.expr(depth + 1)?.neg());
        }
        if self.eat('+') {
            return self.expr(depth + 1);
        }
        let head = self.atom(depth)?;
        // Plain fraction form: value '/' value.
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            let neg = self.eat('-');
            let den = self.atom(depth)?;
            let den = if neg { den.neg() } else { den };
            return head.div(den);
        }
        Some(head)
    }

    fn atom(&mut self, depth: usize) -> Option<NumericValue> {
        if depth > MAX_DEPTH {
            return None;
        }
        self.skip_ws();
        match self.peek()? {
            '{' => {
                self.pos += 1;
                let v = self.expr(depth + 1)?;
                self.eat('}').then_some(v)
            }
            '(' => {
                self.pos += 1;
                let v = self.expr(depth + 1)?;
                self.eat(')').then_some(v)
            }
            '\\' => self.command(depth),
            c if c.is_ascii_digit() || c == '.' => self.number(),
            _ => None,
        }
    }

    fn command(&mut self, depth: usize) -> Option<NumericValue> {
        self.pos += 1; // consume backslash
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "frac" | "dfrac" => {
                let num = self.braced(depth)?;
                let den = self.braced(depth)?;
                num.div(den)
            }
            "sqrt" => self.braced(depth)?.sqrt(),
            "pi" => Some(NumericValue::Approx(std::f64::consts::PI)),
            _ => None,
        }
    }

    fn braced(&mut self, depth: usize) -> Option<NumericValue> {
        if !self.eat('{') {
            return None;
        }
        let v = self.expr(depth + 1)?;
        self.eat('}').then_some(v)
    }

    fn number(&mut self) -> Option<NumericValue> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        Rational::from_decimal_str(&text).map(NumericValue::Exact)
    }
}
