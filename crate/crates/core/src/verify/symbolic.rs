//! Symbolic-lite equivalence over a closed expression subset.
//!
//! Expressions are parsed into rational functions: a pair of multivariate
//! polynomials with exact rational coefficients, monomials kept in sorted
//! order. Two expressions are equivalent when cross-multiplication of the
//! pairs yields identical canonical polynomials, so no polynomial GCD is
//! needed. Anything outside the subset (symbolic square roots, transcendental
//! functions, runaway exponents) fails the parse and the caller falls through
//! to "no match" rather than aborting.

use std::collections::BTreeMap;

use super::rational::Rational;

/// Variable exponents of one monomial, sorted by variable name.
pub type Monomial = BTreeMap<String, u32>;

const MAX_TERMS: usize = 1024;
const MAX_EXPONENT: i64 = 16;
const MAX_DEPTH: usize = 64;

/// A multivariate polynomial in canonical (sorted, zero-free) form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn constant(c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Poly { terms }
    }

    pub fn variable(name: &str) -> Poly {
        let mut mono = Monomial::new();
        mono.insert(name.to_string(), 1);
        let mut terms = BTreeMap::new();
        terms.insert(mono, Rational::ONE);
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::ZERO),
            1 => {
                let (mono, coeff) = self.terms.iter().next().unwrap();
                mono.is_empty().then_some(*coeff)
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &Poly) -> Option<Poly> {
        let mut terms = self.terms.clone();
        for (mono, coeff) in &other.terms {
            match terms.get(mono).copied() {
                Some(existing) => {
                    let sum = existing.checked_add(*coeff)?;
                    if sum.is_zero() {
                        terms.remove(mono);
                    } else {
                        terms.insert(mono.clone(), sum);
                    }
                }
                None => {
                    terms.insert(mono.clone(), *coeff);
                }
            }
        }
        (terms.len() <= MAX_TERMS).then_some(Poly { terms })
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Option<Poly> {
        let mut terms: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut mono = ma.clone();
                for (var, exp) in mb {
                    let slot = mono.entry(var.clone()).or_insert(0);
                    *slot = slot.checked_add(*exp)?;
                    if i64::from(*slot) > MAX_EXPONENT * 4 {
                        return None;
                    }
                }
                let prod = ca.checked_mul(*cb)?;
                match terms.get(&mono).copied() {
                    Some(existing) => {
                        let sum = existing.checked_add(prod)?;
                        if sum.is_zero() {
                            terms.remove(&mono);
                        } else {
                            terms.insert(mono, sum);
                        }
                    }
                    None => {
                        if !prod.is_zero() {
                            terms.insert(mono, prod);
                        }
                    }
                }
                if terms.len() > MAX_TERMS {
                    return None;
                }
            }
        }
        Some(Poly { terms })
    }

    pub fn pow(&self, exp: u32) -> Option<Poly> {
        let mut acc = Poly::constant(Rational::ONE);
        for _ in 0..exp {
            acc = acc.mul(self)?;
        }
        Some(acc)
    }
}

/// A ratio of polynomials; the denominator is never the zero polynomial.
#[derive(Debug, Clone)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    fn from_poly(p: Poly) -> RatFn {
        RatFn {
            num: p,
            den: Poly::constant(Rational::ONE),
        }
    }

    fn constant(c: Rational) -> RatFn {
        RatFn::from_poly(Poly::constant(c))
    }

    fn add(&self, other: &RatFn) -> Option<RatFn> {
        let num = self
            .num
            .mul(&other.den)?
            .add(&other.num.mul(&self.den)?)?;
        let den = self.den.mul(&other.den)?;
        Some(RatFn { num, den })
    }

    fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn mul(&self, other: &RatFn) -> Option<RatFn> {
        Some(RatFn {
            num: self.num.mul(&other.num)?,
            den: self.den.mul(&other.den)?,
        })
    }

    fn div(&self, other: &RatFn) -> Option<RatFn> {
        if other.num.is_zero() {
            return None;
        }
        Some(RatFn {
            num: self.num.mul(&other.den)?,
            den: self.den.mul(&other.num)?,
        })
    }

    fn pow(&self, exp: i64) -> Option<RatFn> {
        if exp.abs() > MAX_EXPONENT {
            return None;
        }
        let base = if exp < 0 {
            if self.num.is_zero() {
                return None;
            }
            RatFn {
                num: self.den.clone(),
                den: self.num.clone(),
            }
        } else {
            self.clone()
        };
        Some(RatFn {
            num: base.num.pow(exp.unsigned_abs() as u32)?,
            den: base.den.pow(exp.unsigned_abs() as u32)?,
        })
    }

    /// Square roots are only admitted for constant perfect squares.
    fn sqrt(&self) -> Option<RatFn> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        let value = n.checked_div(d)?;
        Some(RatFn::constant(value.perfect_sqrt()?))
    }

    /// Equality of rational functions by cross-multiplication.
    fn equivalent(&self, other: &RatFn) -> Option<bool> {
        let left = self.num.mul(&other.den)?;
        let right = other.num.mul(&self.den)?;
        Some(left == right)
    }
}

/// Parse both inputs into canonical rational-function form and compare.
/// `None` when either side falls outside the subset.
pub fn symbolic_equal(a: &str, b: &str) -> Option<bool> {
    let pa = parse_symbolic(a)?;
    let pb = parse_symbolic(b)?;
    pa.equivalent(&pb)
}

pub fn parse_symbolic(input: &str) -> Option<RatFn> {
    let tokens = lex(input)?;
    let mut parser = SymParser { tokens, pos: 0 };
    let value = parser.expr(0)?;
    (parser.pos == parser.tokens.len()).then_some(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational),
    Symbol(String),
    Command(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LBrace,
    RBrace,
    LParen,
    RParen,
}

fn lex(input: &str) -> Option<Vec<Token>> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '{' => {
                tokens.push(Token::LBrace);
                i += 1;
            }
            '}' => {
                tokens.push(Token::RBrace);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '\\' => {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_alphabetic() {
                    end += 1;
                }
                if end == start {
                    return None;
                }
                let name: String = chars[start..end].iter().collect();
                match name.as_str() {
                    // Multiplication spellings collapse to the same token.
                    "cdot" | "times" => tokens.push(Token::Star),
                    _ => tokens.push(Token::Command(name)),
                }
                i = end;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut end = i;
                let mut seen_dot = false;
                while end < chars.len() {
                    let d = chars[end];
                    if d.is_ascii_digit() {
                        end += 1;
                    } else if d == '.' && !seen_dot {
                        seen_dot = true;
                        end += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..end].iter().collect();
                tokens.push(Token::Number(Rational::from_decimal_str(&text)?));
                i = end;
            }
            c if c.is_ascii_alphabetic() => {
                tokens.push(Token::Symbol(c.to_string()));
                i += 1;
            }
            'π' => {
                tokens.push(Token::Command("pi".to_string()));
                i += 1;
            }
            _ => return None,
        }
    }
    Some(tokens)
}

struct SymParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl SymParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self, depth: usize) -> Option<RatFn> {
        if depth > MAX_DEPTH {
            return None;
        }
        let mut acc = self.term(depth)?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term(depth)?;
                    acc = acc.add(&rhs)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term(depth)?;
                    acc = acc.add(&rhs.neg())?;
                }
                _ => return Some(acc),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Option<RatFn> {
        if depth > MAX_DEPTH {
            return None;
        }
        let mut acc = self.factor(depth)?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor(depth)?;
                    acc = acc.mul(&rhs)?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor(depth)?;
                    acc = acc.div(&rhs)?;
                }
                // Implicit multiplication: an atom immediately follows.
                Some(
                    Token::Number(_)
                    | Token::Symbol(_)
                    | Token::Command(_)
                    | Token::LParen
                    | Token::LBrace,
                ) => {
                    let rhs = self.factor(depth)?;
                    acc = acc.mul(&rhs)?;
                }
                _ => return Some(acc),
            }
        }
    }

    fn factor(&mut self, depth: usize) -> Option<RatFn> {
        if depth > MAX_DEPTH {
            return None;
        }
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Some(self.factor(depth + 1)?.neg())
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.factor(depth + 1)
            }
            _ => self.power(depth),
        }
    }

    fn power(&mut self, depth: usize) -> Option<RatFn> {
        let base = self.atom(depth)?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exp = self.exponent(depth)?;
            return base.pow(exp);
        }
        Some(base)
    }

    fn exponent(&mut self, depth: usize) -> Option<i64> {
        match self.peek().cloned() {
            Some(Token::Number(r)) if r.is_integer() => {
                self.pos += 1;
                i64::try_from(r.numerator()).ok()
            }
            Some(Token::LBrace) => {
                self.pos += 1;
                let mut sign = 1i64;
                while let Some(Token::Minus) = self.peek() {
                    self.pos += 1;
                    sign = -sign;
                }
                let value = match self.peek().cloned() {
                    Some(Token::Number(r)) if r.is_integer() => {
                        self.pos += 1;
                        i64::try_from(r.numerator()).ok()?
                    }
                    _ => return None,
                };
                (self.peek() == Some(&Token::RBrace)).then(|| {
                    self.pos += 1;
                    sign * value
                })
            }
            _ => {
                let _ = depth;
                None
            }
        }
    }

    fn atom(&mut self, depth: usize) -> Option<RatFn> {
        if depth > MAX_DEPTH {
            return None;
        }
        match self.peek().cloned()? {
            Token::Number(r) => {
                self.pos += 1;
                Some(RatFn::constant(r))
            }
            Token::Symbol(name) => {
                self.pos += 1;
                Some(RatFn::from_poly(Poly::variable(&name)))
            }
            Token::Command(name) => {
                self.pos += 1;
                match name.as_str() {
                    "frac" | "dfrac" => {
                        let num = self.braced(depth)?;
                        let den = self.braced(depth)?;
                        num.div(&den)
                    }
                    "sqrt" => self.braced(depth)?.sqrt(),
                    // Unknown commands are opaque symbols: \pi, \alpha, ...
                    _ => Some(RatFn::from_poly(Poly::variable(&name))),
                }
            }
            Token::LParen => {
                self.pos += 1;
                let v = self.expr(depth + 1)?;
                (self.peek() == Some(&Token::RParen)).then(|| {
                    self.pos += 1;
                    v
                })
            }
            Token::LBrace => {
                self.pos += 1;
                let v = self.expr(depth + 1)?;
                (self.peek() == Some(&Token::RBrace)).then(|| {
                    self.pos += 1;
                    v
                })
            }
            _ => None,
        }
    }

    fn braced(&mut self, depth: usize) -> Option<RatFn> {
        if self.peek() != Some(&Token::LBrace) {
            return None;
        }
        self.pos += 1;
        let v = self.expr(depth + 1)?;
        (self.peek() == Some(&Token::RBrace)).then(|| {
            self.pos += 1;
            v
        })
    }
}
