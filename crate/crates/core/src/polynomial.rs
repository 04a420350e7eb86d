//! Dense polynomials with rational coefficients and the expression
//! mini-language used by the command line (`"x^2 - 3/2*x + 1"`).

use std::fmt;

use num_traits::{One, Zero};

use crate::derivative::ScalarFn;
use crate::error::{QcalcError, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// `coeffs[i]` multiplies `x^i`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation in any scalar field.
    pub fn eval<K: Scalar>(&self, x: &K) -> K {
        self.coeffs.iter().rev().fold(K::zero(), |acc, c| acc * x.clone() + K::from_rational(c))
    }

    pub fn to_fn<K: Scalar>(&self) -> ScalarFn<K> {
        let poly = self.clone();
        ScalarFn::new(poly.to_string(), move |x: &K| poly.eval(x))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Polynomial, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
        Polynomial::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        (0..n).fold(Polynomial::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    /// Ordinary derivative.
    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Coefficients `c_k` with `self(x) = sum c_k (x - a)^k`, by repeated
    /// synthetic division by `(x - a)`.
    pub fn taylor_shift(&self, a: &Rational) -> Vec<Rational> {
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(work.len());
        while !work.is_empty() {
            // divide work by (x - a): remainder is work(a)
            let mut quotient = vec![Rational::zero(); work.len() - 1];
            let mut carry = Rational::zero();
            for i in (0..work.len()).rev() {
                carry = &carry * a + &work[i];
                if i > 0 {
                    quotient[i - 1] = carry.clone();
                }
            }
            out.push(carry);
            work = quotient;
        }
        out
    }

    /// Parses the expression mini-language: rational or decimal numbers, the
    /// variable `x`, `+ - * /`, `^` with a non-negative integer exponent, and
    /// parentheses. Division is only by constants.
    pub fn parse(text: &str) -> Result<Polynomial> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let poly = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(QcalcError::Parse(format!("unexpected trailing input in {text:?}")));
        }
        Ok(poly)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = *c < Rational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            first = false;
            let coeff = format_rational(&mag);
            match i {
                0 => write!(f, "{coeff}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{coeff}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?
                    } else {
                        write!(f, "x^{i}")?
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    X,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => {}
            'x' | 'X' => out.push(Token::X),
            '+' => out.push(Token::Plus),
            '-' => out.push(Token::Minus),
            '*' => out.push(Token::Star),
            '/' => out.push(Token::Slash),
            '^' => out.push(Token::Caret),
            '(' => out.push(Token::LParen),
            ')' => out.push(Token::RParen),
            d if d.is_ascii_digit() || d == '.' => {
                let start = i;
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '.') {
                    i += 1;
                }
                let lit: String = chars[start..=i].iter().collect();
                out.push(Token::Num(parse_rational(&lit)?));
            }
            other => return Err(QcalcError::Parse(format!("unexpected character {other:?} in {text:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Token::Minus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.scale(&-Rational::one()));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let divisor = self.unary()?;
                    match divisor.degree() {
                        Some(0) => acc = acc.scale(&(Rational::one() / divisor.coeffs[0].clone())),
                        None => return Err(QcalcError::Parse("division by zero".into())),
                        _ => return Err(QcalcError::Parse("division by a non-constant".into())),
                    }
                }
                // implicit multiplication: "3x", "2(x+1)", "x(x-1)"
                Some(Token::X) | Some(Token::LParen) | Some(Token::Num(_)) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.scale(&-Rational::one()))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = match self.next() {
                Some(Token::Num(n)) if n.is_integer() && n >= Rational::zero() => n.to_integer(),
                _ => return Err(QcalcError::Parse("exponent must be a non-negative integer".into())),
            };
            let e: u32 = exponent.try_into().map_err(|_| QcalcError::Parse("exponent too large".into()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Polynomial::constant(n)),
            Some(Token::X) => Ok(Polynomial::monomial(1)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(QcalcError::Parse("missing ')'".into())),
                }
            }
            other => Err(QcalcError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn p(v: &[i64]) -> Polynomial {
        Polynomial::new(v.iter().map(|&c| int(c)).collect())
    }

    #[test]
    fn parses_the_cli_example() {
        let poly = Polynomial::parse("x^2 - 3/2*x + 1").unwrap();
        assert_eq!(poly.coeffs(), &[int(1), rat(-3, 2), int(1)]);
        assert_eq!(poly.eval(&int(2)), int(2));
    }

    #[test]
    fn parses_products_parens_and_decimals() {
        assert_eq!(Polynomial::parse("(x-1)(x+1)").unwrap(), p(&[-1, 0, 1]));
        assert_eq!(Polynomial::parse("3x^3 - x").unwrap(), p(&[0, -1, 0, 3]));
        assert_eq!(Polynomial::parse("0.5*x/2").unwrap().coeffs(), &[int(0), rat(1, 4)]);
        assert_eq!(Polynomial::parse("-(x^2)").unwrap(), p(&[0, 0, -1]));
        assert_eq!(Polynomial::parse("5").unwrap(), p(&[5]));
    }

    #[test]
    fn rejects_bad_expressions() {
        for s in ["x^", "x/x", "(x+1", "x^1.5", "y", "x^-1", "1/0"] {
            assert!(Polynomial::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn taylor_shift_examples() {
        // x^2 about 0 and 1, x^3 - x about 2
        assert_eq!(p(&[0, 0, 1]).taylor_shift(&int(0)), vec![int(0), int(0), int(1)]);
        assert_eq!(p(&[0, 0, 1]).taylor_shift(&int(1)), vec![int(1), int(2), int(1)]);
        assert_eq!(p(&[0, -1, 0, 1]).taylor_shift(&int(2)), vec![int(6), int(11), int(6), int(1)]);
    }

    #[test]
    fn display_round_trips() {
        let poly = Polynomial::new(vec![rat(1, 3), int(0), int(-2), int(1)]);
        assert_eq!(poly.to_string(), "x^3 - 2*x^2 + 1/3");
        assert_eq!(Polynomial::parse(&poly.to_string()).unwrap(), poly);
    }
}
