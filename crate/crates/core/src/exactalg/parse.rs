//! Text grammar for polynomials.
//!
//! Terms look like `c*x1^a1*...*xn^an` and are joined by `+`/`-`.
//! Coefficients are integers, fractions `(3/2)`, and powers of roots of
//! unity written `zN^k` (ζ_N = exp(2πi/N)). Parenthesised sub-expressions
//! and powers of them are accepted as well.

use std::sync::Arc;

use num_bigint::BigInt;

use super::cyclotomic::CyclotomicNumber;
use super::poly::MultiPoly;
use super::rational::Rational;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, AlgebraError> {
    let err = |msg: String| AlgebraError::Parse(msg);
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Num(text.parse().map_err(|_| err(format!("bad number {text}")))?));
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

/// `Some(N)` when the identifier names a root of unity `zN`.
fn root_of_unity_order(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('z')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&n| n > 0)
}

pub fn is_valid_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_alphabetic() || first == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && root_of_unity_order(name).is_none()
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a Arc<Vec<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), AlgebraError> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(AlgebraError::Parse(format!("expected {t:?}, found {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<MultiPoly, AlgebraError> {
        let mut acc = MultiPoly::zero(self.vars.clone());
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { acc.sub(&t) } else { acc.add(&t) };
            sign = match self.peek() {
                Some(Tok::Plus) => 1,
                Some(Tok::Minus) => -1,
                _ => break,
            };
            self.pos += 1;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, AlgebraError> {
        let mut acc = self.power()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<u32, AlgebraError> {
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(n)) => {
                    u32::try_from(n).map_err(|_| AlgebraError::Parse("exponent too large".into()))
                }
                got => Err(AlgebraError::Parse(format!("expected exponent, found {got:?}"))),
            }
        } else {
            Ok(1)
        }
    }

    fn power(&mut self) -> Result<MultiPoly, AlgebraError> {
        let base = self.atom()?;
        let e = self.exponent()?;
        Ok(if e == 1 { base } else { base.pow(e) })
    }

    fn atom(&mut self) -> Result<MultiPoly, AlgebraError> {
        match self.next() {
            Some(Tok::Num(n)) => {
                let mut r = Rational::from_integer(n);
                if let Some(Tok::Slash) = self.peek() {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Num(d)) if d != BigInt::from(0) => r /= Rational::from_integer(d),
                        got => return Err(AlgebraError::Parse(format!("bad denominator {got:?}"))),
                    }
                }
                Ok(MultiPoly::constant(self.vars.clone(), CyclotomicNumber::from_rational(r)))
            }
            Some(Tok::Ident(name)) => {
                if let Some(n) = root_of_unity_order(&name) {
                    return Ok(MultiPoly::constant(
                        self.vars.clone(),
                        CyclotomicNumber::zeta_pow(n, 1),
                    ));
                }
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or(AlgebraError::UnknownVariable(name))?;
                Ok(MultiPoly::var(self.vars.clone(), i))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            got => Err(AlgebraError::Parse(format!("unexpected token {got:?}"))),
        }
    }
}

/// Parses `text` as a polynomial in the given variables.
pub fn parse_poly(text: &str, vars: &Arc<Vec<String>>) -> Result<MultiPoly, AlgebraError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(AlgebraError::Parse("empty polynomial".into()));
    }
    let mut p = Parser { toks, pos: 0, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(AlgebraError::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(out)
}

/// Parses with variables collected in order of first appearance.
pub fn parse_poly_infer(text: &str) -> Result<MultiPoly, AlgebraError> {
    let mut names: Vec<String> = Vec::new();
    for t in tokenize(text)? {
        if let Tok::Ident(name) = t {
            if root_of_unity_order(&name).is_none() && !names.contains(&name) {
                names.push(name);
            }
        }
    }
    parse_poly(text, &Arc::new(names))
}

/// Parses a coefficient expression with no variables, e.g. `(3/2)*z5^2 - 1`.
pub fn parse_number(text: &str) -> Result<CyclotomicNumber, AlgebraError> {
    let p = parse_poly(text, &Arc::new(Vec::new()))?;
    Ok(p.constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;
    use proptest::prelude::*;

    #[test]
    fn parses_the_documented_grammar() {
        let vars = MultiPoly::ring(&["x1", "x2"]);
        let p = parse_poly("(3/2)*z5^2*x1^3 - x2 + 4", &vars).unwrap();
        assert_eq!(p.to_string(), "(3/2)*z5^2*x1^3 - x2 + 4");
        let q = parse_poly("(x1+x2)^2", &vars).unwrap();
        assert_eq!(q.to_string(), "x1^2 + 2*x1*x2 + x2^2");
        assert!(matches!(
            parse_poly("x3", &vars),
            Err(AlgebraError::UnknownVariable(_))
        ));
        assert!(parse_poly("x1 +", &vars).is_err());
    }

    #[test]
    fn number_expressions() {
        assert_eq!(
            parse_number("3/2").unwrap(),
            CyclotomicNumber::from_rational(rat(3, 2))
        );
        assert_eq!(parse_number("z4^2").unwrap(), CyclotomicNumber::from_i64(-1));
    }

    #[test]
    fn variable_names() {
        assert!(is_valid_variable_name("x1"));
        assert!(is_valid_variable_name("z"));
        assert!(!is_valid_variable_name("z5"));
        assert!(!is_valid_variable_name("1x"));
    }

    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        let vars = MultiPoly::ring(&["x", "y", "w"]);
        prop::collection::vec(
            (
                prop::collection::vec(0u32..4, 3),
                -9i64..10,
                1i64..5,
                prop::sample::select(vec![1u32, 3, 5, 10]),
                0i64..10,
            ),
            0..6,
        )
        .prop_map(move |terms| {
            use crate::exactalg::poly::Monomial;
            MultiPoly::from_terms(
                vars.clone(),
                terms.into_iter().map(|(e, n, d, ord, k)| {
                    (
                        Monomial(e),
                        CyclotomicNumber::zeta_pow(ord, k).scale(&rat(n, d)),
                    )
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly()) {
            let text = p.to_string();
            let back = parse_poly(&text, p.vars()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
