//! Text form of polynomials and rational functions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' INT)?
//! atom  := INT | 'x1' | 'x2' | '(' expr ')'
//! ```
//!
//! Printing is canonical: terms in descending graded-lex order (`x1 > x2`),
//! coefficients as reduced integers or `p/q`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::poly::{Mono, Poly};
use crate::rat::{fmt_rat, Rat};
use crate::ratfunc::RatFunc;

/// Exponents above this are rejected rather than expanded.
const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    X1,
    X2,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic()) {
                    return Err(Error::Syntax { pos: i, expected: "operator or end of input".into() });
                }
                let n: BigInt = src[start..i].parse().expect("ascii digits");
                out.push((start, Tok::Int(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "x1" => Tok::X1,
                    "x2" => Tok::X2,
                    _ => {
                        return Err(Error::Syntax { pos: start, expected: "variable x1 or x2".into() })
                    }
                };
                out.push((start, tok));
                continue;
            }
            _ => return Err(Error::Syntax { pos: i, expected: "number, variable, operator or parenthesis".into() }),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    /// Only constant divisors allowed.
    poly_only: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    let pos = self.pos();
                    self.bump();
                    let d = self.unary()?;
                    if self.poly_only && !d.is_constant() {
                        return Err(Error::NonPolynomial { pos });
                    }
                    if d.is_zero() {
                        return Err(Error::DivisionByZeroPoly);
                    }
                    acc = acc.checked_div(&d)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e = n
                    .to_u32()
                    .filter(|e| *e <= MAX_EXPONENT)
                    .ok_or(Error::Exponent { pos })?;
                Ok(base.pow(e))
            }
            Tok::End => Err(Error::Syntax { pos, expected: "exponent".into() }),
            _ => Err(Error::Exponent { pos }),
        }
    }

    fn atom(&mut self) -> Result<RatFunc> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(RatFunc::constant(Rat::from_integer(n))),
            Tok::X1 => Ok(RatFunc::from(Poly::x1())),
            Tok::X2 => Ok(RatFunc::from(Poly::x2())),
            Tok::LParen => {
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(Error::Syntax { pos: self.pos(), expected: "')'".into() });
                }
                self.bump();
                Ok(e)
            }
            _ => Err(Error::Syntax { pos, expected: "number, variable or '('".into() }),
        }
    }
}

fn parse(text: &str, poly_only: bool) -> Result<RatFunc> {
    let mut p = Parser { toks: lex(text)?, at: 0, poly_only };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), expected: "operator or end of input".into() });
    }
    Ok(e)
}

/// Parses a polynomial; only constant divisors are accepted.
pub fn parse_poly(text: &str) -> Result<Poly> {
    let f = parse(text, true)?;
    Ok(f.into_parts().0)
}

pub fn parse_ratfunc(text: &str) -> Result<RatFunc> {
    parse(text, false)
}

fn print_mono(m: Mono) -> String {
    let mut parts = Vec::new();
    for (name, e) in [("x1", m.e1), ("x2", m.e2)] {
        match e {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

pub fn print_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if *m == Mono::ONE {
            s.push_str(&fmt_rat(&a));
        } else if a.is_one() {
            s.push_str(&print_mono(*m));
        } else {
            s.push_str(&fmt_rat(&a));
            s.push('*');
            s.push_str(&print_mono(*m));
        }
    }
    s
}

pub fn print_ratfunc(f: &RatFunc) -> String {
    if f.den().is_one() {
        return print_poly(f.num());
    }
    let num = if f.num().num_terms() > 1 {
        format!("({})", print_poly(f.num()))
    } else {
        print_poly(f.num())
    };
    let den_single_var = f.den().num_terms() == 1
        && f.den().leading().is_some_and(|(m, _)| m.e1 == 0 || m.e2 == 0);
    let den = if den_single_var {
        print_poly(f.den())
    } else {
        format!("({})", print_poly(f.den()))
    };
    format!("{num}/{den}")
}

/// Either a polynomial or a rational function, for [`print_canonical`].
pub enum Printable<'a> {
    Poly(&'a Poly),
    RatFunc(&'a RatFunc),
}

pub fn print_canonical(p: Printable<'_>) -> String {
    match p {
        Printable::Poly(p) => print_poly(p),
        Printable::RatFunc(f) => print_ratfunc(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    #[test]
    fn parses_simple_poly() {
        let p = parse_poly("x1^2 + 2*x2").unwrap();
        let expect = Poly::from_terms([(Mono::new(2, 0), rat(1)), (Mono::new(0, 1), rat(2))]);
        assert_eq!(p, expect);
        assert_eq!(print_poly(&p), "x1^2 + 2*x2");
    }

    #[test]
    fn van_der_pol_first_component() {
        let p = parse_poly("x2 - 1*(x1^3/3 - x1)").unwrap();
        let expect = Poly::from_terms([
            (Mono::new(0, 1), rat(1)),
            (Mono::new(3, 0), ratio(-1, 3)),
            (Mono::new(1, 0), rat(1)),
        ]);
        assert_eq!(p, expect);
        assert_eq!(print_poly(&p), "-1/3*x1^3 + x1 + x2");
    }

    #[test]
    fn non_constant_divisor_rejected() {
        assert_eq!(parse_poly("x1/x2"), Err(Error::NonPolynomial { pos: 2 }));
        // a constant-valued divisor is fine even when written with variables
        assert_eq!(parse_poly("x1/(x2 - x2 + 2)").unwrap(), parse_poly("1/2*x1").unwrap());
    }

    #[test]
    fn exponent_errors() {
        assert!(matches!(parse_poly("x1^-1"), Err(Error::Exponent { .. })));
        assert!(matches!(parse_poly("x1^x2"), Err(Error::Exponent { .. })));
        assert!(matches!(parse_poly("x1^(2)"), Err(Error::Exponent { .. })));
        assert!(matches!(parse_poly("x1^1.5"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_poly("x1 + y"),
            Err(Error::Syntax { pos: 5, expected: "variable x1 or x2".into() })
        );
        assert!(matches!(parse_poly("(x1 + 1"), Err(Error::Syntax { pos: 7, .. })));
        assert!(matches!(parse_poly("x1 +"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_poly(""), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_poly("x1 x2"), Err(Error::Syntax { pos: 3, .. })));
    }

    #[test]
    fn ratfunc_parsing() {
        let f = parse_ratfunc("1/x2").unwrap();
        assert_eq!(f.num(), &Poly::one());
        assert_eq!(f.den(), &Poly::x2());
        assert_eq!(parse_ratfunc("(x1+x2)/(x1+x2)").unwrap(), RatFunc::one());
        assert_eq!(parse_ratfunc("1/0"), Err(Error::DivisionByZeroPoly));
        assert_eq!(parse_ratfunc("1/(x1 - x1)"), Err(Error::DivisionByZeroPoly));
    }

    #[test]
    fn canonical_printing() {
        let p = Poly::from_terms([(Mono::new(0, 1), rat(2)), (Mono::new(2, 0), rat(1))]);
        assert_eq!(print_canonical(Printable::Poly(&p)), "x1^2 + 2*x2");
        let f = parse_ratfunc("1/x2").unwrap();
        assert_eq!(print_canonical(Printable::RatFunc(&f)), "1/x2");
        assert_eq!(print_canonical(Printable::Poly(&Poly::zero())), "0");
        let g = parse_ratfunc("(x1 + 1)/(2*x1*x2 - 4)").unwrap();
        assert_eq!(print_ratfunc(&g), "(1/2*x1 + 1/2)/(x1*x2 - 2)");
        assert_eq!(parse_ratfunc(&print_ratfunc(&g)).unwrap(), g);
        let h = parse_ratfunc("-3*x1/(x1*x2)").unwrap();
        assert_eq!(print_ratfunc(&h), "-3/x2");
        let k = parse_ratfunc("x1/(x1^2*x2)").unwrap();
        assert_eq!(print_ratfunc(&k), "1/(x1*x2)");
        assert_eq!(parse_ratfunc(&print_ratfunc(&k)).unwrap(), k);
    }
}
