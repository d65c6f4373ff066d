//! Sparse bivariate polynomials over ℚ.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Mono`], whose ordering is the
//! graded-lexicographic order with `x1 > x2`. No zero coefficient is ever
//! stored, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::gcd;
use crate::rat::{rational_content, Rat};

/// Exponent pair `x1^e1 * x2^e2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono {
    pub e1: u32,
    pub e2: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { e1: 0, e2: 0 };

    pub const fn new(e1: u32, e2: u32) -> Self {
        Mono { e1, e2 }
    }

    pub fn degree(self) -> u32 {
        self.e1 + self.e2
    }

    pub fn times(self, o: Mono) -> Mono {
        Mono::new(self.e1 + o.e1, self.e2 + o.e2)
    }

    pub fn divides(self, o: Mono) -> bool {
        self.e1 <= o.e1 && self.e2 <= o.e2
    }

    /// All monomials of total degree `<= deg`, ascending in graded-lex order.
    pub fn up_to_degree(deg: u32) -> Vec<Mono> {
        let mut v = Vec::new();
        for d in 0..=deg {
            for e1 in 0..=d {
                v.push(Mono::new(e1, d - e1));
            }
        }
        v
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.e1).cmp(&(other.degree(), other.e1))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Which of the two coordinate derivations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::term(c, Mono::ONE)
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn term(c: Rat, m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn x1() -> Self {
        Poly::term(Rat::one(), Mono::new(1, 0))
    }

    pub fn x2() -> Self {
        Poly::term(Rat::one(), Mono::new(0, 1))
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X1 => Poly::x1(),
            Var::X2 => Poly::x2(),
        }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mono, Rat)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == Mono::ONE)
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.coeff(Mono::ONE))
        } else {
            None
        }
    }

    pub fn coeff(&self, m: Mono) -> Rat {
        self.terms.get(&m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms ascending in graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms
            .keys()
            .map(|m| match v {
                Var::X1 => m.e1,
                Var::X2 => m.e2,
            })
            .max()
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(Mono, &Rat)> {
        self.terms.iter().next_back().map(|(m, c)| (*m, c))
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: Mono, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, a)| (k.times(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn deriv(&self, v: Var) -> Poly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, dm) = match v {
                Var::X1 if m.e1 > 0 => (m.e1, Mono::new(m.e1 - 1, m.e2)),
                Var::X2 if m.e2 > 0 => (m.e2, Mono::new(m.e1, m.e2 - 1)),
                _ => continue,
            };
            out.insert(dm, c * Rat::from_integer(BigInt::from(e)));
        }
        Poly { terms: out }
    }

    pub fn d1(&self) -> Poly {
        self.deriv(Var::X1)
    }

    pub fn d2(&self) -> Poly {
        self.deriv(Var::X2)
    }

    pub fn eval(&self, x1: &Rat, x2: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            acc += c * num_traits::pow(x1.clone(), m.e1 as usize) * num_traits::pow(x2.clone(), m.e2 as usize);
        }
        acc
    }

    fn denominator_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |l, c| if c.denom().is_one() { l } else { l.lcm(c.denom()) })
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    pub fn content(&self) -> Rat {
        rational_content(self.terms.values())
    }

    /// Splits `self = c * pp` with `pp` integer, coprime and positive leading
    /// coefficient. The zero polynomial splits as `(0, 0)`.
    pub fn content_primitive(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::zero(), Poly::zero());
        }
        let mut c = self.content();
        if self.leading().unwrap().1.is_negative() {
            c = -c;
        }
        if c.is_one() {
            return (c, self.clone());
        }
        if c.is_integer() && self.terms.values().all(|v| v.is_integer()) {
            // exact integer division keeps every coefficient reduced
            let k = c.numer();
            let terms = self.terms.iter().map(|(m, v)| (*m, Rat::from_integer(v.numer() / k))).collect();
            return (c, Poly { terms });
        }
        let inv = c.recip();
        (c, self.scale(&inv))
    }

    pub fn primitive(&self) -> Poly {
        self.content_primitive().1
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    /// Works on the integer primitive parts, which divide over ℤ exactly when
    /// they divide over ℚ.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (ca, a) = self.content_primitive();
        let (cd, dp) = d.content_primitive();
        let to_int = |p: &Poly| -> BTreeMap<Mono, BigInt> { p.terms.iter().map(|(m, c)| (*m, c.to_integer())).collect() };
        let mut r = to_int(&a);
        let dz = to_int(&dp);
        let (&dm, dc) = dz.iter().next_back()?;
        let mut q: Vec<(Mono, BigInt)> = Vec::new();
        while let Some((&rm, rc)) = r.iter().next_back() {
            if !dm.divides(rm) {
                return None;
            }
            let (c, rest) = rc.div_rem(dc);
            if !rest.is_zero() {
                return None;
            }
            let m = Mono::new(rm.e1 - dm.e1, rm.e2 - dm.e2);
            for (dm2, dc2) in &dz {
                use std::collections::btree_map::Entry;
                match r.entry(m.times(*dm2)) {
                    Entry::Vacant(e) => {
                        e.insert(-(dc2 * &c));
                    }
                    Entry::Occupied(mut e) => {
                        *e.get_mut() -= dc2 * &c;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
            q.push((m, c));
        }
        let k = ca / cd;
        Some(Poly::from_terms(q.into_iter().map(|(m, c)| (m, Rat::from_integer(c) * &k))))
    }

    /// Normalized gcd: primitive with positive leading integer coefficient.
    /// `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        gcd::gcd(self, other)
    }

    /// Product of the distinct irreducible factors, normalized primitive.
    pub fn squarefree_part(&self) -> Poly {
        if self.is_constant() {
            return if self.is_zero() { Poly::zero() } else { Poly::one() };
        }
        let g = self.gcd(&self.d1()).gcd(&self.d2());
        let g = if g.is_zero() { Poly::one() } else { g };
        self.div_exact(&g)
            .expect("gcd divides its argument")
            .primitive()
    }

    /// True when `self = c * other` for a nonzero constant `c`.
    pub fn is_associate(&self, other: &Poly) -> bool {
        self.primitive() == other.primitive()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::expr::print_poly(self))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        // multiply over ℤ after clearing denominators; one rational reduction per output term
        let (la, lb) = (self.denominator_lcm(), rhs.denominator_lcm());
        let ints = |p: &Poly, l: &BigInt| -> Vec<(Mono, BigInt)> {
            p.terms.iter().map(|(m, c)| (*m, c.numer() * (l / c.denom()))).collect()
        };
        let (a, b) = (ints(self, &la), ints(rhs, &lb));
        let mut acc: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (ma, ca) in &a {
            for (mb, cb) in &b {
                *acc.entry(ma.times(*mb)).or_default() += ca * cb;
            }
        }
        let den = la * lb;
        Poly {
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m, Rat::new(c, den.clone())))
                .collect(),
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident, $t:ty) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                $tr::$f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $f(self, rhs: &'a $t) -> $t {
                $tr::$f(&self, rhs)
            }
        }
        impl<'a> $tr<$t> for &'a $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                $tr::$f(self, &rhs)
            }
        }
    };
}
pub(crate) use forward_owned;

forward_owned!(Add, add, Poly);
forward_owned!(Sub, sub, Poly);
forward_owned!(Mul, mul, Poly);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn p(s: &str) -> Poly {
        crate::expr::parse_poly(s).unwrap()
    }

    #[test]
    fn grlex_order() {
        assert!(Mono::new(2, 0) > Mono::new(1, 1));
        assert!(Mono::new(1, 1) > Mono::new(0, 2));
        assert!(Mono::new(0, 2) > Mono::new(1, 0));
        assert!(Mono::new(1, 0) > Mono::new(0, 1));
    }

    #[test]
    fn gcd_of_difference_of_squares() {
        assert_eq!(p("x1^2 - x2^2").gcd(&p("x1 - x2")), p("x1 - x2"));
        assert_eq!(p("x1 - x2").gcd(&p("x1^2 - x2^2")), p("x1 - x2"));
    }

    #[test]
    fn gcd_normalization() {
        assert_eq!(p("-2*x1 + 4").gcd(&p("3*x1 - 6")), p("x1 - 2"));
        assert_eq!(p("6").gcd(&p("x1")), Poly::one());
        assert_eq!(Poly::zero().gcd(&p("-2*x2")), p("x2"));
        assert!(Poly::zero().gcd(&Poly::zero()).is_zero());
    }

    #[test]
    fn gcd_mixed_variables() {
        let a = p("(x1*x2 + 1)*(x1 + x2^2)^2*(x2 - 3)");
        let b = p("(x1 + x2^2)*(x2 - 3)^2*(x1 - 1)");
        assert_eq!(a.gcd(&b), p("(x1 + x2^2)*(x2 - 3)"));
    }

    #[test]
    fn derivations() {
        assert_eq!(p("x2^3").d2(), p("3*x2^2"));
        assert_eq!(p("x2^3").d1(), Poly::zero());
        assert_eq!(p("x1^2*x2 + x1").d1(), p("2*x1*x2 + 1"));
    }

    #[test]
    fn squarefree_part_examples() {
        assert_eq!(p("(x1+x2)^2*x1").squarefree_part(), p("(x1+x2)*x1"));
        assert_eq!(p("4*x2^3").squarefree_part(), p("x2"));
        assert_eq!(p("x1^2*(x2-1)^3").squarefree_part(), p("x1*(x2-1)"));
        assert_eq!(p("7").squarefree_part(), Poly::one());
    }

    #[test]
    fn content_split() {
        let (c, pp) = p("-1/2*x1 + 3/4").content_primitive();
        assert_eq!(c, crate::rat::ratio(-1, 4));
        assert_eq!(pp, p("2*x1 - 3"));
    }

    #[test]
    fn exact_division() {
        assert_eq!(p("x1^2 - x2^2").div_exact(&p("x1 + x2")), Some(p("x1 - x2")));
        assert_eq!(p("x1^2 + 1").div_exact(&p("x1 + 1")), None);
    }

    #[test]
    fn eval_and_pow() {
        assert_eq!(p("x1 + x2").pow(3).eval(&rat(1), &rat(2)), rat(27));
        assert_eq!(Poly::x1().pow(0), Poly::one());
    }
}
