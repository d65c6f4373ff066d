//! Reduced rational functions in x1, x2.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{forward_owned, Poly, Var};
use crate::rat::Rat;

/// `num / den` with `gcd(num, den) = 1` and `den` primitive over ℤ with
/// positive leading coefficient. Every constructor reduces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }
}

impl From<&Poly> for RatFunc {
    fn from(p: &Poly) -> Self {
        RatFunc::from(p.clone())
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc::from(Poly::zero())
    }

    pub fn one() -> Self {
        RatFunc::from(Poly::one())
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc::from(Poly::constant(c))
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZeroPoly);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.constant_value() {
            return RatFunc { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let (c, den) = den.content_primitive();
        RatFunc { num: num.scale(&c.recip()), den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }.fixup_zero()
    }

    fn fixup_zero(self) -> Self {
        if self.num.is_zero() {
            RatFunc::zero()
        } else {
            self
        }
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        Self::reduce(&self.num * p, self.den.clone())
    }

    pub fn div_poly(&self, p: &Poly) -> Result<RatFunc> {
        RatFunc::new(self.num.clone(), &self.den * p)
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<RatFunc> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(&self.num * &o.den, &self.den * &o.num))
    }

    pub fn recip(&self) -> Result<RatFunc> {
        RatFunc::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        // coprime parts stay coprime
        let (c, den) = self.den.pow(e).content_primitive();
        RatFunc { num: self.num.pow(e).scale(&c.recip()), den }
    }

    pub fn deriv(&self, v: Var) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from(self.num.deriv(v));
        }
        let n = &(&self.num.deriv(v) * &self.den) - &(&self.num * &self.den.deriv(v));
        Self::reduce(n, self.den.pow(2))
    }

    pub fn d1(&self) -> RatFunc {
        self.deriv(Var::X1)
    }

    pub fn d2(&self) -> RatFunc {
        self.deriv(Var::X2)
    }

    pub fn eval(&self, x1: &Rat, x2: &Rat) -> Result<Rat> {
        let d = self.den.eval(x1, x2);
        if d.is_zero() {
            return Err(Error::EvalAtPole);
        }
        Ok(self.num.eval(x1, x2) / d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::expr::print_ratfunc(self))
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::reduce(&self.num + &rhs.num, self.den.clone());
        }
        RatFunc::reduce(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from(&self.num * &rhs.num);
        }
        RatFunc::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

/// Panics on a zero divisor; use [`RatFunc::checked_div`] for fallible division.
impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

forward_owned!(Add, add, RatFunc);
forward_owned!(Sub, sub, RatFunc);
forward_owned!(Mul, mul, RatFunc);
forward_owned!(Div, div, RatFunc);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_ratfunc;

    fn r(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    #[test]
    fn reduces_common_factors() {
        let f = r("(x1^2 - x2^2)/(2*x1 - 2*x2)");
        assert_eq!(f.num(), &crate::expr::parse_poly("1/2*x1 + 1/2*x2").unwrap());
        assert!(f.den().is_one());
    }

    #[test]
    fn denominator_normalized() {
        let f = r("1/(-3*x2 + 6)");
        assert_eq!(f.den(), &crate::expr::parse_poly("x2 - 2").unwrap());
        assert_eq!(f.num(), &crate::expr::parse_poly("-1/3").unwrap());
    }

    #[test]
    fn leibniz_on_quotient() {
        let f = r("1/x2");
        assert_eq!(f.d2(), r("-1/x2^2"));
        assert!(f.d1().is_zero());
    }

    #[test]
    fn eval_at_pole() {
        let f = r("1/(x1 - 1)");
        assert!(matches!(
            f.eval(&crate::rat::rat(1), &crate::rat::rat(0)),
            Err(Error::EvalAtPole)
        ));
    }

    #[test]
    fn zero_divisor() {
        assert!(matches!(RatFunc::one().checked_div(&RatFunc::zero()), Err(Error::DivisionByZero)));
        assert!(matches!(RatFunc::new(Poly::one(), Poly::zero()), Err(Error::DivisionByZeroPoly)));
    }
}
