//! The vector field `X = X1 δ1 + X2 δ2` and its B-sequence.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    x1: Poly,
    x2: Poly,
}

impl VectorField {
    /// Fails with [`Error::DegenerateField`] when `X1 = 0`.
    pub fn new(x1: Poly, x2: Poly) -> Result<Self> {
        if x1.is_zero() {
            return Err(Error::DegenerateField);
        }
        Ok(VectorField { x1, x2 })
    }

    pub fn parse(x1: &str, x2: &str) -> Result<Self> {
        VectorField::new(crate::expr::parse_poly(x1)?, crate::expr::parse_poly(x2)?)
    }

    pub fn x1(&self) -> &Poly {
        &self.x1
    }

    pub fn x2(&self) -> &Poly {
        &self.x2
    }

    pub fn degree(&self) -> u32 {
        self.x1
            .total_degree()
            .unwrap_or(0)
            .max(self.x2.total_degree().unwrap_or(0))
    }

    /// The slope `X2 / X1`.
    pub fn ratio(&self) -> RatFunc {
        RatFunc::new(self.x2.clone(), self.x1.clone()).expect("X1 nonzero")
    }

    /// `X(f) = X1 δ1 f + X2 δ2 f`.
    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        &f.d1().mul_poly(&self.x1) + &f.d2().mul_poly(&self.x2)
    }

    pub fn apply_poly(&self, f: &Poly) -> Poly {
        &(&self.x1 * &f.d1()) + &(&self.x2 * &f.d2())
    }

    /// Both components multiplied by `g`.
    pub fn scaled(&self, g: &Poly) -> Result<VectorField> {
        VectorField::new(&self.x1 * g, &self.x2 * g)
    }

    /// Divides out `gcd(X1, X2)`; returns the reduced field and the removed factor.
    pub fn remove_common_factor(&self) -> (VectorField, Poly) {
        let g = self.x1.gcd(&self.x2);
        if g.is_constant() {
            return (self.clone(), Poly::one());
        }
        let x1 = self.x1.div_exact(&g).expect("gcd divides X1");
        let x2 = self.x2.div_exact(&g).expect("gcd divides X2");
        (VectorField { x1, x2 }, g)
    }

    pub fn b_sequence(&self, k: usize) -> BSequence {
        BSequence::compute(self, k)
    }
}

/// `apply_X` as a free function.
pub fn apply_x(vf: &VectorField, f: &RatFunc) -> RatFunc {
    vf.apply(f)
}

/// `B_i = -X1 δ2^{i+1}(X2/X1)` for `i = 0..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSequence {
    entries: Vec<RatFunc>,
}

impl BSequence {
    /// Closed form: repeated δ2 of the slope.
    pub fn compute(vf: &VectorField, k: usize) -> BSequence {
        let mut d = vf.ratio();
        let mut entries = Vec::with_capacity(k + 1);
        for _ in 0..=k {
            d = d.d2();
            entries.push(-d.mul_poly(vf.x1()));
        }
        BSequence { entries }
    }

    /// Recurrence `B_i = X1 δ2(B_{i-1} / X1)` seeded by the closed-form `B_0`.
    pub fn by_recurrence(vf: &VectorField, k: usize) -> BSequence {
        let b0 = -vf.ratio().d2().mul_poly(vf.x1());
        let mut entries = vec![b0];
        for i in 1..=k {
            let prev = entries[i - 1].div_poly(vf.x1()).expect("X1 nonzero");
            entries.push(prev.d2().mul_poly(vf.x1()));
        }
        BSequence { entries }
    }

    pub fn get(&self, i: usize) -> &RatFunc {
        &self.entries[i]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[RatFunc] {
        &self.entries
    }
}

pub fn compute_b(vf: &VectorField, k: usize) -> BSequence {
    BSequence::compute(vf, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_poly, parse_ratfunc};

    fn vf(a: &str, b: &str) -> VectorField {
        VectorField::parse(a, b).unwrap()
    }

    fn r(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(VectorField::parse("0", "x2"), Err(Error::DegenerateField));
    }

    #[test]
    fn apply_examples() {
        assert!(vf("x2", "-x1").apply(&r("x1^2 + x2^2")).is_zero());
        assert_eq!(vf("1", "x2").apply(&r("x2")), r("x2"));
        assert_eq!(vf("1", "x2").apply(&r("1/x2")), r("-1/x2"));
    }

    #[test]
    fn b_examples() {
        let b = vf("1", "x2").b_sequence(2);
        assert_eq!(b.entries(), &[r("-1"), r("0"), r("0")]);
        let b = vf("1", "x2^2 + x1").b_sequence(2);
        assert_eq!(b.entries(), &[r("-2*x2"), r("-2"), r("0")]);
        let v = vf("x2 - x1^3/3 + x1", "-x1");
        let b = v.b_sequence(2);
        let x1 = "(x2 - 1/3*x1^3 + x1)";
        assert_eq!(b.get(0), &r(&format!("-x1/{x1}")));
        assert_eq!(b.get(1), &r(&format!("2*x1/{x1}^2")));
        assert_eq!(b.get(2), &r(&format!("-6*x1/{x1}^3")));
        assert_eq!(b, BSequence::by_recurrence(&v, 2));
    }

    #[test]
    fn common_factor_removed() {
        let v = vf("x1*(x2+1)", "x1^2");
        let (red, g) = v.remove_common_factor();
        assert_eq!(g, parse_poly("x1").unwrap());
        assert_eq!(red, vf("x2 + 1", "x1"));
    }
}
