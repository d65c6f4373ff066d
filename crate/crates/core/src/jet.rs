//! Jet calculus over K = ℚ(x1, x2).
//!
//! A [`JetExpr`] is a polynomial in jet symbols with rational-function
//! coefficients. The symbols are the δ2-jets `y_j = δ2^j y`, optionally the
//! free δ1-jets `p_j = δ2^j δ1 y`, and opaque auxiliary symbols whose δ1/δ2
//! images are declared in a [`DerivationSystem`].
//!
//! In [`JetMode::Reduced`] the δ1-jets are eliminated with the relation
//! `X(y) = 0`: `δ1 y_0 = -(X2/X1) y_1` and `δ1 y_j = δ2^j` of that. In
//! [`JetMode::FreeD1`] they stay as independent symbols `p_j`, which lets
//! operator identities be checked before any reduction.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::field::{BSequence, VectorField};
use crate::poly::Var;
use crate::rat::Rat;
use crate::ratfunc::RatFunc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    /// `y_j = δ2^j y`
    Y(u32),
    /// `p_j = δ2^j δ1 y`, only present in [`JetMode::FreeD1`].
    D1Y(u32),
    /// Auxiliary symbol, by declaration order.
    Aux(u32),
}

/// Monomial in jet symbols: symbol -> positive exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetMono(BTreeMap<Sym, u32>);

impl JetMono {
    pub fn one() -> Self {
        JetMono::default()
    }

    pub fn sym(s: Sym) -> Self {
        JetMono(BTreeMap::from([(s, 1)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &JetMono) -> JetMono {
        let mut m = self.0.clone();
        for (s, e) in &o.0 {
            *m.entry(*s).or_insert(0) += e;
        }
        JetMono(m)
    }

    pub fn exponent(&self, s: Sym) -> u32 {
        self.0.get(&s).copied().unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Sym, u32)> + '_ {
        self.0.iter().map(|(s, e)| (*s, *e))
    }

    fn without_one(&self, s: Sym) -> JetMono {
        let mut m = self.0.clone();
        match m.get_mut(&s) {
            Some(e) if *e > 1 => *e -= 1,
            Some(_) => {
                m.remove(&s);
            }
            None => panic!("symbol not present"),
        }
        JetMono(m)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JetExpr {
    terms: BTreeMap<JetMono, RatFunc>,
}

impl JetExpr {
    pub fn zero() -> Self {
        JetExpr::default()
    }

    pub fn constant(c: RatFunc) -> Self {
        let mut e = JetExpr::zero();
        e.add_term(JetMono::one(), c);
        e
    }

    pub fn sym(s: Sym) -> Self {
        JetExpr::term(RatFunc::one(), JetMono::sym(s))
    }

    pub fn y(j: u32) -> Self {
        JetExpr::sym(Sym::Y(j))
    }

    pub fn term(c: RatFunc, m: JetMono) -> Self {
        let mut e = JetExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn add_term(&mut self, m: JetMono, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_default();
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &JetMono) -> RatFunc {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&JetMono, &RatFunc)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &JetExpr) -> JetExpr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &JetExpr) -> JetExpr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> JetExpr {
        JetExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn mul(&self, o: &JetExpr) -> JetExpr {
        let mut out = JetExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> JetExpr {
        if c.is_zero() {
            return JetExpr::zero();
        }
        let mut out = JetExpr::zero();
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> JetExpr {
        self.scale(&RatFunc::constant(c.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetMode {
    Reduced,
    FreeD1,
}

#[derive(Clone, Debug)]
struct AuxSymbol {
    name: String,
    d1: Option<JetExpr>,
    d2: Option<JetExpr>,
}

/// Vector field plus δ1/δ2 substitution rules for every symbol in play.
#[derive(Clone, Debug)]
pub struct DerivationSystem {
    vf: VectorField,
    mode: JetMode,
    aux: Vec<AuxSymbol>,
}

impl DerivationSystem {
    pub fn new(vf: &VectorField, mode: JetMode) -> Self {
        DerivationSystem { vf: vf.clone(), mode, aux: Vec::new() }
    }

    pub fn vf(&self) -> &VectorField {
        &self.vf
    }

    /// Declares an auxiliary symbol with no rules yet.
    pub fn declare(&mut self, name: &str) -> Sym {
        self.aux.push(AuxSymbol { name: name.to_string(), d1: None, d2: None });
        Sym::Aux(self.aux.len() as u32 - 1)
    }

    pub fn set_rules(&mut self, s: Sym, d1: Option<JetExpr>, d2: Option<JetExpr>) {
        let Sym::Aux(k) = s else {
            panic!("rules for structural jets are fixed");
        };
        let a = &mut self.aux[k as usize];
        a.d1 = d1;
        a.d2 = d2;
    }

    /// Declares `u` together with a fresh free symbol `u'` for `δ2 u`, and
    /// `δ1 u` solved from `X(u) = rhs`, i.e. `δ1 u = (rhs - X2 u') / X1`.
    pub fn declare_with_x_rule(&mut self, name: &str, rhs: impl FnOnce(Sym) -> JetExpr) -> (Sym, Sym) {
        let u = self.declare(name);
        let du = self.declare(&format!("{name}'"));
        let rhs = rhs(u);
        let x1_inv = RatFunc::from(self.vf.x1().clone()).recip().expect("X1 nonzero");
        let d1 = rhs
            .sub(&JetExpr::sym(du).scale(&RatFunc::from(self.vf.x2().clone())))
            .scale(&x1_inv);
        self.set_rules(u, Some(d1), Some(JetExpr::sym(du)));
        (u, du)
    }

    pub fn name(&self, s: Sym) -> String {
        match s {
            Sym::Y(j) => format!("y{j}"),
            Sym::D1Y(j) => format!("p{j}"),
            Sym::Aux(k) => self.aux[k as usize].name.clone(),
        }
    }

    fn reduced_d1_y(&self, j: u32) -> JetExpr {
        let mut e = JetExpr::y(1).scale(&-self.vf.ratio());
        for _ in 0..j {
            e = self.structural_d2(&e);
        }
        e
    }

    /// δ2 on expressions in `y_j` / `p_j` only.
    fn structural_d2(&self, e: &JetExpr) -> JetExpr {
        self.derive(Var::X2, e).expect("structural jets always have a δ2 rule")
    }

    pub fn symbol_derivative(&self, which: Var, s: Sym) -> Result<JetExpr> {
        match (s, which) {
            (Sym::Y(j), Var::X2) => Ok(JetExpr::y(j + 1)),
            (Sym::Y(j), Var::X1) => Ok(match self.mode {
                JetMode::Reduced => self.reduced_d1_y(j),
                JetMode::FreeD1 => JetExpr::sym(Sym::D1Y(j)),
            }),
            (Sym::D1Y(j), Var::X2) => Ok(JetExpr::sym(Sym::D1Y(j + 1))),
            (Sym::D1Y(_), Var::X1) => Err(Error::MissingRule(self.name(s))),
            (Sym::Aux(k), _) => {
                let a = self.aux.get(k as usize).ok_or_else(|| Error::MissingRule(format!("aux#{k}")))?;
                let r = match which {
                    Var::X1 => &a.d1,
                    Var::X2 => &a.d2,
                };
                r.clone().ok_or_else(|| Error::MissingRule(a.name.clone()))
            }
        }
    }

    /// Leibniz expansion with rule substitution.
    pub fn derive(&self, which: Var, e: &JetExpr) -> Result<JetExpr> {
        let mut out = JetExpr::zero();
        let mut cache: BTreeMap<Sym, JetExpr> = BTreeMap::new();
        for (m, c) in e.terms() {
            out.add_term(m.clone(), c.deriv(which));
            for (s, k) in m.symbols() {
                let ds = match cache.entry(s) {
                    Entry::Occupied(o) => o.into_mut(),
                    Entry::Vacant(v) => v.insert(self.symbol_derivative(which, s)?),
                };
                let rest = m.without_one(s);
                let factor = c.scale(&Rat::from_integer(BigInt::from(k)));
                for (dm, dc) in ds.terms() {
                    out.add_term(rest.mul(dm), &factor * dc);
                }
            }
        }
        Ok(out)
    }

    /// `X(e) = X1 δ1 e + X2 δ2 e`.
    pub fn apply_x(&self, e: &JetExpr) -> Result<JetExpr> {
        let a = self.derive(Var::X1, e)?.scale(&RatFunc::from(self.vf.x1().clone()));
        let b = self.derive(Var::X2, e)?.scale(&RatFunc::from(self.vf.x2().clone()));
        Ok(a.add(&b))
    }

    pub fn display(&self, e: &JetExpr) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = e
            .terms()
            .rev()
            .map(|(m, c)| {
                let mut s = format!("({c})");
                for (sym, k) in m.symbols() {
                    s.push('*');
                    s.push_str(&self.name(sym));
                    if k > 1 {
                        s.push_str(&format!("^{k}"));
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms()
            .map(|(m, c)| {
                let syms: Vec<String> = m.symbols().map(|(s, k)| format!("{s:?}^{k}")).collect();
                format!("({c})*[{}]", syms.join(" "))
            })
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

pub fn apply_derivation(sys: &DerivationSystem, which: Var, e: &JetExpr) -> Result<JetExpr> {
    sys.derive(which, e)
}

/// Row `(a_{j0}, ..., a_{j(j-1)})`:
/// `a_{(k+1)0} = a_{k0} + 1`, `a_{(k+1)i} = a_{k(i-1)} + a_{ki}`, `a_{(k+1)k} = a_{k(k-1)}`.
pub fn a_coeffs(j: usize) -> Vec<u64> {
    assert!(j >= 1);
    let mut row = vec![1u64];
    for k in 1..j {
        let mut next = vec![0u64; k + 1];
        next[0] = row[0] + 1;
        for i in 1..k {
            next[i] = row[i - 1] + row[i];
        }
        next[k] = row[k - 1];
        row = next;
    }
    row
}

/// `X(y_j)` reduced modulo `X(y) = 0`.
pub fn reduce_x_of_yj(vf: &VectorField, j: u32) -> JetExpr {
    let sys = DerivationSystem::new(vf, JetMode::Reduced);
    sys.apply_x(&JetExpr::y(j)).expect("structural rules are total")
}

/// The predicted form `Σ_{i<j} a_{ji} B_i y_{j-i}`.
pub fn predicted_x_of_yj(b: &BSequence, j: u32) -> JetExpr {
    let row = a_coeffs(j as usize);
    let mut out = JetExpr::zero();
    for (i, a) in row.iter().enumerate() {
        let c = b.get(i).scale(&Rat::from_integer(BigInt::from(*a)));
        out = out.add(&JetExpr::y(j - i as u32).scale(&c));
    }
    out
}

fn test_functions() -> Vec<RatFunc> {
    ["x1", "x2", "x1^2*x2 - 3*x2 + 1", "1/(x1 + x2 + 1)", "(x1 - x2)/(x2^2 + 1)"]
        .iter()
        .map(|s| crate::expr::parse_ratfunc(s).expect("fixed test function"))
        .collect()
}

/// Operator-identity check with an explicit `B_0` (exposed for mutation tests).
pub fn lemma_a1_holds_with(vf: &VectorField, b0: &RatFunc, extra: &[RatFunc]) -> bool {
    let x1 = RatFunc::from(vf.x1().clone());
    let d2x1_over_x1 = RatFunc::from(vf.x1().d2()).checked_div(&x1).expect("X1 nonzero");
    let d2x1 = RatFunc::from(vf.x1().d2());
    let d2x2 = RatFunc::from(vf.x2().d2());

    // (1) on rational functions: (δ2X1)δ1f + (δ2X2)δ2f = (δ2X1/X1) X(f) - B0 δ2 f
    for f in test_functions().iter().chain(extra) {
        let lhs = &(&d2x1 * &f.d1()) + &(&d2x2 * &f.d2());
        let rhs = &(&d2x1_over_x1 * &vf.apply(f)) - &(b0 * &f.d2());
        if lhs != rhs {
            return false;
        }
    }

    for mode in [JetMode::FreeD1, JetMode::Reduced] {
        let sys = DerivationSystem::new(vf, mode);
        for j in 0..=4u32 {
            // (1) on jet arguments
            let y = JetExpr::y(j);
            let d1 = sys.derive(Var::X1, &y).unwrap();
            let d2 = sys.derive(Var::X2, &y).unwrap();
            let lhs = d1.scale(&d2x1).add(&d2.scale(&d2x2));
            let rhs = sys.apply_x(&y).unwrap().scale(&d2x1_over_x1).sub(&d2.scale(b0));
            if !lhs.sub(&rhs).is_zero() {
                return false;
            }
            if j == 0 {
                continue;
            }
            // (2) X(y_j) = δ2 X(y_{j-1}) - (δ2X1/X1) X(y_{j-1}) + B0 y_j
            let prev = sys.apply_x(&JetExpr::y(j - 1)).unwrap();
            let rhs = sys
                .derive(Var::X2, &prev)
                .unwrap()
                .sub(&prev.scale(&d2x1_over_x1))
                .add(&JetExpr::y(j).scale(b0));
            if !sys.apply_x(&JetExpr::y(j)).unwrap().sub(&rhs).is_zero() {
                return false;
            }
        }
    }
    true
}

pub fn check_identity_lemma_a1(vf: &VectorField) -> bool {
    let b = vf.b_sequence(0);
    lemma_a1_holds_with(vf, b.get(0), &[])
}

/// How the `u` of the Riccati system is supplied.
#[derive(Clone, Debug)]
pub enum RiccatiInput {
    /// Opaque symbol carrying only `X(u) = 2 B0 u + B2`.
    Symbolic,
    /// A concrete rational function (a level-3 witness).
    Concrete(RatFunc),
}

/// The Riccati system in `w`: `δ2 w = u + c w^2`, and
/// `δ1 w = -δ2²(X2/X1) - (X2/X1) u - δ2(X2/X1) w - (1/2)(X2/X1) w^2`.
/// With `c = 1/2` the two rules are compatible exactly when `u` solves
/// `X(u) = 2 B0 u + B2`.
pub struct RiccatiSystem {
    pub sys: DerivationSystem,
    pub w: Sym,
    pub u: JetExpr,
}

impl RiccatiSystem {
    pub fn build(vf: &VectorField, input: &RiccatiInput, w_sq_coeff_d2: &Rat) -> RiccatiSystem {
        let mut sys = DerivationSystem::new(vf, JetMode::Reduced);
        let b = vf.b_sequence(2);
        let u = match input {
            RiccatiInput::Symbolic => {
                let (b0, b2) = (b.get(0).clone(), b.get(2).clone());
                let two = Rat::from_integer(2.into());
                let (u, _) = sys.declare_with_x_rule("u", |u| {
                    JetExpr::sym(u).scale(&b0.scale(&two)).add(&JetExpr::constant(b2))
                });
                JetExpr::sym(u)
            }
            RiccatiInput::Concrete(a) => JetExpr::constant(a.clone()),
        };
        let w = sys.declare("w");
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let s = vf.ratio();
        let s1 = s.d2();
        let s2 = s1.d2();
        let wj = JetExpr::sym(w);
        let w2 = wj.mul(&wj);
        let d2 = u.add(&w2.scale_rat(w_sq_coeff_d2));
        let d1 = JetExpr::constant(-s2)
            .sub(&u.scale(&s))
            .sub(&wj.scale(&s1))
            .sub(&w2.scale(&s.scale(&half)));
        sys.set_rules(w, Some(d1), Some(d2));
        RiccatiSystem { sys, w, u }
    }

    /// `δ1 δ2 w - δ2 δ1 w`.
    pub fn compatibility_residual(&self) -> JetExpr {
        let wj = JetExpr::sym(self.w);
        let d2w = self.sys.derive(Var::X2, &wj).unwrap();
        let d1w = self.sys.derive(Var::X1, &wj).unwrap();
        let a = self.sys.derive(Var::X1, &d2w).unwrap();
        let b = self.sys.derive(Var::X2, &d1w).unwrap();
        a.sub(&b)
    }
}

/// Compatibility of the Riccati system given only `X(u) = 2 B0 u + B2`.
pub fn check_compat_a4(vf: &VectorField) -> bool {
    check_compat_a4_with(vf, &Rat::new(BigInt::one(), BigInt::from(2)))
}

/// Same, with the `w^2` coefficient of the δ2-rule as a parameter.
pub fn check_compat_a4_with(vf: &VectorField, w_sq_coeff_d2: &Rat) -> bool {
    RiccatiSystem::build(vf, &RiccatiInput::Symbolic, w_sq_coeff_d2)
        .compatibility_residual()
        .is_zero()
}

/// Closedness of `v dx1 + u dx2` with `v = -(X2/X1) u + c/X1` given `X(u) = B0 u + c`:
/// returns `δ1 u - δ2 v`. `with_b1 = false` is the level-1 case (`c = 0`),
/// `true` the level-2 case (`c = B1`, `v` gains `B0/X1`).
pub fn closedness_residual_symbolic(vf: &VectorField, with_b1: bool) -> JetExpr {
    let mut sys = DerivationSystem::new(vf, JetMode::Reduced);
    let b = vf.b_sequence(1);
    let (b0, b1) = (b.get(0).clone(), b.get(1).clone());
    let (u, _) = sys.declare_with_x_rule("u", |u| {
        let e = JetExpr::sym(u).scale(&b0);
        if with_b1 {
            e.add(&JetExpr::constant(b1))
        } else {
            e
        }
    });
    let uj = JetExpr::sym(u);
    let mut v = uj.scale(&-vf.ratio());
    if with_b1 {
        let x1 = RatFunc::from(vf.x1().clone());
        v = v.add(&JetExpr::constant(b0.checked_div(&x1).unwrap()));
    }
    let d1u = sys.derive(Var::X1, &uj).unwrap();
    let d2v = sys.derive(Var::X2, &v).unwrap();
    d1u.sub(&d2v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_ratfunc;

    fn vf(a: &str, b: &str) -> VectorField {
        VectorField::parse(a, b).unwrap()
    }

    #[test]
    fn a_rows() {
        assert_eq!(a_coeffs(1), vec![1]);
        assert_eq!(a_coeffs(2), vec![2, 1]);
        assert_eq!(a_coeffs(3), vec![3, 3, 1]);
        assert_eq!(a_coeffs(4), vec![4, 6, 4, 1]);
    }

    #[test]
    fn derivation_examples() {
        let v = vf("1", "x2");
        let sys = DerivationSystem::new(&v, JetMode::Reduced);
        let y1 = JetExpr::y(1);
        let e = y1.mul(&y1);
        let expect = JetExpr::y(1).mul(&JetExpr::y(2)).scale_rat(&Rat::from_integer(2.into()));
        assert_eq!(sys.derive(Var::X2, &e).unwrap(), expect);
        let expect = JetExpr::y(1).scale(&parse_ratfunc("-x2").unwrap());
        assert_eq!(sys.derive(Var::X1, &JetExpr::y(0)).unwrap(), expect);
    }

    #[test]
    fn aux_rule_and_missing_rule() {
        let v = vf("1", "x2^2 + x1");
        let mut sys = DerivationSystem::new(&v, JetMode::Reduced);
        let u = sys.declare("u");
        let w = sys.declare("w");
        let wj = JetExpr::sym(w);
        let rule = JetExpr::sym(u).add(&wj.mul(&wj).scale_rat(&Rat::new(1.into(), 2.into())));
        sys.set_rules(w, None, Some(rule.clone()));
        assert_eq!(sys.derive(Var::X2, &wj).unwrap(), rule);
        assert_eq!(sys.derive(Var::X1, &wj), Err(Error::MissingRule("w".into())));
        assert_eq!(sys.derive(Var::X2, &JetExpr::sym(u)), Err(Error::MissingRule("u".into())));
    }

    #[test]
    fn reduction_low_orders() {
        let v = vf("x1*x2 + 1", "x2^3 - x1");
        let b = v.b_sequence(3);
        assert_eq!(reduce_x_of_yj(&v, 0), JetExpr::zero());
        assert_eq!(reduce_x_of_yj(&v, 1), JetExpr::y(1).scale(b.get(0)));
        for j in 1..=4 {
            assert_eq!(reduce_x_of_yj(&v, j), predicted_x_of_yj(&b, j), "j = {j}");
        }
    }

    #[test]
    fn lemma_a1_and_mutation() {
        let v = vf("1", "x2");
        assert!(check_identity_lemma_a1(&v));
        let v = vf("x2 - x1^3/3 + x1", "-x1");
        assert!(check_identity_lemma_a1(&v));
        let bad = v.b_sequence(0).get(0) + &RatFunc::one();
        assert!(!lemma_a1_holds_with(&v, &bad, &[]));
    }

    #[test]
    fn compat_and_mutation() {
        let v = vf("1", "x2^2 + x1");
        assert!(check_compat_a4(&v));
        assert!(!check_compat_a4_with(&v, &Rat::one()));
    }

    #[test]
    fn closedness_kernels() {
        let v = vf("x1^2 + x2", "x1*x2 - 1");
        assert!(closedness_residual_symbolic(&v, false).is_zero());
        assert!(closedness_residual_symbolic(&v, true).is_zero());
    }
}
