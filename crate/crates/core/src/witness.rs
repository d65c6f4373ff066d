//! Bounded search for rational solutions of `X(a) = λ B0 a + R` and the
//! classification ladder built on it.
//!
//! Level 0 asks for a rational first integral, level 1 for `a ≠ 0` with
//! `X(a) = n B0 a`, level 2 for `X(a) = B0 a + B1`, level 3 for
//! `X(a) = 2 B0 a + B2`. A witness at level `k` bounds the order of the
//! differential Galois group by `k`; failed searches at lower levels only
//! hold up to the recorded bounds.

use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::darboux::{find_darboux, first_integral_from_pairs, polynomial_first_integrals, DarbouxConfig};
use crate::error::{Error, Result};
use crate::expr::{print_poly, print_ratfunc};
use crate::field::VectorField;
use crate::linalg::{kernel, solve, QMatrix};
use crate::poly::{Mono, Poly};
use crate::rat::Rat;
use crate::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPDEProblem {
    pub vf: VectorField,
    pub lambda: u32,
    pub rhs: RatFunc,
    pub require_nonzero: bool,
}

impl LinearPDEProblem {
    /// `X(a) = n B0 a`, `a ≠ 0`.
    pub fn level1(vf: &VectorField, n: u32) -> Self {
        LinearPDEProblem { vf: vf.clone(), lambda: n, rhs: RatFunc::zero(), require_nonzero: true }
    }

    /// `X(a) = B0 a + B1`.
    pub fn level2(vf: &VectorField) -> Self {
        let b = vf.b_sequence(1);
        LinearPDEProblem { vf: vf.clone(), lambda: 1, rhs: b.get(1).clone(), require_nonzero: false }
    }

    /// `X(a) = 2 B0 a + B2`.
    pub fn level3(vf: &VectorField) -> Self {
        let b = vf.b_sequence(2);
        LinearPDEProblem { vf: vf.clone(), lambda: 2, rhs: b.get(2).clone(), require_nonzero: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub num_deg_max: u32,
    pub den_exp_max: u32,
    pub n_max: u32,
    pub darboux_deg: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { num_deg_max: 12, den_exp_max: 4, n_max: 6, darboux_deg: 2 }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        if self.num_deg_max == 0 || self.n_max == 0 || self.darboux_deg == 0 {
            return Err(Error::InvalidArgument("search bounds must be at least 1 (den_exp may be 0)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub level: u8,
    pub a: RatFunc,
    pub n: Option<u32>,
    pub first_integral: Option<RatFunc>,
}

impl Witness {
    pub fn level0(omega: RatFunc) -> Self {
        Witness { level: 0, a: omega.clone(), n: None, first_integral: Some(omega) }
    }

    pub fn level1(a: RatFunc, n: u32) -> Self {
        Witness { level: 1, a, n: Some(n), first_integral: None }
    }

    pub fn higher(level: u8, a: RatFunc) -> Self {
        Witness { level, a, n: None, first_integral: None }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.level, self.n) {
            (0, _) => write!(f, "level 0, first integral {}", print_ratfunc(&self.a)),
            (1, Some(n)) => write!(f, "level 1, n = {n}, a = {}", print_ratfunc(&self.a)),
            (l, _) => write!(f, "level {l}, a = {}", print_ratfunc(&self.a)),
        }
    }
}

/// Direct substitution check of the defining identity, written against
/// [`RatFunc`] arithmetic only.
pub fn verify_witness(vf: &VectorField, w: &Witness) -> bool {
    let slope = RatFunc::from(vf.x2().clone()) / RatFunc::from(vf.x1().clone());
    let x1 = RatFunc::from(vf.x1().clone());
    let x_of = |f: &RatFunc| {
        &(&RatFunc::from(vf.x1().clone()) * &f.d1()) + &(&RatFunc::from(vf.x2().clone()) * &f.d2())
    };
    let b = |i: usize| {
        let mut d = slope.clone();
        for _ in 0..=i {
            d = d.d2();
        }
        -(&x1 * &d)
    };
    let k = |n: u32| RatFunc::constant(Rat::from_integer(n.into()));
    match w.level {
        0 => {
            let omega = w.first_integral.as_ref().unwrap_or(&w.a);
            !omega.is_constant() && x_of(omega).is_zero()
        }
        1 => match w.n {
            Some(n) if n >= 1 => !w.a.is_zero() && x_of(&w.a) == &(&k(n) * &b(0)) * &w.a,
            _ => false,
        },
        2 => x_of(&w.a) == &(&b(0) * &w.a) + &b(1),
        3 => x_of(&w.a) == &(&(&k(2) * &b(0)) * &w.a) + &b(2),
        _ => false,
    }
}

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    let g = a.gcd(b);
    (a * b).div_exact(&g).expect("gcd divides the product").primitive()
}

/// `c·X(a) + q·a + r = 0` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearedEquation {
    pub x_coeff: Poly,
    pub a_coeff: Poly,
    pub constant: Poly,
}

impl ClearedEquation {
    /// Whether both describe the same equation (equal up to a nonzero constant).
    pub fn same_equation(&self, o: &ClearedEquation) -> bool {
        let Some((m, c)) = self.x_coeff.leading() else {
            return false;
        };
        let oc = o.x_coeff.coeff(m);
        if oc.is_zero() {
            return false;
        }
        let s = &oc / c;
        self.x_coeff.scale(&s) == o.x_coeff
            && self.a_coeff.scale(&s) == o.a_coeff
            && self.constant.scale(&s) == o.constant
    }
}

impl fmt::Display for ClearedEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})*X(a) + ({})*a + ({}) = 0",
            print_poly(&self.x_coeff),
            print_poly(&self.a_coeff),
            print_poly(&self.constant)
        )
    }
}

/// Clearing factor for the denominators in `fs`: a power of `X1` when that
/// suffices, otherwise their lcm.
fn clearing_factor(vf: &VectorField, fs: &[&RatFunc]) -> Poly {
    let l = fs.iter().fold(Poly::one(), |acc, f| poly_lcm(&acc, f.den()));
    let (dl, dx) = (l.total_degree().unwrap_or(0), vf.x1().total_degree().unwrap_or(0));
    if dx > 0 && dl % dx == 0 {
        let p = vf.x1().pow(dl / dx);
        if p.is_associate(&l) {
            return p;
        }
    }
    l
}

fn assemble(vf: &VectorField, lambda: u32, rhs: &RatFunc) -> ClearedEquation {
    let b0 = vf.b_sequence(0).get(0).clone();
    let l = clearing_factor(vf, &[&b0, rhs]);
    let lam = Rat::from_integer(lambda.into());
    let poly = |f: &RatFunc| f.mul_poly(&l).as_poly().cloned().expect("clearing factor clears");
    ClearedEquation { x_coeff: l.clone(), a_coeff: -poly(&b0).scale(&lam), constant: -poly(rhs) }
}

/// `X(a) - 2 B0 a - B2 = 0` multiplied through by its clearing factor.
pub fn assemble_level3_cleared(vf: &VectorField) -> ClearedEquation {
    let b = vf.b_sequence(2);
    assemble(vf, 2, b.get(2))
}

/// Coefficients of `P1 δ1 N + P2 δ2 N + P0 N = S` for `a = N / D`.
struct NumeratorSystem {
    p1: Poly,
    p2: Poly,
    p0: Poly,
    s: Poly,
}

impl NumeratorSystem {
    fn new(eq: &ClearedEquation, vf: &VectorField, d: &Poly) -> Self {
        // c X(N/D) + q N/D + r = 0, times D^2:
        // c D X(N) + (q D - c X(D)) N = -r D^2
        let cd = &eq.x_coeff * d;
        let mut sys = NumeratorSystem {
            p1: &cd * vf.x1(),
            p2: &cd * vf.x2(),
            p0: &(&eq.a_coeff * d) - &(&eq.x_coeff * &vf.apply_poly(d)),
            s: -&(&eq.constant * &(d * d)),
        };
        let mut g = sys.p1.gcd(&sys.p2);
        for p in [&sys.p0, &sys.s] {
            if !p.is_zero() {
                g = g.gcd(p);
            }
        }
        if !g.is_constant() {
            for p in [&mut sys.p1, &mut sys.p2, &mut sys.p0, &mut sys.s] {
                *p = p.div_exact(&g).expect("common factor divides");
            }
        }
        sys
    }

    fn image(&self, m: Mono) -> Poly {
        let mut out = self.p0.mul_term(m, &Rat::one());
        if m.e1 > 0 {
            let c = Rat::from_integer(m.e1.into());
            out = &out + &self.p1.mul_term(Mono { e1: m.e1 - 1, e2: m.e2 }, &c);
        }
        if m.e2 > 0 {
            let c = Rat::from_integer(m.e2.into());
            out = &out + &self.p2.mul_term(Mono { e1: m.e1, e2: m.e2 - 1 }, &c);
        }
        out
    }
}

fn build_matrix(images: &[Poly], s: &Poly) -> (QMatrix, Vec<Rat>) {
    let mut rows: std::collections::BTreeMap<Mono, usize> = std::collections::BTreeMap::new();
    for p in images.iter().chain(std::iter::once(s)) {
        for (m, _) in p.terms() {
            rows.entry(*m).or_insert(0);
        }
    }
    for (k, v) in rows.values_mut().enumerate() {
        *v = k;
    }
    let mut a = QMatrix::zeros(rows.len(), images.len());
    for (j, p) in images.iter().enumerate() {
        for (m, c) in p.terms() {
            a.set(rows[m], j, c.clone());
        }
    }
    let mut b = vec![Rat::zero(); rows.len()];
    for (m, c) in s.terms() {
        b[rows[m]] = c.clone();
    }
    (a, b)
}

/// Solvability can be ruled out mod p; `true` means "maybe".
fn may_be_solvable(a: &QMatrix, b: &[Rat], require_nonzero: bool) -> bool {
    let homogeneous = b.iter().all(|x| x.is_zero());
    if homogeneous && !require_nonzero {
        return true;
    }
    if homogeneous {
        return a.rank_mod_p_lower_bound() < a.cols();
    }
    let neg: Vec<Rat> = b.iter().map(|x| -x).collect();
    let aug = a.augment(&neg);
    aug.rank_mod_p_lower_bound() < aug.cols()
}

fn solve_for_denominator(
    p: &LinearPDEProblem,
    eq: &ClearedEquation,
    d: &Poly,
    num_deg_max: u32,
) -> Result<Option<RatFunc>> {
    let sys = NumeratorSystem::new(eq, &p.vf, d);
    let monos = Mono::up_to_degree(num_deg_max);
    let images: Vec<Poly> = monos.iter().map(|&m| sys.image(m)).collect();
    let (a, b) = build_matrix(&images, &sys.s);
    if !may_be_solvable(&a, &b, p.require_nonzero) {
        return Ok(None);
    }
    for nd in 0..=num_deg_max {
        let ncols = Mono::up_to_degree(nd).len();
        let (a, b) = build_matrix(&images[..ncols], &sys.s);
        if !may_be_solvable(&a, &b, p.require_nonzero) {
            continue;
        }
        let coeffs = if p.require_nonzero && b.iter().all(|x| x.is_zero()) {
            match kernel(&a).into_iter().next() {
                Some(v) => v,
                None => continue,
            }
        } else {
            match solve(&a, &b) {
                Some(sol) if p.require_nonzero && sol.particular.iter().all(|x| x.is_zero()) => {
                    match sol.kernel.into_iter().next() {
                        Some(v) => v,
                        None => continue,
                    }
                }
                Some(sol) => sol.particular,
                None => continue,
            }
        };
        let num = Poly::from_terms(monos[..ncols].iter().copied().zip(coeffs));
        let a = RatFunc::new(num, d.clone())?;
        if !satisfies(p, &a) {
            return Err(Error::InternalVerifyFailed(format!(
                "solver returned {} which fails substitution",
                print_ratfunc(&a)
            )));
        }
        return Ok(Some(a));
    }
    Ok(None)
}

fn satisfies(p: &LinearPDEProblem, a: &RatFunc) -> bool {
    if p.require_nonzero && a.is_zero() {
        return false;
    }
    let b0 = p.vf.b_sequence(0).get(0).clone();
    let lam = RatFunc::constant(Rat::from_integer(p.lambda.into()));
    p.vf.apply(a) == &(&(&lam * &b0) * a) + &p.rhs
}

/// Candidate denominators `Π g_i^{e_i}`, `e_i ≤ den_exp_max`,
/// `Σ e_i deg g_i ≤ den_exp_max · max deg g_i`, ordered by total degree and
/// then exponent vector, skipping repeated products.
pub fn candidate_denominators(gens: &[Poly], den_exp_max: u32) -> Vec<Poly> {
    let degs: Vec<u32> = gens.iter().map(|g| g.total_degree().unwrap_or(0)).collect();
    let cap = den_exp_max * degs.iter().copied().max().unwrap_or(0);
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for &dg in &degs {
        let mut next = Vec::new();
        for e in &exps {
            let used: u32 = e.iter().zip(&degs).map(|(a, b)| a * b).sum();
            for k in 0..=den_exp_max {
                if used + k * dg <= cap {
                    let mut e2 = e.clone();
                    e2.push(k);
                    next.push(e2);
                }
            }
        }
        exps = next;
    }
    let total = |e: &Vec<u32>| -> u32 { e.iter().zip(&degs).map(|(a, b)| a * b).sum() };
    exps.sort_by(|a, b| total(a).cmp(&total(b)).then_with(|| a.cmp(b)));
    let mut out: Vec<Poly> = Vec::new();
    for e in exps {
        let d = e
            .iter()
            .zip(gens)
            .fold(Poly::one(), |acc, (k, g)| &acc * &g.pow(*k))
            .primitive();
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// Searches `a = N / D` over the candidate denominators; the first
/// denominator with a solution wins, then the lowest numerator degree.
pub fn solve_linear_pde(p: &LinearPDEProblem, bounds: &SearchBounds, den_gens: &[Poly]) -> Result<Option<RatFunc>> {
    let eq = assemble(&p.vf, p.lambda, &p.rhs);
    let dens = candidate_denominators(den_gens, bounds.den_exp_max);
    let found = dens
        .par_iter()
        .map(|d| solve_for_denominator(p, &eq, d, bounds.num_deg_max))
        .find_first(|r| !matches!(r, Ok(None)));
    found.unwrap_or(Ok(None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Witnessed,
    BoundLimited,
}

/// A level searched without success, with the bounds that applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub level: u8,
    pub bounds: SearchBounds,
    /// For level 0: whether the invariant-curve search ran to completion.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub level_found: Option<u8>,
    pub witness: Option<Witness>,
    pub exclusions: Vec<Exclusion>,
    pub coefficient_field: &'static str,
    pub status: Status,
    pub note: Option<String>,
    /// `gcd(X1, X2)` when it was divided out.
    pub common_factor: Option<Poly>,
    pub den_gens: Vec<Poly>,
}

pub const UNBOUNDED_NOTE: &str = "no witness within the stated bounds; \
if X(a) = 2 B0 a + B2 truly has no rational solution, the Galois group order is infinite";

impl Classification {
    /// Human summary of what was shown.
    pub fn semantics(&self) -> String {
        match self.level_found {
            Some(0) => "order 0 (witnessed)".into(),
            Some(k) => format!("order <= {k} (witnessed); order > {} only up to stated bounds", k - 1),
            None => "order > 3 only up to stated bounds".into(),
        }
    }
}

/// Denominator generators: `X1`, `X2`, their squarefree parts, the given
/// Darboux polynomials and hints, made primitive, without constants or
/// repeated associates, ordered by degree and then canonical print.
pub fn denominator_generators(vf: &VectorField, darboux: &[Poly], hints: &[Poly]) -> Vec<Poly> {
    let mut cands: Vec<Poly> = vec![vf.x1().clone(), vf.x2().clone(), vf.x1().squarefree_part(), vf.x2().squarefree_part()];
    cands.extend(darboux.iter().cloned());
    cands.extend(hints.iter().cloned());
    let mut out: Vec<Poly> = Vec::new();
    for c in cands {
        if c.is_zero() || c.is_constant() {
            continue;
        }
        let c = c.primitive();
        if !out.iter().any(|o| o.is_associate(&c)) {
            out.push(c);
        }
    }
    out.sort_by_key(|p| (p.total_degree().unwrap_or(0), print_poly(p)));
    out
}

pub fn classify(vf: &VectorField, bounds: &SearchBounds) -> Result<Classification> {
    classify_with_hints(vf, bounds, &[])
}

pub fn classify_with_hints(vf: &VectorField, bounds: &SearchBounds, hints: &[Poly]) -> Result<Classification> {
    bounds.validate()?;
    let (red, g) = vf.remove_common_factor();
    let common_factor = (!g.is_constant()).then_some(g);
    let mut exclusions = Vec::new();
    let finish = |w: Witness, exclusions: Vec<Exclusion>, gens: Vec<Poly>| -> Result<Classification> {
        if !verify_witness(vf, &w) {
            return Err(Error::InternalVerifyFailed(format!("witness {w} fails on the input field")));
        }
        Ok(Classification {
            level_found: Some(w.level),
            witness: Some(w),
            exclusions,
            coefficient_field: "Q",
            status: Status::Witnessed,
            note: None,
            common_factor: common_factor.clone(),
            den_gens: gens,
        })
    };

    let dcfg = DarbouxConfig { deg_max: bounds.darboux_deg, ..DarbouxConfig::default() };
    if let Some(p) = polynomial_first_integrals(&red, bounds.darboux_deg).into_iter().next() {
        return finish(Witness::level0(RatFunc::from(p)), exclusions, vec![]);
    }
    let search = find_darboux(&red, &dcfg);
    if let Some(w) = first_integral_from_pairs(&red, &search.pairs) {
        return finish(Witness::level0(w), exclusions, vec![]);
    }
    exclusions.push(Exclusion { level: 0, bounds: *bounds, complete: search.complete });

    let fs: Vec<Poly> = search.pairs.iter().map(|p| p.f.clone()).collect();
    let gens = denominator_generators(&red, &fs, hints);

    for n in 1..=bounds.n_max {
        if let Some(a) = solve_linear_pde(&LinearPDEProblem::level1(&red, n), bounds, &gens)? {
            return finish(Witness::level1(a, n), exclusions, gens);
        }
    }
    exclusions.push(Exclusion { level: 1, bounds: *bounds, complete: true });
    if let Some(a) = solve_linear_pde(&LinearPDEProblem::level2(&red), bounds, &gens)? {
        return finish(Witness::higher(2, a), exclusions, gens);
    }
    exclusions.push(Exclusion { level: 2, bounds: *bounds, complete: true });
    if let Some(a) = solve_linear_pde(&LinearPDEProblem::level3(&red), bounds, &gens)? {
        return finish(Witness::higher(3, a), exclusions, gens);
    }
    exclusions.push(Exclusion { level: 3, bounds: *bounds, complete: true });
    Ok(Classification {
        level_found: None,
        witness: None,
        exclusions,
        coefficient_field: "Q",
        status: Status::BoundLimited,
        note: Some(UNBOUNDED_NOTE.into()),
        common_factor,
        den_gens: gens,
    })
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

    fn p(s: &str) -> Poly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn solver_examples() {
        let b = SearchBounds::default();
        let v = vf("1", "x2");
        let a = solve_linear_pde(&LinearPDEProblem::level1(&v, 1), &b, &[p("x2")]).unwrap();
        assert_eq!(a, Some(r("1/x2")));
        let v = vf("1", "x1*x2 + 1");
        let a = solve_linear_pde(&LinearPDEProblem::level2(&v), &b, &[p("x1*x2 + 1")]).unwrap();
        assert_eq!(a, Some(RatFunc::zero()));
        let v = vf("1", "x2^2 - 1");
        let gens = [p("x2 + 1"), p("x2 - 1"), p("x2^2 - 1")];
        let a = solve_linear_pde(&LinearPDEProblem::level1(&v, 1), &b, &gens).unwrap();
        assert_eq!(a, Some(r("1/(x2^2 - 1)")));
    }

    #[test]
    fn verifier_examples() {
        let v = vf("1", "x2");
        assert!(verify_witness(&v, &Witness::level1(r("1/x2"), 1)));
        assert!(!verify_witness(&v, &Witness::level1(r("x2"), 1)));
        assert!(verify_witness(&vf("x2", "-x1"), &Witness::level0(r("x1^2 + x2^2"))));
    }

    #[test]
    fn denominators_enumerated_in_order() {
        let d = candidate_denominators(&[p("x2 + 1"), p("x2 - 1"), p("x2^2 - 1")], 1);
        assert_eq!(d, vec![p("1"), p("x2 - 1"), p("x2 + 1"), p("x2^2 - 1")]);
    }

    #[test]
    fn level3_cleared_forms() {
        let v = vf("x2 - x1^3/3 + x1", "-x1");
        let x1 = v.x1().clone();
        let expected = ClearedEquation {
            x_coeff: x1.pow(3),
            a_coeff: &(&p("2*x1") * &x1.pow(2)) * &Poly::one(),
            constant: p("6*x1"),
        };
        assert_eq!(assemble_level3_cleared(&v), expected);
        let e = assemble_level3_cleared(&vf("1", "x2^2 + x1"));
        assert_eq!(e, ClearedEquation { x_coeff: p("1"), a_coeff: p("4*x2"), constant: p("0") });
        let e = assemble_level3_cleared(&vf("1", "x2"));
        assert_eq!(e, ClearedEquation { x_coeff: p("1"), a_coeff: p("2"), constant: p("0") });
    }

    #[test]
    fn classify_small_examples() {
        let b = SearchBounds::default();
        let c = classify(&vf("1", "x2"), &b).unwrap();
        assert_eq!(c.level_found, Some(1));
        assert_eq!(c.witness, Some(Witness::level1(r("1/x2"), 1)));
        let c = classify(&vf("1", "x1*x2 + 1"), &b).unwrap();
        assert_eq!(c.level_found, Some(2));
        assert_eq!(c.witness.as_ref().unwrap().a, RatFunc::zero());
        assert!(c.exclusions.iter().any(|e| e.level == 1));
        let c = classify(&vf("x2", "-x1"), &b).unwrap();
        assert_eq!(c.level_found, Some(0));
    }
}
