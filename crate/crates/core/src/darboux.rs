//! Darboux polynomials (`X(f) = k f`) and rational first integrals.
//!
//! Cofactors are found first: for each possible leading monomial `μ` of `f`
//! (normalized to coefficient 1) the bilinear system in the coefficients of
//! `f` and `k` is eliminated by a Gröbner basis in a block order with the
//! `f` unknowns above the `k` unknowns. Rational cofactors come out of the elimination
//! ideal; for each one the Darboux polynomials form the kernel of the linear
//! map `f ↦ X(f) - k f`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::error::Result;
use crate::expr::print_poly;
use crate::field::VectorField;
use crate::groebner::{groebner_in, rational_points, MPoly, Order};
use crate::linalg::{kernel, QMatrix};
use crate::poly::{Mono, Poly};
use crate::rat::Rat;
use crate::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxPair {
    pub f: Poly,
    pub k: Poly,
}

impl DarbouxPair {
    /// Direct substitution check, independent of the search.
    pub fn verify(&self, vf: &VectorField) -> bool {
        !self.f.is_constant() && vf.apply_poly(&self.f) == &self.k * &self.f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DarbouxConfig {
    pub deg_max: u32,
    pub groebner_budget: usize,
}

impl Default for DarbouxConfig {
    fn default() -> Self {
        DarbouxConfig { deg_max: 2, groebner_budget: 20_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DarbouxSearch {
    pub pairs: Vec<DarbouxPair>,
    /// False if some elimination hit the budget or left a positive-dimensional
    /// set of cofactors, so pairs may be missing.
    pub complete: bool,
}

fn cofactor_degree(vf: &VectorField) -> u32 {
    vf.degree().saturating_sub(1)
}

/// Matrix of `f ↦ X(f) - k f` on monomials of degree `≤ deg`, columns in
/// ascending grlex order.
fn darboux_matrix(vf: &VectorField, k: &Poly, deg: u32) -> (QMatrix, Vec<Mono>) {
    let cols = Mono::up_to_degree(deg);
    let images: Vec<Poly> = cols
        .iter()
        .map(|&m| {
            let mp = Poly::term(Rat::one(), m);
            &vf.apply_poly(&mp) - &(k * &mp)
        })
        .collect();
    let mut rows: BTreeMap<Mono, usize> = BTreeMap::new();
    for img in &images {
        for (m, _) in img.terms() {
            let n = rows.len();
            rows.entry(*m).or_insert(n);
        }
    }
    let mut mat = QMatrix::zeros(rows.len(), cols.len());
    for (j, img) in images.iter().enumerate() {
        for (m, c) in img.terms() {
            mat.set(rows[m], j, c.clone());
        }
    }
    (mat, cols)
}

fn vec_to_poly(v: &[Rat], monos: &[Mono]) -> Poly {
    Poly::from_terms(monos.iter().copied().zip(v.iter().cloned()))
}

/// Cofactor candidates whose Darboux polynomial has leading monomial `mu`.
fn cofactors_for_leading(vf: &VectorField, mu: Mono, budget: usize) -> Result<(Vec<Poly>, bool)> {
    let f_monos: Vec<Mono> = Mono::up_to_degree(mu.degree()).into_iter().filter(|&m| m < mu).collect();
    let k_monos = Mono::up_to_degree(cofactor_degree(vf));
    let nf = f_monos.len();
    let n = nf + k_monos.len();

    // f = mu + Σ f_ν ν, k = Σ k_κ κ, as polynomials in x1, x2 with MPoly coefficients.
    let mut f_terms: Vec<(Mono, MPoly)> = vec![(mu, MPoly::constant(n, Rat::one()))];
    for (i, &m) in f_monos.iter().enumerate() {
        f_terms.push((m, MPoly::var(n, i)));
    }
    let mut eqs: BTreeMap<Mono, MPoly> = BTreeMap::new();
    let mut add = |m: Mono, c: MPoly| {
        let slot = eqs.entry(m).or_insert_with(|| MPoly::zero(n));
        *slot = slot.add(&c);
    };
    for (m, c) in &f_terms {
        let img = vf.apply_poly(&Poly::term(Rat::one(), *m));
        for (mm, cc) in img.terms() {
            add(*mm, c.scale(cc));
        }
        for (j, &km) in k_monos.iter().enumerate() {
            add(m.times(km), c.mul(&MPoly::var(n, nf + j)).scale(&-Rat::one()));
        }
    }
    let system: Vec<MPoly> = eqs.into_values().filter(|p| !p.is_zero()).collect();
    if system.is_empty() {
        return Ok((vec![Poly::zero()], true));
    }
    let g = groebner_in(&system, Order::Block(nf), budget)?;
    if g.iter().any(|p| p.is_constant()) {
        return Ok((vec![], true));
    }
    let k_vars: Vec<usize> = (nf..n).collect();
    let elim: Vec<MPoly> = g.into_iter().filter(|p| p.support().iter().all(|&v| v >= nf)).collect();
    let pts = rational_points(&elim, &k_vars, budget)?;
    let ks = pts.points.iter().map(|pt| vec_to_poly(pt, &k_monos)).collect();
    Ok((ks, pts.complete))
}

fn normalize(f: &Poly) -> Poly {
    f.primitive()
}

fn sort_key(f: &Poly) -> (u32, String) {
    (f.total_degree().unwrap_or(0), print_poly(f))
}

/// Rational Darboux polynomials of degree `≤ cfg.deg_max`, up to constant
/// multiples, leaving out those divisible by a lower one in the list.
pub fn find_darboux(vf: &VectorField, cfg: &DarbouxConfig) -> DarbouxSearch {
    let mus: Vec<Mono> = Mono::up_to_degree(cfg.deg_max).into_iter().filter(|m| m.degree() > 0).collect();
    let per_mu: Vec<Result<(Vec<Poly>, bool)>> =
        mus.par_iter().map(|&mu| cofactors_for_leading(vf, mu, cfg.groebner_budget)).collect();
    let mut complete = true;
    let mut ks: Vec<Poly> = Vec::new();
    for r in per_mu {
        match r {
            Ok((found, c)) => {
                complete &= c;
                for k in found {
                    if !ks.contains(&k) {
                        ks.push(k);
                    }
                }
            }
            Err(_) => complete = false,
        }
    }
    let mut candidates: Vec<DarbouxPair> = Vec::new();
    for k in ks {
        let (mat, monos) = darboux_matrix(vf, &k, cfg.deg_max);
        for v in kernel(&mat) {
            let f = normalize(&vec_to_poly(&v, &monos));
            if !f.is_constant() {
                candidates.push(DarbouxPair { f, k: k.clone() });
            }
        }
    }
    candidates.sort_by_key(|p| sort_key(&p.f));
    // Products of curves already found carry no new information.
    let mut pairs: Vec<DarbouxPair> = Vec::new();
    for pair in candidates {
        if pairs.iter().any(|p| pair.f.div_exact(&p.f).is_some()) {
            continue;
        }
        assert!(pair.verify(vf), "Darboux pair failed re-verification");
        pairs.push(pair);
    }
    DarbouxSearch { pairs, complete }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstIntegralSearch {
    pub integral: Option<RatFunc>,
    pub complete: bool,
}

/// Polynomial first integrals of degree `≤ deg_max`, excluding constants.
pub fn polynomial_first_integrals(vf: &VectorField, deg_max: u32) -> Vec<Poly> {
    let (mat, monos) = darboux_matrix(vf, &Poly::zero(), deg_max);
    kernel(&mat)
        .into_iter()
        .map(|v| normalize(&vec_to_poly(&v, &monos)))
        .filter(|p| !p.is_constant())
        .collect()
}

/// Integer relations `Σ n_i k_i = 0` among cofactors, canonical kernel basis.
pub fn cofactor_relations(cofactors: &[Poly]) -> Vec<Vec<BigInt>> {
    if cofactors.is_empty() {
        return vec![];
    }
    let mut rows: BTreeMap<Mono, usize> = BTreeMap::new();
    for k in cofactors {
        for (m, _) in k.terms() {
            let n = rows.len();
            rows.entry(*m).or_insert(n);
        }
    }
    let mut mat = QMatrix::zeros(rows.len().max(1), cofactors.len());
    for (j, k) in cofactors.iter().enumerate() {
        for (m, c) in k.terms() {
            mat.set(rows[m], j, c.clone());
        }
    }
    kernel(&mat).into_iter().map(|v| v.into_iter().map(|x| x.to_integer()).collect()).collect()
}

fn darboux_product(pairs: &[DarbouxPair], n: &[BigInt]) -> Option<RatFunc> {
    let mut num = Poly::one();
    let mut den = Poly::one();
    for (p, e) in pairs.iter().zip(n) {
        let e32: u32 = u32::try_from(e.abs()).ok()?;
        if e.is_positive() {
            num = &num * &p.f.pow(e32);
        } else if e.is_negative() {
            den = &den * &p.f.pow(e32);
        }
    }
    RatFunc::new(num, den).ok()
}

pub fn find_rational_first_integral(vf: &VectorField, deg_max: u32) -> FirstIntegralSearch {
    find_rational_first_integral_with(vf, &DarbouxConfig { deg_max, ..DarbouxConfig::default() })
}

pub fn find_rational_first_integral_with(vf: &VectorField, cfg: &DarbouxConfig) -> FirstIntegralSearch {
    if let Some(p) = polynomial_first_integrals(vf, cfg.deg_max).into_iter().next() {
        return FirstIntegralSearch { integral: Some(RatFunc::from(p)), complete: true };
    }
    let search = find_darboux(vf, cfg);
    let integral = first_integral_from_pairs(vf, &search.pairs);
    FirstIntegralSearch { integral, complete: search.complete }
}

/// Combines known Darboux pairs into `Π f_i^{n_i}` with `Σ n_i k_i = 0`.
pub fn first_integral_from_pairs(vf: &VectorField, pairs: &[DarbouxPair]) -> Option<RatFunc> {
    let ks: Vec<Poly> = pairs.iter().map(|p| p.k.clone()).collect();
    for n in cofactor_relations(&ks) {
        if let Some(w) = darboux_product(pairs, &n) {
            if !w.is_constant() && vf.apply(&w).is_zero() {
                return Some(w);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_poly, parse_ratfunc};

    fn vf(a: &str, b: &str) -> VectorField {
        VectorField::parse(a, b).unwrap()
    }

    fn pair(f: &str, k: &str) -> DarbouxPair {
        DarbouxPair { f: parse_poly(f).unwrap(), k: parse_poly(k).unwrap() }
    }

    fn cfg(d: u32) -> DarbouxConfig {
        DarbouxConfig { deg_max: d, ..DarbouxConfig::default() }
    }

    #[test]
    fn exponential_field() {
        let s = find_darboux(&vf("1", "x2"), &cfg(1));
        assert!(s.complete);
        assert_eq!(s.pairs, vec![pair("x2", "1")]);
    }

    #[test]
    fn two_invariant_lines() {
        let s = find_darboux(&vf("1", "x2^2 - 1"), &cfg(1));
        assert!(s.complete);
        assert_eq!(s.pairs, vec![pair("x2 + 1", "x2 - 1"), pair("x2 - 1", "x2 + 1")]);
    }

    #[test]
    fn rotation_has_circle() {
        let s = find_darboux(&vf("x2", "-x1"), &cfg(2));
        assert!(s.pairs.contains(&pair("x1^2 + x2^2", "0")));
        for p in &s.pairs {
            assert!(p.verify(&vf("x2", "-x1")));
        }
    }

    #[test]
    fn first_integrals() {
        let r = find_rational_first_integral(&vf("x2", "-x1"), 2);
        assert_eq!(r.integral, Some(parse_ratfunc("x1^2 + x2^2").unwrap()));
        assert_eq!(find_rational_first_integral(&vf("1", "x2"), 4).integral, None);
        assert_eq!(find_rational_first_integral(&vf("1", "x2^2 - 1"), 2).integral, None);
    }

    #[test]
    fn darboux_ratio_integral() {
        // x1 and x2 are Darboux with cofactors 1 and 2: x2/x1^2 is a first integral.
        let v = vf("x1", "2*x2");
        let r = find_rational_first_integral(&v, 1);
        let w = r.integral.unwrap();
        assert!(v.apply(&w).is_zero());
        assert!(!w.is_constant());
    }
}
