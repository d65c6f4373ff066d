//! Sparse multivariate polynomials over ℚ, Buchberger's algorithm with a
//! step budget, and rational points of zero-dimensional systems.
//!
//! Variable 0 is the largest variable in every supported order.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::{lcm_denoms, Rat};

pub type Exps = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Lex,
    GrevLex,
    /// Variables `0..split` form a grevlex block that dominates the grevlex
    /// block `split..`; an elimination order for the first block.
    Block(usize),
}

fn grevlex_key(e: &[u32], out: &mut Vec<i64>) {
    out.push(e.iter().map(|&x| x as i64).sum());
    out.extend(e.iter().rev().map(|&x| -(x as i64)));
}

impl Order {
    fn key(self, e: &[u32]) -> Vec<i64> {
        let mut k = Vec::with_capacity(e.len() + 2);
        match self {
            Order::Lex => k.extend(e.iter().map(|&x| x as i64)),
            Order::GrevLex => grevlex_key(e, &mut k),
            Order::Block(s) => {
                grevlex_key(&e[..s], &mut k);
                grevlex_key(&e[s..], &mut k);
            }
        }
        k
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Mon {
    key: Vec<i64>,
    exps: Exps,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    order: Order,
    terms: BTreeMap<Mon, Rat>,
}

fn exps_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn exps_lcm(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn exps_sub(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn exps_add(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn exps_coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly::zero_in(nvars, Order::Lex)
    }

    pub fn zero_in(nvars: usize, order: Order) -> Self {
        MPoly { nvars, order, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = MPoly::zero(nvars);
        p.add_term(e, Rat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Same polynomial with terms sorted by another order.
    pub fn with_order(&self, order: Order) -> MPoly {
        let mut p = MPoly::zero_in(self.nvars, order);
        for (e, c) in self.terms() {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn add_term(&mut self, e: Exps, c: Rat) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let m = Mon { key: self.order.key(&e), exps: e };
        let slot = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.exps.iter().all(|&x| x == 0))
    }

    /// Terms in ascending order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Rat)> {
        self.terms.iter().map(|(m, c)| (&m.exps, c))
    }

    pub fn leading(&self) -> Option<(&Exps, &Rat)> {
        self.terms.iter().next_back().map(|(m, c)| (&m.exps, c))
    }

    fn lm(&self) -> &Exps {
        &self.terms.keys().next_back().expect("nonzero").exps
    }

    /// Variables that occur with positive exponent.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &x) in m.exps.iter().enumerate() {
                if x > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    fn merge(&mut self, o: &MPoly, sign: &Rat, shift: Option<&[u32]>) {
        for (m, c) in &o.terms {
            let coef = c * sign;
            let mon = match shift {
                None if o.order == self.order => m.clone(),
                None => Mon { key: self.order.key(&m.exps), exps: m.exps.clone() },
                Some(s) => {
                    let e = exps_add(&m.exps, s);
                    Mon { key: self.order.key(&e), exps: e }
                }
            };
            match self.terms.get_mut(&mon) {
                Some(slot) => {
                    *slot += coef;
                    if slot.is_zero() {
                        self.terms.remove(&mon);
                    }
                }
                None => {
                    self.terms.insert(mon, coef);
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        out.merge(o, &Rat::one(), None);
        out
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        out.merge(o, &-Rat::one(), None);
        out
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        let mut out = MPoly::zero_in(self.nvars, self.order);
        for (ea, ca) in self.terms() {
            for (eb, cb) in o.terms() {
                out.add_term(exps_add(ea, eb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero_in(self.nvars, self.order);
        }
        MPoly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    fn monic(&self) -> MPoly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Substitutes `x_i = v`.
    pub fn substitute(&self, i: usize, v: &Rat) -> MPoly {
        let mut out = MPoly::zero_in(self.nvars, self.order);
        for (e, c) in self.terms() {
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] = 0;
            out.add_term(e2, c * pow_rat(v, k));
        }
        out
    }

    /// Coefficients in `x_i` (index = degree) if no other variable occurs.
    pub fn as_univariate(&self, i: usize) -> Option<Vec<Rat>> {
        let mut out: Vec<Rat> = Vec::new();
        for (e, c) in self.terms() {
            if e.iter().enumerate().any(|(j, &x)| j != i && x > 0) {
                return None;
            }
            let k = e[i] as usize;
            if out.len() <= k {
                out.resize(k + 1, Rat::zero());
            }
            out[k] = c.clone();
        }
        Some(out)
    }
}

fn pow_rat(v: &Rat, k: u32) -> Rat {
    let mut r = Rat::one();
    for _ in 0..k {
        r *= v;
    }
    r
}

/// Full reduction of `f` by `g` (monic, same order as `f`).
fn reduce(f: &MPoly, g: &[MPoly]) -> MPoly {
    let mut p = f.clone();
    let mut r = MPoly::zero_in(f.nvars, f.order);
    while let Some((mon, lc)) = p.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
        match g.iter().find(|h| exps_divides(h.lm(), &mon.exps)) {
            Some(h) => {
                let s = exps_sub(&mon.exps, h.lm());
                p.merge(h, &-lc, Some(&s));
            }
            None => {
                p.terms.remove(&mon);
                r.terms.insert(mon, lc);
            }
        }
    }
    r
}

fn s_poly(a: &MPoly, b: &MPoly) -> MPoly {
    let l = exps_lcm(a.lm(), b.lm());
    let mut out = MPoly::zero_in(a.nvars, a.order);
    out.merge(a, &Rat::one(), Some(&exps_sub(&l, a.lm())));
    out.merge(b, &-Rat::one(), Some(&exps_sub(&l, b.lm())));
    out
}

/// Reduced Gröbner basis with respect to `order`, sorted by leading
/// monomial. `budget` bounds the number of S-polynomial reductions;
/// exceeding it gives [`Error::BudgetExceeded`].
pub fn groebner_in(input: &[MPoly], order: Order, budget: usize) -> Result<Vec<MPoly>> {
    let nvars = input.first().map_or(0, |p| p.nvars);
    let mut g: Vec<MPoly> = Vec::new();
    for f in input {
        let r = reduce(&f.with_order(order), &g);
        if !r.is_zero() {
            g.push(r.monic());
        }
    }
    if g.iter().any(|p| p.is_constant()) {
        return Ok(vec![MPoly::constant(nvars, Rat::one()).with_order(order)]);
    }
    // Pairs keyed by (sugar-like degree of the lcm, i, j).
    let mut pairs: BTreeSet<(u32, usize, usize)> = BTreeSet::new();
    let lcm_deg = |g: &[MPoly], i: usize, j: usize| -> u32 { exps_lcm(g[i].lm(), g[j].lm()).iter().sum() };
    for j in 0..g.len() {
        for i in 0..j {
            pairs.insert((lcm_deg(&g, i, j), i, j));
        }
    }
    let mut steps = 0usize;
    while let Some(&(d, i, j)) = pairs.iter().next() {
        pairs.remove(&(d, i, j));
        if exps_coprime(g[i].lm(), g[j].lm()) {
            continue;
        }
        let l = exps_lcm(g[i].lm(), g[j].lm());
        let pending = |a: usize, b: usize| {
            let (a, b) = (a.min(b), a.max(b));
            pairs.contains(&(lcm_deg(&g, a, b), a, b))
        };
        let chain =
            (0..g.len()).any(|k| k != i && k != j && exps_divides(g[k].lm(), &l) && !pending(i, k) && !pending(j, k));
        if chain {
            continue;
        }
        steps += 1;
        if steps > budget {
            return Err(Error::BudgetExceeded);
        }
        let r = reduce(&s_poly(&g[i], &g[j]), &g);
        if r.is_zero() {
            continue;
        }
        let r = r.monic();
        if r.is_constant() {
            return Ok(vec![r]);
        }
        let n = g.len();
        g.push(r);
        for i in 0..n {
            pairs.insert((lcm_deg(&g, i, n), i, n));
        }
    }
    Ok(interreduce(g))
}

/// Reduced lex Gröbner basis.
pub fn groebner(input: &[MPoly], budget: usize) -> Result<Vec<MPoly>> {
    groebner_in(input, Order::Lex, budget)
}

fn interreduce(g: Vec<MPoly>) -> Vec<MPoly> {
    let mut min: Vec<MPoly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let redundant = g
            .iter()
            .enumerate()
            .any(|(m, q)| m != k && exps_divides(q.lm(), p.lm()) && (q.lm() != p.lm() || m < k));
        if !redundant {
            min.push(p.clone());
        }
    }
    let mut out: Vec<MPoly> = Vec::with_capacity(min.len());
    for k in 0..min.len() {
        let others: Vec<MPoly> = min.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, q)| q.clone()).collect();
        out.push(reduce(&min[k], &others).monic());
    }
    out.sort_by(|a, b| a.terms.keys().next_back().cmp(&b.terms.keys().next_back()));
    out
}

const TRIAL_LIMIT: u64 = 2_000_000;

/// Positive divisors, or `None` if `n` could not be fully factored by trial division.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mut n = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        if &pb * &pb > n {
            break;
        }
        let mut e = 0;
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        if e > 0 {
            factors.push((pb, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        let bound = BigInt::from(TRIAL_LIMIT) * BigInt::from(TRIAL_LIMIT);
        if n > bound {
            return None;
        }
        factors.push((n, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::new();
        for d in &divs {
            let mut q = d.clone();
            for _ in 0..=e {
                next.push(q.clone());
                q *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    Some(divs)
}

/// Distinct rational roots of a univariate polynomial (coefficients by
/// ascending degree), sorted. Fails with [`Error::BudgetExceeded`] when the
/// extreme coefficients are too large to factor by trial division.
pub fn rational_roots(coeffs: &[Rat]) -> Result<Vec<Rat>> {
    let l = lcm_denoms(coeffs);
    let mut ints: Vec<BigInt> = coeffs.iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect();
    while ints.last().is_some_and(|c| c.is_zero()) {
        ints.pop();
    }
    if ints.is_empty() {
        return Err(Error::InvalidArgument("zero polynomial has every root".into()));
    }
    let mut roots = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap();
    if low > 0 {
        roots.push(Rat::zero());
        ints.drain(..low);
    }
    if ints.len() > 1 {
        let ps = divisors(&ints[0]).ok_or(Error::BudgetExceeded)?;
        let qs = divisors(ints.last().unwrap()).ok_or(Error::BudgetExceeded)?;
        let mut seen = BTreeSet::new();
        for q in &qs {
            for p in &ps {
                if !p.gcd(q).is_one() {
                    continue;
                }
                for s in [1, -1] {
                    let r = Rat::new(p * BigInt::from(s), q.clone());
                    if !seen.contains(&r) && eval_int_poly(&ints, &r).is_zero() {
                        seen.insert(r.clone());
                        roots.push(r);
                    }
                }
            }
        }
    }
    roots.sort();
    Ok(roots)
}

fn eval_int_poly(c: &[BigInt], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for a in c.iter().rev() {
        acc = acc * x + Rat::from_integer(a.clone());
    }
    acc
}

/// Rational points of a system whose variables are `vars` (all other
/// variables must be absent).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalPoints {
    /// Each point lists values in the order of `vars`.
    pub points: Vec<Vec<Rat>>,
    /// False when a positive-dimensional component or an exhausted budget
    /// may hide further points.
    pub complete: bool,
}

pub fn rational_points(polys: &[MPoly], vars: &[usize], budget: usize) -> Result<RationalPoints> {
    let nonzero: Vec<MPoly> = polys.iter().filter(|p| !p.is_zero()).cloned().collect();
    if vars.is_empty() {
        let ok = nonzero.is_empty();
        return Ok(RationalPoints { points: if ok { vec![vec![]] } else { vec![] }, complete: true });
    }
    if nonzero.is_empty() {
        return Ok(RationalPoints { points: vec![], complete: false });
    }
    let g = groebner(&nonzero, budget)?;
    if g.iter().any(|p| p.is_constant()) {
        return Ok(RationalPoints { points: vec![], complete: true });
    }
    let v = *vars.last().unwrap();
    let rest = &vars[..vars.len() - 1];
    let uni = g.iter().find_map(|p| p.as_univariate(v));
    let Some(uni) = uni else {
        return Ok(RationalPoints { points: vec![], complete: false });
    };
    let mut out = RationalPoints { points: vec![], complete: true };
    for r in rational_roots(&uni)? {
        let sub: Vec<MPoly> = g.iter().map(|p| p.substitute(v, &r)).collect();
        let inner = rational_points(&sub, rest, budget)?;
        out.complete &= inner.complete;
        for mut pt in inner.points {
            pt.push(r.clone());
            out.points.push(pt);
        }
    }
    Ok(out)
}

/// Rounds a rational to `i64` when integral.
pub fn as_small_int(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}
