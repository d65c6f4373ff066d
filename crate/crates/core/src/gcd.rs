//! Bivariate gcd. The main path is a dense modular algorithm: evaluate x2
//! at points modulo word-size primes, take univariate gcds, interpolate,
//! recombine by CRT and confirm by trial division. A primitive
//! pseudo-remainder sequence over ℚ[x2][x1] backs it up.

use num_traits::{One, Zero};

use crate::poly::{Mono, Poly};
use crate::rat::Rat;

/// Dense univariate polynomial in x2, low degree first, no trailing zeros.
pub(crate) type UPoly = Vec<Rat>;

/// Dense in x1 with `UPoly` coefficients.
type BPoly = Vec<UPoly>;

fn trim(p: &mut UPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn btrim(p: &mut BPoly) {
    while p.last().is_some_and(|c| c.is_empty()) {
        p.pop();
    }
}

pub(crate) fn umul(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn usub(a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out: UPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rat::zero);
            match b.get(i) {
                Some(y) => x - y,
                None => x,
            }
        })
        .collect();
    trim(&mut out);
    out
}

/// Division with remainder over ℚ.
pub(crate) fn udivrem(a: &UPoly, b: &UPoly) -> (UPoly, UPoly) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = a.clone();
    let db = b.len() - 1;
    let inv = b[db].recip();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] * &inv;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &c * bc;
        }
        q[k] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn umonic(mut p: UPoly) -> UPoly {
    if let Some(lc) = p.last().cloned() {
        let inv = lc.recip();
        for c in p.iter_mut() {
            *c *= &inv;
        }
    }
    p
}

/// Monic gcd over ℚ; `ugcd(0,0) = 0`.
pub(crate) fn ugcd(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = udivrem(&a, &b);
        a = b;
        b = r;
    }
    umonic(a)
}

fn to_biv(p: &Poly) -> BPoly {
    let d = p.degree_in(crate::poly::Var::X1).unwrap_or(0) as usize;
    let mut out: BPoly = vec![Vec::new(); d + 1];
    for (m, c) in p.terms() {
        let row = &mut out[m.e1 as usize];
        let j = m.e2 as usize;
        if row.len() <= j {
            row.resize(j + 1, Rat::zero());
        }
        row[j] = c.clone();
    }
    btrim(&mut out);
    out
}

fn from_biv(b: &BPoly) -> Poly {
    Poly::from_terms(b.iter().enumerate().flat_map(|(i, row)| {
        row.iter()
            .enumerate()
            .map(move |(j, c)| (Mono::new(i as u32, j as u32), c.clone()))
    }))
}

fn bcontent(b: &BPoly) -> UPoly {
    if b.iter().any(|c| c.len() == 1) {
        return vec![Rat::one()];
    }
    let mut g: UPoly = Vec::new();
    for c in b {
        g = ugcd(&g, c);
        if g.len() == 1 {
            break;
        }
    }
    g
}

fn bdiv_content(b: &BPoly, c: &UPoly) -> BPoly {
    b.iter()
        .map(|x| {
            let (q, r) = udivrem(x, c);
            debug_assert!(r.is_empty());
            q
        })
        .collect()
}

fn bprimitive(b: &BPoly) -> BPoly {
    let c = bcontent(b);
    if c.is_empty() {
        return Vec::new();
    }
    bdiv_content(b, &c)
}

/// Pseudo-remainder of `a` by `b` in x1; `b` nonzero.
fn prem(a: &BPoly, b: &BPoly) -> BPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lb = &b[db];
    while !r.is_empty() && r.len() > db {
        let shift = r.len() - 1 - db;
        let la = r[r.len() - 1].clone();
        for c in r.iter_mut() {
            *c = umul(c, lb);
        }
        for (i, bc) in b.iter().enumerate() {
            let t = umul(&la, bc);
            r[shift + i] = usub(&r[shift + i], &t);
        }
        debug_assert!(r.last().unwrap().is_empty());
        btrim(&mut r);
        // keep coefficient size in check
        let c = bcontent(&r);
        if !c.is_empty() && c.len() > 1 {
            r = bdiv_content(&r, &c);
        }
    }
    r
}

fn gcd_prs(p: &Poly, q: &Poly) -> Poly {
    if p.is_zero() {
        return q.primitive();
    }
    if q.is_zero() {
        return p.primitive();
    }
    if p.is_constant() || q.is_constant() {
        return Poly::one();
    }
    let bp = to_biv(p);
    let bq = to_biv(q);
    let cont = ugcd(&bcontent(&bp), &bcontent(&bq));
    let (mut a, mut b) = (bprimitive(&bp), bprimitive(&bq));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        if b.len() == 1 {
            // b is a nonzero element of ℚ[x2] and primitive, hence a unit
            a = vec![vec![Rat::one()]];
            break;
        }
        let r = prem(&a, &b);
        a = b;
        b = if r.is_empty() { r } else { bprimitive(&r) };
    }
    let g: BPoly = a.iter().map(|c| umul(c, &cont)).collect();
    from_biv(&g).primitive()
}

pub(crate) fn gcd(p: &Poly, q: &Poly) -> Poly {
    if p.is_zero() {
        return q.primitive();
    }
    if q.is_zero() {
        return p.primitive();
    }
    if p.is_constant() || q.is_constant() {
        return Poly::one();
    }
    modular::gcd(p, q).unwrap_or_else(|| gcd_prs(p, q))
}

mod modular {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive, Zero};

    use super::{bcontent, bdiv_content, from_biv, to_biv, ugcd, BPoly, UPoly};
    use crate::poly::Poly;
    use crate::rat::Rat;

    const MAX_PRIMES: usize = 400;

    type ZPoly = Vec<Vec<BigInt>>;

    fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    /// Deterministic Miller-Rabin for `n < 2^32`.
    fn is_prime(n: u64) -> bool {
        if n < 2 || n.is_multiple_of(2) {
            return n == 2;
        }
        let (mut d, mut s) = (n - 1, 0);
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        [2u64, 7, 61].iter().all(|&a| {
            if a % n == 0 {
                return true;
            }
            let mut x = pow_mod(a, d, n);
            if x == 1 || x == n - 1 {
                return true;
            }
            (1..s).any(|_| {
                x = x * x % n;
                x == n - 1
            })
        })
    }

    fn primes() -> &'static [u64] {
        static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
        PRIMES.get_or_init(|| (1..(1u64 << 31)).rev().filter(|&n| n % 2 == 1 && is_prime(n)).take(MAX_PRIMES).collect())
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    fn monic(mut v: Vec<u64>, p: u64) -> Vec<u64> {
        if let Some(&lc) = v.last() {
            let i = inv(lc, p);
            v.iter_mut().for_each(|c| *c = *c * i % p);
        }
        v
    }

    fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let li = inv(b[db], p);
        while r.len() > db {
            let k = r.len() - 1 - db;
            let c = r[r.len() - 1] * li % p;
            for (i, bc) in b.iter().enumerate() {
                r[k + i] = (r[k + i] + p - c * bc % p) % p;
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    fn ugcd_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(a, p)
    }

    fn horner(coeffs: &[u64], x: u64, p: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, c| (acc * x + c) % p)
    }

    fn reduce(z: &ZPoly, p: u64) -> Vec<Vec<u64>> {
        let pb = BigInt::from(p);
        z.iter().map(|row| row.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect()).collect()
    }

    /// Newton interpolation through `(xs[k], ys[k])`, low degree first.
    fn interpolate(xs: &[u64], ys: &[u64], p: u64) -> Vec<u64> {
        let n = xs.len();
        let mut c = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = (c[i] + p - c[i - 1]) % p;
                let den = (xs[i] + p - xs[i - j]) % p;
                c[i] = num * inv(den, p) % p;
            }
        }
        let mut out = vec![0u64; n];
        for k in (0..n).rev() {
            // out = out * (x - xs[k]) + c[k]
            let mut next = vec![0u64; n];
            for (i, &o) in out.iter().enumerate() {
                if i + 1 < n {
                    next[i + 1] = (next[i + 1] + o) % p;
                }
                next[i] = (next[i] + p - o * xs[k] % p) % p;
            }
            next[0] = (next[0] + c[k]) % p;
            out = next;
        }
        trim(&mut out);
        out
    }

    fn to_z(b: &BPoly) -> ZPoly {
        b.iter().map(|row| row.iter().map(|c| c.to_integer()).collect()).collect()
    }

    /// Scales to integer coefficients with gcd 1.
    fn integral(b: &BPoly) -> BPoly {
        let (_, pp) = from_biv(b).content_primitive();
        to_biv(&pp)
    }

    fn canonical(rows: &ZPoly, m: &BigInt) -> ZPoly {
        rows.iter()
            .map(|r| {
                let mut v: Vec<BigInt> = r.iter().map(|c| symmetric(c, m)).collect();
                while v.last().is_some_and(|c| c.is_zero()) {
                    v.pop();
                }
                v
            })
            .collect()
    }

    fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
        let r = x.mod_floor(m);
        if &r * 2 > *m {
            r - m
        } else {
            r
        }
    }

    /// Image of `γ · gcd / lc(gcd)` modulo `p`, or `None` for an unlucky prime.
    fn image(a: &[Vec<u64>], b: &[Vec<u64>], gamma: &[u64], bound: usize, p: u64) -> Option<(usize, Vec<Vec<u64>>)> {
        let (la, lb) = (a.last()?, b.last()?);
        if la.iter().all(|&c| c == 0) || lb.iter().all(|&c| c == 0) {
            return None;
        }
        let mut xs = Vec::new();
        let mut imgs: Vec<Vec<u64>> = Vec::new();
        let mut deg = usize::MAX;
        let mut c = 0u64;
        while xs.len() <= bound {
            c += 1;
            if c >= p {
                return None;
            }
            let g = horner(gamma, c, p);
            if g == 0 || horner(la, c, p) == 0 || horner(lb, c, p) == 0 {
                continue;
            }
            let ea: Vec<u64> = a.iter().map(|row| horner(row, c, p)).collect();
            let eb: Vec<u64> = b.iter().map(|row| horner(row, c, p)).collect();
            let h = ugcd_p(&ea, &eb, p);
            let d = h.len() - 1;
            if d == 0 {
                return Some((0, vec![vec![1]]));
            }
            if d > deg {
                continue;
            }
            if d < deg {
                deg = d;
                xs.clear();
                imgs.clear();
            }
            xs.push(c);
            imgs.push(h.iter().map(|v| v * g % p).collect());
        }
        let rows = (0..=deg)
            .map(|i| {
                let ys: Vec<u64> = imgs.iter().map(|h| h[i]).collect();
                interpolate(&xs, &ys, p)
            })
            .collect();
        Some((deg, rows))
    }

    /// Proves that an integer bivariate polynomial has content 1 in ℚ[x2] by
    /// finding two rows coprime modulo a prime not dividing the first's
    /// leading coefficient. `false` means "not shown", not "nontrivial".
    fn content_is_one(b: &BPoly) -> bool {
        if b.iter().any(|r| r.len() == 1) {
            return true;
        }
        let p = primes()[0];
        let pb = BigInt::from(p);
        let rows: Vec<Vec<u64>> = b
            .iter()
            .map(|r| r.iter().map(|c| c.to_integer().mod_floor(&pb).to_u64().unwrap()).collect())
            .collect();
        let Some(first) = rows.iter().position(|r| r.last().is_some_and(|&c| c != 0)) else { return false };
        rows.iter().enumerate().any(|(i, r)| i != first && !r.is_empty() && ugcd_p(&rows[first], r, p).len() == 1)
    }

    fn content(b: &BPoly) -> UPoly {
        if content_is_one(b) {
            vec![Rat::one()]
        } else {
            bcontent(b)
        }
    }

    pub(super) fn gcd(p: &Poly, q: &Poly) -> Option<Poly> {
        let (bp, bq) = (to_biv(&p.primitive()), to_biv(&q.primitive()));
        let (cp, cq) = (content(&bp), content(&bq));
        let cont = ugcd(&cp, &cq);
        let strip = |b: BPoly, c: &UPoly| if c.len() == 1 { b } else { integral(&bdiv_content(&b, c)) };
        let (a, b) = (strip(bp, &cp), strip(bq, &cq));
        let finish = |g: &BPoly| -> Poly {
            let g: BPoly = g.iter().map(|c| super::umul(c, &cont)).collect();
            from_biv(&g).primitive()
        };
        if a.len() == 1 || b.len() == 1 {
            return Some(finish(&vec![vec![Rat::one()]]));
        }
        let gamma_q: UPoly = ugcd(a.last().unwrap(), b.last().unwrap());
        // gcd over ℤ[x2]: the integer contents of the leading coefficients count too
        let int_content = |u: &UPoly| crate::rat::rational_content(u.iter()).to_integer();
        let scale = Rat::from_integer(int_content(a.last().unwrap()).gcd(&int_content(b.last().unwrap())));
        let gamma: UPoly = integral(&vec![gamma_q]).pop().unwrap().iter().map(|c| c * &scale).collect();
        let deg2 = |m: &BPoly| m.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0);
        let bound = gamma.len() - 1 + deg2(&a).min(deg2(&b));
        let (za, zb, zg) = (to_z(&a), to_z(&b), to_z(&vec![gamma]).pop().unwrap());
        let (pa, pb) = (from_biv(&a), from_biv(&b));

        let mut acc: Option<(usize, ZPoly, BigInt)> = None;
        for &prime in primes() {
            let pbig = BigInt::from(prime);
            let gp: Vec<u64> = zg.iter().map(|c| c.mod_floor(&pbig).to_u64().unwrap()).collect();
            let Some((deg, img)) = image(&reduce(&za, prime), &reduce(&zb, prime), &gp, bound, prime) else {
                continue;
            };
            if deg == 0 {
                return Some(finish(&vec![vec![Rat::one()]]));
            }
            let img: ZPoly = img.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect();
            let combined = match acc.take() {
                Some(prev) if prev.0 < deg => {
                    acc = Some(prev);
                    continue;
                }
                Some((d, prev, m)) if d == deg => {
                    let inv_m = m.modpow(&(&pbig - 2u32), &pbig);
                    let width = prev.iter().map(Vec::len).chain(img.iter().map(Vec::len)).max().unwrap_or(0);
                    let rows = (0..=deg)
                        .map(|i| {
                            (0..width)
                                .map(|j| {
                                    let x = prev.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_default();
                                    let y = img.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_default();
                                    let t = ((y - &x) * &inv_m).mod_floor(&pbig);
                                    x + &m * t
                                })
                                .collect()
                        })
                        .collect();
                    let m2 = &m * &pbig;
                    let unchanged = canonical(&rows, &m2) == canonical(&prev, &m);
                    (unchanged, rows, m2)
                }
                _ => (false, img, pbig.clone()),
            };
            let (unchanged, rows, m) = combined;
            if unchanged {
                let cand: BPoly = rows
                    .iter()
                    .map(|r| {
                        let mut u: UPoly = r.iter().map(|c| Rat::from_integer(symmetric(c, &m))).collect();
                        while u.last().is_some_and(|c| c.is_zero()) {
                            u.pop();
                        }
                        u
                    })
                    .collect();
                let c = bcontent(&cand);
                if !c.is_empty() {
                    let g = from_biv(&bdiv_content(&cand, &c));
                    if pa.div_exact(&g).is_some() && pb.div_exact(&g).is_some() {
                        return Some(finish(&to_biv(&g)));
                    }
                }
            }
            let rows = rows.into_iter().map(|r| r.iter().map(|c| c.mod_floor(&m)).collect()).collect();
            acc = Some((deg, rows, m));
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sample::random_poly;

    #[test]
    fn modular_agrees_with_prs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let g = random_poly(&mut rng, 2, 5);
            let a = &g * &random_poly(&mut rng, 3, 9);
            let b = &g.pow(2) * &random_poly(&mut rng, 2, 9);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let m = gcd(&a, &b);
            assert_eq!(m, gcd_prs(&a, &b));
            assert!(a.div_exact(&m).is_some() && b.div_exact(&m).is_some());
        }
    }
}
