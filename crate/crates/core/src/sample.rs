//! Seeded random inputs for self-checks and benchmarks.

use rand::Rng;

use crate::field::VectorField;
use crate::index::MultiIndex;
use crate::poly::{Mono, Poly};
use crate::rat::rat;

/// Dense-ish polynomial of total degree at most `deg`, coefficients in `[-bound, bound]`.
pub fn random_poly(rng: &mut impl Rng, deg: u32, bound: i64) -> Poly {
    let mut p = Poly::zero();
    for m in Mono::up_to_degree(deg) {
        if rng.gen_bool(0.6) {
            p.add_term(m, rat(rng.gen_range(-bound..=bound)));
        }
    }
    p
}

/// Random field with `X1 != 0` and components of degree at most `deg`.
pub fn random_field(rng: &mut impl Rng, deg: u32) -> VectorField {
    loop {
        let x1 = random_poly(rng, deg, 3);
        let x2 = random_poly(rng, deg, 3);
        if let Ok(vf) = VectorField::new(x1, x2) {
            return vf;
        }
    }
}

/// Univariate polynomial in `x1` of degree at most `deg`.
pub fn random_poly_x1(rng: &mut impl Rng, deg: u32, bound: i64) -> Poly {
    Poly::from_terms((0..=deg).map(|e| (Mono::new(e, 0), rat(rng.gen_range(-bound..=bound)))))
}

/// `dx2/dx1 = p x2^2 + q x2 + r` with `p, q, r` in `x1` of degree at most 2 and `p != 0`.
pub fn random_riccati(rng: &mut impl Rng) -> VectorField {
    let mut p = Poly::zero();
    while p.is_zero() {
        p = random_poly_x1(rng, 2, 3);
    }
    let q = random_poly_x1(rng, 2, 3);
    let r = random_poly_x1(rng, 2, 3);
    let x2 = Poly::x2();
    let rhs = &(&(&p * &x2.pow(2)) + &(&q * &x2)) + &r;
    VectorField::new(Poly::one(), rhs).expect("X1 = 1")
}

/// Multi-index of length `1..=max_len` with entries in `0..=max_entry`.
pub fn random_multi_index(rng: &mut impl Rng, max_len: usize, max_entry: u32) -> MultiIndex {
    let len = rng.gen_range(1..=max_len);
    MultiIndex::new((0..len).map(|_| rng.gen_range(0..=max_entry)).collect())
}
