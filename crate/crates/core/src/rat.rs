//! Exact rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational constant. Always stored reduced with positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Large numerators/denominators do not fit f64 directly.
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Prints `p` or `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn lcm_denoms<'a>(it: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, r| if r.denom().is_one() { acc } else { acc.lcm(r.denom()) })
}

pub(crate) fn gcd_numers<'a>(it: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    let mut g = BigInt::zero();
    for r in it {
        g = g.gcd(r.numer());
        if g.is_one() {
            break;
        }
    }
    g
}

/// Content of a list of rationals: gcd of numerators over lcm of denominators, positive.
pub(crate) fn rational_content<'a>(it: impl IntoIterator<Item = &'a Rat> + Clone) -> Rat {
    let g = gcd_numers(it.clone());
    if g.is_zero() {
        return Rat::zero();
    }
    Rat::new(g.abs(), lcm_denoms(it))
}
