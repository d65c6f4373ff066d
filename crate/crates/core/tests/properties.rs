use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use liouvik_core::error::Error;
use liouvik_core::index::{cmp_degree, weight_c, MultiIndex};
use liouvik_core::jet::{DerivationSystem, JetExpr, JetMode};
use liouvik_core::numeric::flow;
use liouvik_core::sample::{random_field, random_poly};
use liouvik_core::expr::{print_poly, print_ratfunc};
use liouvik_core::{parse_poly, parse_ratfunc, BSequence, Poly, RatFunc, Var, VectorField};

fn poly(seed: u64, deg: u32) -> Poly {
    random_poly(&mut ChaCha8Rng::seed_from_u64(seed), deg, 5)
}

fn ratfunc(seed: u64) -> RatFunc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num = random_poly(&mut rng, 3, 5);
    let mut den = Poly::zero();
    while den.is_zero() {
        den = random_poly(&mut rng, 2, 5);
    }
    RatFunc::new(num, den).unwrap()
}

fn field(seed: u64, deg: u32) -> VectorField {
    random_field(&mut ChaCha8Rng::seed_from_u64(seed), deg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_print_parse_round_trip(seed in any::<u64>()) {
        let p = poly(seed, 4);
        prop_assert_eq!(parse_poly(&print_poly(&p)).unwrap(), p);
    }

    #[test]
    fn ratfunc_print_parse_round_trip(seed in any::<u64>()) {
        let f = ratfunc(seed);
        prop_assert_eq!(parse_ratfunc(&print_ratfunc(&f)).unwrap(), f);
    }

    #[test]
    fn leibniz_rule(a in any::<u64>(), b in any::<u64>()) {
        let (f, g) = (ratfunc(a), ratfunc(b));
        let fg = &f * &g;
        prop_assert_eq!(fg.d1(), &(&f.d1() * &g) + &(&f * &g.d1()));
        prop_assert_eq!(fg.d2(), &(&f.d2() * &g) + &(&f * &g.d2()));
    }

    #[test]
    fn partials_commute(seed in any::<u64>()) {
        let f = ratfunc(seed);
        prop_assert_eq!(f.d1().d2(), f.d2().d1());
    }

    #[test]
    fn multi_index_laws(entries in prop::collection::vec(0u32..6, 1..=6)) {
        let m = MultiIndex::new(entries);
        for (i, j, dm) in m.d_moves().collect::<Vec<_>>() {
            prop_assert_eq!(dm.b(i, j), Some(m.clone()));
            prop_assert!(cmp_degree(&m, &dm).unwrap().is_gt());
            prop_assert_eq!(weight_c(&m) - weight_c(&dm), i as u64);
        }
    }

    #[test]
    fn flow_rejects_bad_arguments(h in -1.0f64..=0.0, t in -1.0f64..=0.0) {
        let vf = VectorField::parse("1", "x2").unwrap();
        prop_assert!(matches!(flow(&vf, (0.0, 1.0), 1.0, h), Err(Error::InvalidArgument(_))));
        prop_assert!(matches!(flow(&vf, (0.0, 1.0), t, 1e-3), Err(Error::InvalidArgument(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn b_sequence_closed_form_matches_recurrence(seed in any::<u64>()) {
        let vf = field(seed, 2);
        prop_assert_eq!(BSequence::compute(&vf, 3), BSequence::by_recurrence(&vf, 3));
    }

    #[test]
    fn b_over_x1_is_invariant_under_common_factors(seed in any::<u64>(), g in any::<u64>()) {
        let vf = field(seed, 2);
        let mut factor = poly(g, 1);
        if factor.is_zero() {
            factor = Poly::one();
        }
        let scaled = vf.scaled(&factor).unwrap();
        let (b, bs) = (vf.b_sequence(2), scaled.b_sequence(2));
        for i in 0..=2 {
            prop_assert_eq!(b.get(i).div_poly(vf.x1()).unwrap(), bs.get(i).div_poly(scaled.x1()).unwrap());
        }
    }

    #[test]
    fn jet_derivations_commute(seed in any::<u64>()) {
        let vf = field(seed, 2);
        let sys = DerivationSystem::new(&vf, JetMode::Reduced);
        let e = JetExpr::y(1).mul(&JetExpr::y(2)).add(&JetExpr::y(3));
        let a = sys.derive(Var::X1, &sys.derive(Var::X2, &e).unwrap()).unwrap();
        let b = sys.derive(Var::X2, &sys.derive(Var::X1, &e).unwrap()).unwrap();
        prop_assert!(a.sub(&b).is_zero());
    }
}
