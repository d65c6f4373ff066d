//! Quick end-to-end regressions and seeded property samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::certify;
use crate::expr::{parse_poly, parse_ratfunc};
use crate::field::VectorField;
use crate::index::{cmp_degree, weight_c};
use crate::jet::{a_coeffs, check_compat_a4, check_identity_lemma_a1, predicted_x_of_yj, reduce_x_of_yj};
use crate::numeric::{check_constancy, flow};
use crate::poly::Poly;
use crate::rat::rat;
use crate::sample::{random_field, random_multi_index, random_riccati};
use crate::witness::{assemble_level3_cleared, classify, verify_witness, ClearedEquation, SearchBounds};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
}

fn field(a: &str, b: &str) -> VectorField {
    VectorField::parse(a, b).expect("fixed field")
}

fn vdp_cleared() -> bool {
    let vf = field("x2 - x1^3/3 + x1", "-x1");
    let x1 = vf.x1().clone();
    let expected = ClearedEquation {
        x_coeff: x1.pow(3),
        a_coeff: &parse_poly("2*x1").unwrap() * &x1.pow(2),
        constant: parse_poly("6*x1").unwrap(),
    };
    assemble_level3_cleared(&vf).same_equation(&expected)
}

const LADDER: [(&str, &str, u8, &str); 4] = [
    ("1", "x2", 1, "1/x2"),
    ("1", "x2^2 - 1", 1, "1/(x2^2 - 1)"),
    ("1", "x1*x2 + 1", 2, "0"),
    ("x2", "-x1", 0, "x1^2 + x2^2"),
];

fn ladder() -> bool {
    LADDER.iter().all(|(a, b, level, wit)| {
        let vf = field(a, b);
        let Ok(c) = classify(&vf, &SearchBounds::default()) else { return false };
        let Some(w) = c.witness else { return false };
        w.level == *level && w.a == parse_ratfunc(wit).unwrap() && verify_witness(&vf, &w)
    })
}

fn riccati(rng: &mut ChaCha8Rng) -> bool {
    let fixed = field("1", "x2^2 + x1");
    let level3 = classify(&fixed, &SearchBounds::default()).is_ok_and(|c| c.level_found == Some(3));
    level3 && (0..5).all(|_| random_riccati(rng).b_sequence(2).get(2).is_zero())
}

fn jets(rng: &mut ChaCha8Rng) -> bool {
    let rows = (1..=6).all(|j| a_coeffs(j)[0] == j as u64);
    rows && (0..10).all(|_| {
        let vf = random_field(rng, 3);
        let b = vf.b_sequence(5);
        check_identity_lemma_a1(&vf) && (1..=5).all(|j| reduce_x_of_yj(&vf, j).sub(&predicted_x_of_yj(&b, j)).is_zero())
    })
}

fn compat(rng: &mut ChaCha8Rng) -> bool {
    (0..3).all(|_| check_compat_a4(&random_field(rng, 3)))
}

fn multi_index(rng: &mut ChaCha8Rng) -> bool {
    (0..300).all(|_| {
        let m = random_multi_index(rng, 6, 4);
        let ok = m.d_moves().all(|(i, j, dm)| {
            dm.b(i, j).as_ref() == Some(&m)
                && cmp_degree(&m, &dm).is_ok_and(|o| o.is_gt())
                && weight_c(&m) - weight_c(&dm) == i as u64
        });
        ok
    })
}

fn certificates() -> bool {
    LADDER.iter().all(|(a, b, _, _)| {
        let vf = field(a, b);
        let Some(w) = classify(&vf, &SearchBounds::default()).ok().and_then(|c| c.witness) else { return false };
        let Ok(t) = certify(&vf, &w, None) else { return false };
        let Ok(traj) = flow(&vf, (0.2, 0.3), 1.0, 1e-3) else { return false };
        t.verified && check_constancy(&vf, &t, &traj, 1e-6).is_ok_and(|r| r.pass)
    })
}

fn invariance(rng: &mut ChaCha8Rng) -> bool {
    LADDER.iter().all(|(a, b, level, _)| {
        let vf = field(a, b);
        let c = Poly::constant(rat(rng.gen_range(2..=9)));
        let g = &c * &Poly::from_terms([(crate::poly::Mono::new(1, 0), rat(1)), (crate::poly::Mono::ONE, rat(3))]);
        [c, g].iter().all(|factor| {
            let scaled = vf.scaled(factor).unwrap();
            classify(&scaled, &SearchBounds::default())
                .is_ok_and(|cl| cl.level_found == Some(*level) && cl.witness.is_some_and(|w| verify_witness(&scaled, &w)))
        })
    })
}

/// Runs every check with a fixed seed.
pub fn run_selftest(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        Check { name: "van der Pol cleared equation", pass: vdp_cleared() },
        Check { name: "solvable ladder", pass: ladder() },
        Check { name: "Riccati level 3", pass: riccati(&mut rng) },
        Check { name: "jet identities", pass: jets(&mut rng) },
        Check { name: "Riccati compatibility", pass: compat(&mut rng) },
        Check { name: "multi-index laws", pass: multi_index(&mut rng) },
        Check { name: "certificates and numerics", pass: certificates() },
        Check { name: "scaling invariance", pass: invariance(&mut rng) },
    ]
}
