use criterion::{black_box, criterion_group, criterion_main, Criterion};

use liouvik_core::{classify, find_darboux, parse_poly, DarbouxConfig, SearchBounds, VectorField};

fn field(a: &str, b: &str) -> VectorField {
    VectorField::parse(a, b).unwrap()
}

fn gcd(c: &mut Criterion) {
    let g = parse_poly("x1^2*x2 - 3*x2^3 + 2*x1 - 7").unwrap();
    let p = &g * &parse_poly("5*x1^3 + x2^2*x1 - 4").unwrap();
    let q = &g * &parse_poly("x2^3 - 2*x1*x2 + 9").unwrap();
    c.bench_function("gcd_bivariate", |b| b.iter(|| black_box(&p).gcd(black_box(&q))));
}

fn b_sequence(c: &mut Criterion) {
    let vf = field("x1^2 + 2*x2 - 1", "x1*x2^2 - 3*x2 + x1^3");
    c.bench_function("b_sequence_4", |b| b.iter(|| black_box(&vf).b_sequence(4)));
}

fn darboux(c: &mut Criterion) {
    let vf = field("1", "x2^2 - 1");
    let cfg = DarbouxConfig::default();
    c.bench_function("darboux_riccati_lines", |b| b.iter(|| find_darboux(black_box(&vf), &cfg)));
}

fn classify_ladder(c: &mut Criterion) {
    let fields = [field("1", "x2"), field("1", "x1*x2 + 1"), field("x2", "-x1"), field("1", "x2^2 + x1")];
    let bounds = SearchBounds::default();
    c.bench_function("classify_ladder", |b| {
        b.iter(|| fields.iter().map(|vf| classify(vf, &bounds).unwrap().level_found).collect::<Vec<_>>())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = gcd, b_sequence, darboux, classify_ladder
}
criterion_main!(benches);
