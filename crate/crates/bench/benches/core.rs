use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use holoshear::coords::Space;
use holoshear::fatgraph::closed_paths;
use holoshear::holonomy::holonomy;
use holoshear::moves::{relation_suite_for, Move, Relation};
use holoshear::poisson::goldman_bracket_traces;
use holoshear::{shipped, ConstraintMap, EdgePath, Lambda};

fn holonomies(c: &mut Criterion) {
    let g = shipped::genus2();
    let cm = ConstraintMap::new(&g);
    let paths = closed_paths(&g, 6, None);
    let mut group = c.benchmark_group("holonomy");
    for l in Lambda::ALL {
        let z = cm.sample_gen_shear(1, l).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(l), &z, |b, z| {
            b.iter(|| paths.iter().map(|p| holonomy(&g, p, z).unwrap().trace().re).sum::<f64>())
        });
    }
    group.finish();
}

fn moves(c: &mut Criterion) {
    let g = shipped::genus2();
    let cm = ConstraintMap::new(&g);
    let m = Move::new(&g, 4).unwrap();
    let z = cm.sample_gen_shear(2, Lambda::Plus).unwrap();
    let cv = cm.sample_cotangent(2).unwrap();
    c.bench_function("move/prepare", |b| b.iter(|| Move::new(black_box(&g), 4).unwrap()));
    c.bench_function("move/spacetime", |b| b.iter(|| m.apply_z(black_box(&z)).unwrap()));
    c.bench_function("move/cotangent", |b| b.iter(|| m.apply_cotangent(black_box(&cv), Lambda::Plus).unwrap()));
}

fn relations(c: &mut Criterion) {
    let g = shipped::sphere4();
    c.bench_function("relations/pentagon-10", |b| {
        b.iter(|| relation_suite_for(&g, Space::Spacetime, Lambda::Minus, 10, 7, &[Relation::Pentagon]).unwrap())
    });
}

fn goldman(c: &mut Criterion) {
    let g = shipped::torus();
    let z = ConstraintMap::new(&g).sample_gen_shear(3, Lambda::Zero).unwrap();
    let a = EdgePath::parse(&g, "a,-b").unwrap();
    let b2 = EdgePath::parse(&g, "b,-c").unwrap();
    c.bench_function("goldman/torus", |b| b.iter(|| goldman_bracket_traces(&g, &a, &b2, &z).unwrap()));
}

criterion_group!(benches, holonomies, moves, relations, goldman);
criterion_main!(benches);
