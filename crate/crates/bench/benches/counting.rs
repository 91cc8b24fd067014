//! Benchmarks for the hot counting paths: the two pair-histogram routes,
//! the tuple census, orthogonal-group enumeration, and the two
//! singular-quadruple routes.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fqgeom::census::simplex_census;
use fqgeom::dds::{singular_quadruples, singular_quadruples_naive};
use fqgeom::motions::enumerate_orthogonal;
use fqgeom::pointset::{
    distance_distribution, distance_distribution_direct, Point, PointSet,
};
use fqgeom::{Caps, PrimeField};

fn grid(q: u64) -> PointSet {
    let field = PrimeField::new(q).unwrap();
    let all: Vec<u64> = (0..q).collect();
    PointSet::product(field, vec![all.clone(), all]).unwrap()
}

fn random_subset(q: u64, size: usize, seed: u64) -> PointSet {
    let field = PrimeField::new(q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codes: Vec<usize> = (0..(q * q) as usize).collect();
    codes.shuffle(&mut rng);
    codes.truncate(size);
    codes.sort_unstable();
    let points = codes
        .into_iter()
        .map(|c| Point::from_code(c, q, 2))
        .collect();
    PointSet::explicit(field, points).unwrap()
}

fn bench_pair_histogram(c: &mut Criterion) {
    let product = grid(13);
    let field = product.field();
    let points = product.materialize();
    let mut group = c.benchmark_group("pair_histogram_q13_grid");
    group.bench_function("direct_double_loop", |b| {
        b.iter(|| distance_distribution_direct(field, black_box(&points)))
    });
    group.bench_function("product_convolution", |b| {
        b.iter(|| distance_distribution(black_box(&product)))
    });
    group.finish();
}

fn bench_census(c: &mut Criterion) {
    let caps = Caps::default();
    let set = grid(5);
    c.bench_function("census_q5_grid_k2", |b| {
        b.iter(|| simplex_census(black_box(&set), 2, &caps).unwrap())
    });
}

fn bench_orthogonal(c: &mut Criterion) {
    let caps = Caps::default();
    let field = PrimeField::new(13).unwrap();
    c.bench_function("orthogonal_group_q13_n3", |b| {
        b.iter(|| enumerate_orthogonal(black_box(field), 3, &caps).unwrap())
    });
}

fn bench_singular_quadruples(c: &mut Criterion) {
    let caps = Caps::default();
    let set = random_subset(11, 40, 7);
    let points = set.materialize();
    let field = set.field();
    let mut group = c.benchmark_group("singular_quadruples_40pts");
    group.bench_function("pruned", |b| {
        b.iter(|| singular_quadruples(black_box(&set), &caps).unwrap())
    });
    group.bench_function("naive", |b| {
        b.iter(|| singular_quadruples_naive(field, black_box(&points)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_pair_histogram,
    bench_census,
    bench_orthogonal,
    bench_singular_quadruples
);
criterion_main!(benches);
