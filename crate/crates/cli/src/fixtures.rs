//! Seeded random fixtures for trial-based checks: plane subsets of a given
//! size and Cartesian products with random factor sets. Identical seeds
//! give identical fixtures.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fqgeom::pointset::{Point, PointSet};
use fqgeom::PrimeField;

/// A uniformly random `size`-subset of the plane over `F_q` (size clamped
/// to the `q^2` points available).
pub fn random_plane_subset(field: PrimeField, size: u64, rng: &mut ChaCha8Rng) -> PointSet {
    let q = field.q();
    let size = size.min(q * q) as usize;
    let mut codes: Vec<usize> = (0..(q * q) as usize).collect();
    codes.shuffle(rng);
    codes.truncate(size);
    codes.sort_unstable();
    let points = codes
        .into_iter()
        .map(|c| Point::from_code(c, q, 2))
        .collect();
    PointSet::explicit(field, points).expect("distinct in-range points")
}

/// A random plane product with factor sizes drawn from `lo..=hi`.
pub fn random_plane_product(
    field: PrimeField,
    lo: usize,
    hi: usize,
    rng: &mut ChaCha8Rng,
) -> PointSet {
    let q = field.q();
    let factor = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        let size = rng.random_range(lo..=hi.min(q as usize));
        let mut all: Vec<u64> = (0..q).collect();
        all.shuffle(rng);
        all.truncate(size);
        all.sort_unstable();
        all
    };
    let a = factor(rng);
    let b = factor(rng);
    PointSet::product(field, vec![a, b]).expect("valid factors")
}

/// Convenience seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The full plane as a product set.
pub fn full_grid(field: PrimeField) -> PointSet {
    let all: Vec<u64> = (0..field.q()).collect();
    PointSet::product(field, vec![all.clone(), all]).expect("grid")
}
