//! Distinct-distance subset extraction: the 4-uniform hypergraph of
//! singular quadruples, the independence-number floor, a seeded
//! sample-and-delete construction, and the direct verifier.
//!
//! A 4-subset of distinct points is singular when its six pairwise
//! distances are not pairwise distinct. A distinct distance subset excludes
//! only collisions between two pairs of four *distinct* points, so
//! independence in the hypergraph implies the verified predicate while
//! repeats sharing a common point stay allowed.

use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::caps::Caps;
use crate::census::{big, rational_str};
use crate::error::Error;
use crate::ff::PrimeField;
use crate::pointset::{distance_unchecked, Point, PointSet};
use crate::Result;

/// A 4-uniform hypergraph on point indices; every edge is a sorted
/// 4-element subset and the edge list is sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph4 {
    pub n: u32,
    pub edges: Vec<[u32; 4]>,
}

impl Hypergraph4 {
    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    /// True when no edge lies entirely inside the given vertex set.
    pub fn is_independent(&self, vertices: &[u32]) -> bool {
        let inside: HashSet<u32> = vertices.iter().copied().collect();
        !self
            .edges
            .iter()
            .any(|e| e.iter().all(|v| inside.contains(v)))
    }
}

/// Singular 4-subsets by the pruned pass: distances bucket the pairs, equal
/// disjoint pairs are joined directly, and every hinge triple is extended by
/// each fourth point. Equivalent to the naive quadruple loop.
pub fn singular_quadruples(set: &PointSet, caps: &Caps) -> Result<Hypergraph4> {
    let n = set.len() as usize;
    Caps::check(
        "singular quadruple point count",
        n as u128,
        caps.singular_point_cap as u128,
    )?;
    let field = set.field();
    let points = set.materialize();
    let q = field.q() as usize;

    // unordered pairs bucketed by distance
    let mut buckets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); q];
    for i in 0..n {
        for j in i + 1..n {
            let t = distance_unchecked(field, &points[i], &points[j]);
            buckets[t as usize].push((i as u32, j as u32));
        }
    }

    let mut edges: HashSet<[u32; 4]> = HashSet::new();

    // disjoint collisions within a bucket
    for bucket in &buckets {
        for (a, &(i1, j1)) in bucket.iter().enumerate() {
            for &(i2, j2) in &bucket[a + 1..] {
                if i1 != i2 && i1 != j2 && j1 != i2 && j1 != j2 {
                    let mut e = [i1, j1, i2, j2];
                    e.sort_unstable();
                    edges.insert(e);
                }
            }
        }
    }

    // hinge triples (shared apex) extended by every fourth point
    let mut circle: Vec<Vec<u32>> = vec![Vec::new(); q];
    for p in 0..n {
        for row in circle.iter_mut() {
            row.clear();
        }
        for o in 0..n {
            if o != p {
                let t = distance_unchecked(field, &points[p], &points[o]);
                circle[t as usize].push(o as u32);
            }
        }
        for row in &circle {
            if row.len() < 2 {
                continue;
            }
            for (a, &x) in row.iter().enumerate() {
                for &y in &row[a + 1..] {
                    let mut triple = [p as u32, x, y];
                    triple.sort_unstable();
                    for s in 0..n as u32 {
                        if s != triple[0] && s != triple[1] && s != triple[2] {
                            let mut e = [triple[0], triple[1], triple[2], s];
                            e.sort_unstable();
                            edges.insert(e);
                        }
                    }
                }
            }
        }
    }

    let mut edges: Vec<[u32; 4]> = edges.into_iter().collect();
    edges.sort_unstable();
    Ok(Hypergraph4 {
        n: n as u32,
        edges,
    })
}

/// Definition-level oracle: every 4-subset, six distances, distinctness by
/// direct comparison.
pub fn singular_quadruples_naive(field: PrimeField, points: &[Point]) -> Hypergraph4 {
    let n = points.len();
    let edges: Vec<[u32; 4]> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let idx = [i, j, k, l];
                        let mut ds = [0u64; 6];
                        let mut e = 0;
                        for a in 0..4 {
                            for b in a + 1..4 {
                                ds[e] =
                                    distance_unchecked(field, &points[idx[a]], &points[idx[b]]);
                                e += 1;
                            }
                        }
                        ds.sort_unstable();
                        if ds.windows(2).any(|w| w[0] == w[1]) {
                            local.push([i as u32, j as u32, k as u32, l as u32]);
                        }
                    }
                }
            }
            local
        })
        .collect();
    let mut edges = edges;
    edges.sort_unstable();
    Hypergraph4 {
        n: n as u32,
        edges,
    }
}

/// Partition of the edge set for the diagnostic decomposition: edges with a
/// zero distance, zero-free edges containing an equal-distance pair sharing
/// a point, and edges singular only through disjoint pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeBuckets {
    pub zero: u64,
    pub hinge: u64,
    pub disjoint_only: u64,
}

pub fn classify_edges(field: PrimeField, points: &[Point], h: &Hypergraph4) -> EdgeBuckets {
    let mut buckets = EdgeBuckets {
        zero: 0,
        hinge: 0,
        disjoint_only: 0,
    };
    for e in &h.edges {
        let mut ds = [[0u64; 4]; 4];
        let mut any_zero = false;
        for a in 0..4 {
            for b in a + 1..4 {
                let d = distance_unchecked(field, &points[e[a] as usize], &points[e[b] as usize]);
                ds[a][b] = d;
                ds[b][a] = d;
                any_zero |= d == 0;
            }
        }
        if any_zero {
            buckets.zero += 1;
            continue;
        }
        let mut has_hinge = false;
        #[allow(clippy::needless_range_loop)] // apex indexes a fixed 4x4 table
        'apex: for apex in 0..4 {
            for a in 0..4 {
                if a == apex {
                    continue;
                }
                for b in a + 1..4 {
                    if b != apex && ds[apex][a] == ds[apex][b] {
                        has_hinge = true;
                        break 'apex;
                    }
                }
            }
        }
        if has_hinge {
            buckets.hinge += 1;
        } else {
            buckets.disjoint_only += 1;
        }
    }
    buckets
}

/// The independence floor `(1 - 1/k) floor((n^k / (k m))^(1/(k-1)))`,
/// exact: the inner root is the largest integer `r` with
/// `r^(k-1) k m <= n^k`. Valid only under the hypothesis `m >= n/k`; below
/// it the flag is cleared and no bound is fabricated. `m = 0` is flagged
/// separately (the whole vertex set is independent).
#[derive(Debug, Clone, Serialize)]
pub struct SpencerBound {
    pub n: u64,
    pub k: u32,
    pub m: u64,
    pub hypothesis_ok: bool,
    pub edgeless: bool,
    pub root_floor: u64,
    /// `(1 - 1/k) root_floor` as an exact rational string.
    pub value: String,
    /// The usable set-size guarantee, `ceil(value)`; 0 when the hypothesis
    /// fails.
    pub guarantee: u64,
}

pub fn spencer_floor(n: u64, k: u32, m: u64) -> Result<SpencerBound> {
    if k < 2 {
        return Err(Error::invalid("hypergraph uniformity k must be >= 2"));
    }
    if m == 0 {
        return Ok(SpencerBound {
            n,
            k,
            m,
            hypothesis_ok: false,
            edgeless: true,
            root_floor: n,
            value: n.to_string(),
            guarantee: n,
        });
    }
    // hypothesis m >= n/k as integers: k m >= n
    let hypothesis_ok = (k as u64).saturating_mul(m) >= n;
    if !hypothesis_ok {
        return Ok(SpencerBound {
            n,
            k,
            m,
            hypothesis_ok,
            edgeless: false,
            root_floor: 0,
            value: "0".into(),
            guarantee: 0,
        });
    }
    // largest r with r^(k-1) * k * m <= n^k
    let nk = big(n as u128).pow(k);
    let km = big((k as u128) * (m as u128));
    let mut lo = 0u64;
    let mut hi = n.max(1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if big(mid as u128).pow(k - 1) * &km <= nk {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let root_floor = lo;
    let value = BigRational::new(
        big(((k - 1) as u128) * (root_floor as u128)),
        big(k as u128),
    );
    let guarantee = value.ceil().to_integer().try_into().unwrap_or(0);
    Ok(SpencerBound {
        n,
        k,
        m,
        hypothesis_ok,
        edgeless: false,
        root_floor,
        value: rational_str(&value),
        guarantee,
    })
}

/// Seeded sample-and-delete: keep each vertex with probability
/// `(n/(km))^(1/(k-1))` (clamped to 1), then delete the largest-index
/// vertex of every surviving edge. Retries until the guarantee is met, up
/// to 64 rounds; failure reports the best size seen instead of returning an
/// undersized set as success.
pub fn independent_set(h: &Hypergraph4, seed: u64) -> Result<Vec<u32>> {
    let n = h.n as u64;
    let m = h.edge_count();
    let bound = spencer_floor(n, 4, m)?;
    let target = if bound.edgeless || bound.hypothesis_ok {
        bound.guarantee
    } else {
        0
    };
    if m == 0 {
        return Ok((0..h.n).collect());
    }
    let p = ((n as f64) / (4.0 * m as f64)).cbrt().min(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<u32> = Vec::new();
    for _ in 0..64 {
        let kept: Vec<bool> = (0..h.n).map(|_| rng.random_bool(p)).collect();
        let mut deleted: HashSet<u32> = HashSet::new();
        for e in &h.edges {
            if e.iter().all(|&v| kept[v as usize]) {
                deleted.insert(*e.iter().max().unwrap());
            }
        }
        let result: Vec<u32> = (0..h.n)
            .filter(|&v| kept[v as usize] && !deleted.contains(&v))
            .collect();
        debug_assert!(h.is_independent(&result));
        if result.len() > best.len() {
            best = result;
        }
        if best.len() as u64 >= target {
            return Ok(best);
        }
    }
    Err(Error::RoundLimitExceeded {
        rounds: 64,
        best: best.len() as u64,
        required: target,
    })
}

/// The verified predicate: no four distinct points x, y, z, t with
/// `||x - y|| = ||z - t||`. Collisions among pairs sharing a point are
/// allowed. On failure the witness quadruple comes back.
pub fn verify_distinct_distance(
    field: PrimeField,
    points: &[Point],
) -> (bool, Option<[Point; 4]>) {
    let mut by_dist: HashMap<u64, Vec<(usize, usize)>> = HashMap::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let t = distance_unchecked(field, &points[i], &points[j]);
            by_dist.entry(t).or_default().push((i, j));
        }
    }
    for pairs in by_dist.values() {
        for (a, &(i1, j1)) in pairs.iter().enumerate() {
            for &(i2, j2) in &pairs[a + 1..] {
                if i1 != i2 && i1 != j2 && j1 != i2 && j1 != j2 {
                    return (
                        false,
                        Some([
                            points[i1].clone(),
                            points[j1].clone(),
                            points[i2].clone(),
                            points[j2].clone(),
                        ]),
                    );
                }
            }
        }
    }
    (true, None)
}

/// Smallest set size that forces a repeated distance by pair counting:
/// the least M with `M(M-1)/2 > q`.
pub fn pigeonhole_threshold(q: u64) -> u64 {
    let mut m = 1u64;
    while m * (m - 1) / 2 <= q {
        m += 1;
    }
    m
}

/// Full extraction outcome: the hypergraph statistics, the independence
/// floor, the subset, and both verification routes (edge scan and the
/// direct predicate), which must agree.
#[derive(Debug, Clone, Serialize)]
pub struct DdsResult {
    pub n: u64,
    pub seed: u64,
    pub edge_count: u64,
    pub buckets: EdgeBuckets,
    pub spencer: SpencerBound,
    pub subset: Vec<Point>,
    pub subset_indices: Vec<u32>,
    pub verified: bool,
    pub witness: Option<[Point; 4]>,
    pub independent_by_scan: bool,
    /// `|E(H)| q / |E|^4`, the observed constant of the edge-count bound.
    pub edge_constant_float: f64,
    /// Least M with M(M-1)/2 > q; context for the subset-size ceiling,
    /// reported rather than enforced.
    pub pigeonhole_threshold: u64,
}

pub fn dds_extract(set: &PointSet, seed: u64, caps: &Caps) -> Result<DdsResult> {
    if set.dim() != 2 {
        return Err(Error::invalid("distinct-distance extraction covers d = 2"));
    }
    let field = set.field();
    let points = set.materialize();
    let h = singular_quadruples(set, caps)?;
    let buckets = classify_edges(field, &points, &h);
    let spencer = spencer_floor(set.len(), 4, h.edge_count())?;
    let subset_indices = independent_set(&h, seed)?;
    let subset: Vec<Point> = subset_indices
        .iter()
        .map(|&i| points[i as usize].clone())
        .collect();
    let independent_by_scan = h.is_independent(&subset_indices);
    let (verified, witness) = verify_distinct_distance(field, &subset);
    let n = set.len();
    let q = field.q();
    let edge_constant_float = (h.edge_count() as f64) * (q as f64) / ((n as f64).powi(4)).max(1.0);
    Ok(DdsResult {
        n,
        seed,
        edge_count: h.edge_count(),
        buckets,
        spencer,
        subset,
        subset_indices,
        verified,
        witness,
        independent_by_scan,
        edge_constant_float,
        pigeonhole_threshold: pigeonhole_threshold(q),
    })
}
