//! Point sets in `F_q^d` and their exact distance statistics.
//!
//! A point set is either an explicit list of distinct points or a Cartesian
//! product of per-coordinate sets. Products stay symbolic: the pair-distance
//! histogram of a product is computed by additive convolution of the
//! per-coordinate squared-difference histograms instead of materializing the
//! grid.
//!
//! The "distance" `||x - y|| = sum (x_i - y_i)^2` is an element of `F_q`,
//! not a metric; all statistics below count ordered pairs/triples and say so
//! explicitly.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ff::PrimeField;
use crate::Result;

/// A point of `F_q^d`, stored as validated residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<u64>,
}

impl Point {
    pub fn new(field: PrimeField, coords: Vec<u64>) -> Result<Self> {
        for &c in &coords {
            field.check(c)?;
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Mixed-radix code of the point, base `q` per coordinate.
    pub fn code(&self, q: u64) -> usize {
        let mut acc = 0usize;
        for &c in self.coords.iter().rev() {
            acc = acc * q as usize + c as usize;
        }
        acc
    }

    pub fn from_code(mut code: usize, q: u64, dim: usize) -> Point {
        let mut coords = vec![0u64; dim];
        for slot in coords.iter_mut() {
            *slot = (code % q as usize) as u64;
            code /= q as usize;
        }
        Point { coords }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `sum x_i^2`, the standard quadratic form.
pub fn norm(field: PrimeField, x: &Point) -> u64 {
    let mut acc = 0u64;
    for &c in x.coords() {
        acc = field.add(acc, field.square(c));
    }
    acc
}

/// `||x - y||` with a dimension check.
pub fn distance(field: PrimeField, x: &Point, y: &Point) -> Result<u64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(distance_unchecked(field, x, y))
}

#[inline]
pub(crate) fn distance_unchecked(field: PrimeField, x: &Point, y: &Point) -> u64 {
    let mut acc = 0u64;
    for (&a, &b) in x.coords().iter().zip(y.coords()) {
        let d = field.sub(a, b);
        acc = field.add(acc, field.square(d));
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Explicit(Vec<Point>),
    Product(Vec<Vec<u64>>),
}

/// An explicit or product point set with its field and dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    field: PrimeField,
    dim: usize,
    kind: Kind,
}

impl PointSet {
    /// Builds an explicit set; duplicates and empty input are rejected.
    pub fn explicit(field: PrimeField, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        let dim = points[0].dim();
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            for &c in p.coords() {
                field.check(c)?;
            }
            if !seen.insert(p.clone()) {
                return Err(Error::DuplicatePoint(p.to_string()));
            }
        }
        Ok(PointSet {
            field,
            dim,
            kind: Kind::Explicit(points),
        })
    }

    /// Builds a product set `A_1 x ... x A_d`; every `A_i` must be a
    /// nonempty set of distinct residues.
    pub fn product(field: PrimeField, sets: Vec<Vec<u64>>) -> Result<Self> {
        if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
            return Err(Error::EmptySet);
        }
        for (i, set) in sets.iter().enumerate() {
            let mut seen = HashSet::with_capacity(set.len());
            for &a in set {
                field.check(a)?;
                if !seen.insert(a) {
                    return Err(Error::DuplicateCoordinate(a, i));
                }
            }
        }
        let dim = sets.len();
        Ok(PointSet {
            field,
            dim,
            kind: Kind::Product(sets),
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, Kind::Product(_))
    }

    /// Per-coordinate sets for a product, `None` for explicit sets.
    pub fn coordinate_sets(&self) -> Option<&[Vec<u64>]> {
        match &self.kind {
            Kind::Product(sets) => Some(sets),
            Kind::Explicit(_) => None,
        }
    }

    pub fn len(&self) -> u64 {
        match &self.kind {
            Kind::Explicit(pts) => pts.len() as u64,
            Kind::Product(sets) => sets.iter().map(|s| s.len() as u64).product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The points as a vector, materializing products in odometer order
    /// (first coordinate fastest).
    pub fn materialize(&self) -> Vec<Point> {
        match &self.kind {
            Kind::Explicit(pts) => pts.clone(),
            Kind::Product(sets) => {
                let total = self.len() as usize;
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; sets.len()];
                loop {
                    out.push(Point {
                        coords: idx.iter().zip(sets).map(|(&i, s)| s[i]).collect(),
                    });
                    let mut pos = 0;
                    loop {
                        if pos == sets.len() {
                            return out;
                        }
                        idx[pos] += 1;
                        if idx[pos] < sets[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        }
    }

    /// For a product, moves the smallest coordinate set into the last
    /// position and reports the original index it came from. Pair-distance
    /// statistics are invariant under coordinate permutation.
    pub fn with_min_set_last(&self) -> Result<(PointSet, usize)> {
        let sets = self
            .coordinate_sets()
            .ok_or_else(|| Error::invalid("operation requires a product set"))?;
        let min_idx = sets
            .iter()
            .enumerate()
            .min_by_key(|(_, s)| s.len())
            .map(|(i, _)| i)
            .expect("nonempty");
        let mut reordered: Vec<Vec<u64>> = sets.to_vec();
        let min_set = reordered.remove(min_idx);
        reordered.push(min_set);
        Ok((PointSet::product(self.field, reordered)?, min_idx))
    }
}

/// Parses either point-set file format, sniffing by the first byte:
/// a JSON object (`{"q": 3, "sets": [[0,1],[0,2]]}`) describes a product,
/// anything else is CSV with a required `# q=<q> d=<d>` header line and one
/// point per row.
pub fn parse_pointset(text: &str) -> Result<PointSet> {
    if text.trim_start().starts_with('{') {
        parse_product_json(text)
    } else {
        parse_csv(text)
    }
}

#[derive(Deserialize)]
struct ProductFile {
    q: u64,
    sets: Vec<Vec<u64>>,
}

fn parse_product_json(text: &str) -> Result<PointSet> {
    let parsed: ProductFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let field = PrimeField::new(parsed.q)?;
    PointSet::product(field, parsed.sets)
}

fn parse_csv(text: &str) -> Result<PointSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(Error::EmptySet)?;
    let header = header.trim();
    let (q, d) = parse_header(header).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("expected header `# q=<q> d=<d>`, got `{header}`"),
    })?;
    let field = PrimeField::new(q)?;
    let mut points = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut coords = Vec::with_capacity(d);
        for tok in line.split(',') {
            let v: u64 = tok.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad integer `{tok}`"),
            })?;
            coords.push(field.check(v)?);
        }
        if coords.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: coords.len(),
            });
        }
        points.push(Point { coords });
    }
    PointSet::explicit(field, points)
}

fn parse_header(header: &str) -> Option<(u64, usize)> {
    let rest = header.strip_prefix('#')?.trim();
    let mut q = None;
    let mut d = None;
    for part in rest.split_whitespace() {
        if let Some(v) = part.strip_prefix("q=") {
            q = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("d=") {
            d = v.parse().ok();
        }
    }
    Some((q?, d?))
}

/// The ordered-pair distance histogram `t -> nu_E(t)`.
///
/// Diagonal pairs `(x, x)` are included, so the total mass is `|E|^2` and
/// `nu(0) >= |E|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceDistribution {
    q: u64,
    counts: Vec<u64>,
}

impl DistanceDistribution {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn count(&self, t: u64) -> u64 {
        self.counts[t as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total mass, `|E|^2`.
    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// `sum_t nu(t)^2`, the ordered-quadruple count `W`.
    pub fn sum_squares(&self) -> u128 {
        self.counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
    }

    /// `sum_{t != 0} nu(t)^2`.
    pub fn sum_squares_nonzero(&self) -> u128 {
        self.counts[1..]
            .iter()
            .map(|&c| (c as u128) * (c as u128))
            .sum()
    }

    /// Number of distinct distances with at least one ordered pair.
    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Exact pair-distance histogram. Products use the convolution path;
/// explicit sets use the direct ordered double loop.
pub fn distance_distribution(set: &PointSet) -> DistanceDistribution {
    match &set.kind {
        Kind::Explicit(pts) => distance_distribution_direct(set.field, pts),
        Kind::Product(sets) => distance_distribution_product(set.field, sets),
    }
}

/// Direct `O(|E|^2)` histogram over ordered pairs, including `(x, x)`.
pub fn distance_distribution_direct(field: PrimeField, points: &[Point]) -> DistanceDistribution {
    let mut counts = vec![0u64; field.q() as usize];
    for x in points {
        for y in points {
            counts[distance_unchecked(field, x, y) as usize] += 1;
        }
    }
    DistanceDistribution {
        q: field.q(),
        counts,
    }
}

/// Histogram of a product set as the d-fold additive convolution over `F_q`
/// of the per-coordinate squared-difference histograms. `O(d q^2 + sum |A_i|^2)`.
pub fn distance_distribution_product(field: PrimeField, sets: &[Vec<u64>]) -> DistanceDistribution {
    let q = field.q() as usize;
    let mut acc = vec![0u64; q];
    acc[0] = 1;
    for set in sets {
        let mut h = vec![0u64; q];
        for &a in set {
            for &b in set {
                let d = field.sub(a, b);
                h[field.square(d) as usize] += 1;
            }
        }
        let mut next = vec![0u64; q];
        for (s, &va) in acc.iter().enumerate() {
            if va == 0 {
                continue;
            }
            for (t, &vb) in h.iter().enumerate() {
                if vb == 0 {
                    continue;
                }
                next[field.add(s as u64, t as u64) as usize] += va * vb;
            }
        }
        acc = next;
    }
    DistanceDistribution {
        q: field.q(),
        counts: acc,
    }
}

/// `W = sum_t nu(t)^2`: ordered quadruples `(a,b,c,d)` with
/// `||a-b|| = ||c-d||`.
pub fn quadruple_count(set: &PointSet) -> u128 {
    distance_distribution(set).sum_squares()
}

/// The variant restricted to nonzero distances.
pub fn quadruple_count_nonzero(set: &PointSet) -> u128 {
    distance_distribution(set).sum_squares_nonzero()
}

/// Hinge counts `H_lambda = #{(p, q1, q2) : ||p-q1|| = ||p-q2|| = lambda}`
/// for every `lambda != 0`, indexed by `lambda - 1`. Triples with
/// `q1 = q2` are included. Computed as `sum_p x_p^2` from per-point circle
/// counts in `O(|E|^2)`.
pub fn hinge_counts(set: &PointSet) -> Vec<u128> {
    let field = set.field();
    let points = set.materialize();
    let q = field.q() as usize;
    let mut totals = vec![0u128; q - 1];
    let mut circle = vec![0u64; q];
    for p in &points {
        circle.fill(0);
        for other in &points {
            circle[distance_unchecked(field, p, other) as usize] += 1;
        }
        for lam in 1..q {
            let x = circle[lam] as u128;
            totals[lam - 1] += x * x;
        }
    }
    totals
}

/// Definition-level hinge count by the ordered triple loop, used as the
/// independent oracle for [`hinge_counts`].
pub fn hinge_counts_direct(field: PrimeField, points: &[Point]) -> Vec<u128> {
    let q = field.q() as usize;
    let mut totals = vec![0u128; q - 1];
    for p in points {
        for q1 in points {
            let d1 = distance_unchecked(field, p, q1);
            if d1 == 0 {
                continue;
            }
            for q2 in points {
                if distance_unchecked(field, p, q2) == d1 {
                    totals[(d1 - 1) as usize] += 1;
                }
            }
        }
    }
    totals
}

/// A line `c x + d y + e = 0` in the plane, with `(c, d) != (0, 0)`,
/// canonicalized so its coefficient vector is a projective representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line {
    coeffs: [u64; 3],
}

impl Line {
    pub fn new(field: PrimeField, coeffs: [u64; 3]) -> Result<Self> {
        if coeffs[0] == 0 && coeffs[1] == 0 {
            return Err(Error::invalid("line coefficients (c, d) must not both be 0"));
        }
        let canon = crate::ff::normalize_projective(field, &coeffs)?;
        let c = canon.coords();
        Ok(Line {
            coeffs: [c[0], c[1], c[2]],
        })
    }

    pub fn coeffs(&self) -> [u64; 3] {
        self.coeffs
    }

    pub fn contains(&self, field: PrimeField, p: &Point) -> bool {
        let [c, d, e] = self.coeffs;
        let v = field.add(
            field.add(field.mul(c, p.coords()[0]), field.mul(d, p.coords()[1])),
            e,
        );
        v == 0
    }
}

/// The bisector of two distinct plane points: the solution set of
/// `||x - q1|| = ||x - q2||`, which is the line `2 (q2 - q1) . x = ||q2|| - ||q1||`.
/// Nondegenerate for odd q.
pub fn bisector_line(field: PrimeField, q1: &Point, q2: &Point) -> Result<Line> {
    if q1.dim() != 2 || q2.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: q1.dim().max(q2.dim()),
        });
    }
    if q1 == q2 {
        return Err(Error::EqualPoints);
    }
    let two = 2 % field.q();
    let c = field.mul(two, field.sub(q2.coords()[0], q1.coords()[0]));
    let d = field.mul(two, field.sub(q2.coords()[1], q1.coords()[1]));
    let e = field.sub(norm(field, q1), norm(field, q2));
    Line::new(field, [c, d, e])
}

/// Count (and sample) of ordered pairs `x != y` at distance zero. Such
/// pairs exist only when -1 is a square, i.e. `q = 1 mod 4` in the plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsotropicReport {
    pub nonzero_pair_count: u64,
    pub q_mod_4: u64,
    pub sample: Vec<(Point, Point)>,
}

pub fn isotropic_report(set: &PointSet) -> IsotropicReport {
    let field = set.field();
    let points = set.materialize();
    let mut count = 0u64;
    let mut sample = Vec::new();
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            if i != j && distance_unchecked(field, x, y) == 0 {
                count += 1;
                if sample.len() < 8 {
                    sample.push((x.clone(), y.clone()));
                }
            }
        }
    }
    IsotropicReport {
        nonzero_pair_count: count,
        q_mod_4: field.q() % 4,
        sample,
    }
}

/// Greedily removes points until no two distinct points are at distance
/// zero: points are scanned in input order and kept when they have no
/// zero-distance pair with an already-kept point. The result is explicit.
pub fn strip_isotropic(set: &PointSet) -> Result<PointSet> {
    let field = set.field();
    let points = set.materialize();
    let mut kept: Vec<Point> = Vec::new();
    for p in points {
        if kept
            .iter()
            .all(|k| distance_unchecked(field, k, &p) != 0)
        {
            kept.push(p);
        }
    }
    PointSet::explicit(field, kept)
}
