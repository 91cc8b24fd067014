//! Orthogonal matrices over `F_q`, plane reflections, rigid-motion sweeps,
//! and pointwise stabilizers of point tuples.
//!
//! A rigid motion is a pair `(theta, z)` acting as `x -> theta(x) + z` with
//! `theta^T theta = I`. The orthogonal group is enumerated by backtracking
//! over orthonormal column tuples, which keeps dimension 3 feasible up to
//! q = 13; dimension 4 sits behind an explicit cap flag.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::caps::Caps;
use crate::error::Error;
use crate::ff::PrimeField;
use crate::pointset::{Point, PointSet};
use crate::Result;

/// A `d x d` matrix over `F_q` with `theta^T theta = I`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrthMatrix {
    dim: usize,
    entries: Vec<u64>,
}

fn dot(field: PrimeField, u: &[u64], v: &[u64]) -> u64 {
    let mut acc = 0;
    for (&a, &b) in u.iter().zip(v) {
        acc = field.add(acc, field.mul(a, b));
    }
    acc
}

impl OrthMatrix {
    /// Validates orthogonality at construction.
    pub fn new(field: PrimeField, dim: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for &e in &entries {
            field.check(e)?;
        }
        let m = OrthMatrix { dim, entries };
        if !m.is_orthogonal(field) {
            return Err(Error::invalid("matrix is not orthogonal"));
        }
        Ok(m)
    }

    fn from_columns(dim: usize, cols: &[Vec<u64>]) -> Self {
        let mut entries = vec![0u64; dim * dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                entries[r * dim + c] = v;
            }
        }
        OrthMatrix { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0u64; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        OrthMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.dim + c]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    fn column(&self, c: usize) -> Vec<u64> {
        (0..self.dim).map(|r| self.entry(r, c)).collect()
    }

    pub fn is_orthogonal(&self, field: PrimeField) -> bool {
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = dot(field, &self.column(i), &self.column(j));
                let expected = if i == j { 1 } else { 0 };
                if d != expected {
                    return false;
                }
            }
        }
        true
    }

    pub fn apply(&self, field: PrimeField, x: &Point) -> Point {
        debug_assert_eq!(x.dim(), self.dim);
        let coords: Vec<u64> = (0..self.dim)
            .map(|r| {
                let mut acc = 0;
                for (c, &xc) in x.coords().iter().enumerate() {
                    acc = field.add(acc, field.mul(self.entry(r, c), xc));
                }
                acc
            })
            .collect();
        Point::new(field, coords).expect("residues stay reduced")
    }

    pub fn mul(&self, field: PrimeField, rhs: &OrthMatrix) -> OrthMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let dim = self.dim;
        let mut entries = vec![0u64; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = 0;
                for k in 0..dim {
                    acc = field.add(acc, field.mul(self.entry(r, k), rhs.entry(k, c)));
                }
                entries[r * dim + c] = acc;
            }
        }
        OrthMatrix { dim, entries }
    }

    pub fn transpose(&self) -> OrthMatrix {
        let dim = self.dim;
        let mut entries = vec![0u64; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[c * dim + r] = self.entry(r, c);
            }
        }
        OrthMatrix { dim, entries }
    }

    /// Determinant, implemented for the swept dimensions (<= 4 via Laplace).
    pub fn det(&self, field: PrimeField) -> u64 {
        fn minor(entries: &[u64], dim: usize, skip_row: usize, skip_col: usize) -> Vec<u64> {
            let mut out = Vec::with_capacity((dim - 1) * (dim - 1));
            for r in 0..dim {
                if r == skip_row {
                    continue;
                }
                for c in 0..dim {
                    if c == skip_col {
                        continue;
                    }
                    out.push(entries[r * dim + c]);
                }
            }
            out
        }
        fn det_rec(field: PrimeField, entries: &[u64], dim: usize) -> u64 {
            match dim {
                1 => entries[0],
                2 => field.sub(
                    field.mul(entries[0], entries[3]),
                    field.mul(entries[1], entries[2]),
                ),
                _ => {
                    let mut acc = 0;
                    for c in 0..dim {
                        let sub = det_rec(field, &minor(entries, dim, 0, c), dim - 1);
                        let term = field.mul(entries[c], sub);
                        acc = if c % 2 == 0 {
                            field.add(acc, term)
                        } else {
                            field.sub(acc, term)
                        };
                    }
                    acc
                }
            }
        }
        det_rec(field, &self.entries, self.dim)
    }
}

/// A rigid motion `x -> theta(x) + z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Motion {
    pub theta: OrthMatrix,
    pub shift: Point,
}

impl Motion {
    pub fn apply(&self, field: PrimeField, x: &Point) -> Point {
        let rotated = self.theta.apply(field, x);
        let coords: Vec<u64> = rotated
            .coords()
            .iter()
            .zip(self.shift.coords())
            .map(|(&a, &b)| field.add(a, b))
            .collect();
        Point::new(field, coords).expect("residues stay reduced")
    }
}

/// All solutions of `a^2 + b^2 = 1`, in scan order. The count is `q + 1`
/// when `q = 3 mod 4` and `q - 1` when `q = 1 mod 4`; this is asserted.
pub fn unit_circle(field: PrimeField) -> Vec<(u64, u64)> {
    let q = field.q();
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            if field.add(field.square(a), field.square(b)) == 1 {
                out.push((a, b));
            }
        }
    }
    let expected = if q % 4 == 3 { q + 1 } else { q - 1 };
    assert_eq!(out.len() as u64, expected, "unit circle size for q={q}");
    out
}

/// Enumerates all of `O(n, F_q)` by backtracking over orthonormal columns:
/// each column must have norm 1 and be orthogonal to the previous ones.
/// Deterministic (lexicographic by column vectors).
pub fn enumerate_orthogonal(field: PrimeField, n: usize, caps: &Caps) -> Result<Vec<OrthMatrix>> {
    if n == 0 {
        return Err(Error::invalid("orthogonal enumeration needs n >= 1"));
    }
    if n > 4 || (n == 4 && !caps.allow_orthogonal_dim4) {
        return Err(Error::CapExceeded {
            what: "orthogonal group dimension",
            required: n as u128,
            cap: if caps.allow_orthogonal_dim4 { 4 } else { 3 },
        });
    }
    if n == 3 {
        Caps::check("orthogonal enumeration q at n=3", field.q() as u128, caps.orthogonal_q_dim3 as u128)?;
    }
    let q = field.q();
    // all vectors of norm 1, in odometer order
    let mut norm_one: Vec<Vec<u64>> = Vec::new();
    let total = (q as u128).pow(n as u32);
    let mut v = vec![0u64; n];
    for _ in 0..total {
        if dot(field, &v, &v) == 1 {
            norm_one.push(v.clone());
        }
        for slot in v.iter_mut() {
            *slot += 1;
            if *slot < q {
                break;
            }
            *slot = 0;
        }
    }

    let mut out = Vec::new();
    let mut chosen: Vec<Vec<u64>> = Vec::with_capacity(n);
    fn rec(
        field: PrimeField,
        n: usize,
        norm_one: &[Vec<u64>],
        chosen: &mut Vec<Vec<u64>>,
        out: &mut Vec<OrthMatrix>,
    ) {
        if chosen.len() == n {
            out.push(OrthMatrix::from_columns(n, chosen));
            return;
        }
        for cand in norm_one {
            if chosen.iter().all(|c| dot(field, c, cand) == 0) {
                chosen.push(cand.clone());
                rec(field, n, norm_one, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(field, n, &norm_one, &mut chosen, &mut out);
    Ok(out)
}

/// A point reflection in the plane: `R_u(x) = R (x - u) + u` where
/// `R = [[a, b], [b, -a]]` and `a^2 + b^2 = 1`; `R` is an involution of
/// determinant -1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reflection2D {
    pub a: u64,
    pub b: u64,
    pub center: Point,
}

impl Reflection2D {
    pub fn new(field: PrimeField, a: u64, b: u64, center: Point) -> Result<Self> {
        field.check(a)?;
        field.check(b)?;
        if field.add(field.square(a), field.square(b)) != 1 {
            return Err(Error::invalid("reflection needs a^2 + b^2 = 1"));
        }
        if center.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: center.dim(),
            });
        }
        Ok(Reflection2D { a, b, center })
    }

    pub fn matrix(&self, field: PrimeField) -> OrthMatrix {
        OrthMatrix::new(
            field,
            2,
            vec![self.a, self.b, self.b, field.neg(self.a)],
        )
        .expect("a^2 + b^2 = 1 makes the matrix orthogonal")
    }

    pub fn apply(&self, field: PrimeField, x: &Point) -> Point {
        let dx = field.sub(x.coords()[0], self.center.coords()[0]);
        let dy = field.sub(x.coords()[1], self.center.coords()[1]);
        let rx = field.add(field.mul(self.a, dx), field.mul(self.b, dy));
        let ry = field.sub(field.mul(self.b, dx), field.mul(self.a, dy));
        Point::new(
            field,
            vec![
                field.add(rx, self.center.coords()[0]),
                field.add(ry, self.center.coords()[1]),
            ],
        )
        .expect("residues stay reduced")
    }
}

/// All distinct plane reflections, q per unit-circle matrix: two centers
/// give the same map exactly when their difference lies on the mirror, so
/// maps are deduplicated by the translation part `(I - R) u`. The count is
/// `q (q + 1)` or `q (q - 1)` by the q mod 4 branch.
pub fn enumerate_reflections(field: PrimeField) -> Vec<Reflection2D> {
    let q = field.q();
    let mut out = Vec::new();
    for (a, b) in unit_circle(field) {
        let mut seen = std::collections::HashSet::with_capacity(q as usize);
        for ux in 0..q {
            for uy in 0..q {
                // (I - R) u with R = [[a, b], [b, -a]]
                let tx = field.sub(field.mul(field.sub(1, a), ux), field.mul(b, uy));
                let ty = field.sub(field.mul(field.add(1, a), uy), field.mul(b, ux));
                if seen.insert((tx, ty)) {
                    out.push(Reflection2D {
                        a,
                        b,
                        center: Point::new(field, vec![ux, uy]).unwrap(),
                    });
                }
            }
        }
        debug_assert_eq!(seen.len() as u64, q);
    }
    out
}

/// `|w_theta(z)| = #{(u, v) in E^2 : theta(u) + z = v}`, by hash lookup.
pub fn w_count(field: PrimeField, points: &[Point], index: &HashMap<Point, usize>, m: &Motion) -> u64 {
    points
        .iter()
        .filter(|u| index.contains_key(&m.apply(field, u)))
        .count() as u64
}

/// Full sweep of `|w_theta(z)|` over every motion: one profile per theta,
/// indexed by the mixed-radix code of z. The sweep order (theta outer, z by
/// code) is fixed so parallel accumulation stays deterministic.
#[derive(Debug, Clone)]
pub struct MotionSweep {
    pub field: PrimeField,
    pub dim: usize,
    pub thetas: Vec<OrthMatrix>,
    pub profiles: Vec<Vec<u64>>,
    pub set_size: u64,
}

impl MotionSweep {
    pub fn new(set: &PointSet, caps: &Caps) -> Result<Self> {
        let field = set.field();
        let dim = set.dim();
        let q = field.q();
        match dim {
            2 => Caps::check("motion sweep q at d=2", q as u128, caps.sweep_q_dim2 as u128)?,
            3 => Caps::check("motion sweep q at d=3", q as u128, caps.sweep_q_dim3 as u128)?,
            _ => {
                return Err(Error::invalid(format!(
                    "motion sweeps cover d in {{2, 3}}, got d={dim}"
                )))
            }
        }
        let thetas = enumerate_orthogonal(field, dim, caps)?;
        let points = set.materialize();
        let z_space = (q as usize).pow(dim as u32);
        let profiles: Vec<Vec<u64>> = thetas
            .par_iter()
            .map(|theta| {
                let mut profile = vec![0u64; z_space];
                for u in &points {
                    let tu = theta.apply(field, u);
                    for v in &points {
                        let z: Vec<u64> = v
                            .coords()
                            .iter()
                            .zip(tu.coords())
                            .map(|(&a, &b)| field.sub(a, b))
                            .collect();
                        let code = Point::new(field, z).unwrap().code(q);
                        profile[code] += 1;
                    }
                }
                profile
            })
            .collect();
        Ok(MotionSweep {
            field,
            dim,
            thetas,
            profiles,
            set_size: set.len(),
        })
    }

    /// Total number of motions swept, `|O(d)| * q^d`.
    pub fn motion_count(&self) -> u128 {
        let z_space = (self.field.q() as u128).pow(self.dim as u32);
        self.thetas.len() as u128 * z_space
    }

    /// `sum over all motions of |w|^p`, exact.
    pub fn sum_power(&self, p: u32) -> u128 {
        self.profiles
            .iter()
            .flat_map(|prof| prof.iter())
            .map(|&w| (w as u128).pow(p))
            .sum()
    }

    /// `max |w|` over all motions, the `||f||_inf` input to the power-sum
    /// bound.
    pub fn max_w(&self) -> u64 {
        self.profiles
            .iter()
            .flat_map(|prof| prof.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Per-theta `||f||_1`; each entry must equal `|E|^2`.
    pub fn l1_per_theta(&self) -> Vec<u128> {
        self.profiles
            .iter()
            .map(|prof| prof.iter().map(|&w| w as u128).sum())
            .collect()
    }
}

/// The two exact motion-sum statistics used by the counting chain:
/// `s1 = sum |w|^2` and `s_top = sum |w|^(k+1)`, plus `max |w|`.
#[derive(Debug, Clone, Serialize)]
pub struct MotionStats {
    pub s1: u128,
    pub s_top: u128,
    pub max_w: u64,
    pub motions: u128,
}

pub fn motion_statistics(set: &PointSet, k: u32, caps: &Caps) -> Result<MotionStats> {
    let sweep = MotionSweep::new(set, caps)?;
    Ok(MotionStats {
        s1: sweep.sum_power(2),
        s_top: sweep.sum_power(k + 1),
        max_w: sweep.max_w(),
        motions: sweep.motion_count(),
    })
}

/// `#{(theta, z) : theta(x_i) + z = x_i for all i}` by full sweep over the
/// orthogonal group (z is forced by theta and the first vertex).
pub fn stabilizer_size(field: PrimeField, tuple: &[Point], caps: &Caps) -> Result<u64> {
    if tuple.is_empty() {
        return Err(Error::EmptySet);
    }
    let dim = tuple[0].dim();
    let q = field.q();
    match dim {
        2 => Caps::check("stabilizer sweep q at d=2", q as u128, caps.sweep_q_dim2 as u128)?,
        3 => Caps::check("stabilizer sweep q at d=3", q as u128, caps.sweep_q_dim3 as u128)?,
        _ => {
            return Err(Error::invalid(format!(
                "stabilizer sweeps cover d in {{2, 3}}, got d={dim}"
            )))
        }
    }
    let thetas = enumerate_orthogonal(field, dim, caps)?;
    Ok(stabilizer_size_with(field, tuple, &thetas))
}

/// Stabilizer count against a pre-enumerated orthogonal group.
pub fn stabilizer_size_with(field: PrimeField, tuple: &[Point], thetas: &[OrthMatrix]) -> u64 {
    let x0 = &tuple[0];
    thetas
        .iter()
        .filter(|theta| {
            let image = theta.apply(field, x0);
            let shift: Vec<u64> = x0
                .coords()
                .iter()
                .zip(image.coords())
                .map(|(&a, &b)| field.sub(a, b))
                .collect();
            let motion = Motion {
                theta: (*theta).clone(),
                shift: Point::new(field, shift).unwrap(),
            };
            tuple.iter().all(|x| motion.apply(field, x) == *x)
        })
        .count() as u64
}

/// Rank of the span of `x_i - x_0` (Gaussian elimination mod q): the
/// effective simplex dimension used by the stabilizer bound, where repeated
/// points reduce a tuple to a lower-rank one.
pub fn affine_rank(field: PrimeField, tuple: &[Point]) -> usize {
    if tuple.len() <= 1 {
        return 0;
    }
    let dim = tuple[0].dim();
    let mut rows: Vec<Vec<u64>> = tuple[1..]
        .iter()
        .map(|x| {
            x.coords()
                .iter()
                .zip(tuple[0].coords())
                .map(|(&a, &b)| field.sub(a, b))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..dim {
        let pivot = (rank..rows.len()).find(|&r| rows[r][col] != 0);
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]).unwrap();
        for cell in rows[rank].iter_mut() {
            *cell = field.mul(*cell, inv);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                #[allow(clippy::needless_range_loop)] // c indexes two rows
                for c in 0..dim {
                    let sub = field.mul(factor, rows[rank][c]);
                    rows[r][c] = field.sub(rows[r][c], sub);
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Builds the point -> index map used by [`w_count`].
pub fn point_index(points: &[Point]) -> HashMap<Point, usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect()
}
