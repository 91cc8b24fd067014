//! (n, d, lambda)-graphs: the polarity graph on projective space, the plane
//! reflection graph, exact second-eigenvalue measurement, and the multiset
//! edge-mixing evaluator.
//!
//! Declared lambda values are stored as their exact squares (they are all
//! square roots of integers here), so the mixing inequality
//! `|e(B,C) - d|B||C|/n| <= lambda sqrt(sum m_B^2) sqrt(sum m_C^2)` is
//! decided in exact integer arithmetic by squaring both sides. Floating
//! point appears only in the eigensolver output.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::caps::Caps;
use crate::error::Error;
use crate::ff::{enumerate_pg, pg_point_count, PrimeField, ProjPoint};
use crate::motions::enumerate_reflections;
use crate::pointset::{distance_unchecked, Point};
use crate::Result;

/// A finite graph with symmetric 0/1 adjacency (loops allowed) and declared
/// (n, degree, lambda) parameters. A loop contributes 1 to its vertex's
/// degree and 1 per ordered pair to edge counts.
#[derive(Debug, Clone)]
pub struct NdlGraph {
    n: usize,
    adj: Vec<bool>,
    pub declared_n: usize,
    pub declared_degree: u64,
    /// Exact square of the declared second-eigenvalue bound.
    pub declared_lambda_sq: u128,
}

impl NdlGraph {
    pub fn new(
        n: usize,
        adj: Vec<bool>,
        declared_n: usize,
        declared_degree: u64,
        declared_lambda_sq: u128,
    ) -> Result<Self> {
        if adj.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: adj.len(),
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                if adj[i * n + j] != adj[j * n + i] {
                    return Err(Error::AsymmetricAdjacency(i, j));
                }
            }
        }
        Ok(NdlGraph {
            n,
            adj,
            declared_n,
            declared_degree,
            declared_lambda_sq,
        })
    }

    /// Complete graph fixture K_n, declared (n, n-1, 1).
    pub fn complete(n: usize) -> Self {
        let mut adj = vec![true; n * n];
        for i in 0..n {
            adj[i * n + i] = false;
        }
        NdlGraph {
            n,
            adj,
            declared_n: n,
            declared_degree: (n - 1) as u64,
            declared_lambda_sq: 1,
        }
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row sum; a loop counts once.
    pub fn degree(&self, i: usize) -> u64 {
        (0..self.n).filter(|&j| self.adjacent(i, j)).count() as u64
    }

    pub fn degree_range(&self) -> (u64, u64) {
        let mut min = u64::MAX;
        let mut max = 0;
        for i in 0..self.n {
            let d = self.degree(i);
            min = min.min(d);
            max = max.max(d);
        }
        (min, max)
    }

    pub fn declared_lambda(&self) -> f64 {
        (self.declared_lambda_sq as f64).sqrt()
    }

    /// Undirected edge list with `i <= j`; loops appear as `i i`.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                if self.adjacent(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Full adjacency spectrum by dense symmetric eigensolve.
    pub fn spectrum(&self, caps: &Caps) -> Result<Spectrum> {
        Caps::check(
            "dense eigensolver size",
            self.n as u128,
            caps.eigen_cap as u128,
        )?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adjacent(i, j) != self.adjacent(j, i) {
                    return Err(Error::AsymmetricAdjacency(i, j));
                }
            }
        }
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.adjacent(i, j) {
                    m[(i, j)] = 1.0;
                }
            }
        }
        let eigen = SymmetricEigen::new(m);
        let mut eigenvalues: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        // Second eigenvalue in the absolute-value convention: remove one
        // instance of the top (Perron) value, take the largest |.| left.
        let lambda2 = eigenvalues
            .iter()
            .skip(1)
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
        Ok(Spectrum {
            eigenvalues,
            lambda2,
        })
    }

    /// Measures vertex count, regularity, and the second eigenvalue against
    /// the declared parameters. Eigenvalue comparison at tolerance 1e-6.
    pub fn check_parameters(&self, caps: &Caps) -> Result<ParameterCheck> {
        let spectrum = self.spectrum(caps)?;
        let (degree_min, degree_max) = self.degree_range();
        let n_ok = self.n == self.declared_n;
        let regular = degree_min == degree_max && degree_min == self.declared_degree;
        let lambda_ok = spectrum.lambda2 <= self.declared_lambda() + 1e-6;
        Ok(ParameterCheck {
            declared_n: self.declared_n,
            declared_degree: self.declared_degree,
            declared_lambda: self.declared_lambda(),
            measured_n: self.n,
            degree_min,
            degree_max,
            lambda2: spectrum.lambda2,
            pass: n_ok && regular && lambda_ok,
        })
    }
}

/// Sorted (descending) adjacency spectrum plus the second-largest absolute
/// eigenvalue once one copy of the Perron value is removed.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
}

/// Declared-vs-measured parameter comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterCheck {
    pub declared_n: usize,
    pub declared_degree: u64,
    pub declared_lambda: f64,
    pub measured_n: usize,
    pub degree_min: u64,
    pub degree_max: u64,
    pub lambda2: f64,
    pub pass: bool,
}

/// A multiset of vertices: index -> multiplicity >= 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexMultiset {
    mult: std::collections::BTreeMap<usize, u64>,
}

impl VertexMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, vertex: usize, multiplicity: u64) {
        assert!(multiplicity >= 1, "multiplicities are positive");
        *self.mult.entry(vertex).or_insert(0) += multiplicity;
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u64)>) -> Self {
        let mut s = Self::new();
        for (v, m) in pairs {
            s.insert(v, m);
        }
        s
    }

    /// Every vertex of `g`, multiplicity 1.
    pub fn all_vertices(g: &NdlGraph) -> Self {
        Self::from_pairs((0..g.n()).map(|v| (v, 1)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.mult.iter().map(|(&v, &m)| (v, m))
    }

    /// Multiset size `sum m(x)`.
    pub fn mass(&self) -> u128 {
        self.mult.values().map(|&m| m as u128).sum()
    }

    /// `sum m(x)^2`.
    pub fn mass_sq(&self) -> u128 {
        self.mult.values().map(|&m| (m as u128) * (m as u128)).sum()
    }

    pub fn max_vertex(&self) -> Option<usize> {
        self.mult.keys().next_back().copied()
    }
}

/// Result of one mixing evaluation: the exact ordered-pair edge count
/// between two multisets, the main term, and whether the deviation is
/// within the declared-lambda error bound (decided by exact squaring).
#[derive(Debug, Clone)]
pub struct MixingCheck {
    pub edges: u128,
    pub b_mass: u128,
    pub c_mass: u128,
    pub main_term: BigRational,
    /// Square of the error bound, `lambda^2 sum m_B^2 sum m_C^2`, exact.
    pub error_bound_sq: BigInt,
    pub holds: bool,
}

impl MixingCheck {
    pub fn error_bound(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.error_bound_sq.to_f64().unwrap_or(f64::MAX).sqrt()
    }
}

/// `e(B, C) = sum m_B(b) m_C(c) adj(b, c)` over ordered pairs, then the
/// mixing inequality against the graph's declared parameters.
pub fn mixing_edges(g: &NdlGraph, b: &VertexMultiset, c: &VertexMultiset) -> Result<MixingCheck> {
    for side in [b, c] {
        if let Some(max) = side.max_vertex() {
            if max >= g.n() {
                return Err(Error::invalid(format!(
                    "multiset vertex {max} outside graph of order {}",
                    g.n()
                )));
            }
        }
    }
    let mut edges: u128 = 0;
    for (bv, bm) in b.iter() {
        for (cv, cm) in c.iter() {
            if g.adjacent(bv, cv) {
                edges += bm as u128 * cm as u128;
            }
        }
    }
    let n = BigInt::from(g.n());
    let e = BigInt::from(edges);
    let d = BigInt::from(g.declared_degree);
    let b_mass = BigInt::from(b.mass());
    let c_mass = BigInt::from(c.mass());
    let main_term = BigRational::new(&d * &b_mass * &c_mass, n.clone());
    let deviation = &e * &n - &d * &b_mass * &c_mass;
    let error_bound_sq =
        BigInt::from(g.declared_lambda_sq) * BigInt::from(b.mass_sq()) * BigInt::from(c.mass_sq());
    // |e - d|B||C|/n| <= sqrt(bound_sq)  <=>  (e n - d|B||C|)^2 <= bound_sq n^2
    let holds = &deviation * &deviation <= &error_bound_sq * &n * &n;
    Ok(MixingCheck {
        edges,
        b_mass: b.mass(),
        c_mass: c.mass(),
        main_term,
        error_bound_sq,
        holds,
    })
}

/// Outcome of seeded random multiset mixing trials.
#[derive(Debug, Clone, Serialize)]
pub struct MixingTrials {
    pub trials: u32,
    pub violations: u32,
    pub max_mult: u64,
    pub seed: u64,
}

/// Runs `trials` random multiset pairs through [`mixing_edges`]; inclusion
/// probability varies per trial, multiplicities are uniform in
/// `[1, max_mult]`. Deterministic for a fixed seed.
pub fn mixing_trials(g: &NdlGraph, trials: u32, max_mult: u64, seed: u64) -> Result<MixingTrials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..trials {
        let mut sides = Vec::with_capacity(2);
        for _ in 0..2 {
            let density: f64 = rng.random_range(0.05..0.95);
            let mut ms = VertexMultiset::new();
            for v in 0..g.n() {
                if rng.random_bool(density) {
                    ms.insert(v, rng.random_range(1..=max_mult));
                }
            }
            if ms.mass() == 0 {
                ms.insert(rng.random_range(0..g.n()), 1);
            }
            sides.push(ms);
        }
        if !mixing_edges(g, &sides[0], &sides[1])?.holds {
            violations += 1;
        }
    }
    Ok(MixingTrials {
        trials,
        violations,
        max_mult,
        seed,
    })
}

/// The polarity graph on `PG(q, m)`: vertices are projective points,
/// `x ~ y` iff `x . y = 0`, with loops at self-orthogonal points.
#[derive(Debug, Clone)]
pub struct ErGraph {
    pub graph: NdlGraph,
    pub vertices: Vec<ProjPoint>,
    index: HashMap<ProjPoint, usize>,
    pub q: u64,
    pub m: usize,
}

impl ErGraph {
    pub fn vertex_index(&self, p: &ProjPoint) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// Builds the polarity graph with its declared parameters
/// `((q^m - 1)/(q - 1), (q^(m-1) - 1)/(q - 1), q^((m-2)/2))`.
pub fn build_er_graph(field: PrimeField, m: usize, caps: &Caps) -> Result<ErGraph> {
    let q = field.q();
    let n_expected = pg_point_count(q, m);
    Caps::check("polarity graph vertex count", n_expected, caps.graph_vertex_cap as u128)?;
    let vertices = enumerate_pg(field, m)?;
    let n = vertices.len();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0;
            for (&a, &b) in vertices[i].coords().iter().zip(vertices[j].coords()) {
                acc = field.add(acc, field.mul(a, b));
            }
            if acc == 0 {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
            }
        }
    }
    let declared_degree = ((q as u128).pow(m as u32 - 1) - 1) / (q as u128 - 1);
    let graph = NdlGraph::new(
        n,
        adj,
        n_expected as usize,
        declared_degree as u64,
        (q as u128).pow(m as u32 - 2),
    )?;
    let index = vertices
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(ErGraph {
        graph,
        vertices,
        index,
        q,
        m,
    })
}

/// Which circle-size branch a plane parameter set falls in: `Plus` means
/// circles of radius != 0 have q + 1 points (q = 3 mod 4), `Minus` means
/// q - 1 points (q = 1 mod 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CircleBranch {
    Plus,
    Minus,
}

impl CircleBranch {
    pub fn of(q: u64) -> Self {
        if q % 4 == 3 {
            CircleBranch::Plus
        } else {
            CircleBranch::Minus
        }
    }

    pub fn sign(&self) -> i64 {
        match self {
            CircleBranch::Plus => 1,
            CircleBranch::Minus => -1,
        }
    }
}

/// The reflection graph: vertices are ordered plane pairs at distance
/// `lam != 0`, joined when some point reflection maps one pair onto the
/// other. Declared parameters `(q^2 (q +- 1), q^2 +- q, 2(q +- 1))` with the
/// branch decided by q mod 4.
#[derive(Debug, Clone)]
pub struct ReflectionGraph {
    pub graph: NdlGraph,
    pub vertices: Vec<(Point, Point)>,
    index: HashMap<(Point, Point), usize>,
    pub lam: u64,
    pub branch: CircleBranch,
    pub q: u64,
}

impl ReflectionGraph {
    pub fn vertex_index(&self, pair: &(Point, Point)) -> Option<usize> {
        self.index.get(pair).copied()
    }
}

pub fn build_reflection_graph(field: PrimeField, lam: u64, caps: &Caps) -> Result<ReflectionGraph> {
    if lam == 0 || lam >= field.q() {
        return Err(Error::invalid(format!(
            "reflection graph needs lam in F_q^*, got {lam}"
        )));
    }
    let q = field.q();
    let branch = CircleBranch::of(q);
    let circle = if branch == CircleBranch::Plus { q + 1 } else { q - 1 };
    let n_expected = (q * q * circle) as u128;
    Caps::check("reflection graph vertex count", n_expected, caps.graph_vertex_cap as u128)?;

    // sphere offsets of radius lam around the origin
    let mut offsets = Vec::new();
    for code in 0..(q * q) as usize {
        let w = Point::from_code(code, q, 2);
        let normw = distance_unchecked(field, &w, &Point::from_code(0, q, 2));
        if normw == lam {
            offsets.push(w);
        }
    }
    assert_eq!(offsets.len() as u64, circle, "circle size for q={q}");

    let mut vertices = Vec::with_capacity(n_expected as usize);
    for xcode in 0..(q * q) as usize {
        let x = Point::from_code(xcode, q, 2);
        for w in &offsets {
            let y: Vec<u64> = x
                .coords()
                .iter()
                .zip(w.coords())
                .map(|(&a, &b)| field.add(a, b))
                .collect();
            vertices.push((x.clone(), Point::new(field, y)?));
        }
    }
    let n = vertices.len();
    let index: HashMap<(Point, Point), usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();

    let mut adj = vec![false; n * n];
    for r in enumerate_reflections(field) {
        for (i, (x, y)) in vertices.iter().enumerate() {
            let img = (r.apply(field, x), r.apply(field, y));
            let j = index[&img]; // reflections preserve distances
            adj[i * n + j] = true;
            adj[j * n + i] = true;
        }
    }
    let degree = if branch == CircleBranch::Plus {
        q * q + q
    } else {
        q * q - q
    };
    let lambda = if branch == CircleBranch::Plus {
        2 * (q + 1)
    } else {
        2 * (q - 1)
    };
    let graph = NdlGraph::new(
        n,
        adj,
        n_expected as usize,
        degree,
        (lambda as u128) * (lambda as u128),
    )?;
    Ok(ReflectionGraph {
        graph,
        vertices,
        index,
        lam,
        branch,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn er_graph_q3_m2_is_two_disjoint_edges() {
        let caps = Caps::default();
        let er = build_er_graph(f(3), 2, &caps).unwrap();
        assert_eq!(er.graph.n(), 4);
        assert_eq!(er.graph.declared_degree, 1);
        assert_eq!(er.graph.declared_lambda_sq, 1);
        assert_eq!(er.graph.edge_list().len(), 2);
        let spec = er.graph.spectrum(&caps).unwrap();
        // spectrum {1, 1, -1, -1}
        assert!((spec.lambda2 - 1.0).abs() < 1e-8);
        let check = er.graph.check_parameters(&caps).unwrap();
        assert!(check.pass);
    }

    #[test]
    fn er_graph_declared_parameters() {
        let caps = Caps::default();
        let er = build_er_graph(f(3), 3, &caps).unwrap();
        assert_eq!(er.graph.declared_n, 13);
        assert_eq!(er.graph.declared_degree, 4);
        assert_eq!(er.graph.declared_lambda_sq, 3);
        assert!(er.graph.check_parameters(&caps).unwrap().pass);

        let er = build_er_graph(f(5), 2, &caps).unwrap();
        assert_eq!(er.graph.declared_n, 6);
        assert_eq!(er.graph.declared_degree, 1);
        assert_eq!(er.graph.declared_lambda_sq, 1);
        assert!(er.graph.check_parameters(&caps).unwrap().pass);
    }

    #[test]
    fn er_graph_loops_at_self_orthogonal_points() {
        let caps = Caps::default();
        let er = build_er_graph(f(5), 2, &caps).unwrap();
        let field = f(5);
        let iso = crate::ff::normalize_projective(field, &[1, 2]).unwrap();
        let idx = er.vertex_index(&iso).unwrap();
        assert!(er.graph.adjacent(idx, idx));
        // degree still 1: the loop is the only incidence
        assert_eq!(er.graph.degree(idx), 1);
    }

    #[test]
    fn complete_graph_fixture() {
        let caps = Caps::default();
        let k4 = NdlGraph::complete(4);
        let spec = k4.spectrum(&caps).unwrap();
        assert!((spec.lambda2 - 1.0).abs() < 1e-8);
        assert!(k4.check_parameters(&caps).unwrap().pass);
    }

    #[test]
    fn eigensolver_cap() {
        let mut caps = Caps::default();
        caps.eigen_cap = 3;
        let k4 = NdlGraph::complete(4);
        assert!(matches!(
            k4.spectrum(&caps),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn handshake_identity_for_whole_vertex_set() {
        let caps = Caps::default();
        for (q, m) in [(3u64, 2usize), (3, 3), (5, 2)] {
            let er = build_er_graph(f(q), m, &caps).unwrap();
            let all = VertexMultiset::all_vertices(&er.graph);
            let check = mixing_edges(&er.graph, &all, &all).unwrap();
            let n = er.graph.n() as u128;
            assert_eq!(check.edges, er.graph.declared_degree as u128 * n);
            assert!(check.holds);
        }
    }

    #[test]
    fn single_isotropic_vertex_mixing_example() {
        let caps = Caps::default();
        let er = build_er_graph(f(5), 2, &caps).unwrap();
        let field = f(5);
        let iso = crate::ff::normalize_projective(field, &[1, 2]).unwrap();
        let idx = er.vertex_index(&iso).unwrap();
        let b = VertexMultiset::from_pairs([(idx, 1)]);
        let check = mixing_edges(&er.graph, &b, &b).unwrap();
        assert_eq!(check.edges, 1);
        assert!(check.holds);
    }

    #[test]
    fn mixing_trials_no_violations_on_verified_graphs() {
        let caps = Caps::default();
        let er = build_er_graph(f(7), 3, &caps).unwrap();
        assert!(er.graph.check_parameters(&caps).unwrap().pass);
        let trials = mixing_trials(&er.graph, 200, 3, 0xfeed).unwrap();
        assert_eq!(trials.violations, 0);
    }

    #[test]
    fn mixing_catches_understated_lambda() {
        // negative control: corrupt the declared lambda of a graph whose
        // true second eigenvalue is larger and watch a trial fail
        let caps = Caps::default();
        let er = build_er_graph(f(3), 3, &caps).unwrap();
        let mut corrupted = er.graph.clone();
        corrupted.declared_lambda_sq = 0;
        assert!(!corrupted.check_parameters(&caps).unwrap().pass);
        let b = VertexMultiset::from_pairs([(0, 1)]);
        let c = VertexMultiset::from_pairs([(1, 1), (2, 1)]);
        // with lambda = 0 the inequality degenerates to e = d|B||C|/n
        let check = mixing_edges(&corrupted, &b, &c).unwrap();
        assert!(!check.holds);
    }

    #[test]
    fn reflection_graph_q3() {
        let caps = Caps::default();
        let rg = build_reflection_graph(f(3), 1, &caps).unwrap();
        assert_eq!(rg.graph.n(), 36);
        assert_eq!(rg.graph.declared_degree, 12);
        assert_eq!(rg.graph.declared_lambda_sq, 64);
        assert_eq!(rg.branch, CircleBranch::Plus);
        let check = rg.graph.check_parameters(&caps).unwrap();
        assert!(check.pass, "{check:?}");

        // both nonzero classes give the same declared parameters at q = 3
        let rg2 = build_reflection_graph(f(3), 2, &caps).unwrap();
        assert_eq!(rg2.graph.declared_n, 36);
        assert_eq!(rg2.graph.declared_degree, 12);
    }

    #[test]
    fn reflection_graph_q5_branch() {
        let caps = Caps::default();
        let rg = build_reflection_graph(f(5), 1, &caps).unwrap();
        assert_eq!(rg.branch, CircleBranch::Minus);
        assert_eq!(rg.graph.n(), 100);
        assert_eq!(rg.graph.declared_degree, 20);
        assert_eq!(rg.graph.declared_lambda_sq, 64);
        assert!(rg.graph.check_parameters(&caps).unwrap().pass);
    }

    #[test]
    fn reflection_graph_rejects_zero_class() {
        let caps = Caps::default();
        assert!(build_reflection_graph(f(3), 0, &caps).is_err());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let caps = Caps::default();
        let rg = build_reflection_graph(f(3), 1, &caps).unwrap();
        let g = &rg.graph;
        for i in 0..g.n() {
            for j in 0..g.n() {
                assert_eq!(g.adjacent(i, j), g.adjacent(j, i));
            }
        }
    }
}
