//! Arithmetic in the prime field `F_q` and enumeration of projective space.
//!
//! Only odd prime moduli are accepted. Inversion uses the extended
//! Euclidean algorithm, so every operation is exact and deterministic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// An odd prime modulus together with the field operations on residues.
///
/// Residues are plain `u64` values in `[0, q)`. The context object keeps
/// hot loops free of per-element modulus storage; [`FieldElement`] wraps a
/// residue with its modulus for the element-level API.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
}

fn is_odd_prime(q: u64) -> bool {
    if q < 3 || q.is_multiple_of(2) {
        return false;
    }
    let mut f = 3;
    while f * f <= q {
        if q.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

impl PrimeField {
    /// Rejects any modulus that is not an odd prime.
    pub fn new(q: u64) -> Result<Self> {
        if is_odd_prime(q) {
            Ok(PrimeField { q })
        } else {
            Err(Error::NotOddPrime(q))
        }
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Validates that `value` is a residue of this field.
    pub fn check(&self, value: u64) -> Result<u64> {
        if value < self.q {
            Ok(value)
        } else {
            Err(Error::CoordinateOutOfRange { value, q: self.q })
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    /// Reduces an arbitrary integer (given as i128) into `[0, q)`.
    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u64 {
        let q = self.q as i128;
        (((v % q) + q) % q) as u64
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivisionByZero(self.q));
        }
        let (mut r0, mut r1) = (self.q as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, gcd must be 1");
        Ok(self.reduce_i128(t0))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Squared residue, convenient for norms.
    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    /// Wraps a validated residue as a [`FieldElement`].
    pub fn elem(&self, value: u64) -> Result<FieldElement> {
        Ok(FieldElement {
            value: self.check(value)?,
            q: self.q,
        })
    }

    /// All residues `0..q` in order.
    pub fn residues(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }
}

/// A residue in `[0, q)` carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { q: self.q }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        let f = self.field();
        Ok(FieldElement {
            value: f.inv(self.value)?,
            q: self.q,
        })
    }

    pub fn checked_div(&self, rhs: FieldElement) -> Result<FieldElement> {
        assert_eq!(self.q, rhs.q, "mixed moduli");
        let f = self.field();
        Ok(FieldElement {
            value: f.div(self.value, rhs.value)?,
            q: self.q,
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.q, rhs.q, "mixed moduli");
        FieldElement {
            value: self.field().add(self.value, rhs.value),
            q: self.q,
        }
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.q, rhs.q, "mixed moduli");
        FieldElement {
            value: self.field().sub(self.value, rhs.value),
            q: self.q,
        }
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.q, rhs.q, "mixed moduli");
        FieldElement {
            value: self.field().mul(self.value, rhs.value),
            q: self.q,
        }
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.field().neg(self.value),
            q: self.q,
        }
    }
}

/// A point of projective space in leading-one canonical form.
///
/// Two nonzero vectors name the same point exactly when one is a nonzero
/// scalar multiple of the other; the canonical representative scales the
/// first nonzero coordinate to 1, which also gives a total order usable as
/// a map key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint {
    coords: Vec<u64>,
}

impl ProjPoint {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Canonicalizes a nonzero vector to its projective representative.
pub fn normalize_projective(field: PrimeField, coords: &[u64]) -> Result<ProjPoint> {
    for &c in coords {
        field.check(c)?;
    }
    let lead = coords.iter().position(|&c| c != 0).ok_or(Error::ZeroVector)?;
    let scale = field.inv(coords[lead])?;
    let canon: Vec<u64> = coords.iter().map(|&c| field.mul(c, scale)).collect();
    debug_assert_eq!(canon[lead], 1);
    Ok(ProjPoint { coords: canon })
}

/// Enumerates `PG(q, m)`, the projective space of lines through the origin
/// of `F_q^m`, in deterministic order: canonical representatives grouped by
/// the position of the leading 1, free suffix in ascending lexicographic
/// order. The result has exactly `(q^m - 1)/(q - 1)` points.
pub fn enumerate_pg(field: PrimeField, m: usize) -> Result<Vec<ProjPoint>> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "projective enumeration needs m >= 2, got {m}"
        )));
    }
    let q = field.q();
    let mut points = Vec::new();
    for lead in 0..m {
        let free = m - lead - 1;
        let mut suffix = vec![0u64; free];
        loop {
            let mut coords = vec![0u64; m];
            coords[lead] = 1;
            coords[lead + 1..].copy_from_slice(&suffix);
            points.push(ProjPoint { coords });
            // odometer increment over the free suffix
            let mut pos = free;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                suffix[pos] += 1;
                if suffix[pos] < q {
                    break;
                }
                suffix[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if free == 0 || pos == usize::MAX {
                break;
            }
        }
    }
    Ok(points)
}

/// `(q^m - 1) / (q - 1)` without overflow at desk scale.
pub fn pg_point_count(q: u64, m: usize) -> u128 {
    let q = q as u128;
    (q.pow(m as u32) - 1) / (q - 1)
}
