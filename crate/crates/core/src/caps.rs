//! Work caps for the exhaustive operations.
//!
//! Caps are configuration, not heuristics: an over-cap request fails fast
//! with the required budget in the error, and nothing ever raises a cap
//! silently.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum vertex count for polarity/reflection graph construction.
    pub graph_vertex_cap: usize,
    /// Maximum matrix side for the dense symmetric eigensolver.
    pub eigen_cap: usize,
    /// Maximum number of ordered tuples evaluated by an exact census.
    pub census_tuple_cap: u128,
    /// Maximum number of tuples for the orbit-refined census partition.
    pub orbit_tuple_cap: u128,
    /// Largest q for full motion sweeps in dimension 2.
    pub sweep_q_dim2: u64,
    /// Largest q for full motion sweeps in dimension 3.
    pub sweep_q_dim3: u64,
    /// Orthogonal-group enumeration in dimension 4 is opt-in.
    pub allow_orthogonal_dim4: bool,
    /// Largest q for orthogonal-group enumeration in dimension 3.
    pub orthogonal_q_dim3: u64,
    /// Largest point count for singular-quadruple enumeration.
    pub singular_point_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            graph_vertex_cap: 10_000,
            eigen_cap: 5_000,
            census_tuple_cap: 100_000_000,
            orbit_tuple_cap: 1_000_000,
            sweep_q_dim2: 13,
            sweep_q_dim3: 7,
            allow_orthogonal_dim4: false,
            orthogonal_q_dim3: 13,
            singular_point_cap: 120,
        }
    }
}

impl Caps {
    /// Fail with a [`crate::Error::CapExceeded`] unless `required <= cap`.
    pub fn check(what: &'static str, required: u128, cap: u128) -> crate::Result<()> {
        if required > cap {
            Err(crate::Error::CapExceeded { what, required, cap })
        } else {
            Ok(())
        }
    }
}
