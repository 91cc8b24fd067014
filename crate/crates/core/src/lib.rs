//! Exact combinatorial statistics over coordinate spaces `F_q^d` for odd
//! prime `q`: pair-distance histograms, simplex congruence-class censuses,
//! polarity and reflection graphs with spectral certificates, orthogonal
//! group enumeration, rigid-motion sweeps, and distinct-distance subset
//! extraction.
//!
//! Every pass/fail decision in this crate is made in exact integer or
//! rational arithmetic. The single floating-point surface is the dense
//! symmetric eigensolver behind [`specgraph`], whose outputs are compared
//! at an explicit tolerance and never mixed into exact checks.

pub mod caps;
pub mod census;
pub mod dds;
pub mod error;
pub mod ff;
pub mod motions;
pub mod pointset;
pub mod specgraph;

pub use caps::Caps;
pub use census::{Census, ChainReport, DistanceMatrix, LinkCheck, PowerSumCheck};
pub use dds::{DdsResult, Hypergraph4, SpencerBound};

pub use error::Error;
pub use ff::{FieldElement, PrimeField, ProjPoint};
pub use motions::{Motion, MotionSweep, OrthMatrix, Reflection2D};
pub use pointset::{DistanceDistribution, Line, Point, PointSet};
pub use specgraph::{ErGraph, NdlGraph, ReflectionGraph, Spectrum, VertexMultiset};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
