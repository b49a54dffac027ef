//! Hamiltonian cycles through prescribed matchings in faulty hypercubes.
//!
//! Given a matching `M` of the n-dimensional hypercube and a set `F` of
//! faulty edges, the `constructor` module builds a Hamiltonian cycle that
//! contains every edge of `M` and avoids every edge of `F`, by recursive
//! subcube decomposition. The `verify` module re-derives the feasibility
//! landscape independently: a brute-force oracle, isomorphism-reduced
//! instance enumeration, and sweep reports over whole parameter ranges.
//!
//! Bounds: `|M| <= 2n-1` without faults (n >= 2); with faults, nonempty
//! `M` with `|M| <= 2n-2` and `|F| <= n-1-ceil(|M|/2)` (n >= 4), where
//! exactly one exceptional configuration in `Q_4` admits no cycle.

pub mod basecases;
pub mod constructor;
pub mod cube;
pub mod error;
pub mod primitives;
pub mod structures;
pub mod verify;

pub use cube::{Cube, Edge, Vertex};
pub use error::{Error, Result};
pub use structures::{FaultSet, HamCycle, HamPath, Matching};
