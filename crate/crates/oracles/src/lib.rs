//! Reference computations for the test suites.
//!
//! Everything here works on plain primitives (slices of `f64`, bitmasks,
//! row-major complex arrays) and deliberately shares no code with the
//! library under test. The algorithms are the slow, obvious ones.

pub mod causal;
pub mod combinatorics;
pub mod dd;
pub mod linalg;
pub mod stats;
