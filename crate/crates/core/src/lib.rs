//! Executable classification of proper holomorphic maps between generalized
//! pseudoellipsoids.
//!
//! * [`arith`]: exact rationals, surds and multi-index combinatorics
//! * [`geometry`]: domain signatures, defining functions, Cayley transform, sampling
//! * [`dangelo`]: the homogeneous proper maps `H_M`
//! * [`crframe`]: CR frame, pseudohermitian form and Levi form on the boundary
//! * [`holomap`]: polynomial maps, pushforwards and properness checks
//! * [`classify`]: admissible `(sigma, M)`, normal forms, automorphisms, equivalence

pub mod arith;
pub mod classify;
pub mod crframe;
pub mod dangelo;
pub mod error;
pub mod geometry;
pub mod holomap;

pub use error::{Error, Result};
pub use geometry::{AmbientPoint, BlockSignature, BoundaryPoint, Model, PointClass};
pub use classify::{Admissible, AutomorphismSpec, ClassificationProblem};
pub use holomap::{EvaluableMap, PolyMap};
