//! Numerical laboratory for truncated and maximal singular integral operators
//! acting on discrete approximations of Radon measures.
//!
//! The crate is organised around six modules:
//!
//! * [`geometry`]: Lipschitz graphs, cones, shapes and the decomposition of a
//!   shape's complement into regions bounded by rotated Lipschitz graphs.
//! * [`measure`]: weighted-atom measures, the catalog of measure families and
//!   growth / lower-density estimators.
//! * [`kernel`]: odd homogeneous Calderón–Zygmund kernels and the numerical
//!   validation of their size and smoothness constants.
//! * [`operators`]: truncated transforms, the exact breakpoint maximal
//!   transform, the Hardy–Littlewood-type maximal function, non-tangential
//!   maxima, principal values and double truncated integrals.
//! * [`pairing`]: simple functions over balls or rectangles and the bilinear
//!   pairing with its four-way region decomposition.
//! * [`harness`]: configuration, scenarios and report emission used by the
//!   `siolab` binary and the acceptance suite.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod measure;
pub mod operators;
pub mod pairing;
pub mod rng;
pub mod sum;
pub mod table;

pub use error::{Error, Result};
