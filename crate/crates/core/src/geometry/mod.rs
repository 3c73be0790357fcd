//! Lipschitz graphs, half-space classification, cones, shapes and the
//! decomposition of shape complements into regions bounded by rotated
//! Lipschitz graphs.

mod cone;
mod decompose;
mod graph;
mod rotation;
mod shape;

pub use cone::Cone;
pub use decompose::{Direction, Membership, RegionDecomposition, RegionPiece};
pub use graph::{lipschitz_estimate, LipschitzGraph, ParamBox, Profile, Side};
pub use rotation::Rotation;
pub use shape::Shape;

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}
