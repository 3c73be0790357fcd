//! Discrete (atomic) approximations of finite Radon measures.

mod build;
mod estimate;
mod io;

pub use build::{build, MeasureSpec, MAX_ATOMS};
pub use estimate::{ball_masses, geometric_grid, growth_constant, lower_density};
pub use io::{format_hex, parse_hex, read_text, write_text};

use crate::error::{check_dim, invalid, Result};
use crate::geometry::{LipschitzGraph, Shape, Side};
use crate::sum::compensated_sum;

/// Finite list of weighted atoms in `R^n`, stored flat.
///
/// `resolution` is the spatial scale below which the discretization carries
/// no information: growth estimates and truncation radii are only meaningful
/// at or above it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    resolution: f64,
    growth_declared: Option<f64>,
}

/// Atoms of a measure split by their side of a graph.
#[derive(Debug, Clone)]
pub struct GraphSplit {
    pub on: DiscreteMeasure,
    pub above: DiscreteMeasure,
    pub below: DiscreteMeasure,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>, resolution: f64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("measures live in dimension >= 2"));
        }
        check_dim(weights.len() * dim, coords.len())?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("atom positions must be finite"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("atom weights must be finite and nonnegative"));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(invalid(format!("resolution must be positive, got {resolution}")));
        }
        Ok(Self {
            dim,
            coords,
            weights,
            resolution,
            growth_declared: None,
        })
    }

    /// Zero measure.
    pub fn empty(dim: usize, resolution: f64) -> Result<Self> {
        Self::new(dim, Vec::new(), Vec::new(), resolution)
    }

    pub fn with_growth_declared(mut self, c: f64) -> Self {
        self.growth_declared = Some(c);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn growth_declared(&self) -> Option<f64> {
        self.growth_declared
    }

    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// Coordinate-wise bounding box, `None` for the zero measure.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.positions() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Diagonal of the bounding box (an upper bound for the support diameter).
    pub fn diameter(&self) -> f64 {
        self.bounding_box()
            .map(|(lo, hi)| crate::geometry::dist(&lo, &hi))
            .unwrap_or(0.0)
    }

    /// Indices of atoms whose position satisfies `pred`, in atom order.
    pub fn indices_where(&self, pred: impl Fn(&[f64]) -> bool) -> Vec<usize> {
        self.positions()
            .enumerate()
            .filter(|(_, p)| pred(p))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-measure on the given atom indices; weights are copied unchanged.
    pub fn select(&self, indices: &[usize]) -> DiscreteMeasure {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            coords.extend_from_slice(self.position(i));
            weights.push(self.weights[i]);
        }
        DiscreteMeasure {
            dim: self.dim,
            coords,
            weights,
            resolution: self.resolution,
            growth_declared: self.growth_declared,
        }
    }

    /// `mu` restricted to `{p : pred(p)}`.
    pub fn restrict(&self, pred: impl Fn(&[f64]) -> bool) -> DiscreteMeasure {
        self.select(&self.indices_where(pred))
    }

    pub fn restrict_to_shape(&self, shape: &Shape) -> Result<DiscreteMeasure> {
        check_dim(self.dim, shape.dim())?;
        Ok(self.restrict(|p| shape.contains(p)))
    }

    pub fn restrict_to_side(&self, graph: &LipschitzGraph, side: Side) -> Result<DiscreteMeasure> {
        check_dim(self.dim, graph.dim())?;
        Ok(self.restrict(|p| graph.classify(p) == side))
    }

    pub fn split_by_graph(&self, graph: &LipschitzGraph) -> Result<GraphSplit> {
        check_dim(self.dim, graph.dim())?;
        let (mut on, mut above, mut below) = (Vec::new(), Vec::new(), Vec::new());
        for (i, p) in self.positions().enumerate() {
            match graph.classify(p) {
                Side::On => on.push(i),
                Side::Above => above.push(i),
                Side::Below => below.push(i),
            }
        }
        Ok(GraphSplit {
            on: self.select(&on),
            above: self.select(&above),
            below: self.select(&below),
        })
    }

    /// Sum of measures (atoms concatenated in argument order); the resolution
    /// is the coarsest of the parts.
    pub fn union(parts: &[&DiscreteMeasure]) -> Result<DiscreteMeasure> {
        let first = parts.first().ok_or_else(|| invalid("union of no measures"))?;
        let mut out = DiscreteMeasure::empty(first.dim, first.resolution)?;
        for m in parts {
            check_dim(first.dim, m.dim)?;
            out.coords.extend_from_slice(&m.coords);
            out.weights.extend_from_slice(&m.weights);
            out.resolution = out.resolution.max(m.resolution);
        }
        Ok(out)
    }

    /// Same atoms with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(
            self.dim,
            self.coords.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.resolution,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use proptest::prelude::*;

    fn three_atoms() -> DiscreteMeasure {
        DiscreteMeasure::new(
            2,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, -1.0],
            vec![0.5, 0.25, 0.125],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn split_one_atom_per_side() {
        let s = three_atoms().split_by_graph(&LipschitzGraph::flat(2)).unwrap();
        assert_eq!((s.on.len(), s.above.len(), s.below.len()), (1, 1, 1));
        assert_eq!(s.on.position(0), &[0.0, 0.0]);
        assert_eq!(s.above.weight(0), 0.25);
        assert_eq!(s.below.weight(0), 0.125);
    }

    #[test]
    fn split_all_above() {
        let mu = DiscreteMeasure::new(2, vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.0], 0.1).unwrap();
        let s = mu.split_by_graph(&LipschitzGraph::flat(2)).unwrap();
        assert!(s.on.is_empty() && s.below.is_empty());
        assert_eq!(s.above.len(), 2);
    }

    #[test]
    fn restrict_examples() {
        let mu = three_atoms();
        let big = Shape::ball(vec![0.0, 0.0], 10.0).unwrap();
        assert_eq!(mu.restrict_to_shape(&big).unwrap(), mu);
        let far = Shape::ball(vec![50.0, 50.0], 1.0).unwrap();
        let empty = mu.restrict_to_shape(&far).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.total_mass(), 0.0);
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(DiscreteMeasure::new(2, vec![0.0, 0.0], vec![-1.0], 0.1).is_err());
        assert!(DiscreteMeasure::new(2, vec![0.0], vec![1.0], 0.1).is_err());
        assert!(DiscreteMeasure::new(2, vec![0.0, 0.0], vec![1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn split_is_an_exact_partition(
            pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, 0.0f64..3.0), 1..120),
            slope in -1.0f64..1.0,
        ) {
            let coords: Vec<f64> = pts.iter().flat_map(|(x, y, _)| [*x, *y]).collect();
            let weights: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let mu = DiscreteMeasure::new(2, coords, weights, 0.01).unwrap();
            let g = LipschitzGraph::new(2, Profile::Cone { slope }).unwrap();
            let s = mu.split_by_graph(&g).unwrap();
            prop_assert_eq!(s.on.len() + s.above.len() + s.below.len(), mu.len());
            let mut parts: Vec<f64> = s.on.weights().iter()
                .chain(s.above.weights()).chain(s.below.weights()).copied().collect();
            let mut orig = mu.weights().to_vec();
            parts.sort_by(f64::total_cmp);
            orig.sort_by(f64::total_cmp);
            prop_assert_eq!(parts, orig);
        }
    }
}
