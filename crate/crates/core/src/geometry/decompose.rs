use std::fmt;

use crate::error::{check_dim, Result};

use super::{LipschitzGraph, Profile, Rotation, Shape};

/// Outward axis direction `±e_axis` (in the shape's own frame for rectangles).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub axis: usize,
    pub positive: bool,
}

impl Direction {
    /// Fixed order `+e_0, -e_0, +e_1, -e_1, ...`.
    pub fn from_index(index: usize) -> Self {
        Self {
            axis: index / 2,
            positive: index % 2 == 0,
        }
    }

    pub fn index(&self) -> usize {
        2 * self.axis + usize::from(!self.positive)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", if self.positive { '+' } else { '-' }, self.axis)
    }
}

#[derive(Debug, Clone)]
pub struct RegionPiece {
    pub direction: Direction,
    /// Separating graph `F_i`: the shape lies below or on it.
    pub graph: LipschitzGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Region(usize),
}

/// Partition of the complement of a closed shape into `2n` regions `A_i`,
/// each lying strictly above its separating graph `F_i`.
///
/// Rectangles use the hyperplanes through their faces. A ball of radius `r`
/// uses, for each axis direction, the spherical cap continued by its tangent
/// cone of slope `sqrt(n - 1)`; the cap/cone switch happens where the cap's
/// slope reaches `sqrt(n - 1)`.
///
/// Rectangle regions go to the first face (fixed order) whose open outer
/// half-space contains the point. Ball regions go to the dominant coordinate
/// direction of `p - c` (ties to the lower index): an exterior point is always
/// strictly above the graph of that direction, while the unbounded cone parts
/// of the other graphs would claim far-away points in an unnatural way.
#[derive(Debug, Clone)]
pub struct RegionDecomposition {
    shape: Shape,
    pieces: Vec<RegionPiece>,
}

impl RegionDecomposition {
    pub fn new(shape: &Shape) -> Result<Self> {
        let n = shape.dim();
        let mut pieces = Vec::with_capacity(2 * n);
        for index in 0..2 * n {
            let direction = Direction::from_index(index);
            let swap = Rotation::axis_to_vertical(n, direction.axis, direction.positive);
            let graph = match shape {
                Shape::Ball { center, radius } => {
                    let cq = swap.apply_transpose(center);
                    let profile = Profile::Cap {
                        center: cq[..n - 1].to_vec(),
                        base: cq[n - 1],
                        radius: *radius,
                        slope: ((n - 1) as f64).sqrt(),
                    };
                    LipschitzGraph::new(n, profile)?.with_rotation(swap)?
                }
                Shape::Rectangle {
                    center,
                    half_widths,
                    rotation,
                } => {
                    let frame = rotation.compose(&swap);
                    let cq = frame.apply_transpose(center);
                    let profile = Profile::Affine {
                        slope: vec![0.0; n - 1],
                        offset: cq[n - 1] + half_widths[direction.axis],
                    };
                    LipschitzGraph::new(n, profile)?.with_rotation(frame)?
                }
            };
            pieces.push(RegionPiece { direction, graph });
        }
        Ok(Self {
            shape: shape.clone(),
            pieces,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn pieces(&self) -> &[RegionPiece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Indices of every separating graph that `p` lies strictly above.
    pub fn candidates(&self, p: &[f64]) -> Vec<usize> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, piece)| piece.graph.height_above(p) > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Region of `p`, or `Inside` for points of the closed shape.
    pub fn region_of(&self, p: &[f64]) -> Result<Membership> {
        check_dim(self.shape.dim(), p.len())?;
        if self.shape.contains(p) {
            return Ok(Membership::Inside);
        }
        let q = self.shape.local(p);
        let index = match &self.shape {
            Shape::Rectangle { half_widths, .. } => (0..self.pieces.len()).find(|&i| {
                let d = Direction::from_index(i);
                let s = if d.positive { q[d.axis] } else { -q[d.axis] };
                s > half_widths[d.axis]
            }),
            Shape::Ball { .. } => None,
        };
        let index = index.unwrap_or_else(|| {
            let mut axis = 0;
            for (k, v) in q.iter().enumerate() {
                if v.abs() > q[axis].abs() {
                    axis = k;
                }
            }
            Direction {
                axis,
                positive: q[axis] >= 0.0,
            }
            .index()
        });
        Ok(Membership::Region(index))
    }
}
