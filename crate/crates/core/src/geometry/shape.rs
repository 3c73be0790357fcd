use crate::error::{check_dim, invalid, Result};

use super::{dist_sq, Rotation};

/// Closed ball or closed (possibly rotated) rectangle.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Rectangle {
        center: Vec<f64>,
        half_widths: Vec<f64>,
        rotation: Rotation,
    },
}

impl Shape {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() < 2 || center.iter().any(|x| !x.is_finite()) {
            return Err(invalid("ball center must be a finite point in dimension >= 2"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Shape::Ball { center, radius })
    }

    pub fn rectangle(center: Vec<f64>, half_widths: Vec<f64>, rotation: Rotation) -> Result<Self> {
        if center.len() < 2 || center.iter().any(|x| !x.is_finite()) {
            return Err(invalid("rectangle center must be a finite point in dimension >= 2"));
        }
        check_dim(center.len(), half_widths.len())?;
        check_dim(center.len(), rotation.dim())?;
        if half_widths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(invalid("rectangle half widths must be positive"));
        }
        Ok(Shape::Rectangle {
            center,
            half_widths,
            rotation,
        })
    }

    /// Axis-aligned rectangle `[lo, hi]`.
    pub fn aligned_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let center = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
        Self::rectangle(center, half, Rotation::identity(lo.len()))
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Shape::Ball { center, .. } | Shape::Rectangle { center, .. } => center,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, Shape::Ball { .. })
    }

    /// Rectangle-frame coordinates `R^T (p - c)`.
    pub(crate) fn local(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Shape::Ball { center, .. } => p.iter().zip(center).map(|(a, b)| a - b).collect(),
            Shape::Rectangle {
                center, rotation, ..
            } => {
                let d: Vec<f64> = p.iter().zip(center).map(|(a, b)| a - b).collect();
                rotation.apply_transpose(&d)
            }
        }
    }

    /// Closed membership.
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Shape::Ball { center, radius } => dist_sq(p, center) <= radius * radius,
            Shape::Rectangle { half_widths, .. } => self
                .local(p)
                .iter()
                .zip(half_widths)
                .all(|(q, h)| q.abs() <= *h),
        }
    }

    /// Radius of a ball about the center that contains the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            Shape::Ball { radius, .. } => *radius,
            Shape::Rectangle { half_widths, .. } => {
                half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
            }
        }
    }

    /// Ambient point at local offset `q` from the center (rectangle frame).
    pub(crate) fn from_local(&self, q: &[f64]) -> Vec<f64> {
        let d = match self {
            Shape::Ball { .. } => q.to_vec(),
            Shape::Rectangle { rotation, .. } => rotation.apply(q),
        };
        d.iter().zip(self.center()).map(|(a, b)| a + b).collect()
    }
}
