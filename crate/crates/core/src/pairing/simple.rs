use crate::error::{check_dim, invalid, Result};
use crate::geometry::{dist, Rotation, Shape};
use crate::measure::DiscreteMeasure;
use crate::rng::SplitMix64;

/// Which indicator family a simple function is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionSpace {
    Balls,
    Rectangles,
}

/// Finite linear combination `sum_i a_i chi_{Q_i}` of closed-shape indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    space: FunctionSpace,
    dim: usize,
    terms: Vec<(f64, Shape)>,
}

impl SimpleFunction {
    pub fn new(space: FunctionSpace, dim: usize, terms: Vec<(f64, Shape)>) -> Result<Self> {
        for (a, s) in &terms {
            check_dim(dim, s.dim())?;
            if !a.is_finite() {
                return Err(invalid("simple-function coefficients must be finite"));
            }
            let ok = match space {
                FunctionSpace::Balls => s.is_ball(),
                FunctionSpace::Rectangles => !s.is_ball(),
            };
            if !ok {
                return Err(invalid(format!("shape does not belong to {space:?}")));
            }
        }
        Ok(Self { space, dim, terms })
    }

    /// `chi_shape`.
    pub fn indicator(shape: Shape) -> Self {
        let space = if shape.is_ball() {
            FunctionSpace::Balls
        } else {
            FunctionSpace::Rectangles
        };
        Self {
            space,
            dim: shape.dim(),
            terms: vec![(1.0, shape)],
        }
    }

    pub fn space(&self) -> FunctionSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, Shape)] {
        &self.terms
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(_, s)| s.contains(p))
            .map(|(a, _)| a)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            space: self.space,
            dim: self.dim,
            terms: self.terms.iter().map(|(a, s)| (c * a, s.clone())).collect(),
        }
    }

    /// Formal sum: the terms of `self` followed by those of `other`.
    pub fn plus(&self, other: &SimpleFunction) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if self.space != other.space {
            return Err(invalid("cannot add simple functions from different spaces"));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.space, self.dim, terms)
    }

    /// `1..=max_terms` random shapes centred in the box `[lo, hi]`, sizes
    /// between 5% and 40% of the box diagonal, coefficients uniform in
    /// `[-1, 1]`.
    pub fn random(
        space: FunctionSpace,
        lo: &[f64],
        hi: &[f64],
        max_terms: usize,
        rng: &mut SplitMix64,
    ) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if max_terms == 0 {
            return Err(invalid("need at least one term"));
        }
        let dim = lo.len();
        let diam = dist(lo, hi).max(1e-12);
        let count = 1 + rng.index(max_terms);
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.uniform_in(*a, *b)).collect();
            let shape = match space {
                FunctionSpace::Balls => Shape::ball(center, rng.uniform_in(0.05, 0.4) * diam)?,
                FunctionSpace::Rectangles => {
                    let half: Vec<f64> = (0..dim).map(|_| rng.uniform_in(0.05, 0.4) * diam).collect();
                    Shape::rectangle(center, half, Rotation::random(dim, rng))?
                }
            };
            terms.push((rng.uniform_in(-1.0, 1.0), shape));
        }
        Self::new(space, dim, terms)
    }

    /// Like [`SimpleFunction::random`] inside the bounding box of `mu`,
    /// resampling until the function is nonzero on some atom.
    pub fn random_nonzero_on(
        mu: &DiscreteMeasure,
        space: FunctionSpace,
        max_terms: usize,
        rng: &mut SplitMix64,
    ) -> Result<Self> {
        let (lo, hi) = mu
            .bounding_box()
            .ok_or_else(|| invalid("cannot sample on an empty measure"))?;
        for _ in 0..10_000 {
            let f = Self::random(space, &lo, &hi, max_terms, rng)?;
            if mu.positions().any(|p| f.eval(p) != 0.0) {
                return Ok(f);
            }
        }
        Err(invalid("could not sample a simple function that is nonzero on the measure"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_algebra() {
        let a = Shape::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b = Shape::ball(vec![1.0, 0.0], 1.0).unwrap();
        let f = SimpleFunction::new(FunctionSpace::Balls, 2, vec![(2.0, a), (-0.5, b)]).unwrap();
        assert_eq!(f.eval(&[0.5, 0.0]), 1.5);
        assert_eq!(f.eval(&[-0.9, 0.0]), 2.0);
        assert_eq!(f.eval(&[5.0, 0.0]), 0.0);
        assert_eq!(f.scaled(2.0).eval(&[0.5, 0.0]), 3.0);
        assert_eq!(f.plus(&f).unwrap().eval(&[0.5, 0.0]), 3.0);
        let r = Shape::aligned_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(SimpleFunction::new(FunctionSpace::Balls, 2, vec![(1.0, r.clone())]).is_err());
        assert!(f.plus(&SimpleFunction::indicator(r)).is_err());
    }

    #[test]
    fn random_functions_are_nonzero_on_the_measure() {
        let mu = DiscreteMeasure::new(2, vec![0.0, 0.0, 1.0, 1.0, 0.5, 0.2], vec![1.0; 3], 0.1).unwrap();
        let mut rng = SplitMix64::new(11);
        for space in [FunctionSpace::Balls, FunctionSpace::Rectangles] {
            for _ in 0..50 {
                let f = SimpleFunction::random_nonzero_on(&mu, space, 5, &mut rng).unwrap();
                assert!((1..=5).contains(&f.terms().len()));
                assert!(f.terms().iter().all(|(a, _)| (-1.0..=1.0).contains(a)));
                assert!(mu.positions().any(|p| f.eval(p) != 0.0));
            }
        }
    }
}
