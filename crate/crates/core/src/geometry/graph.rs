use std::f64::consts::SQRT_2;

use crate::error::{check_dim, invalid, Result};
use crate::rng::SplitMix64;

use super::{norm, Rotation};

/// Closed-form catalog of graph functions `f: R^{n-1} -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `f(u) = slope . u + offset`.
    Affine { slope: Vec<f64>, offset: f64 },
    /// `f(u) = amplitude * sum_k tri(u_k / period)` with the unit triangle
    /// wave `tri(s) = 2 |s - round(s)|` taking values in `[0, 1]`.
    Sawtooth { amplitude: f64, period: f64 },
    /// `f(u) = slope * |u|`.
    Cone { slope: f64 },
    /// `f(u) = amplitude * exp(-|u|^2 / width^2)`.
    SmoothBump { amplitude: f64, width: f64 },
    /// Upper cap of the sphere of `radius` about `(center, base)`, continued
    /// by its tangent cone of the given `slope` once the cap gets that steep.
    /// Used to separate a ball from the region above it.
    Cap {
        center: Vec<f64>,
        base: f64,
        radius: f64,
        slope: f64,
    },
}

impl Profile {
    fn validate(&self, dim: usize) -> Result<()> {
        let m = dim - 1;
        let finite_pos = |x: f64, what: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be positive and finite, got {x}")))
            }
        };
        match self {
            Profile::Affine { slope, offset } => {
                check_dim(m, slope.len())?;
                if !offset.is_finite() || slope.iter().any(|s| !s.is_finite()) {
                    return Err(invalid("affine profile has non-finite parameters"));
                }
            }
            Profile::Sawtooth { amplitude, period } => {
                if !amplitude.is_finite() {
                    return Err(invalid("sawtooth amplitude must be finite"));
                }
                finite_pos(*period, "sawtooth period")?;
            }
            Profile::Cone { slope } => {
                if !slope.is_finite() {
                    return Err(invalid("cone slope must be finite"));
                }
            }
            Profile::SmoothBump { amplitude, width } => {
                if !amplitude.is_finite() {
                    return Err(invalid("bump amplitude must be finite"));
                }
                finite_pos(*width, "bump width")?;
            }
            Profile::Cap {
                center,
                base,
                radius,
                slope,
            } => {
                check_dim(m, center.len())?;
                if !base.is_finite() {
                    return Err(invalid("cap base must be finite"));
                }
                finite_pos(*radius, "cap radius")?;
                finite_pos(*slope, "cap slope")?;
            }
        }
        Ok(())
    }

    /// Value at `u` (length `n - 1`).
    #[inline]
    pub fn value(&self, u: &[f64]) -> f64 {
        match self {
            Profile::Affine { slope, offset } => {
                offset + slope.iter().zip(u).map(|(s, x)| s * x).sum::<f64>()
            }
            Profile::Sawtooth { amplitude, period } => {
                amplitude
                    * u.iter()
                        .map(|x| {
                            let s = x / period;
                            2.0 * (s - s.round()).abs()
                        })
                        .sum::<f64>()
            }
            Profile::Cone { slope } => slope * norm(u),
            Profile::SmoothBump { amplitude, width } => {
                let r2: f64 = u.iter().map(|x| x * x).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
            Profile::Cap {
                center,
                base,
                radius,
                slope,
            } => {
                let rho = u
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let secant = (1.0 + slope * slope).sqrt();
                if rho <= radius * slope / secant {
                    base + (radius * radius - rho * rho).sqrt()
                } else {
                    base + radius * secant - slope * rho
                }
            }
        }
    }

    /// Exact Lipschitz constant of the profile on `R^{dim-1}`.
    pub fn lipschitz(&self, dim: usize) -> f64 {
        match self {
            Profile::Affine { slope, .. } => norm(slope),
            Profile::Sawtooth { amplitude, period } => {
                2.0 * amplitude.abs() * ((dim - 1) as f64).sqrt() / period
            }
            Profile::Cone { slope } => slope.abs(),
            Profile::SmoothBump { amplitude, width } => {
                // max of 2 A r / w^2 exp(-r^2/w^2), attained at r = w / sqrt 2
                amplitude.abs() * SQRT_2 * (-0.5f64).exp() / width
            }
            Profile::Cap { slope, .. } => *slope,
        }
    }
}

/// Position of a point relative to a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Above,
    On,
    Below,
}

/// Axis-aligned box in parameter space `R^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(invalid("parameter box must have at least one axis"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(invalid("parameter box needs finite lo < hi on every axis"));
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| rng.uniform_in(*a, *b))
            .collect()
    }
}

/// Graph `C_f = {(u, f(u))}` of a Lipschitz function, placed in ambient space
/// by an orthogonal `rotation` (graph-frame coordinates `q = R^T p`, the last
/// coordinate being the height).
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzGraph {
    dim: usize,
    profile: Profile,
    lip_declared: f64,
    rotation: Rotation,
}

impl LipschitzGraph {
    /// Graph in the standard frame with its exact Lipschitz constant declared.
    pub fn new(dim: usize, profile: Profile) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("ambient dimension must be at least 2, got {dim}")));
        }
        profile.validate(dim)?;
        let lip_declared = profile.lipschitz(dim);
        Ok(Self {
            dim,
            profile,
            lip_declared,
            rotation: Rotation::identity(dim),
        })
    }

    /// `f = 0`.
    pub fn flat(dim: usize) -> Self {
        Self::new(
            dim,
            Profile::Affine {
                slope: vec![0.0; dim - 1],
                offset: 0.0,
            },
        )
        .expect("flat profile is valid")
    }

    pub fn with_rotation(mut self, rotation: Rotation) -> Result<Self> {
        check_dim(self.dim, rotation.dim())?;
        self.rotation = rotation;
        Ok(self)
    }

    /// Override the declared constant (checked later by [`lipschitz_estimate`]).
    pub fn with_declared_lipschitz(mut self, lip: f64) -> Result<Self> {
        if !(lip.is_finite() && lip >= 0.0) {
            return Err(invalid(format!("declared Lipschitz constant must be >= 0, got {lip}")));
        }
        self.lip_declared = lip;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn lip_declared(&self) -> f64 {
        self.lip_declared
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    /// `f(u)` for `u` in parameter space.
    #[inline]
    pub fn f(&self, u: &[f64]) -> f64 {
        self.profile.value(u)
    }

    /// Graph-frame coordinates of an ambient point.
    pub fn to_frame(&self, p: &[f64]) -> Vec<f64> {
        self.rotation.apply_transpose(p)
    }

    /// Ambient coordinates of a graph-frame point.
    pub fn from_frame(&self, q: &[f64]) -> Vec<f64> {
        self.rotation.apply(q)
    }

    /// Ambient point `(u, f(u) + lift)`.
    pub fn point_at(&self, u: &[f64], lift: f64) -> Vec<f64> {
        let mut q = u.to_vec();
        q.push(self.f(u) + lift);
        self.from_frame(&q)
    }

    /// Signed height `t - f(u)` of `p` above the graph, in the graph frame.
    #[inline]
    pub fn height_above(&self, p: &[f64]) -> f64 {
        let mut q = [0.0; 16];
        if self.dim <= 16 {
            let q = &mut q[..self.dim];
            self.rotation.apply_transpose_into(p, q);
            q[self.dim - 1] - self.f(&q[..self.dim - 1])
        } else {
            let q = self.to_frame(p);
            q[self.dim - 1] - self.f(&q[..self.dim - 1])
        }
    }

    /// Above/On/Below with the relative tolerance `1e-12 (1 + |p|)`.
    pub fn classify(&self, p: &[f64]) -> Side {
        let h = self.height_above(p);
        let tol = 1e-12 * (1.0 + norm(p));
        if h > tol {
            Side::Above
        } else if h < -tol {
            Side::Below
        } else {
            Side::On
        }
    }
}

/// Largest sampled difference quotient `|f(u) - f(v)| / |u - v|` over
/// `sample_count` pairs in `domain`. Half the pairs are uniform in the box,
/// half are close pairs at separation up to `1e-3` of the box diameter.
pub fn lipschitz_estimate(
    graph: &LipschitzGraph,
    sample_count: usize,
    domain: &ParamBox,
    seed: u64,
) -> Result<f64> {
    if sample_count < 2 {
        return Err(invalid("lipschitz_estimate needs at least 2 samples"));
    }
    check_dim(graph.dim() - 1, domain.dim())?;
    let mut rng = SplitMix64::new(seed);
    let close = 1e-3 * domain.diameter();
    let mut best = 0.0f64;
    for i in 0..sample_count {
        let u = domain.sample(&mut rng);
        let v = if i % 2 == 0 {
            domain.sample(&mut rng)
        } else {
            let dir = rng.unit_vector(domain.dim());
            let step = close * rng.uniform_in(0.01, 1.0);
            u.iter().zip(&dir).map(|(a, d)| a + step * d).collect()
        };
        let duv = super::dist(&u, &v);
        if duv > 0.0 {
            best = best.max((graph.f(&u) - graph.f(&v)).abs() / duv);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone1() -> LipschitzGraph {
        LipschitzGraph::new(2, Profile::Cone { slope: 1.0 }).unwrap()
    }

    #[test]
    fn classify_examples() {
        let flat = LipschitzGraph::flat(2);
        assert_eq!(flat.classify(&[0.0, 1.0]), Side::Above);
        assert_eq!(flat.classify(&[3.0, 0.0]), Side::On);
        assert_eq!(flat.classify(&[3.0, -1e-3]), Side::Below);
        assert_eq!(cone1().classify(&[1.0, 0.5]), Side::Below);
    }

    #[test]
    fn on_tolerance_is_relative() {
        let flat = LipschitzGraph::flat(2);
        assert_eq!(flat.classify(&[1e6, 1e-8]), Side::On);
        assert_eq!(flat.classify(&[0.0, 1e-8]), Side::Above);
    }

    #[test]
    fn lipschitz_estimate_examples() {
        let d = ParamBox::cube(1, -1.0, 1.0).unwrap();
        let affine = LipschitzGraph::new(
            2,
            Profile::Affine {
                slope: vec![0.5],
                offset: 0.3,
            },
        )
        .unwrap();
        let est = lipschitz_estimate(&affine, 1000, &d, 1).unwrap();
        assert!((est - 0.5).abs() < 1e-9);
        assert!(est <= affine.lip_declared() * (1.0 + 1e-9));

        let est = lipschitz_estimate(&cone1(), 20_000, &d, 2).unwrap();
        assert!(est <= 1.0 + 1e-9 && est > 0.99, "cone estimate {est}");

        let constant = LipschitzGraph::new(
            2,
            Profile::Affine {
                slope: vec![0.0],
                offset: 4.0,
            },
        )
        .unwrap();
        assert_eq!(lipschitz_estimate(&constant, 100, &d, 3).unwrap(), 0.0);
        assert!(lipschitz_estimate(&constant, 1, &d, 3).is_err());
    }

    #[test]
    fn declared_constants_dominate_samples() {
        for dim in [2usize, 3] {
            let d = ParamBox::cube(dim - 1, -2.0, 2.0).unwrap();
            let profiles = [
                Profile::Sawtooth {
                    amplitude: 0.3,
                    period: 0.7,
                },
                Profile::SmoothBump {
                    amplitude: 0.5,
                    width: 0.4,
                },
                Profile::Cone { slope: -0.8 },
                Profile::Cap {
                    center: vec![0.1; dim - 1],
                    base: 0.0,
                    radius: 1.0,
                    slope: ((dim - 1) as f64).sqrt(),
                },
            ];
            for p in profiles {
                let g = LipschitzGraph::new(dim, p).unwrap();
                let est = lipschitz_estimate(&g, 50_000, &d, 9).unwrap();
                assert!(est <= g.lip_declared() * (1.0 + 1e-9), "{:?}: {est}", g.profile());
                assert!(est >= 0.9 * g.lip_declared(), "{:?}: {est}", g.profile());
            }
        }
    }

    #[test]
    fn cap_is_continuous_at_the_transition() {
        for slope in [1.0, 2f64.sqrt(), 3.0] {
            let p = Profile::Cap {
                center: vec![0.0],
                base: 0.0,
                radius: 2.0,
                slope,
            };
            let rho = 2.0 * slope / (1.0 + slope * slope).sqrt();
            let a = p.value(&[rho * (1.0 - 1e-12)]);
            let b = p.value(&[rho * (1.0 + 1e-12)]);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(LipschitzGraph::new(1, Profile::Cone { slope: 1.0 }).is_err());
        assert!(LipschitzGraph::new(
            3,
            Profile::Affine {
                slope: vec![1.0],
                offset: 0.0
            }
        )
        .is_err());
        assert!(LipschitzGraph::new(
            2,
            Profile::Sawtooth {
                amplitude: 1.0,
                period: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn rotated_classification_matches_frame() {
        let mut rng = SplitMix64::new(5);
        let r = Rotation::random(3, &mut rng);
        let g = LipschitzGraph::new(3, Profile::Cone { slope: 0.5 })
            .unwrap()
            .with_rotation(r)
            .unwrap();
        let above = g.point_at(&[0.3, -0.2], 0.1);
        let below = g.point_at(&[0.3, -0.2], -0.1);
        assert_eq!(g.classify(&above), Side::Above);
        assert_eq!(g.classify(&below), Side::Below);
    }
}
