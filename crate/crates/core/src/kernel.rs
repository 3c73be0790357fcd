//! Odd, homogeneous Calderón–Zygmund kernels and numerical checks of their
//! size and smoothness constants.

use crate::error::{check_dim, invalid, Error, Result};
use crate::rng::SplitMix64;

/// A real kernel on `R^n \ {0}` with declared size and gradient constants
/// `|K(x)| <= c0 |x|^{-(n-1)}` and `|grad K(x)| <= c1 |x|^{-n}`.
///
/// `value` is only called with `x != 0`.
pub trait KernelFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// `value(x)` when `r2 = |x|^2` is already known.
    #[inline]
    fn value_r2(&self, x: &[f64], r2: f64) -> f64 {
        let _ = r2;
        self.value(x)
    }
    fn c0(&self) -> f64;
    fn c1(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelFamily {
    /// `K(x) = x_axis / |x|^n` (axis is zero-based).
    Riesz { axis: usize },
    /// `K(x) = x^P / |x|^{n-1+|P|}` with `|P|` odd.
    OddHomogeneous { exponents: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: usize,
    family: KernelFamily,
    exponents: Vec<u32>,
    radial_power: u32,
    c0: f64,
    c1: f64,
}

impl Kernel {
    pub fn riesz(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(invalid(format!("Riesz axis {axis} out of range for dimension {dim}")));
        }
        let mut exponents = vec![0; dim];
        exponents[axis] = 1;
        let mut k = Self::build(dim, KernelFamily::Riesz { axis }, exponents)?;
        // |grad K|^2 |x|^{2n} = 1 + n (n - 2) (x_i/|x|)^2 on the unit sphere
        k.c1 = ((dim - 1) as f64).max(1.0);
        Ok(k)
    }

    pub fn odd_homogeneous(dim: usize, exponents: Vec<u32>) -> Result<Self> {
        Self::build(
            dim,
            KernelFamily::OddHomogeneous {
                exponents: exponents.clone(),
            },
            exponents,
        )
    }

    fn build(dim: usize, family: KernelFamily, exponents: Vec<u32>) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("kernels need ambient dimension >= 2"));
        }
        check_dim(dim, exponents.len())?;
        let degree: u32 = exponents.iter().sum();
        if degree % 2 == 0 {
            return Err(invalid(format!("monomial degree {degree} is not odd")));
        }
        // sup of |x^P| on the unit sphere, attained at x_k^2 = p_k / d
        let d = degree as f64;
        let c0: f64 = exponents
            .iter()
            .filter(|&&p| p > 0)
            .map(|&p| (p as f64 / d).powf(p as f64 / 2.0))
            .product();
        // |grad K| |x|^n <= |grad x^P| + (n - 1 + d) |x^P| on the unit sphere
        let grad_monomial = exponents
            .iter()
            .map(|&p| (p as f64) * (p as f64))
            .sum::<f64>()
            .sqrt();
        let radial_power = dim as u32 - 1 + degree;
        let c1 = grad_monomial + radial_power as f64 * c0;
        Ok(Self {
            dim,
            family,
            exponents,
            radial_power,
            c0,
            c1,
        })
    }

    /// Replace the default constants.
    pub fn with_constants(mut self, c0: f64, c1: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0 && c1.is_finite() && c1 > 0.0) {
            return Err(invalid(format!("declared constants must be positive, got c0={c0}, c1={c1}")));
        }
        self.c0 = c0;
        self.c1 = c1;
        Ok(self)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// Closed form of `|grad K(x)| |x|^n` where one is known: for the Riesz
    /// component `x_i / |x|^n` it is `sqrt(1 + n (n - 2) (x_i / |x|)^2)`.
    pub fn gradient_scale_exact(&self, x: &[f64]) -> Option<f64> {
        match self.family {
            KernelFamily::Riesz { axis } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = x[axis] / r;
                let n = self.dim as f64;
                Some((1.0 + n * (n - 2.0) * c * c).sqrt())
            }
            KernelFamily::OddHomogeneous { .. } => None,
        }
    }

    /// Checked evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::KernelSingularity);
        }
        Ok(self.value(x))
    }
}

#[inline]
fn radial(r2: f64, power: u32) -> f64 {
    if power % 2 == 0 {
        r2.powi((power / 2) as i32)
    } else {
        r2.powi((power / 2) as i32) * r2.sqrt()
    }
}

impl KernelFunction for Kernel {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.value_r2(x, r2)
    }

    #[inline]
    fn value_r2(&self, x: &[f64], r2: f64) -> f64 {
        let num = match &self.family {
            KernelFamily::Riesz { axis } => x[*axis],
            KernelFamily::OddHomogeneous { .. } => x
                .iter()
                .zip(&self.exponents)
                .map(|(v, &p)| v.powi(p as i32))
                .product(),
        };
        num / radial(r2, self.radial_power)
    }

    fn c0(&self) -> f64 {
        self.c0
    }

    fn c1(&self) -> f64 {
        self.c1
    }
}

/// Outcome of comparing a sampled supremum against a declared constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub sup: f64,
    pub declared: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntisymmetryCheck {
    /// `max |K(x) + K(-x)|`.
    pub max_residual: f64,
    /// `max |K(x) + K(-x)| / |K(x)|` over samples with `K(x) != 0`.
    pub max_relative: f64,
    pub passed: bool,
}

/// Relative tolerance for the size bound.
pub const SIZE_TOL: f64 = 1e-9;
/// Relative tolerance for the gradient bound (finite-difference error).
pub const GRADIENT_TOL: f64 = 1e-4;
/// Relative tolerance for `K(x) + K(-x)`.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Geometric shells `1e-3 ..= 1e3`.
pub fn default_shells() -> Vec<f64> {
    (0..=6).map(|i| 10f64.powi(i - 3)).collect()
}

fn sample_point(dim: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let r = rng.log_uniform(1e-3, 1e3);
    rng.unit_vector(dim).into_iter().map(|v| v * r).collect()
}

pub fn validate_antisymmetry<K: KernelFunction + ?Sized>(
    k: &K,
    sample_count: usize,
    seed: u64,
) -> Result<AntisymmetryCheck> {
    if sample_count == 0 {
        return Err(invalid("antisymmetry check needs at least one sample"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut max_residual = 0.0f64;
    let mut max_relative = 0.0f64;
    let mut passed = true;
    for _ in 0..sample_count {
        let x = sample_point(k.dim(), &mut rng);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let kx = k.value(&x);
        let res = (kx + k.value(&neg)).abs();
        max_residual = max_residual.max(res);
        if kx != 0.0 {
            max_relative = max_relative.max(res / kx.abs());
        }
        if res > ANTISYMMETRY_TOL * kx.abs() {
            passed = false;
        }
    }
    Ok(AntisymmetryCheck {
        max_residual,
        max_relative,
        passed,
    })
}

/// `sup |K(x)| |x|^{n-1}` over random directions on each shell.
pub fn validate_size<K: KernelFunction + ?Sized>(
    k: &K,
    shells: &[f64],
    samples_per_shell: usize,
    seed: u64,
) -> Result<BoundCheck> {
    if shells.is_empty() || samples_per_shell == 0 {
        return Err(invalid("size check needs shells and samples"));
    }
    let n = k.dim();
    let mut rng = SplitMix64::new(seed);
    let mut sup = 0.0f64;
    for &r in shells {
        for _ in 0..samples_per_shell {
            let x: Vec<f64> = rng.unit_vector(n).into_iter().map(|v| v * r).collect();
            sup = sup.max(k.value(&x).abs() * r.powi(n as i32 - 1));
        }
    }
    let declared = k.c0();
    Ok(BoundCheck {
        sup,
        declared,
        passed: sup <= declared * (1.0 + SIZE_TOL),
    })
}

/// Central-difference gradient with per-axis step `rel_step * |x|`.
pub fn fd_gradient<K: KernelFunction + ?Sized>(k: &K, x: &[f64], rel_step: f64) -> Vec<f64> {
    let h = rel_step * x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let plus = k.value(&y);
            y[i] = x[i] - h;
            let minus = k.value(&y);
            y[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `sup |grad K(x)| |x|^n`, gradient by central finite differences.
pub fn validate_gradient<K: KernelFunction + ?Sized>(
    k: &K,
    shells: &[f64],
    samples_per_shell: usize,
    rel_step: f64,
    seed: u64,
) -> Result<BoundCheck> {
    if shells.is_empty() || samples_per_shell == 0 {
        return Err(invalid("gradient check needs shells and samples"));
    }
    if !(rel_step > 0.0 && rel_step < 1.0) {
        return Err(invalid("finite-difference step must be in (0, 1)"));
    }
    let n = k.dim();
    let mut rng = SplitMix64::new(seed);
    let mut sup = 0.0f64;
    for &r in shells {
        for _ in 0..samples_per_shell {
            let x: Vec<f64> = rng.unit_vector(n).into_iter().map(|v| v * r).collect();
            let g = fd_gradient(k, &x, rel_step);
            let mag = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            sup = sup.max(mag * r.powi(n as i32));
        }
    }
    let declared = k.c1();
    Ok(BoundCheck {
        sup,
        declared,
        passed: sup <= declared * (1.0 + GRADIENT_TOL),
    })
}

/// Largest relative deviation of the finite-difference `|grad K| |x|^n` from
/// its closed form over random points; `None` when no closed form exists.
pub fn gradient_profile_error(
    k: &Kernel,
    samples: usize,
    rel_step: f64,
    seed: u64,
) -> Result<Option<f64>> {
    if samples == 0 {
        return Err(invalid("gradient profile check needs at least one sample"));
    }
    let n = k.dim();
    if k.gradient_scale_exact(&vec![1.0; n]).is_none() {
        return Ok(None);
    }
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_point(n, &mut rng);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = fd_gradient(k, &x, rel_step);
        let mag = g.iter().map(|v| v * v).sum::<f64>().sqrt() * r.powi(n as i32);
        let exact = k.gradient_scale_exact(&x).unwrap_or(f64::NAN);
        worst = worst.max((mag - exact).abs() / exact);
    }
    Ok(Some(worst))
}
