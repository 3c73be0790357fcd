use rayon::prelude::*;

use crate::error::{check_dim, invalid, Result};
use crate::kernel::KernelFunction;
use crate::measure::DiscreteMeasure;
use crate::sum::CompensatedSum;

use super::DensityFunction;

/// Value of `M_nu g(x)`; `Infinite` when a charged atom sits at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaximalValue {
    Finite(f64),
    Infinite,
}

impl MaximalValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MaximalValue::Finite(v) => Some(v),
            MaximalValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MaximalValue::Infinite)
    }
}

fn check_point(nu: &DiscreteMeasure, q: &[f64], x: &[f64]) -> Result<()> {
    check_dim(nu.dim(), x.len())?;
    check_dim(nu.len(), q.len())
}

/// `T^eps` with precomputed charges `q_a = g(y_a) w_a`.
pub fn truncated_charged<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    q: &[f64],
    x: &[f64],
    eps: f64,
) -> Result<f64> {
    check_point(nu, q, x)?;
    check_dim(nu.dim(), k.dim())?;
    if !(eps > 0.0) {
        return Err(invalid(format!("truncation radius must be positive, got {eps}")));
    }
    let mut diff = vec![0.0; nu.dim()];
    let mut acc = CompensatedSum::new();
    for (y, &qa) in nu.positions().zip(q) {
        let mut r2 = 0.0;
        for ((d, a), b) in diff.iter_mut().zip(x).zip(y) {
            *d = a - b;
            r2 += *d * *d;
        }
        if r2.sqrt() > eps {
            acc.add(k.value_r2(&diff, r2) * qa);
        }
    }
    Ok(acc.value())
}

/// `T^eps_nu g(x) = sum over atoms with |x - y| > eps of K(x - y) g(y) w`.
pub fn truncated<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    g: &DensityFunction,
    x: &[f64],
    eps: f64,
) -> Result<f64> {
    truncated_charged(nu, k, &g.charges(nu)?, x, eps)
}

/// Distances from `x` to the atoms off `x`, with kernel values, sorted by
/// distance (stable, so ties keep atom order).
struct Field {
    dist: Vec<f64>,
    kval: Vec<f64>,
    atom: Vec<usize>,
}

impl Field {
    fn new<K: KernelFunction + ?Sized>(nu: &DiscreteMeasure, k: &K, x: &[f64]) -> Self {
        let mut diff = vec![0.0; nu.dim()];
        let mut rows: Vec<(f64, f64, usize)> = Vec::with_capacity(nu.len());
        for (i, y) in nu.positions().enumerate() {
            let mut r2 = 0.0;
            for ((d, a), b) in diff.iter_mut().zip(x).zip(y) {
                *d = a - b;
                r2 += *d * *d;
            }
            if r2 > 0.0 {
                rows.push((r2.sqrt(), k.value_r2(&diff, r2), i));
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            dist: rows.iter().map(|r| r.0).collect(),
            kval: rows.iter().map(|r| r.1).collect(),
            atom: rows.iter().map(|r| r.2).collect(),
        }
    }

    /// `sup_eps |T^eps|`: `T^eps` is the sum over atoms farther than `eps`,
    /// constant between consecutive distinct distances, so the supremum is
    /// the largest absolute suffix sum taken at group boundaries (or 0).
    fn sup(&self, q: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut best = 0.0f64;
        let n = self.dist.len();
        for j in (0..n).rev() {
            acc.add(self.kval[j] * q[self.atom[j]]);
            if j == 0 || self.dist[j - 1] != self.dist[j] {
                best = best.max(acc.value().abs());
            }
        }
        best
    }
}

/// `T*_nu g(x) = sup_{eps > 0} |T^eps_nu g(x)|`, exactly.
pub fn maximal<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    g: &DensityFunction,
    x: &[f64],
) -> Result<f64> {
    let q = g.charges(nu)?;
    Ok(maximal_many(nu, k, &[&q], x)?[0])
}

/// `T*` at one point for several charge vectors, sorting the atoms once.
pub fn maximal_many<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    charges: &[&[f64]],
    x: &[f64],
) -> Result<Vec<f64>> {
    check_dim(nu.dim(), x.len())?;
    check_dim(nu.dim(), k.dim())?;
    for q in charges {
        check_dim(nu.len(), q.len())?;
    }
    let field = Field::new(nu, k, x);
    Ok(charges.iter().map(|q| field.sup(q)).collect())
}

/// `T*` at many points for several charge vectors; `out[i][j]` is point `i`,
/// charges `j`. Points are processed in parallel, results in point order.
pub fn maximal_at<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    charges: &[&[f64]],
    points: &[&[f64]],
) -> Result<Vec<Vec<f64>>> {
    points
        .par_iter()
        .map(|x| maximal_many(nu, k, charges, x))
        .collect()
}

/// `M_nu g(x) = sup_{r > 0} r^{1-n} int_{B(x, r)} |g| dnu` over closed balls.
///
/// Mass is constant between consecutive atom distances while `r^{1-n}`
/// decreases, so only the distinct distances need to be tried.
pub fn hl_maximal(nu: &DiscreteMeasure, g: &DensityFunction, x: &[f64]) -> Result<MaximalValue> {
    let q = g.charges(nu)?;
    check_point(nu, &q, x)?;
    let p = (nu.dim() - 1) as i32;
    let mut rows: Vec<(f64, f64)> = Vec::with_capacity(nu.len());
    for (y, qa) in nu.positions().zip(&q) {
        if *qa == 0.0 {
            continue;
        }
        let d = crate::geometry::dist(x, y);
        if d == 0.0 {
            return Ok(MaximalValue::Infinite);
        }
        rows.push((d, qa.abs()));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = CompensatedSum::new();
    let mut best = 0.0f64;
    for j in 0..rows.len() {
        acc.add(rows[j].1);
        if j + 1 == rows.len() || rows[j + 1].0 != rows[j].0 {
            best = best.max(acc.value() / rows[j].0.powi(p));
        }
    }
    Ok(MaximalValue::Finite(best))
}
