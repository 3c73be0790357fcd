use crate::error::{check_dim, invalid, Error, Result};
use crate::kernel::KernelFunction;
use crate::measure::DiscreteMeasure;
use crate::sum::CompensatedSum;

use super::DensityFunction;

/// Smallest admissible truncation radius in units of the measure resolution.
pub const RESOLUTION_FACTOR: f64 = 4.0;

/// Default relative convergence tolerance for principal values.
pub const PV_TOLERANCE: f64 = 1e-3;

/// Strictly decreasing list of positive truncation radii.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule {
    eps: Vec<f64>,
}

impl EpsSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::Schedule("empty schedule".into()));
        }
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Schedule("radii must be positive and finite".into()));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("radii must be strictly decreasing".into()));
        }
        Ok(Self { eps })
    }

    /// `eps0 * ratio^k` for every `k` with value at least `eps_min`.
    pub fn geometric(eps0: f64, eps_min: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Schedule(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        if !(eps_min > 0.0 && eps0 >= eps_min && eps0.is_finite()) {
            return Err(Error::Schedule(format!(
                "need 0 < eps_min <= eps0, got eps0 = {eps0}, eps_min = {eps_min}"
            )));
        }
        let mut eps = Vec::new();
        let mut e = eps0;
        while e >= eps_min * (1.0 - 1e-12) {
            eps.push(e);
            e *= ratio;
        }
        Self::new(eps)
    }

    /// Halving schedule from `eps0` down to `eps_min`.
    pub fn halving(eps0: f64, eps_min: f64) -> Result<Self> {
        Self::geometric(eps0, eps_min, 0.5)
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.eps[0]
    }

    pub fn last(&self) -> f64 {
        self.eps[self.eps.len() - 1]
    }

    /// Index of the first radius strictly below `d`: a point at distance `d`
    /// survives truncation at exactly the radii from this index on.
    #[inline]
    pub fn bucket(&self, d: f64) -> usize {
        self.eps.partition_point(|&e| e >= d)
    }

    /// Reject schedules that go below `RESOLUTION_FACTOR * h`.
    pub fn check_floor(&self, resolution: f64) -> Result<()> {
        let floor = RESOLUTION_FACTOR * resolution;
        if self.last() < floor {
            return Err(Error::ResolutionFloor {
                value: self.last(),
                floor,
            });
        }
        Ok(())
    }
}

/// Spread `max - min` over the last quarter (at least two entries).
pub fn cauchy_tail(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let q = values.len().div_ceil(4).max(2);
    let tail = &values[values.len() - q..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// `T^eps_nu g(x)` for every radius of the schedule in one pass over the
/// atoms: each term is booked in the bucket of the first radius it survives,
/// then buckets are accumulated from the largest radius down.
pub fn truncated_schedule<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    q: &[f64],
    x: &[f64],
    schedule: &EpsSchedule,
) -> Result<Vec<f64>> {
    check_dim(nu.dim(), x.len())?;
    check_dim(nu.dim(), k.dim())?;
    check_dim(nu.len(), q.len())?;
    let s = schedule.len();
    let mut buckets = vec![CompensatedSum::new(); s + 1];
    let mut diff = vec![0.0; nu.dim()];
    for (y, &qa) in nu.positions().zip(q) {
        let mut r2 = 0.0;
        for ((d, a), b) in diff.iter_mut().zip(x).zip(y) {
            *d = a - b;
            r2 += *d * *d;
        }
        let b = schedule.bucket(r2.sqrt());
        if b < s {
            buckets[b].add(k.value_r2(&diff, r2) * qa);
        }
    }
    let mut acc = CompensatedSum::new();
    Ok(buckets[..s]
        .iter()
        .map(|b| {
            acc.merge(b);
            acc.value()
        })
        .collect())
}

/// Truncated values along a decreasing schedule and a convergence verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PVResult {
    pub estimates: Vec<(f64, f64)>,
    pub converged: bool,
    pub tail: f64,
    /// `max |value|` along the schedule; the tolerance is relative to it.
    pub scale: f64,
    pub tolerance: f64,
    pub limit_estimate: f64,
}

impl PVResult {
    pub fn from_values(schedule: &EpsSchedule, values: Vec<f64>, rel_tol: f64) -> Self {
        let tail = cauchy_tail(&values);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tolerance = rel_tol * scale;
        Self {
            estimates: schedule.values().iter().copied().zip(values.iter().copied()).collect(),
            converged: tail < tolerance || tail == 0.0,
            tail,
            scale,
            tolerance,
            limit_estimate: *values.last().unwrap_or(&0.0),
        }
    }
}

/// Principal-value estimate of `T_nu g(x)` along `schedule`, which must have
/// at least 4 radii, all at least `RESOLUTION_FACTOR` times the resolution.
pub fn pv_estimate<K: KernelFunction + ?Sized>(
    nu: &DiscreteMeasure,
    k: &K,
    g: &DensityFunction,
    x: &[f64],
    schedule: &EpsSchedule,
    rel_tol: Option<f64>,
) -> Result<PVResult> {
    if schedule.len() < 4 {
        return Err(Error::Schedule(format!(
            "principal values need at least 4 radii, got {}",
            schedule.len()
        )));
    }
    schedule.check_floor(nu.resolution())?;
    let tol = rel_tol.unwrap_or(PV_TOLERANCE);
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let values = truncated_schedule(nu, k, &g.charges(nu)?, x, schedule)?;
    Ok(PVResult::from_values(schedule, values, tol))
}
