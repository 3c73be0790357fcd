//! Truncated and maximal singular integrals of discrete measures.
//!
//! All sums run in a fixed order through [`CompensatedSum`], so results do not
//! depend on the number of worker threads.

mod nontangential;
mod pairs;
mod schedule;
mod truncation;

pub use nontangential::{nontangential_max, MAX_MESH_POINTS};
pub use pairs::{
    bound_constants, cancellation_bound, double_truncated, pair_sum_schedule, BoundConstants,
    PairSums, MAX_PAIRS,
};
pub use schedule::{cauchy_tail, pv_estimate, truncated_schedule, EpsSchedule, PVResult, RESOLUTION_FACTOR};
pub use truncation::{
    hl_maximal, maximal, maximal_at, maximal_many, truncated, truncated_charged, MaximalValue,
};

use crate::error::{check_dim, invalid, Result};
use crate::measure::DiscreteMeasure;
use crate::pairing::SimpleFunction;
use crate::sum::CompensatedSum;

/// Integrand `g` on the atoms of a measure.
#[derive(Debug, Clone)]
pub enum DensityFunction {
    One,
    /// One value per atom, in atom order.
    Table(Vec<f64>),
    Simple(SimpleFunction),
}

impl DensityFunction {
    /// `g(y_a)` for every atom.
    pub fn values(&self, nu: &DiscreteMeasure) -> Result<Vec<f64>> {
        let v = match self {
            DensityFunction::One => vec![1.0; nu.len()],
            DensityFunction::Table(t) => {
                check_dim(nu.len(), t.len())?;
                t.clone()
            }
            DensityFunction::Simple(f) => {
                check_dim(nu.dim(), f.dim())?;
                nu.positions().map(|p| f.eval(p)).collect()
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("density function must be finite at every atom"));
        }
        Ok(v)
    }

    /// Signed atom charges `q_a = g(y_a) w_a`.
    pub fn charges(&self, nu: &DiscreteMeasure) -> Result<Vec<f64>> {
        Ok(self
            .values(nu)?
            .into_iter()
            .zip(nu.weights())
            .map(|(g, w)| g * w)
            .collect())
    }
}

/// `(sum_a |h_a|^p w_a)^(1/p)` for per-atom values `h`.
pub fn lp_norm(mu: &DiscreteMeasure, h: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("L^p norm needs 1 <= p < inf, got {p}")));
    }
    check_dim(mu.len(), h.len())?;
    let mut acc = CompensatedSum::new();
    for (v, w) in h.iter().zip(mu.weights()) {
        acc.add(v.abs().powf(p) * w);
    }
    Ok(acc.value().max(0.0).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_halves() -> DiscreteMeasure {
        DiscreteMeasure::new(2, vec![0.0, 0.0, 1.0, 0.0], vec![0.5, 0.5], 0.1).unwrap()
    }

    #[test]
    fn lp_examples() {
        let mu = two_halves();
        assert_eq!(lp_norm(&mu, &[1.0, 1.0], 2.0).unwrap(), 1.0);
        assert_eq!(lp_norm(&mu, &[0.0, 0.0], 3.0).unwrap(), 0.0);
        assert!((lp_norm(&mu, &[1.0, 3.0], 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(lp_norm(&mu, &[1.0, 3.0], 0.5).is_err());
        assert!(lp_norm(&mu, &[1.0], 2.0).is_err());
    }

    proptest! {
        #[test]
        fn lp_is_homogeneous(
            vals in prop::collection::vec(-10.0f64..10.0, 2),
            c in -5.0f64..5.0,
            p in 1.0f64..4.0,
        ) {
            let mu = two_halves();
            let base = lp_norm(&mu, &vals, p).unwrap();
            let scaled: Vec<f64> = vals.iter().map(|v| c * v).collect();
            let s = lp_norm(&mu, &scaled, p).unwrap();
            prop_assert!((s - c.abs() * base).abs() <= 1e-14 * (c.abs() * base).max(1e-300) * 4.0);
        }
    }
}
