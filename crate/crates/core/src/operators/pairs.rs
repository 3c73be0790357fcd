use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::kernel::KernelFunction;
use crate::measure::DiscreteMeasure;
use crate::sum::CompensatedSum;

use super::EpsSchedule;

/// Largest `|A| * |B|` accepted by the direct double sums.
pub const MAX_PAIRS: u128 = 10_000_000_000;

const CHUNK: usize = 64;

/// Double truncated sums along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSums {
    /// One value per schedule radius.
    pub values: Vec<f64>,
    /// Largest `|K(x - y) w_x w_y|` over the pairs that survive some radius.
    pub max_abs_term: f64,
    /// Number of ordered pairs inspected.
    pub pairs: u128,
}

fn chunk_sums<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    outer: &[usize],
    inner: &[usize],
    schedule: &EpsSchedule,
) -> (Vec<CompensatedSum>, f64) {
    let s = schedule.len();
    let mut buckets = vec![CompensatedSum::new(); s];
    let mut max_term = 0.0f64;
    let mut diff = vec![0.0; mu.dim()];
    for &a in outer {
        let x = mu.position(a);
        let wa = mu.weight(a);
        for &b in inner {
            let y = mu.position(b);
            let mut r2 = 0.0;
            for ((d, p), q) in diff.iter_mut().zip(x).zip(y) {
                *d = p - q;
                r2 += *d * *d;
            }
            let bucket = schedule.bucket(r2.sqrt());
            if bucket < s {
                let term = k.value_r2(&diff, r2) * (wa * mu.weight(b));
                max_term = max_term.max(term.abs());
                buckets[bucket].add(term);
            }
        }
    }
    (buckets, max_term)
}

/// `sum_{a in outer} sum_{b in inner, |x_a - x_b| > eps} K(x_a - x_b) w_a w_b`
/// for every radius of the schedule, indices referring to atoms of `mu`.
///
/// Outer atoms are processed in fixed-size chunks whose partial sums are
/// merged in chunk order, so the result is independent of the thread count.
pub fn pair_sum_schedule<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    outer: &[usize],
    inner: &[usize],
    schedule: &EpsSchedule,
) -> Result<PairSums> {
    check_dim(mu.dim(), k.dim())?;
    let pairs = outer.len() as u128 * inner.len() as u128;
    if pairs > MAX_PAIRS {
        return Err(Error::TooManyPairs {
            pairs,
            limit: MAX_PAIRS,
        });
    }
    if let Some(&i) = outer.iter().chain(inner).find(|&&i| i >= mu.len()) {
        return Err(invalid(format!("atom index {i} out of range")));
    }
    let parts: Vec<(Vec<CompensatedSum>, f64)> = outer
        .par_chunks(CHUNK)
        .map(|chunk| chunk_sums(mu, k, chunk, inner, schedule))
        .collect();
    let mut total = vec![CompensatedSum::new(); schedule.len()];
    let mut max_abs_term = 0.0f64;
    for (buckets, m) in &parts {
        for (t, b) in total.iter_mut().zip(buckets) {
            t.merge(b);
        }
        max_abs_term = max_abs_term.max(*m);
    }
    let mut acc = CompensatedSum::new();
    let values = total
        .iter()
        .map(|b| {
            acc.merge(b);
            acc.value()
        })
        .collect();
    Ok(PairSums {
        values,
        max_abs_term,
        pairs,
    })
}

/// `sum_{x in A} sum_{y in B, |x - y| > eps} K(x - y) w_x w_y` where `A` and
/// `B` are the atoms of `mu` satisfying the two predicates.
pub fn double_truncated<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    region_a: impl Fn(&[f64]) -> bool,
    region_b: impl Fn(&[f64]) -> bool,
    eps: f64,
) -> Result<f64> {
    let schedule = EpsSchedule::new(vec![eps]).map_err(|_| {
        invalid(format!("truncation radius must be positive, got {eps}"))
    })?;
    let a = mu.indices_where(region_a);
    let b = mu.indices_where(region_b);
    Ok(pair_sum_schedule(mu, k, &a, &b, &schedule)?.values[0])
}

/// Rounding budget `N^2 2^-50 max|term|` for a double sum over `N` atoms
/// whose exact value is zero.
pub fn cancellation_bound(atoms: usize, max_abs_term: f64) -> f64 {
    let n = atoms as f64;
    n * n * 2f64.powi(-50) * max_abs_term
}

/// Constants of the non-tangential control estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// `4^n C1 + (16 L)^{n-1} C0`, used when `eps < |x - y|`.
    pub d1: f64,
    /// `4^n C1 + 2^{n-1} C0`, used when `eps >= |x - y|`.
    pub d2: f64,
    /// `max(3, d1, d2)`, valid for both cases at once.
    pub c_n: f64,
}

pub fn bound_constants<K: KernelFunction + ?Sized>(k: &K, aperture: f64) -> Result<BoundConstants> {
    if !(aperture > 1.0 && aperture.is_finite()) {
        return Err(invalid(format!("aperture L must exceed 1, got {aperture}")));
    }
    let n = k.dim() as i32;
    let d1 = 4f64.powi(n) * k.c1() + (16.0 * aperture).powi(n - 1) * k.c0();
    let d2 = 4f64.powi(n) * k.c1() + 2f64.powi(n - 1) * k.c0();
    Ok(BoundConstants {
        d1,
        d2,
        c_n: 3f64.max(d1).max(d2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    struct NoGradient;

    impl KernelFunction for NoGradient {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn c0(&self) -> f64 {
            1.0
        }
        fn c1(&self) -> f64 {
            0.0
        }
    }

    fn random_measure(seed: u64, n: usize) -> DiscreteMeasure {
        let mut rng = SplitMix64::new(seed);
        let coords: Vec<f64> = (0..2 * n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        DiscreteMeasure::new(2, coords, weights, 1e-3).unwrap()
    }

    #[test]
    fn constants_examples() {
        let k = Kernel::riesz(2, 0).unwrap();
        let c = bound_constants(&k, 2.0).unwrap();
        assert_eq!((c.d1, c.d2, c.c_n), (48.0, 18.0, 48.0));
        assert_eq!(bound_constants(&NoGradient, 2.0).unwrap().d1, 32.0);
        assert!(bound_constants(&k, 1.0).is_err());
    }

    #[test]
    fn same_region_cancels() {
        let mu = random_measure(3, 300);
        let k = Kernel::riesz(2, 0).unwrap();
        let all: Vec<usize> = (0..mu.len()).collect();
        let s = EpsSchedule::halving(1.0, 1.0 / 64.0).unwrap();
        let r = pair_sum_schedule(&mu, &k, &all, &all, &s).unwrap();
        let bound = cancellation_bound(mu.len(), r.max_abs_term);
        assert!(r.values.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn separated_regions_are_eps_independent() {
        let mu = random_measure(5, 200);
        let k = Kernel::riesz(2, 1).unwrap();
        let left = |p: &[f64]| p[0] < -0.5;
        let right = |p: &[f64]| p[0] > 0.5;
        let a = double_truncated(&mu, &k, left, right, 0.9).unwrap();
        let b = double_truncated(&mu, &k, left, right, 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_guard() {
        let mu = random_measure(1, 2);
        let k = Kernel::riesz(2, 0).unwrap();
        let huge = vec![0usize; 200_000];
        let s = EpsSchedule::new(vec![0.1]).unwrap();
        assert!(matches!(
            pair_sum_schedule(&mu, &k, &huge, &huge, &s),
            Err(Error::TooManyPairs { .. })
        ));
    }

    proptest! {
        #[test]
        fn swap_flips_sign(seed in any::<u64>(), eps in 0.01f64..1.0) {
            let mu = random_measure(seed, 80);
            let k = Kernel::riesz(2, 0).unwrap();
            let a = |p: &[f64]| p[1] > 0.0;
            let b = |p: &[f64]| p[1] <= 0.0;
            let ab = double_truncated(&mu, &k, a, b, eps).unwrap();
            let ba = double_truncated(&mu, &k, b, a, eps).unwrap();
            prop_assert!((ab + ba).abs() <= 1e-12 * ab.abs().max(1.0));
        }

        #[test]
        fn schedule_matches_brute_force(seed in any::<u64>()) {
            let mu = random_measure(seed, 50);
            let k = Kernel::riesz(2, 1).unwrap();
            let s = EpsSchedule::halving(1.0, 0.05).unwrap();
            let a: Vec<usize> = (0..25).collect();
            let b: Vec<usize> = (10..50).collect();
            let r = pair_sum_schedule(&mu, &k, &a, &b, &s).unwrap();
            for (e, v) in s.values().iter().zip(&r.values) {
                let mut brute = 0.0;
                for &i in &a {
                    for &j in &b {
                        let x = mu.position(i);
                        let y = mu.position(j);
                        let d = [x[0] - y[0], x[1] - y[1]];
                        if (d[0] * d[0] + d[1] * d[1]).sqrt() > *e {
                            brute += d[1] / (d[0] * d[0] + d[1] * d[1]) * mu.weight(i) * mu.weight(j);
                        }
                    }
                }
                prop_assert!((v - brute).abs() <= 1e-10 * brute.abs().max(1.0));
            }
        }
    }
}
