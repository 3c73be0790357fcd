//! Bilinear pairings `int T^eps f  g dmu` of simple functions, their
//! decomposition by shape overlap, and convergence studies as `eps -> 0`.

mod simple;
mod trace;

pub use simple::{FunctionSpace, SimpleFunction};
pub use trace::{convergence_study, PairingTrace, TermTrace, MIN_STUDY_RADII};

use crate::error::{check_dim, Result};
use crate::geometry::Shape;
use crate::kernel::KernelFunction;
use crate::measure::DiscreteMeasure;
use crate::operators::{cancellation_bound, pair_sum_schedule, EpsSchedule, PairSums};

fn single(eps: f64) -> Result<EpsSchedule> {
    EpsSchedule::new(vec![eps]).map_err(|_| {
        crate::error::invalid(format!("truncation radius must be positive, got {eps}"))
    })
}

/// `sum_{x in P} sum_{y in Q, |x-y| > eps} K(x-y) w_x w_y` along a schedule.
pub fn shape_pair_sums<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    p: &Shape,
    q: &Shape,
    schedule: &EpsSchedule,
) -> Result<PairSums> {
    let outer = mu.indices_where(|x| p.contains(x));
    let inner = mu.indices_where(|x| q.contains(x));
    pair_sum_schedule(mu, k, &outer, &inner, schedule)
}

/// `int T^eps_mu f(x) g(x) dmu x` along a schedule, expanded over the terms
/// as `sum_j sum_i b_j a_i int_{P_j} int_{Q_i}` with `f = sum a_i chi_{Q_i}`
/// and `g = sum b_j chi_{P_j}`.
pub fn pairing_schedule<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    f: &SimpleFunction,
    g: &SimpleFunction,
    schedule: &EpsSchedule,
) -> Result<Vec<f64>> {
    check_dim(mu.dim(), f.dim())?;
    check_dim(mu.dim(), g.dim())?;
    let mut acc = vec![crate::sum::CompensatedSum::new(); schedule.len()];
    for (b, pj) in g.terms() {
        for (a, qi) in f.terms() {
            let s = shape_pair_sums(mu, k, pj, qi, schedule)?;
            for (t, v) in acc.iter_mut().zip(&s.values) {
                t.add(a * b * v);
            }
        }
    }
    Ok(acc.iter().map(|t| t.value()).collect())
}

pub fn pairing<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    f: &SimpleFunction,
    g: &SimpleFunction,
    eps: f64,
) -> Result<f64> {
    Ok(pairing_schedule(mu, k, f, g, &single(eps)?)?[0])
}

/// Atom indices of `P ∩ Q`, `P \ Q` and `Q \ P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlap {
    pub both: Vec<usize>,
    pub p_only: Vec<usize>,
    pub q_only: Vec<usize>,
}

impl Overlap {
    pub fn new(mu: &DiscreteMeasure, p: &Shape, q: &Shape) -> Result<Self> {
        check_dim(mu.dim(), p.dim())?;
        check_dim(mu.dim(), q.dim())?;
        let mut o = Overlap {
            both: Vec::new(),
            p_only: Vec::new(),
            q_only: Vec::new(),
        };
        for (i, x) in mu.positions().enumerate() {
            match (p.contains(x), q.contains(x)) {
                (true, true) => o.both.push(i),
                (true, false) => o.p_only.push(i),
                (false, true) => o.q_only.push(i),
                (false, false) => {}
            }
        }
        Ok(o)
    }
}

/// The four overlap sums of `int_P int_Q`, outer variable `x` in `P`, inner
/// `y` in `Q`:
/// `I1` over `(P∩Q) x (P∩Q)`, `I2` over `(P\Q) x (P∩Q)`,
/// `I3` over `(P∩Q) x (Q\P)`, `I4` over `(P\Q) x (Q\P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IDecomposition {
    /// `values[e] = [I1, I2, I3, I4]` at schedule radius `e`.
    pub values: Vec<[f64; 4]>,
    pub max_abs_term: [f64; 4],
    /// Atoms in `P ∪ Q`.
    pub atoms: usize,
}

impl IDecomposition {
    /// Rounding budget for `I1`, whose exact value is zero.
    pub fn i1_bound(&self) -> f64 {
        cancellation_bound(self.atoms, self.max_abs_term[0])
    }

    /// Rounding budget for comparing the sum of the parts with the
    /// undecomposed double sum.
    pub fn completeness_bound(&self) -> f64 {
        let m = self.max_abs_term.iter().copied().fold(0.0, f64::max);
        cancellation_bound(self.atoms, m)
    }

    pub fn total(&self, e: usize) -> f64 {
        self.values[e].iter().sum()
    }
}

pub fn i_decomposition_schedule<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    p: &Shape,
    q: &Shape,
    schedule: &EpsSchedule,
) -> Result<IDecomposition> {
    let o = Overlap::new(mu, p, q)?;
    let parts = [
        pair_sum_schedule(mu, k, &o.both, &o.both, schedule)?,
        pair_sum_schedule(mu, k, &o.p_only, &o.both, schedule)?,
        pair_sum_schedule(mu, k, &o.both, &o.q_only, schedule)?,
        pair_sum_schedule(mu, k, &o.p_only, &o.q_only, schedule)?,
    ];
    Ok(IDecomposition {
        values: (0..schedule.len())
            .map(|e| std::array::from_fn(|i| parts[i].values[e]))
            .collect(),
        max_abs_term: std::array::from_fn(|i| parts[i].max_abs_term),
        atoms: o.both.len() + o.p_only.len() + o.q_only.len(),
    })
}

/// `(I1, I2, I3, I4)` at a single radius.
pub fn i_decomposition<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    p: &Shape,
    q: &Shape,
    eps: f64,
) -> Result<[f64; 4]> {
    Ok(i_decomposition_schedule(mu, k, p, q, &single(eps)?)?.values[0])
}

/// Relabeling check `I3 = -J` with
/// `J = sum_{x in Q\P} sum_{y in P∩Q, |x-y| > eps} K(x-y) w_x w_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FubiniCheck {
    pub i3: Vec<f64>,
    pub j: Vec<f64>,
    /// `|I3 + J|` per radius.
    pub residual: Vec<f64>,
    pub bound: f64,
}

impl FubiniCheck {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.bound
    }
}

pub fn fubini_check_schedule<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    p: &Shape,
    q: &Shape,
    schedule: &EpsSchedule,
) -> Result<FubiniCheck> {
    let o = Overlap::new(mu, p, q)?;
    let i3 = pair_sum_schedule(mu, k, &o.both, &o.q_only, schedule)?;
    let j = pair_sum_schedule(mu, k, &o.q_only, &o.both, schedule)?;
    let atoms = o.both.len() + o.p_only.len() + o.q_only.len();
    Ok(FubiniCheck {
        residual: i3.values.iter().zip(&j.values).map(|(a, b)| (a + b).abs()).collect(),
        bound: cancellation_bound(atoms, i3.max_abs_term.max(j.max_abs_term)),
        i3: i3.values,
        j: j.values,
    })
}

/// `|I3 + J|` at a single radius.
pub fn fubini_check<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    p: &Shape,
    q: &Shape,
    eps: f64,
) -> Result<f64> {
    Ok(fubini_check_schedule(mu, k, p, q, &single(eps)?)?.residual[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn square() -> DiscreteMeasure {
        DiscreteMeasure::new(
            2,
            vec![-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0],
            vec![1.0; 4],
            0.01,
        )
        .unwrap()
    }

    fn riesz0(p: &[f64]) -> f64 {
        p[0] / (p[0] * p[0] + p[1] * p[1])
    }

    /// Brute force over all ordered atom pairs.
    fn direct(mu: &DiscreteMeasure, f: &SimpleFunction, g: &SimpleFunction, eps: f64) -> f64 {
        let mut s = 0.0;
        for (x, wx) in mu.positions().zip(mu.weights()) {
            for (y, wy) in mu.positions().zip(mu.weights()) {
                let d = [x[0] - y[0], x[1] - y[1]];
                if (d[0] * d[0] + d[1] * d[1]).sqrt() > eps {
                    s += riesz0(&d) * f.eval(y) * g.eval(x) * wx * wy;
                }
            }
        }
        s
    }

    #[test]
    fn square_halves() {
        let mu = square();
        let k = Kernel::riesz(2, 0).unwrap();
        let left = SimpleFunction::indicator(Shape::aligned_box(&[-2.0, -2.0], &[0.0, 2.0]).unwrap());
        let right = SimpleFunction::indicator(Shape::aligned_box(&[0.0, -2.0], &[2.0, 2.0]).unwrap());
        // x on the right, y on the left: two pairs at (2, 0) and two at (2, ±2)
        let expect = 2.0 * 0.5 + 2.0 * (2.0 / 8.0);
        let v = pairing(&mu, &k, &left, &right, 0.5).unwrap();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - direct(&mu, &left, &right, 0.5)).abs() < 1e-15);
        assert_eq!(pairing(&mu, &k, &left, &right, 2.1).unwrap(), 2.0 * (2.0 / 8.0));
    }

    #[test]
    fn full_support_indicator_cancels() {
        let mu = square();
        let k = Kernel::riesz(2, 1).unwrap();
        let all = SimpleFunction::indicator(Shape::ball(vec![0.0, 0.0], 5.0).unwrap());
        for eps in [0.1, 1.0, 2.5] {
            assert_eq!(pairing(&mu, &k, &all, &all, eps).unwrap(), 0.0);
        }
    }

    #[test]
    fn decomposition_examples() {
        let mu = square();
        let k = Kernel::riesz(2, 0).unwrap();
        let p = Shape::ball(vec![-1.0, 0.0], 1.5).unwrap();
        assert_eq!(i_decomposition(&mu, &k, &p, &p, 0.5).unwrap(), [0.0; 4]);
        let far = Shape::ball(vec![1.0, 0.0], 1.5).unwrap();
        let d = i_decomposition(&mu, &k, &p, &far, 0.5).unwrap();
        assert_eq!(&d[..3], &[0.0, 0.0, 0.0]);
        let whole = shape_pair_sums(&mu, &k, &p, &far, &single(0.5).unwrap()).unwrap();
        assert_eq!(d[3], whole.values[0]);

        // P holds the left column, Q the top row; they share (-1, 1)
        let p = Shape::ball(vec![-0.5, 0.0], 1.6).unwrap();
        let q = Shape::ball(vec![0.0, 0.5], 1.6).unwrap();
        let o = Overlap::new(&mu, &p, &q).unwrap();
        assert_eq!((o.both.len(), o.p_only.len(), o.q_only.len()), (1, 1, 1));
        let d = i_decomposition(&mu, &k, &p, &q, 0.5).unwrap();
        let total = shape_pair_sums(&mu, &k, &p, &q, &single(0.5).unwrap()).unwrap().values[0];
        assert!((d.iter().sum::<f64>() - total).abs() < 1e-15);
        let brute = direct(&mu, &SimpleFunction::indicator(q.clone()), &SimpleFunction::indicator(p.clone()), 0.5);
        assert!((total - brute).abs() < 1e-15);
        assert_eq!(d[0], 0.0);
        assert!(fubini_check(&mu, &k, &p, &q, 0.5).unwrap() == 0.0);
    }

    fn random_measure(seed: u64, n: usize) -> DiscreteMeasure {
        let mut rng = SplitMix64::new(seed);
        let coords: Vec<f64> = (0..2 * n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        DiscreteMeasure::new(2, coords, weights, 1e-3).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bilinear_and_antisymmetric(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let mu = random_measure(seed, 60);
            let k = Kernel::riesz(2, 0).unwrap();
            let mut rng = SplitMix64::new(seed ^ 0xabc);
            let lo = [-1.0, -1.0];
            let hi = [1.0, 1.0];
            let f1 = SimpleFunction::random(FunctionSpace::Balls, &lo, &hi, 3, &mut rng).unwrap();
            let f2 = SimpleFunction::random(FunctionSpace::Balls, &lo, &hi, 3, &mut rng).unwrap();
            let g = SimpleFunction::random(FunctionSpace::Balls, &lo, &hi, 3, &mut rng).unwrap();
            let eps = 0.05;
            let combo = f1.scaled(a).plus(&f2.scaled(b)).unwrap();
            let lhs = pairing(&mu, &k, &combo, &g, eps).unwrap();
            let r1 = pairing(&mu, &k, &f1, &g, eps).unwrap();
            let r2 = pairing(&mu, &k, &f2, &g, eps).unwrap();
            let scale = (a * r1).abs() + (b * r2).abs() + 1e-300;
            prop_assert!((lhs - (a * r1 + b * r2)).abs() <= 1e-12 * scale.max(lhs.abs()));
            let fg = pairing(&mu, &k, &f1, &g, eps).unwrap();
            let gf = pairing(&mu, &k, &g, &f1, eps).unwrap();
            prop_assert!((fg + gf).abs() <= 1e-12 * fg.abs().max(1e-10));
            let brute = direct(&mu, &f1, &g, eps);
            prop_assert!((fg - brute).abs() <= 1e-10 * brute.abs().max(1.0), "{} {}", fg, brute);
        }

        #[test]
        fn decomposition_is_complete(seed in any::<u64>()) {
            let mu = random_measure(seed, 120);
            let k = Kernel::riesz(2, 0).unwrap();
            let mut rng = SplitMix64::new(seed);
            let p = Shape::ball(vec![rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)], rng.uniform_in(0.2, 1.0)).unwrap();
            let q = Shape::ball(vec![rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)], rng.uniform_in(0.2, 1.0)).unwrap();
            let s = EpsSchedule::halving(1.0, 1.0 / 32.0).unwrap();
            let d = i_decomposition_schedule(&mu, &k, &p, &q, &s).unwrap();
            let whole = shape_pair_sums(&mu, &k, &p, &q, &s).unwrap();
            for e in 0..s.len() {
                prop_assert!(d.values[e][0].abs() <= d.i1_bound());
                prop_assert!((d.total(e) - whole.values[e]).abs() <= d.completeness_bound().max(1e-14 * whole.values[e].abs()));
            }
            let fc = fubini_check_schedule(&mu, &k, &p, &q, &s).unwrap();
            prop_assert!(fc.passed());
        }
    }
}
