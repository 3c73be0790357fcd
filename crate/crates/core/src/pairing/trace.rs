use crate::error::{check_dim, Error, Result};
use crate::geometry::{Membership, RegionDecomposition};
use crate::kernel::KernelFunction;
use crate::measure::DiscreteMeasure;
use crate::operators::{cancellation_bound, cauchy_tail, pair_sum_schedule, EpsSchedule};
use crate::sum::CompensatedSum;
use crate::table::{Cell, Table};

use super::{i_decomposition_schedule, IDecomposition, Overlap, SimpleFunction};

/// Fewest radii accepted by [`convergence_study`].
pub const MIN_STUDY_RADII: usize = 8;

/// Decomposition of one `(f term i, g term j)` product along the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TermTrace {
    pub f_term: usize,
    pub g_term: usize,
    /// `b_j a_i`.
    pub coefficient: f64,
    pub decomposition: IDecomposition,
    /// `I2` and `I4` recomputed as sums over the pieces `A_l(Q) ∩ P`.
    pub routed_i2: Vec<f64>,
    pub routed_i4: Vec<f64>,
    pub routing_residual: f64,
    pub routing_bound: f64,
    /// Number of complement pieces that received at least one atom.
    pub pieces_used: usize,
}

/// Pairing values along a schedule with per-term decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingTrace {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub cauchy_tail: f64,
    pub terms: Vec<TermTrace>,
}

impl PairingTrace {
    /// Every `I1` entry within its cancellation budget.
    pub fn i1_within_bound(&self) -> bool {
        self.terms.iter().all(|t| {
            let b = t.decomposition.i1_bound();
            t.decomposition.values.iter().all(|v| v[0].abs() <= b)
        })
    }

    /// Routed and direct `I2`/`I4` agree within budget for every term.
    pub fn routing_consistent(&self) -> bool {
        self.terms.iter().all(|t| t.routing_residual <= t.routing_bound)
    }

    /// Columns `i,j,coefficient,eps,value,I1,I2,I3,I4`; one row per term and
    /// radius, then one `total` row per radius with coefficient-weighted sums.
    pub fn to_table(&self, name: &str) -> Table {
        let mut t = Table::new(
            name,
            &["i", "j", "coefficient", "eps", "value", "I1", "I2", "I3", "I4"],
        );
        for term in &self.terms {
            for (e, eps) in self.eps.iter().enumerate() {
                let v = term.decomposition.values[e];
                let mut row: Vec<Cell> = vec![
                    term.f_term.into(),
                    term.g_term.into(),
                    term.coefficient.into(),
                    (*eps).into(),
                    (term.coefficient * term.decomposition.total(e)).into(),
                ];
                row.extend(v.iter().map(|x| Cell::Float(*x)));
                t.push(row);
            }
        }
        for (e, eps) in self.eps.iter().enumerate() {
            let mut sums = [CompensatedSum::new(); 4];
            for term in &self.terms {
                for (s, v) in sums.iter_mut().zip(term.decomposition.values[e]) {
                    s.add(term.coefficient * v);
                }
            }
            let mut row: Vec<Cell> = vec![
                "total".into(),
                "total".into(),
                "".into(),
                (*eps).into(),
                self.values[e].into(),
            ];
            row.extend(sums.iter().map(|s| Cell::Float(s.value())));
            t.push(row);
        }
        t
    }
}

fn routed<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    groups: &[Vec<usize>],
    inner: &[usize],
    schedule: &EpsSchedule,
) -> Result<(Vec<f64>, f64)> {
    let mut acc = vec![CompensatedSum::new(); schedule.len()];
    let mut max_term = 0.0f64;
    for g in groups.iter().filter(|g| !g.is_empty()) {
        let s = pair_sum_schedule(mu, k, g, inner, schedule)?;
        max_term = max_term.max(s.max_abs_term);
        for (a, v) in acc.iter_mut().zip(&s.values) {
            a.add(*v);
        }
    }
    Ok((acc.iter().map(|a| a.value()).collect(), max_term))
}

/// Pairing `int T^eps f g dmu` along `schedule` (at least
/// [`MIN_STUDY_RADII`] radii, none below 4 times the resolution), with every
/// term split into `I1..I4` and `I2`, `I4` also summed piece by piece over
/// the complement regions of the inner shape.
pub fn convergence_study<K: KernelFunction + ?Sized>(
    mu: &DiscreteMeasure,
    k: &K,
    f: &SimpleFunction,
    g: &SimpleFunction,
    schedule: &EpsSchedule,
) -> Result<PairingTrace> {
    check_dim(mu.dim(), f.dim())?;
    check_dim(mu.dim(), g.dim())?;
    if schedule.len() < MIN_STUDY_RADII {
        return Err(Error::Schedule(format!(
            "convergence study needs at least {MIN_STUDY_RADII} radii, got {}",
            schedule.len()
        )));
    }
    schedule.check_floor(mu.resolution())?;
    let mut terms = Vec::new();
    let mut values = vec![CompensatedSum::new(); schedule.len()];
    for (j, (b, p)) in g.terms().iter().enumerate() {
        for (i, (a, q)) in f.terms().iter().enumerate() {
            let decomposition = i_decomposition_schedule(mu, k, p, q, schedule)?;
            let overlap = Overlap::new(mu, p, q)?;
            let regions = RegionDecomposition::new(q)?;
            let mut groups = vec![Vec::new(); regions.len()];
            for &x in &overlap.p_only {
                if let Membership::Region(l) = regions.region_of(mu.position(x))? {
                    groups[l].push(x);
                }
            }
            let (routed_i2, m2) = routed(mu, k, &groups, &overlap.both, schedule)?;
            let (routed_i4, m4) = routed(mu, k, &groups, &overlap.q_only, schedule)?;
            let routing_residual = (0..schedule.len())
                .map(|e| {
                    let d = &decomposition.values[e];
                    (routed_i2[e] - d[1]).abs().max((routed_i4[e] - d[3]).abs())
                })
                .fold(0.0, f64::max);
            let coefficient = a * b;
            for (e, v) in values.iter_mut().enumerate() {
                v.add(coefficient * decomposition.total(e));
            }
            terms.push(TermTrace {
                f_term: i,
                g_term: j,
                coefficient,
                routing_bound: cancellation_bound(decomposition.atoms, m2.max(m4)),
                routing_residual,
                routed_i2,
                routed_i4,
                pieces_used: groups.iter().filter(|g| !g.is_empty()).count(),
                decomposition,
            });
        }
    }
    let values: Vec<f64> = values.iter().map(|v| v.value()).collect();
    Ok(PairingTrace {
        eps: schedule.values().to_vec(),
        cauchy_tail: cauchy_tail(&values),
        values,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LipschitzGraph, ParamBox, Profile, Shape};
    use crate::kernel::Kernel;
    use crate::measure::{build, MeasureSpec};
    use crate::pairing::pairing_schedule;

    fn bump_measure(cells: usize) -> DiscreteMeasure {
        let graph = LipschitzGraph::new(
            2,
            Profile::SmoothBump {
                amplitude: 0.3,
                width: 0.5,
            },
        )
        .unwrap();
        build(&MeasureSpec::Graph {
            graph,
            domain: ParamBox::cube(1, -1.0, 1.0).unwrap(),
            cells,
            shift: 0.0,
        })
        .unwrap()
    }

    /// Ratio `2^{-1/2}` so that even coarse measures get enough radii.
    fn schedule(mu: &DiscreteMeasure) -> EpsSchedule {
        EpsSchedule::geometric(0.5, 4.0 * mu.resolution(), std::f64::consts::FRAC_1_SQRT_2).unwrap()
    }

    fn ball(x: f64, y: f64, r: f64) -> SimpleFunction {
        SimpleFunction::indicator(Shape::ball(vec![x, y], r).unwrap())
    }

    #[test]
    fn separated_supports_give_a_constant_trace() {
        let mu = bump_measure(256);
        let k = Kernel::riesz(2, 1).unwrap();
        let s = schedule(&mu);
        let t = convergence_study(&mu, &k, &ball(-0.8, 0.0, 0.15), &ball(0.8, 0.0, 0.15), &s).unwrap();
        assert!(t.values.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(t.cauchy_tail, 0.0);
    }

    #[test]
    fn equal_functions_give_zero() {
        let mu = bump_measure(256);
        let k = Kernel::riesz(2, 0).unwrap();
        let s = schedule(&mu);
        let f = ball(0.0, 0.0, 5.0);
        let t = convergence_study(&mu, &k, &f, &f, &s).unwrap();
        assert!(t.i1_within_bound());
        let b = t.terms[0].decomposition.i1_bound();
        assert!(t.values.iter().all(|v| v.abs() <= b));
    }

    #[test]
    fn overlapping_balls_route_and_match_direct_pairing() {
        let mu = bump_measure(256);
        let k = Kernel::riesz(2, 0).unwrap();
        let s = schedule(&mu);
        let f = ball(-0.2, 0.1, 0.5);
        let g = ball(0.2, 0.2, 0.5);
        let t = convergence_study(&mu, &k, &f, &g, &s).unwrap();
        assert!(t.i1_within_bound() && t.routing_consistent());
        assert!(t.terms[0].pieces_used >= 1);
        let direct = pairing_schedule(&mu, &k, &f, &g, &s).unwrap();
        for (a, b) in t.values.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-12));
        }
        let csv = t.to_table("trace").to_csv_string().unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * s.len());
    }

    #[test]
    fn cauchy_tail_shrinks_with_resolution() {
        let k = Kernel::riesz(2, 0).unwrap();
        let f = ball(-0.2, 0.1, 0.5);
        let g = ball(0.2, 0.2, 0.5);
        let mut tails = Vec::new();
        for m in [256usize, 1024, 4096] {
            let mu = bump_measure(m);
            let s = schedule(&mu);
            let t = convergence_study(&mu, &k, &f, &g, &s).unwrap();
            let scale = t.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            tails.push(t.cauchy_tail);
            if m == 4096 {
                // pairs straddling a shape boundary converge only at rate O(eps)
                assert!(t.cauchy_tail <= 1e-2 * scale, "{} vs {scale}", t.cauchy_tail);
            }
        }
        assert!(tails[1] < tails[0] && tails[2] < tails[1], "{tails:?}");
    }

    #[test]
    fn short_schedule_is_rejected() {
        let mu = bump_measure(64);
        let k = Kernel::riesz(2, 0).unwrap();
        let s = EpsSchedule::halving(0.5, 0.1).unwrap();
        let f = ball(0.0, 0.0, 0.5);
        assert!(matches!(convergence_study(&mu, &k, &f, &f, &s), Err(Error::Schedule(_))));
    }
}
