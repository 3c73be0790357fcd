use crate::error::{Error, Result};
use crate::geometry::{dist, Cone, LipschitzGraph};
use crate::harness::specs::catalog_graph;
use crate::harness::{Config, Outcome, Verdict};
use crate::kernel::Kernel;
use crate::measure::DiscreteMeasure;
use crate::operators::{
    bound_constants, hl_maximal, maximal_many, nontangential_max, truncated_charged, BoundConstants,
    DensityFunction,
};
use crate::rng::SplitMix64;
use crate::table::Table;

use super::cone::sample_in_cone;
use super::{nonempty, positive, seeded_map, stream_key};

#[derive(Debug, Clone)]
pub struct Params {
    pub profiles: Vec<String>,
    pub dims: Vec<usize>,
    pub aperture: f64,
    /// Atoms of `nu`, all strictly below the graph.
    pub atoms: usize,
    /// Apex points `x`; each gets a fresh random `g`.
    pub groups: usize,
    /// Cone points per apex; each is paired with one `eps < |x - y|` and one
    /// `eps >= |x - y|`.
    pub points_per_group: usize,
    pub tolerance: f64,
    /// Apexes for the mesh check of the non-tangential maximal function.
    pub nt_points: usize,
    pub nt_depth: u32,
    pub nt_height: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            profiles: vec!["flat".into(), "sawtooth".into(), "cone".into()],
            dims: vec![2, 3],
            aperture: 2.0,
            atoms: 1000,
            groups: 1000,
            points_per_group: 5,
            tolerance: 1e-9,
            nt_points: 16,
            nt_depth: 3,
            nt_height: 1.0,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "scenario";
        let p = Self {
            profiles: nonempty("profiles", cfg.list(s, "profiles", &d.profiles)?)?,
            dims: nonempty("dims", cfg.list(s, "dims", &d.dims)?)?,
            aperture: positive("aperture", cfg.f64(s, "aperture", d.aperture)?)?,
            atoms: cfg.usize(s, "atoms", d.atoms)?,
            groups: cfg.usize(s, "groups", d.groups)?,
            points_per_group: cfg.usize(s, "points_per_group", d.points_per_group)?,
            tolerance: positive("tolerance", cfg.f64(s, "tolerance", d.tolerance)?)?,
            nt_points: cfg.usize(s, "nt_points", d.nt_points)?,
            nt_depth: cfg.get(s, "nt_depth", Some(d.nt_depth))?,
            nt_height: positive("nt_height", cfg.f64(s, "nt_height", d.nt_height)?)?,
        };
        if p.atoms == 0 || p.groups == 0 || p.points_per_group == 0 {
            return Err(Error::Config("atoms, groups and points_per_group must be positive".into()));
        }
        if !(1..=30).contains(&p.nt_depth) {
            return Err(Error::Config("nt_depth must lie in 1..=30".into()));
        }
        for &n in &p.dims {
            for name in &p.profiles {
                Cone::new(&catalog_graph(name, n)?, vec![0.0; n - 1], p.aperture)
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(p)
    }
}

/// Random atoms strictly below the graph over `[-1.5, 1.5]^{n-1}`, half of
/// them within `0.1` of it.
pub fn measure_below(graph: &LipschitzGraph, atoms: usize, rng: &mut SplitMix64) -> Result<DiscreteMeasure> {
    let n = graph.dim();
    let mut coords = Vec::with_capacity(atoms * n);
    let mut weights = Vec::with_capacity(atoms);
    while weights.len() < atoms {
        let u: Vec<f64> = (0..n - 1).map(|_| rng.uniform_in(-1.5, 1.5)).collect();
        let depth = if rng.uniform() < 0.5 {
            rng.log_uniform(1e-6, 0.1)
        } else {
            rng.uniform_in(0.1, 1.0)
        };
        let p = graph.point_at(&u, -depth);
        if graph.height_above(&p) < 0.0 {
            coords.extend_from_slice(&p);
            weights.push(rng.uniform_in(0.5, 1.5) / atoms as f64);
        }
    }
    DiscreteMeasure::new(n, coords, weights, 1.0 / atoms as f64)
}

/// Worst results over one group of tuples.
#[derive(Debug, Clone, Copy)]
struct GroupResult {
    tuples: usize,
    violations_lt: usize,
    violations_ge: usize,
    min_slack_lt: f64,
    min_slack_ge: f64,
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        (rhs - lhs) / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

struct Setup<'a> {
    graph: &'a LipschitzGraph,
    nu: &'a DiscreteMeasure,
    kernel: &'a Kernel,
    consts: BoundConstants,
}

fn random_charges(nu: &DiscreteMeasure, rng: &mut SplitMix64) -> Vec<f64> {
    nu.weights().iter().map(|w| rng.uniform_in(-1.0, 1.0) * w).collect()
}

fn run_group(s: &Setup, p: &Params, rng: &mut SplitMix64) -> Result<GroupResult> {
    let m = s.graph.dim() - 1;
    let u0: Vec<f64> = (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let cone = Cone::new(s.graph, u0, p.aperture)?;
    let x = cone.apex();
    let q = random_charges(s.nu, rng);
    let t_star = maximal_many(s.nu, s.kernel, &[&q], &x)?[0];
    let table: Vec<f64> = q.iter().zip(s.nu.weights()).map(|(a, w)| a / w).collect();
    let Some(m_nu) = hl_maximal(s.nu, &DensityFunction::Table(table), &x)?.finite() else {
        return Err(Error::InvalidParameter("atom on the graph".into()));
    };
    let rhs_lt = 3.0 * t_star + s.consts.d1 * m_nu;
    let rhs_ge = 3.0 * t_star + s.consts.d2 * m_nu;
    let mut r = GroupResult {
        tuples: 0,
        violations_lt: 0,
        violations_ge: 0,
        min_slack_lt: f64::INFINITY,
        min_slack_ge: f64::INFINITY,
    };
    for _ in 0..p.points_per_group {
        let y = sample_in_cone(&cone, rng);
        let dxy = dist(&x, &y);
        let eps_lt = dxy * rng.log_uniform(1e-3, 1.0) * (1.0 - 1e-12);
        let eps_ge = if rng.uniform() < 0.125 {
            dxy
        } else {
            dxy * (1.0 + rng.log_uniform(1e-9, 10.0))
        };
        let lt = truncated_charged(s.nu, s.kernel, &q, &y, eps_lt)?.abs();
        let ge = truncated_charged(s.nu, s.kernel, &q, &y, eps_ge)?.abs();
        if lt > rhs_lt * (1.0 + p.tolerance) {
            r.violations_lt += 1;
        }
        if ge > rhs_ge * (1.0 + p.tolerance) {
            r.violations_ge += 1;
        }
        r.min_slack_lt = r.min_slack_lt.min(slack(lt, rhs_lt));
        r.min_slack_ge = r.min_slack_ge.min(slack(ge, rhs_ge));
        r.tuples += 2;
    }
    Ok(r)
}

/// Mesh value of `N(T* g)(x)` against `C_N (T* g(x) + M g(x))`; returns the
/// relative slack.
fn nontangential_slack(s: &Setup, p: &Params, rng: &mut SplitMix64) -> Result<f64> {
    let m = s.graph.dim() - 1;
    let u0: Vec<f64> = (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let cone = Cone::new(s.graph, u0, p.aperture)?;
    let x = cone.apex();
    let q = random_charges(s.nu, rng);
    let t_star = maximal_many(s.nu, s.kernel, &[&q], &x)?[0];
    let table: Vec<f64> = q.iter().zip(s.nu.weights()).map(|(a, w)| a / w).collect();
    let m_nu = hl_maximal(s.nu, &DensityFunction::Table(table), &x)?
        .finite()
        .unwrap_or(f64::INFINITY);
    let h = |y: &[f64]| maximal_many(s.nu, s.kernel, &[&q], y).map(|v| v[0]).unwrap_or(f64::NAN);
    let lhs = nontangential_max(&h, &cone, p.nt_height, p.nt_depth)?;
    if lhs.is_nan() {
        return Err(Error::InvalidParameter("maximal transform failed on the cone mesh".into()));
    }
    Ok(slack(lhs, s.consts.c_n * (t_star + m_nu)))
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let mut t = Table::new(
        "lemma_l2",
        &[
            "profile",
            "dim",
            "axis",
            "tuples",
            "violations_lt",
            "violations_ge",
            "min_slack_lt",
            "min_slack_ge",
            "nt_points",
            "nt_violations",
            "nt_min_slack",
        ],
    );
    let mut verdicts = Vec::new();
    for &n in &p.dims {
        for (pi, name) in p.profiles.iter().enumerate() {
            let graph = catalog_graph(name, n)?;
            let mut rng = SplitMix64::stream(seed, stream_key(&[seed, n as u64, pi as u64, 0]));
            let nu = measure_below(&graph, p.atoms, &mut rng)?;
            for axis in 0..n {
                let kernel = Kernel::riesz(n, axis)?;
                let setup = Setup {
                    graph: &graph,
                    nu: &nu,
                    kernel: &kernel,
                    consts: bound_constants(&kernel, p.aperture)?,
                };
                let key = stream_key(&[seed, n as u64, pi as u64, 1 + axis as u64]);
                let groups = seeded_map(p.groups, seed, key, |_, rng| run_group(&setup, p, rng))?;
                let key = stream_key(&[seed, n as u64, pi as u64, 100 + axis as u64]);
                let nt = seeded_map(p.nt_points, seed, key, |_, rng| nontangential_slack(&setup, p, rng))?;

                let tuples: usize = groups.iter().map(|g| g.tuples).sum();
                let v_lt: usize = groups.iter().map(|g| g.violations_lt).sum();
                let v_ge: usize = groups.iter().map(|g| g.violations_ge).sum();
                let s_lt = groups.iter().map(|g| g.min_slack_lt).fold(f64::INFINITY, f64::min);
                let s_ge = groups.iter().map(|g| g.min_slack_ge).fold(f64::INFINITY, f64::min);
                let nt_viol = nt.iter().filter(|&&s| s < -p.tolerance).count();
                let nt_min = nt.iter().copied().fold(f64::INFINITY, f64::min);
                t.push(vec![
                    name.as_str().into(),
                    n.into(),
                    axis.into(),
                    tuples.into(),
                    v_lt.into(),
                    v_ge.into(),
                    s_lt.into(),
                    s_ge.into(),
                    p.nt_points.into(),
                    nt_viol.into(),
                    nt_min.into(),
                ]);
                verdicts.push(Verdict::check(
                    format!("lemma_{name}_n{n}_axis{axis}"),
                    v_lt + v_ge == 0,
                    format!(
                        "{} violations in {tuples} tuples (eps < r: {v_lt}, eps >= r: {v_ge}); min slack {s_lt:e} / {s_ge:e}",
                        v_lt + v_ge
                    ),
                ));
                if p.nt_points > 0 {
                    verdicts.push(Verdict::check(
                        format!("nontangential_{name}_n{n}_axis{axis}"),
                        nt_viol == 0,
                        format!("{nt_viol} of {} mesh maxima above C_N (T* + M); min slack {nt_min:e}", p.nt_points),
                    ));
                }
            }
        }
    }
    Ok(Outcome {
        tables: vec![t],
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_are_strictly_below() {
        let g = catalog_graph("sawtooth", 2).unwrap();
        let nu = measure_below(&g, 300, &mut SplitMix64::new(1)).unwrap();
        assert_eq!(nu.len(), 300);
        assert!(nu.positions().all(|p| g.height_above(p) < 0.0));
    }

    #[test]
    fn small_run_passes() {
        let p = Params {
            atoms: 200,
            groups: 40,
            nt_points: 2,
            nt_depth: 2,
            ..Params::default()
        };
        let out = run(&p, 9).unwrap();
        assert!(out.verdicts.iter().all(|v| v.passed), "{:?}", out.verdicts);
        // 3 profiles, axes 2 + 3
        assert_eq!(out.tables[0].rows.len(), 15);
    }
}
