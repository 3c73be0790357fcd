use crate::error::{Error, Result};
use crate::geometry::{dist, Cone};
use crate::harness::specs::{catalog_graph, PROFILES};
use crate::harness::{Config, Outcome, Verdict};
use crate::rng::SplitMix64;
use crate::table::Table;

use super::{nonempty, positive, seeded_map, stream_key};

#[derive(Debug, Clone)]
pub struct Params {
    pub profiles: Vec<String>,
    pub dims: Vec<usize>,
    pub aperture: f64,
    /// Tuples per (profile, dimension).
    pub samples: usize,
    /// Relative slack below which a tuple counts as a violation.
    pub tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            profiles: PROFILES.iter().map(|s| s.to_string()).collect(),
            dims: vec![2, 3],
            aperture: 2.0,
            samples: 100_000,
            tolerance: 1e-12,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let p = Self {
            profiles: nonempty("profiles", cfg.list("scenario", "profiles", &d.profiles)?)?,
            dims: nonempty("dims", cfg.list("scenario", "dims", &d.dims)?)?,
            aperture: positive("aperture", cfg.f64("scenario", "aperture", d.aperture)?)?,
            samples: cfg.usize("scenario", "samples", d.samples)?,
            tolerance: positive("tolerance", cfg.f64("scenario", "tolerance", d.tolerance)?)?,
        };
        if p.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
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

/// Relative slack `(8L |y - x| - |y - x0|) / |y - x0|` of the cone estimate.
pub fn cone_slack(cone: &Cone, y: &[f64], x: &[f64]) -> f64 {
    let r0 = dist(y, &cone.apex());
    (8.0 * cone.aperture() * dist(y, x) - r0) / r0
}

fn offset(dim: usize, radius: f64, rng: &mut SplitMix64) -> Vec<f64> {
    rng.unit_vector(dim).into_iter().map(|v| v * radius).collect()
}

/// A point of the open cone at scale up to 1, often close to its boundary.
pub(crate) fn sample_in_cone(cone: &Cone, rng: &mut SplitMix64) -> Vec<f64> {
    let m = cone.apex_u().len();
    let l = cone.aperture();
    loop {
        let rho = rng.log_uniform(1e-6, 1.0);
        let du = offset(m, rho * rng.uniform(), rng);
        let r = du.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dt = 4.0 * l * r + rho * rng.log_uniform(1e-9, 4.0 * l);
        let y = cone.point_from_apex(&du, dt);
        if cone.contains(&y) {
            return y;
        }
    }
}

/// One (apex, y, x) tuple: `y` inside the cone, often close to its boundary,
/// and `x` strictly below the graph, often close to the apex.
fn sample_tuple(
    graph: &crate::geometry::LipschitzGraph,
    aperture: f64,
    rng: &mut SplitMix64,
) -> Result<(Cone, Vec<f64>, Vec<f64>)> {
    let m = graph.dim() - 1;
    let u0: Vec<f64> = (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let cone = Cone::new(graph, u0.clone(), aperture)?;
    let y = sample_in_cone(&cone, rng);
    let x = loop {
        let reach = rng.log_uniform(1e-6, 2.0);
        let du = offset(m, reach * rng.uniform(), rng);
        let u: Vec<f64> = u0.iter().zip(&du).map(|(a, b)| a + b).collect();
        let depth = reach * rng.log_uniform(1e-9, 1.0);
        let x = graph.point_at(&u, -depth);
        if graph.height_above(&x) < 0.0 {
            break x;
        }
    };
    Ok((cone, y, x))
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let mut t = Table::new("cone_separation", &["profile", "dim", "samples", "violations", "min_slack"]);
    let mut verdicts = Vec::new();
    for &n in &p.dims {
        for (pi, name) in p.profiles.iter().enumerate() {
            let graph = catalog_graph(name, n)?;
            let key = stream_key(&[seed, n as u64, pi as u64]);
            let slacks = seeded_map(p.samples, seed, key, |_, rng| {
                let (cone, y, x) = sample_tuple(&graph, p.aperture, rng)?;
                Ok(cone_slack(&cone, &y, &x))
            })?;
            let violations = slacks.iter().filter(|&&s| s < -p.tolerance).count();
            let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
            t.push(vec![
                name.as_str().into(),
                n.into(),
                p.samples.into(),
                violations.into(),
                min_slack.into(),
            ]);
            verdicts.push(Verdict::check(
                format!("cone_{name}_n{n}"),
                violations == 0,
                format!("{violations} violations in {} tuples, min relative slack {min_slack:e}", p.samples),
            ));
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
    fn slack_at_the_apex_pair() {
        let g = catalog_graph("flat", 2).unwrap();
        let cone = Cone::new(&g, vec![0.0], 2.0).unwrap();
        // x = x0: |y - x| = |y - x0| so the slack is 8L - 1
        let s = cone_slack(&cone, &[0.0, 1.0], &[0.0, 0.0]);
        assert!((s - 15.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_tuples_satisfy_the_geometry() {
        let g = catalog_graph("sawtooth", 3).unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..500 {
            let (cone, y, x) = sample_tuple(&g, 2.0, &mut rng).unwrap();
            assert!(cone.contains(&y));
            assert!(g.height_above(&x) < 0.0);
            assert!(cone_slack(&cone, &y, &x) >= -1e-12);
        }
    }

    #[test]
    fn small_run_has_no_violations() {
        let p = Params {
            samples: 2000,
            ..Params::default()
        };
        let out = run(&p, 3).unwrap();
        assert!(out.verdicts.iter().all(|v| v.passed), "{:?}", out.verdicts);
        assert_eq!(out.tables[0].rows.len(), 10);
    }
}
