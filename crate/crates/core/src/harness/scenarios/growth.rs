use crate::error::{Error, Result};
use crate::geometry::ParamBox;
use crate::harness::specs::catalog_graph;
use crate::harness::{Config, Outcome, Verdict};
use crate::measure::{build, geometric_grid, growth_constant, lower_density, DiscreteMeasure, MeasureSpec};
use crate::table::{Cell, Table};

use super::{increasing, positive};

#[derive(Debug, Clone)]
pub struct Params {
    pub generations: Vec<usize>,
    /// Radii `4^{-k/steps}` per factor 4 on the Cantor lattice.
    pub cantor_steps: usize,
    pub profiles: Vec<String>,
    pub cells: Vec<usize>,
    /// Radii per graph measure, geometric from `h` to the diameter.
    pub graph_radii: usize,
    /// Largest allowed ratio of growth estimates at successive resolutions.
    pub max_ratio: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            generations: vec![3, 4, 5, 6],
            cantor_steps: 8,
            profiles: vec!["flat".into(), "sawtooth".into(), "bump".into()],
            cells: vec![256, 1024, 4096],
            graph_radii: 48,
            max_ratio: 1.2,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "scenario";
        let p = Self {
            generations: cfg.list(s, "generations", &d.generations)?,
            cantor_steps: cfg.usize(s, "cantor_steps", d.cantor_steps)?,
            profiles: cfg.list(s, "profiles", &d.profiles)?,
            cells: cfg.list(s, "cells", &d.cells)?,
            graph_radii: cfg.usize(s, "graph_radii", d.graph_radii)?,
            max_ratio: positive("max_ratio", cfg.f64(s, "max_ratio", d.max_ratio)?)?,
        };
        increasing("generations", &p.generations)?;
        increasing("cells", &p.cells)?;
        if p.generations.iter().any(|&g| g == 0 || g > 8) {
            return Err(Error::Config("generations must lie in 1..=8".into()));
        }
        if p.cantor_steps == 0 || p.graph_radii < 2 {
            return Err(Error::Config("cantor_steps must be positive and graph_radii at least 2".into()));
        }
        if p.generations.is_empty() && (p.profiles.is_empty() || p.cells.is_empty()) {
            return Err(Error::Config("nothing to measure".into()));
        }
        for name in &p.profiles {
            catalog_graph(name, 2)?;
        }
        Ok(p)
    }
}

fn centers(mu: &DiscreteMeasure) -> Vec<Vec<f64>> {
    mu.positions().map(|p| p.to_vec()).collect()
}

/// `(growth, lower density)` at atom centers; lower density over radii below 1.
fn estimates(mu: &DiscreteMeasure, radii: &[f64]) -> Result<(f64, f64)> {
    let c = centers(mu);
    let small: Vec<f64> = radii.iter().copied().filter(|&r| r < 1.0).collect();
    let low = if small.is_empty() { f64::NAN } else { lower_density(mu, &c, &small)? };
    Ok((growth_constant(mu, &c, radii)?, low))
}

/// Radii `4^{-k/steps}` from 2 down to the generation side length.
pub fn cantor_radii(generation: usize, steps: usize) -> Vec<f64> {
    let mut r: Vec<f64> = (0..=generation * steps)
        .map(|k| 4f64.powf(-(k as f64) / steps as f64))
        .collect();
    r.insert(0, 2.0);
    r.reverse();
    r
}

fn stable(values: &[f64], max_ratio: f64) -> bool {
    values.windows(2).all(|w| w[1] <= max_ratio * w[0])
}

pub fn run(p: &Params, _seed: u64) -> Result<Outcome> {
    let mut t = Table::new(
        "growth",
        &["family", "level", "atoms", "resolution", "radii", "growth", "lower_density", "ratio_to_previous"],
    );
    let mut verdicts = Vec::new();
    let mut record = |family: &str, rows: Vec<(usize, DiscreteMeasure, Vec<f64>)>| -> Result<()> {
        let mut growth = Vec::new();
        for (level, mu, radii) in rows {
            let (g, low) = estimates(&mu, &radii)?;
            let ratio: Cell = growth.last().map_or(Cell::from(""), |prev: &f64| (g / prev).into());
            t.push(vec![
                family.into(),
                level.into(),
                mu.len().into(),
                mu.resolution().into(),
                radii.len().into(),
                g.into(),
                low.into(),
                ratio,
            ]);
            growth.push(g);
        }
        let list: Vec<String> = growth.iter().map(|g| format!("{g:.4}")).collect();
        verdicts.push(Verdict::check(
            format!("growth_stable_{family}"),
            stable(&growth, p.max_ratio),
            format!("growth estimates [{}], allowed ratio {}", list.join(", "), p.max_ratio),
        ));
        Ok(())
    };
    if !p.generations.is_empty() {
        let rows = p
            .generations
            .iter()
            .map(|&g| {
                let mu = build(&MeasureSpec::CantorFourCorners { generation: g as u32 })?;
                Ok((g, mu, cantor_radii(g, p.cantor_steps)))
            })
            .collect::<Result<Vec<_>>>()?;
        record("cantor", rows)?;
    }
    if !p.cells.is_empty() {
        for name in &p.profiles {
            let rows = p
                .cells
                .iter()
                .map(|&cells| {
                    let mu = build(&MeasureSpec::Graph {
                        graph: catalog_graph(name, 2)?,
                        domain: ParamBox::cube(1, -1.0, 1.0)?,
                        cells,
                        shift: 0.0,
                    })?;
                    let radii = geometric_grid(mu.resolution(), mu.diameter().max(mu.resolution()), p.graph_radii)?;
                    Ok((cells, mu, radii))
                })
                .collect::<Result<Vec<_>>>()?;
            record(&format!("graph_{name}"), rows)?;
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
    fn cantor_radii_span_the_lattice() {
        let r = cantor_radii(2, 4);
        assert_eq!(r.len(), 10);
        assert!((r[0] - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(r[8], 1.0);
        assert_eq!(r[9], 2.0);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_run_is_stable() {
        let p = Params {
            generations: vec![2, 3, 4],
            cells: vec![64, 128, 256],
            ..Params::default()
        };
        let out = run(&p, 0).unwrap();
        assert!(out.verdicts.iter().all(|v| v.passed), "{:?}", out.verdicts);
    }
}
