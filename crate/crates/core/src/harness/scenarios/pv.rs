use crate::error::{Error, Result};
use crate::geometry::{dist_sq, LipschitzGraph, ParamBox};
use crate::harness::specs::catalog_graph;
use crate::harness::{Config, Outcome, Verdict};
use crate::kernel::Kernel;
use crate::measure::{build, DiscreteMeasure, MeasureSpec};
use crate::operators::{pv_estimate, DensityFunction, EpsSchedule, PVResult, RESOLUTION_FACTOR};
use crate::table::Table;

use super::{increasing, nonempty, positive};

#[derive(Debug, Clone)]
pub struct Params {
    pub profiles: Vec<String>,
    pub dim: usize,
    /// Riesz components; empty means all of them.
    pub axes: Vec<usize>,
    pub cells: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    /// Parameter coordinate (on every axis) of the evaluation atom.
    pub eval_u: f64,
    pub eps0: f64,
    pub ratio: f64,
    /// Smallest radius in units of the resolution; at least 4.
    pub eps_min_factor: f64,
    /// Required `tail / scale` at the finest resolution.
    pub tail_tol: f64,
    /// Allowed relative growth of the tail from one resolution to the next.
    pub shrink_noise: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            profiles: vec!["flat".into(), "bump".into()],
            dim: 2,
            axes: Vec::new(),
            cells: vec![256, 1024, 4096],
            lo: -1.0,
            hi: 1.0,
            eval_u: 0.3,
            eps0: 0.5,
            ratio: 0.5,
            eps_min_factor: RESOLUTION_FACTOR,
            tail_tol: 1e-2,
            shrink_noise: 0.1,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "scenario";
        let p = Self {
            profiles: nonempty("profiles", cfg.list(s, "profiles", &d.profiles)?)?,
            dim: cfg.usize(s, "dim", d.dim)?,
            axes: cfg.list(s, "axes", &d.axes)?,
            cells: nonempty("cells", cfg.list(s, "cells", &d.cells)?)?,
            lo: cfg.f64(s, "lo", d.lo)?,
            hi: cfg.f64(s, "hi", d.hi)?,
            eval_u: cfg.f64(s, "eval_u", d.eval_u)?,
            eps0: positive("eps0", cfg.f64(s, "eps0", d.eps0)?)?,
            ratio: cfg.f64(s, "ratio", d.ratio)?,
            eps_min_factor: cfg.f64(s, "eps_min_factor", d.eps_min_factor)?,
            tail_tol: positive("tail_tol", cfg.f64(s, "tail_tol", d.tail_tol)?)?,
            shrink_noise: cfg.f64(s, "shrink_noise", d.shrink_noise)?,
        };
        increasing("cells", &p.cells)?;
        if p.eps_min_factor < RESOLUTION_FACTOR {
            return Err(Error::ResolutionFloor {
                value: p.eps_min_factor,
                floor: RESOLUTION_FACTOR,
            });
        }
        if !(p.ratio > 0.0 && p.ratio < 1.0) {
            return Err(Error::Config("ratio must lie in (0, 1)".into()));
        }
        if !(p.shrink_noise >= 0.0) {
            return Err(Error::Config("shrink_noise must be non-negative".into()));
        }
        if p.axes.iter().any(|&a| a >= p.dim) {
            return Err(Error::Config("Riesz axis out of range".into()));
        }
        ParamBox::cube(p.dim.saturating_sub(1), p.lo, p.hi).map_err(|e| Error::Config(e.to_string()))?;
        for name in &p.profiles {
            catalog_graph(name, p.dim)?;
        }
        Ok(p)
    }

    fn axes(&self) -> Vec<usize> {
        if self.axes.is_empty() {
            (0..self.dim).collect()
        } else {
            self.axes.clone()
        }
    }
}

/// Atom of `mu` closest to the graph point over `u`.
pub fn nearest_atom(mu: &DiscreteMeasure, graph: &LipschitzGraph, u: &[f64]) -> Option<Vec<f64>> {
    let target = graph.point_at(u, 0.0);
    mu.positions()
        .min_by(|a, b| dist_sq(a, &target).total_cmp(&dist_sq(b, &target)))
        .map(|p| p.to_vec())
}

/// One PV run: graph measure at `cells`, evaluated at the atom nearest `eval_u`.
pub fn pv_at(p: &Params, graph: &LipschitzGraph, kernel: &Kernel, cells: usize) -> Result<(Vec<f64>, f64, PVResult)> {
    let mu = build(&MeasureSpec::Graph {
        graph: graph.clone(),
        domain: ParamBox::cube(p.dim - 1, p.lo, p.hi)?,
        cells,
        shift: 0.0,
    })?;
    let x = nearest_atom(&mu, graph, &vec![p.eval_u; p.dim - 1])
        .ok_or_else(|| Error::InvalidParameter("empty measure".into()))?;
    let schedule = EpsSchedule::geometric(p.eps0, p.eps_min_factor * mu.resolution(), p.ratio)?;
    let r = pv_estimate(&mu, kernel, &DensityFunction::One, &x, &schedule, None)?;
    Ok((x, mu.resolution(), r))
}

pub fn run(p: &Params, _seed: u64) -> Result<Outcome> {
    let mut summary = Table::new(
        "pv_summary",
        &[
            "profile", "axis", "cells", "resolution", "radii", "value", "tail", "scale", "tail_rel", "converged",
        ],
    );
    let mut trace = Table::new("pv_trace", &["profile", "axis", "cells", "eps", "value"]);
    let mut verdicts = Vec::new();
    for name in &p.profiles {
        let graph = catalog_graph(name, p.dim)?;
        for axis in p.axes() {
            let kernel = Kernel::riesz(p.dim, axis)?;
            let mut tails = Vec::new();
            for &cells in &p.cells {
                let (_, h, r) = pv_at(p, &graph, &kernel, cells)?;
                let rel = if r.scale > 0.0 { r.tail / r.scale } else { 0.0 };
                summary.push(vec![
                    name.as_str().into(),
                    axis.into(),
                    cells.into(),
                    h.into(),
                    r.estimates.len().into(),
                    r.limit_estimate.into(),
                    r.tail.into(),
                    r.scale.into(),
                    rel.into(),
                    r.converged.into(),
                ]);
                for (e, v) in &r.estimates {
                    trace.push(vec![name.as_str().into(), axis.into(), cells.into(), (*e).into(), (*v).into()]);
                }
                tails.push((r.tail, r.scale));
            }
            let &(tail, scale) = tails.last().expect("cells is nonempty");
            verdicts.push(Verdict::check(
                format!("pv_tail_{name}_axis{axis}"),
                tail <= p.tail_tol * scale,
                format!(
                    "tail {tail:e} vs {} x scale {scale:e} at {} cells",
                    p.tail_tol,
                    p.cells.last().expect("cells is nonempty")
                ),
            ));
            let shrinks = tails.windows(2).all(|w| shrinks(w[0], w[1], p.shrink_noise));
            let list: Vec<String> = tails.iter().map(|t| format!("{:.3e}", t.0)).collect();
            verdicts.push(Verdict::check(
                format!("pv_shrink_{name}_axis{axis}"),
                shrinks,
                format!("tails [{}] across cells {:?}", list.join(", "), p.cells),
            ));
        }
    }
    Ok(Outcome {
        tables: vec![summary, trace],
        verdicts,
    })
}

/// `tail_next <= (1 + noise) tail_prev`, with tails at rounding level
/// (`<= 1e-12 scale`) treated as zero.
pub fn shrinks(prev: (f64, f64), next: (f64, f64), noise: f64) -> bool {
    let floor = |(t, s): (f64, f64)| if t <= 1e-12 * s { 0.0 } else { t };
    floor(next) <= (1.0 + noise) * floor(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_rule() {
        assert!(shrinks((1.0, 10.0), (1.05, 10.0), 0.1));
        assert!(!shrinks((1.0, 10.0), (1.2, 10.0), 0.1));
        assert!(shrinks((0.0, 10.0), (1e-12, 10.0), 0.1));
        assert!(!shrinks((0.0, 10.0), (1e-6, 10.0), 0.1));
    }

    #[test]
    fn floor_below_four_is_rejected() {
        let cfg = Config::parse("[scenario]\nkind = pv_convergence\neps_min_factor = 2\n").unwrap();
        assert!(matches!(Params::from_config(&cfg), Err(Error::ResolutionFloor { .. })));
    }

    #[test]
    fn evaluation_point_is_an_atom() {
        let p = Params::default();
        let g = catalog_graph("bump", 2).unwrap();
        let (x, h, r) = pv_at(&p, &g, &Kernel::riesz(2, 1).unwrap(), 256).unwrap();
        assert!((x[0] - 0.3).abs() <= h);
        assert!(r.estimates.len() >= 4);
    }
}
