use crate::error::{Error, Result};
use crate::geometry::{LipschitzGraph, ParamBox};
use crate::harness::specs::{graph_from_config, kernel_from_config};
use crate::harness::{Config, Outcome, Verdict};
use crate::kernel::Kernel;
use crate::measure::{build, DiscreteMeasure, MeasureSpec};
use crate::operators::{cancellation_bound, cauchy_tail, pair_sum_schedule, EpsSchedule, RESOLUTION_FACTOR};
use crate::table::Table;

use super::{increasing, nonempty, positive};

#[derive(Debug, Clone)]
pub struct Params {
    pub graph: LipschitzGraph,
    pub kernel: Kernel,
    pub cells: Vec<usize>,
    /// Layers per slab; 0 picks layer thickness equal to the cell width.
    pub layers: usize,
    pub thickness: f64,
    pub gap: f64,
    pub lo: f64,
    pub hi: f64,
    /// Slab below the graph; without it every trace is identically zero.
    pub lower_slab: bool,
    /// Surface measure on the graph itself.
    pub on_graph: bool,
    pub eps0: f64,
    pub ratio: f64,
    /// Allowed relative growth of the Cauchy tail between resolutions.
    pub shrink_noise: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            graph: crate::harness::specs::catalog_graph("sawtooth", 2).expect("catalog graph"),
            kernel: Kernel::riesz(2, 1).expect("valid kernel"),
            cells: vec![32, 64, 128, 256],
            layers: 0,
            thickness: 0.5,
            gap: 0.0,
            lo: -1.0,
            hi: 1.0,
            lower_slab: true,
            on_graph: true,
            eps0: 0.5,
            ratio: std::f64::consts::FRAC_1_SQRT_2,
            shrink_noise: 0.1,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "scenario";
        let dim = cfg.usize(s, "dim", 2)?;
        let p = Self {
            graph: graph_from_config(cfg, "graph", dim)?,
            kernel: kernel_from_config(cfg, "kernel", dim)?,
            cells: nonempty("cells", cfg.list(s, "cells", &d.cells)?)?,
            layers: cfg.usize(s, "layers", d.layers)?,
            thickness: positive("thickness", cfg.f64(s, "thickness", d.thickness)?)?,
            gap: cfg.f64(s, "gap", d.gap)?,
            lo: cfg.f64(s, "lo", d.lo)?,
            hi: cfg.f64(s, "hi", d.hi)?,
            lower_slab: cfg.bool(s, "lower_slab", d.lower_slab)?,
            on_graph: cfg.bool(s, "on_graph", d.on_graph)?,
            eps0: positive("eps0", cfg.f64(s, "eps0", d.eps0)?)?,
            ratio: cfg.f64(s, "ratio", d.ratio)?,
            shrink_noise: cfg.f64(s, "shrink_noise", d.shrink_noise)?,
        };
        increasing("cells", &p.cells)?;
        if !(p.gap >= 0.0) || !(p.shrink_noise >= 0.0) {
            return Err(Error::Config("gap and shrink_noise must be non-negative".into()));
        }
        if !(p.ratio > 0.0 && p.ratio < 1.0) {
            return Err(Error::Config("ratio must lie in (0, 1)".into()));
        }
        ParamBox::cube(dim - 1, p.lo, p.hi).map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn layers_at(&self, cells: usize) -> usize {
        if self.layers > 0 {
            self.layers
        } else {
            ((self.thickness * cells as f64 / (self.hi - self.lo)).ceil() as usize).max(1)
        }
    }
}

/// Slab above, optional slab below and optional graph measure, reordered
/// by side: atoms `0..up` above, `up..up + on` on, the rest below.
pub fn two_slab_measure(p: &Params, cells: usize) -> Result<(DiscreteMeasure, [std::ops::Range<usize>; 3])> {
    let dim = p.graph.dim();
    let domain = ParamBox::cube(dim - 1, p.lo, p.hi)?;
    let slab = |below: bool| {
        build(&MeasureSpec::Slab {
            graph: p.graph.clone(),
            domain: domain.clone(),
            cells,
            layers: p.layers_at(cells),
            thickness: p.thickness,
            gap: p.gap,
            below,
        })
    };
    let mut parts = vec![slab(false)?];
    if p.lower_slab {
        parts.push(slab(true)?);
    }
    if p.on_graph {
        parts.push(build(&MeasureSpec::Graph {
            graph: p.graph.clone(),
            domain: domain.clone(),
            cells,
            shift: 0.0,
        })?);
    }
    let refs: Vec<&DiscreteMeasure> = parts.iter().collect();
    let split = DiscreteMeasure::union(&refs)?.split_by_graph(&p.graph)?;
    let (a, o) = (split.above.len(), split.on.len());
    let mu = DiscreteMeasure::union(&[&split.above, &split.on, &split.below])?;
    let n = mu.len();
    Ok((mu, [0..a, a..a + o, a + o..n]))
}

/// Traces of the double integral over `(R^n \ H^-) x H^-`, its mirror over
/// `(R^n \ H^+) x H^+`, and the residual of the relabeling identity
/// `main + mirror = S(on, below) + S(on, above)`.
#[derive(Debug, Clone)]
pub struct BliTrace {
    pub eps: Vec<f64>,
    pub main: Vec<f64>,
    pub mirror: Vec<f64>,
    pub residual: Vec<f64>,
    pub bound: f64,
    pub atoms: usize,
}

pub fn bli_trace(mu: &DiscreteMeasure, k: &Kernel, ranges: &[std::ops::Range<usize>; 3], schedule: &EpsSchedule) -> Result<BliTrace> {
    let idx = |r: &std::ops::Range<usize>| r.clone().collect::<Vec<usize>>();
    let (up, on, dn) = (idx(&ranges[0]), idx(&ranges[1]), idx(&ranges[2]));
    let up_on: Vec<usize> = up.iter().chain(&on).copied().collect();
    let dn_on: Vec<usize> = dn.iter().chain(&on).copied().collect();
    let main = pair_sum_schedule(mu, k, &up_on, &dn, schedule)?;
    let mirror = pair_sum_schedule(mu, k, &dn_on, &up, schedule)?;
    let on_dn = pair_sum_schedule(mu, k, &on, &dn, schedule)?;
    let on_up = pair_sum_schedule(mu, k, &on, &up, schedule)?;
    let max_term = [&main, &mirror, &on_dn, &on_up]
        .iter()
        .map(|s| s.max_abs_term)
        .fold(0.0, f64::max);
    let residual = (0..schedule.len())
        .map(|e| (main.values[e] + mirror.values[e] - on_dn.values[e] - on_up.values[e]).abs())
        .collect();
    Ok(BliTrace {
        eps: schedule.values().to_vec(),
        main: main.values,
        mirror: mirror.values,
        residual,
        bound: cancellation_bound(mu.len(), max_term),
        atoms: mu.len(),
    })
}

fn scale(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn run(p: &Params, _seed: u64) -> Result<Outcome> {
    let mut trace_t = Table::new("bli_trace", &["cells", "eps", "main", "mirror", "relabel_residual", "bound"]);
    let mut summary = Table::new(
        "bli_summary",
        &["cells", "atoms", "radii", "main_limit", "main_tail", "main_scale", "mirror_limit", "mirror_tail", "mirror_scale"],
    );
    let mut tails = Vec::new();
    let mut relabel_ok = true;
    let mut worst = 0.0f64;
    for &cells in &p.cells {
        let (mu, ranges) = two_slab_measure(p, cells)?;
        let schedule = EpsSchedule::geometric(p.eps0, RESOLUTION_FACTOR * mu.resolution(), p.ratio)?;
        let t = bli_trace(&mu, &p.kernel, &ranges, &schedule)?;
        for e in 0..t.eps.len() {
            trace_t.push(vec![
                cells.into(),
                t.eps[e].into(),
                t.main[e].into(),
                t.mirror[e].into(),
                t.residual[e].into(),
                t.bound.into(),
            ]);
        }
        let r = t.residual.iter().copied().fold(0.0, f64::max);
        relabel_ok &= r <= t.bound;
        if t.bound > 0.0 {
            worst = worst.max(r / t.bound);
        }
        let (mt, rt) = (cauchy_tail(&t.main), cauchy_tail(&t.mirror));
        let (ms, rs) = (scale(&t.main), scale(&t.mirror));
        summary.push(vec![
            cells.into(),
            t.atoms.into(),
            t.eps.len().into(),
            (*t.main.last().unwrap_or(&0.0)).into(),
            mt.into(),
            ms.into(),
            (*t.mirror.last().unwrap_or(&0.0)).into(),
            rt.into(),
            rs.into(),
        ]);
        tails.push((mt, ms, rt, rs));
    }
    let shrink = |f: fn(&(f64, f64, f64, f64)) -> (f64, f64)| {
        tails
            .windows(2)
            .all(|w| super::pv::shrinks(f(&w[0]), f(&w[1]), p.shrink_noise))
    };
    let list = |f: fn(&(f64, f64, f64, f64)) -> f64| {
        tails.iter().map(|t| format!("{:.3e}", f(t))).collect::<Vec<_>>().join(", ")
    };
    let verdicts = vec![
        Verdict::check(
            "relabeling_identity",
            relabel_ok,
            format!("max residual / budget = {worst:.3e}"),
        ),
        Verdict::check(
            "main_tail_shrinks",
            shrink(|t| (t.0, t.1)),
            format!("tails [{}] across cells {:?}", list(|t| t.0), p.cells),
        ),
        Verdict::check(
            "mirror_tail_shrinks",
            shrink(|t| (t.2, t.3)),
            format!("tails [{}] across cells {:?}", list(|t| t.2), p.cells),
        ),
    ];
    Ok(Outcome {
        tables: vec![summary, trace_t],
        verdicts,
    })
}
