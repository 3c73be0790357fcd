use crate::error::{Error, Result};
use crate::geometry::{LipschitzGraph, ParamBox};
use crate::harness::specs::{catalog_graph, graph_from_config, kernel_from_config};
use crate::harness::{Config, Outcome, Verdict};
use crate::kernel::{Kernel, KernelFunction};
use crate::measure::{build, DiscreteMeasure, MeasureSpec};
use crate::operators::{lp_norm, maximal_at, DensityFunction};
use crate::pairing::{FunctionSpace, SimpleFunction};
use crate::rng::SplitMix64;
use crate::table::{Cell, Table};

use super::{increasing, nonempty, positive, stream_key};

#[derive(Debug, Clone)]
pub struct Params {
    pub graph: LipschitzGraph,
    pub kernel: Kernel,
    /// Resolutions `m`: `nu` has `m` atoms on the graph shifted down by
    /// `nu_shift`, `mu` is a slab above with `m / layers` cells and `layers`
    /// layers.
    pub cells: Vec<usize>,
    pub nu_shift: f64,
    pub layers: usize,
    pub thickness: f64,
    pub lo: f64,
    pub hi: f64,
    pub exponents: Vec<f64>,
    /// Random simple functions `g` per resolution.
    pub functions: usize,
    pub max_terms: usize,
    pub max_growth: f64,
    /// Four-corners generations for the `mu = nu` control; empty disables it.
    pub control_generations: Vec<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            graph: catalog_graph("sawtooth", 2).expect("catalog graph"),
            kernel: Kernel::riesz(2, 1).expect("valid kernel"),
            cells: vec![128, 256, 512, 1024, 2048],
            nu_shift: 0.05,
            layers: 4,
            thickness: 0.5,
            lo: -1.0,
            hi: 1.0,
            exponents: vec![1.5, 2.0, 3.0],
            functions: 50,
            max_terms: 5,
            max_growth: 1.5,
            control_generations: vec![3, 4, 5, 6],
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
            nu_shift: positive("nu_shift", cfg.f64(s, "nu_shift", d.nu_shift)?)?,
            layers: cfg.usize(s, "layers", d.layers)?,
            thickness: positive("thickness", cfg.f64(s, "thickness", d.thickness)?)?,
            lo: cfg.f64(s, "lo", d.lo)?,
            hi: cfg.f64(s, "hi", d.hi)?,
            exponents: nonempty("exponents", cfg.list(s, "exponents", &d.exponents)?)?,
            functions: cfg.usize(s, "functions", d.functions)?,
            max_terms: cfg.usize(s, "max_terms", d.max_terms)?,
            max_growth: positive("max_growth", cfg.f64(s, "max_growth", d.max_growth)?)?,
            control_generations: cfg.list(s, "control_generations", &d.control_generations)?,
        };
        increasing("cells", &p.cells)?;
        increasing("control_generations", &p.control_generations)?;
        if p.layers == 0 || p.cells.iter().any(|&m| m < p.layers || m % p.layers != 0) {
            return Err(Error::Config("every resolution must be a positive multiple of layers".into()));
        }
        if p.functions == 0 || p.max_terms == 0 {
            return Err(Error::Config("functions and max_terms must be positive".into()));
        }
        if p.exponents.iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
            return Err(Error::Config("exponents must be at least 1".into()));
        }
        if p.control_generations.iter().any(|&g| g == 0 || g > 7) {
            return Err(Error::Config("control generations must lie in 1..=7".into()));
        }
        if !p.control_generations.is_empty() && p.kernel.dim() != 2 {
            return Err(Error::Config("the Cantor control needs a planar kernel".into()));
        }
        ParamBox::cube(dim - 1, p.lo, p.hi).map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}

/// `(nu, mu)` at resolution `m`: `nu` strictly below the graph, `mu`
/// strictly above it.
pub fn separated_measures(p: &Params, m: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let dim = p.graph.dim();
    let domain = ParamBox::cube(dim - 1, p.lo, p.hi)?;
    let nu = build(&MeasureSpec::Graph {
        graph: p.graph.clone(),
        domain: domain.clone(),
        cells: m,
        shift: -p.nu_shift,
    })?;
    let mu = build(&MeasureSpec::Slab {
        graph: p.graph.clone(),
        domain,
        cells: m / p.layers,
        layers: p.layers,
        thickness: p.thickness,
        gap: 0.0,
        below: false,
    })?;
    Ok((nu, mu))
}

/// Random simple functions drawn in the bounding box of `support`, nonzero
/// on it.
pub fn random_functions(p: &Params, support: &DiscreteMeasure, key: u64, seed: u64) -> Result<Vec<SimpleFunction>> {
    let mut rng = SplitMix64::stream(seed, key);
    (0..p.functions)
        .map(|i| {
            let space = if i % 2 == 0 { FunctionSpace::Balls } else { FunctionSpace::Rectangles };
            SimpleFunction::random_nonzero_on(support, space, p.max_terms, &mut rng)
        })
        .collect()
}

/// `ratios[j][e] = ||T*_nu g_j||_{L^p_e(mu)} / ||g_j||_{L^p_e(nu)}`; functions
/// vanishing on `nu` get ratio 0.
pub fn lp_ratios(
    nu: &DiscreteMeasure,
    mu: &DiscreteMeasure,
    k: &Kernel,
    functions: &[SimpleFunction],
    exponents: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let values: Vec<Vec<f64>> = functions
        .iter()
        .map(|f| DensityFunction::Simple(f.clone()).values(nu))
        .collect::<Result<_>>()?;
    let charges: Vec<Vec<f64>> = values
        .iter()
        .map(|v| v.iter().zip(nu.weights()).map(|(a, w)| a * w).collect())
        .collect();
    let refs: Vec<&[f64]> = charges.iter().map(|c| c.as_slice()).collect();
    let points: Vec<&[f64]> = mu.positions().collect();
    let t_star = maximal_at(nu, k, &refs, &points)?;
    (0..functions.len())
        .map(|j| {
            let h: Vec<f64> = t_star.iter().map(|row| row[j]).collect();
            exponents
                .iter()
                .map(|&q| {
                    let den = lp_norm(nu, &values[j], q)?;
                    Ok(if den > 0.0 { lp_norm(mu, &h, q)? / den } else { 0.0 })
                })
                .collect()
        })
        .collect()
}

fn column_max(ratios: &[Vec<f64>], e: usize) -> f64 {
    ratios.iter().map(|r| r[e]).fold(0.0, f64::max)
}

/// Max `L^2` ratio with `mu = nu` the four-corners measure at each generation.
pub fn cantor_control(p: &Params, seed: u64) -> Result<Vec<(usize, usize, f64)>> {
    p.control_generations
        .iter()
        .map(|&g| {
            let nu = build(&MeasureSpec::CantorFourCorners { generation: g as u32 })?;
            // the same functions at every generation
            let box_measure = build(&MeasureSpec::CantorFourCorners { generation: 1 })?;
            let mut fs = random_functions(p, &box_measure, stream_key(&[seed, 0xc0]), seed)?;
            fs.insert(0, SimpleFunction::indicator(crate::geometry::Shape::aligned_box(&[0.0, 0.0], &[1.0, 1.0])?));
            let r = lp_ratios(&nu, &nu, &p.kernel, &fs, &[2.0])?;
            Ok((g, nu.len(), column_max(&r, 0)))
        })
        .collect()
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let mut t = Table::new(
        "separated",
        &["p", "cells", "nu_atoms", "mu_atoms", "max_ratio", "mean_ratio", "growth_vs_previous"],
    );
    let (coarse, _) = separated_measures(p, p.cells[0])?;
    let functions = random_functions(p, &coarse, stream_key(&[seed, 0x5e9]), seed)?;
    let mut per_level = Vec::new();
    for &m in &p.cells {
        let (nu, mu) = separated_measures(p, m)?;
        per_level.push((m, nu.len(), mu.len(), lp_ratios(&nu, &mu, &p.kernel, &functions, &p.exponents)?));
    }
    let mut verdicts = Vec::new();
    for (e, &q) in p.exponents.iter().enumerate() {
        let mut maxima: Vec<f64> = Vec::new();
        for (m, n_nu, n_mu, ratios) in &per_level {
            let max = column_max(ratios, e);
            let mean = ratios.iter().map(|r| r[e]).sum::<f64>() / ratios.len() as f64;
            let growth: Cell = maxima.last().map_or(Cell::from(""), |prev| (max / prev).into());
            t.push(vec![q.into(), (*m).into(), (*n_nu).into(), (*n_mu).into(), max.into(), mean.into(), growth]);
            maxima.push(max);
        }
        let ok = maxima.windows(2).all(|w| w[1] <= p.max_growth * w[0]);
        let list: Vec<String> = maxima.iter().map(|r| format!("{r:.4}")).collect();
        verdicts.push(Verdict::check(
            format!("separated_p{q}"),
            ok,
            format!("max ratios [{}] across cells {:?}, allowed growth {}", list.join(", "), p.cells, p.max_growth),
        ));
    }
    let mut tables = vec![t];
    if !p.control_generations.is_empty() {
        let control = cantor_control(p, seed)?;
        let mut c = Table::new("cantor_control", &["generation", "atoms", "max_ratio_l2"]);
        for &(g, n, r) in &control {
            c.push(vec![g.into(), n.into(), r.into()]);
        }
        let increasing = control.windows(2).all(|w| w[1].2 > w[0].2);
        let list: Vec<String> = control.iter().map(|r| format!("{:.4}", r.2)).collect();
        verdicts.push(Verdict::info(
            "cantor_control_increasing",
            increasing,
            format!("L2 ratios [{}] across generations {:?}", list.join(", "), p.control_generations),
        ));
        tables.push(c);
    }
    Ok(Outcome { tables, verdicts })
}
