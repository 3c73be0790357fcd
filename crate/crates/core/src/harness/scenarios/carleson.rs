use crate::error::{Error, Result};
use crate::geometry::{dist_sq, Cone, LipschitzGraph, ParamBox};
use crate::harness::specs::graph_from_config;
use crate::harness::{Config, Outcome, Verdict};
use crate::measure::{build, DiscreteMeasure, MeasureSpec};
use crate::operators::{lp_norm, nontangential_max};
use crate::table::{Cell, Table};

use super::{increasing, nonempty, positive};

/// Smooth test functions of the embedding check.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    One,
    /// `exp(-|y - c|^2 / (2 s^2))`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// `y_axis`.
    Coordinate { axis: usize },
}

impl TestFunction {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::Gaussian { center, width } => (-dist_sq(y, center) / (2.0 * width * width)).exp(),
            TestFunction::Coordinate { axis } => y[*axis],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TestFunction::One => "one",
            TestFunction::Gaussian { .. } => "gaussian",
            TestFunction::Coordinate { .. } => "coordinate",
        }
    }

    fn parse(name: &str, dim: usize) -> Result<Self> {
        match name {
            "one" => Ok(TestFunction::One),
            "gaussian" => {
                let mut center = vec![0.2; dim];
                center[dim - 1] = 0.4;
                Ok(TestFunction::Gaussian { center, width: 0.3 })
            }
            "coordinate" => Ok(TestFunction::Coordinate { axis: 0 }),
            other => Err(Error::Config(format!(
                "unknown test function {other:?} (expected one, gaussian, coordinate)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Params {
    pub graph: LipschitzGraph,
    pub cells: Vec<usize>,
    pub layers: usize,
    pub thickness: f64,
    pub lo: f64,
    pub hi: f64,
    pub functions: Vec<TestFunction>,
    pub p: f64,
    pub aperture: f64,
    pub depth: u32,
    pub height: f64,
    /// Allowed growth of the ratio from one resolution to the next.
    pub max_growth: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            graph: crate::harness::specs::catalog_graph("sawtooth", 2).expect("catalog graph"),
            cells: vec![64, 128, 256, 512],
            layers: 4,
            thickness: 0.5,
            lo: -1.0,
            hi: 1.0,
            functions: ["one", "gaussian", "coordinate"]
                .iter()
                .map(|n| TestFunction::parse(n, 2).expect("catalog function"))
                .collect(),
            p: 2.0,
            aperture: 2.0,
            depth: 3,
            height: 1.0,
            max_growth: 1.5,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let s = "scenario";
        let dim = cfg.usize(s, "dim", 2)?;
        let names: Vec<String> = ["one", "gaussian", "coordinate"].iter().map(|x| x.to_string()).collect();
        let functions = nonempty("functions", cfg.list(s, "functions", &names)?)?
            .iter()
            .map(|n| TestFunction::parse(n, dim))
            .collect::<Result<Vec<_>>>()?;
        let p = Self {
            graph: graph_from_config(cfg, "graph", dim)?,
            cells: nonempty("cells", cfg.list(s, "cells", &d.cells)?)?,
            layers: cfg.usize(s, "layers", d.layers)?,
            thickness: positive("thickness", cfg.f64(s, "thickness", d.thickness)?)?,
            lo: cfg.f64(s, "lo", d.lo)?,
            hi: cfg.f64(s, "hi", d.hi)?,
            functions,
            p: cfg.f64(s, "p", d.p)?,
            aperture: positive("aperture", cfg.f64(s, "aperture", d.aperture)?)?,
            depth: cfg.get(s, "depth", Some(d.depth))?,
            height: positive("height", cfg.f64(s, "height", d.height)?)?,
            max_growth: positive("max_growth", cfg.f64(s, "max_growth", d.max_growth)?)?,
        };
        increasing("cells", &p.cells)?;
        if !(p.p >= 1.0 && p.p.is_finite()) {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if p.layers == 0 || !(1..=30).contains(&p.depth) {
            return Err(Error::Config("layers must be positive and depth in 1..=30".into()));
        }
        ParamBox::cube(dim - 1, p.lo, p.hi).map_err(|e| Error::Config(e.to_string()))?;
        Cone::new(&p.graph, vec![0.0; dim - 1], p.aperture).map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}

/// Measures at one resolution: the slab above the graph and the graph's
/// surface measure.
pub fn measures(p: &Params, cells: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let dim = p.graph.dim();
    let domain = ParamBox::cube(dim - 1, p.lo, p.hi)?;
    let mu = build(&MeasureSpec::Slab {
        graph: p.graph.clone(),
        domain: domain.clone(),
        cells,
        layers: p.layers,
        thickness: p.thickness,
        gap: 0.0,
        below: false,
    })?;
    let sigma = build(&MeasureSpec::Graph {
        graph: p.graph.clone(),
        domain,
        cells,
        shift: 0.0,
    })?;
    Ok((mu, sigma))
}

/// `(int |g|^p dmu)^(1/p)` and `(int N(g)^p dsigma)^(1/p)` with the mesh `N`.
pub fn embedding_norms(p: &Params, f: &TestFunction, mu: &DiscreteMeasure, sigma: &DiscreteMeasure) -> Result<(f64, f64)> {
    let g: Vec<f64> = mu.positions().map(|y| f.eval(y)).collect();
    let lhs = lp_norm(mu, &g, p.p)?;
    let h = |y: &[f64]| f.eval(y);
    let n: Vec<f64> = sigma
        .positions()
        .map(|x| {
            let q = p.graph.to_frame(x);
            let cone = Cone::new(&p.graph, q[..q.len() - 1].to_vec(), p.aperture)?;
            nontangential_max(&h, &cone, p.height, p.depth)
        })
        .collect::<Result<_>>()?;
    Ok((lhs, lp_norm(sigma, &n, p.p)?))
}

pub fn run(p: &Params, _seed: u64) -> Result<Outcome> {
    let mut t = Table::new(
        "carleson",
        &["function", "cells", "mu_atoms", "sigma_atoms", "lhs", "rhs", "ratio", "ratio_to_previous"],
    );
    let levels = p
        .cells
        .iter()
        .map(|&c| measures(p, c))
        .collect::<Result<Vec<_>>>()?;
    let mut verdicts = Vec::new();
    for f in &p.functions {
        let mut ratios: Vec<f64> = Vec::new();
        for (&cells, (mu, sigma)) in p.cells.iter().zip(&levels) {
            let (lhs, rhs) = embedding_norms(p, f, mu, sigma)?;
            if rhs == 0.0 {
                // g vanishes on every cone: nothing to compare
                continue;
            }
            let ratio = lhs / rhs;
            let growth: Cell = ratios.last().map_or(Cell::from(""), |prev| (ratio / prev).into());
            t.push(vec![
                f.label().into(),
                cells.into(),
                mu.len().into(),
                sigma.len().into(),
                lhs.into(),
                rhs.into(),
                ratio.into(),
                growth,
            ]);
            ratios.push(ratio);
        }
        let ok = ratios.windows(2).all(|w| w[1] <= p.max_growth * w[0]);
        let list: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
        verdicts.push(Verdict::check(
            format!("carleson_{}", f.label()),
            ok,
            format!("ratios [{}] across cells {:?}, allowed growth {}", list.join(", "), p.cells, p.max_growth),
        ));
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
    fn constant_function_ratio_is_a_mass_ratio() {
        let p = Params {
            p: 1.0,
            ..Params::default()
        };
        let (mu, sigma) = measures(&p, 64).unwrap();
        let (lhs, rhs) = embedding_norms(&p, &TestFunction::One, &mu, &sigma).unwrap();
        assert!((lhs - mu.total_mass()).abs() < 1e-12);
        assert!((rhs - sigma.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn small_run_is_bounded() {
        let p = Params {
            cells: vec![32, 64, 128],
            ..Params::default()
        };
        let out = run(&p, 0).unwrap();
        assert!(out.verdicts.iter().all(|v| v.passed), "{:?}", out.verdicts);
    }
}
