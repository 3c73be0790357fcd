//! Kernels, graphs and measures named in configuration files.

use crate::error::{Error, Result};
use crate::geometry::{LipschitzGraph, ParamBox, Profile, Rotation, Shape};
use crate::kernel::{Kernel, KernelFunction};
use crate::measure::MeasureSpec;

use super::config::Config;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Graph profiles with their default parameters.
pub const PROFILES: [&str; 5] = ["flat", "tilted", "sawtooth", "cone", "bump"];

/// Catalog graph `name` in `R^dim` with default parameters.
pub fn catalog_graph(name: &str, dim: usize) -> Result<LipschitzGraph> {
    graph_with(name, dim, &|_, d| Ok(d))
}

fn graph_with(
    name: &str,
    dim: usize,
    param: &dyn Fn(&str, f64) -> Result<f64>,
) -> Result<LipschitzGraph> {
    if dim < 2 {
        return Err(cfg_err("dimension must be at least 2"));
    }
    let m = dim - 1;
    let profile = match name {
        "flat" => Profile::Affine {
            slope: vec![0.0; m],
            offset: param("offset", 0.0)?,
        },
        "tilted" => {
            let s = param("slope", 0.5)? / (m as f64).sqrt();
            Profile::Affine {
                slope: vec![s; m],
                offset: param("offset", 0.0)?,
            }
        }
        "sawtooth" => Profile::Sawtooth {
            amplitude: param("amplitude", 0.1)?,
            period: param("period", 0.5)?,
        },
        "cone" => Profile::Cone {
            slope: param("slope", 0.5)?,
        },
        "bump" => Profile::SmoothBump {
            amplitude: param("amplitude", 0.3)?,
            width: param("width", 0.5)?,
        },
        other => {
            return Err(cfg_err(format!(
                "unknown graph profile {other:?} (expected one of {})",
                PROFILES.join(", ")
            )))
        }
    };
    LipschitzGraph::new(dim, profile)
}

/// Graph from a config section: `profile`, the profile's parameters,
/// optional `rotation_angle` (radians, in the plane of the first and last
/// axes) and optional declared `lipschitz` constant.
pub fn graph_from_config(cfg: &Config, section: &str, dim: usize) -> Result<LipschitzGraph> {
    let name = cfg.string(section, "profile", "sawtooth")?;
    let mut g = graph_with(&name, dim, &|key, d| cfg.f64(section, key, d))?;
    let angle = cfg.f64(section, "rotation_angle", 0.0)?;
    if angle != 0.0 {
        g = g.with_rotation(Rotation::plane(dim, 0, dim - 1, angle))?;
    }
    if let Some(l) = cfg.raw(section, "lipschitz").map(|_| cfg.f64(section, "lipschitz", 0.0)) {
        g = g.with_declared_lipschitz(l?)?;
    }
    Ok(g)
}

/// `family` (riesz | odd_homogeneous), `axis` or `exponents`, optional
/// declared `c0`, `c1`.
pub fn kernel_from_config(cfg: &Config, section: &str, dim: usize) -> Result<Kernel> {
    let family = cfg.string(section, "family", "riesz")?;
    let mut k = match family.as_str() {
        "riesz" => Kernel::riesz(dim, cfg.usize(section, "axis", dim - 1)?)?,
        "odd_homogeneous" => {
            let mut e = vec![0u32; dim];
            e[0] = 1;
            Kernel::odd_homogeneous(dim, cfg.list(section, "exponents", &e)?)?
        }
        other => return Err(cfg_err(format!("unknown kernel family {other:?}"))),
    };
    let c0 = cfg.f64(section, "c0", k.c0())?;
    let c1 = cfg.f64(section, "c1", k.c1())?;
    if c0 != k.c0() || c1 != k.c1() {
        k = k.with_constants(c0, c1)?;
    }
    Ok(k)
}

/// `lo`, `hi` scalars spanning a cube in the graph parameter space.
pub fn domain_from_config(cfg: &Config, section: &str, dim: usize) -> Result<ParamBox> {
    ParamBox::cube(dim - 1, cfg.f64(section, "lo", -1.0)?, cfg.f64(section, "hi", 1.0)?)
}

/// Measure from the `[measure]` section; graph-based kinds read `[graph]`.
pub fn measure_from_config(cfg: &Config) -> Result<MeasureSpec> {
    let s = "measure";
    let kind = cfg.string(s, "kind", "graph")?;
    if kind == "cantor" {
        return Ok(MeasureSpec::CantorFourCorners {
            generation: cfg.get(s, "generation", Some(4u32))?,
        });
    }
    let dim = cfg.usize(s, "dim", 2)?;
    match kind.as_str() {
        "graph" => Ok(MeasureSpec::Graph {
            graph: graph_from_config(cfg, "graph", dim)?,
            domain: domain_from_config(cfg, s, dim)?,
            cells: cfg.usize(s, "cells", 256)?,
            shift: cfg.f64(s, "shift", 0.0)?,
        }),
        "slab" => Ok(MeasureSpec::Slab {
            graph: graph_from_config(cfg, "graph", dim)?,
            domain: domain_from_config(cfg, s, dim)?,
            cells: cfg.usize(s, "cells", 64)?,
            layers: cfg.usize(s, "layers", 4)?,
            thickness: cfg.f64(s, "thickness", 0.25)?,
            gap: cfg.f64(s, "gap", 0.0)?,
            below: cfg.bool(s, "below", false)?,
        }),
        "uniform_ball" => Ok(MeasureSpec::UniformOnShape {
            shape: Shape::ball(cfg.list(s, "center", &vec![0.0; dim])?, cfg.f64(s, "radius", 1.0)?)?,
            spacing: cfg.f64(s, "spacing", 0.05)?,
        }),
        "uniform_box" => {
            let lo: Vec<f64> = cfg.list(s, "box_lo", &vec![-1.0; dim])?;
            let hi: Vec<f64> = cfg.list(s, "box_hi", &vec![1.0; dim])?;
            Ok(MeasureSpec::UniformOnShape {
                shape: Shape::aligned_box(&lo, &hi)?,
                spacing: cfg.f64(s, "spacing", 0.05)?,
            })
        }
        other => Err(cfg_err(format!("unknown measure kind {other:?}"))),
    }
}
