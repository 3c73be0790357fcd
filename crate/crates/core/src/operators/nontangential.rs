use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::Cone;

/// Largest number of mesh points a single evaluation may visit.
pub const MAX_MESH_POINTS: u64 = 10_000_000;

/// Lower bound for `sup { |h(y)| : y in cone, t - f(u0) <= height_cap }`.
///
/// The mesh has `2^depth` equally spaced heights `dt`; at each height it uses
/// the lattice `{-depth..depth}^{n-1} / (depth + 1)` clipped to the open unit
/// ball and scaled to the cross-section radius `dt / (4 L)`. Only points that
/// pass the strict cone membership test are evaluated.
pub fn nontangential_max(
    h: &(dyn Fn(&[f64]) -> f64 + Sync),
    cone: &Cone,
    height_cap: f64,
    depth: u32,
) -> Result<f64> {
    if !(height_cap > 0.0 && height_cap.is_finite()) {
        return Err(invalid(format!("height cap must be positive, got {height_cap}")));
    }
    if !(1..=30).contains(&depth) {
        return Err(invalid(format!("mesh depth must lie in 1..=30, got {depth}")));
    }
    let m = cone.graph().dim() - 1;
    let side = 2 * depth as u64 + 1;
    let levels = 1u64 << depth;
    let total = side
        .checked_pow(m as u32)
        .and_then(|c| c.checked_mul(levels))
        .unwrap_or(u64::MAX);
    if total > MAX_MESH_POINTS {
        return Err(invalid(format!(
            "cone mesh of {total} points exceeds {MAX_MESH_POINTS}"
        )));
    }
    let template: Vec<Vec<f64>> = (0..side.pow(m as u32))
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let k = (code % side) as f64 - depth as f64;
                    code /= side;
                    k / (depth as f64 + 1.0)
                })
                .collect::<Vec<f64>>()
        })
        .filter(|v| v.iter().map(|x| x * x).sum::<f64>() < 1.0)
        .collect();
    let scale = 1.0 / (4.0 * cone.aperture());
    let best = (1..=levels)
        .into_par_iter()
        .map(|j| {
            let dt = height_cap * j as f64 / levels as f64;
            let mut best = 0.0f64;
            for v in &template {
                let du: Vec<f64> = v.iter().map(|x| x * dt * scale).collect();
                let y = cone.point_from_apex(&du, dt);
                if cone.contains(&y) {
                    best = best.max(h(&y).abs());
                }
            }
            best
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(best)
}
