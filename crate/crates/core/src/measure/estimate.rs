use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::dist;
use crate::sum::CompensatedSum;

use super::DiscreteMeasure;

/// `mu(B(center, r))` for every radius (closed balls).
pub fn ball_masses(mu: &DiscreteMeasure, center: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    check_dim(mu.dim(), center.len())?;
    let mut atoms: Vec<(f64, f64)> = mu
        .positions()
        .zip(mu.weights())
        .map(|(p, &w)| (dist(p, center), w))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(atoms.len() + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(0.0);
    for &(_, w) in &atoms {
        acc.add(w);
        prefix.push(acc.value());
    }
    Ok(radii
        .iter()
        .map(|&r| prefix[atoms.partition_point(|a| a.0 <= r)])
        .collect())
}

fn check_radii(mu: &DiscreteMeasure, centers: &[Vec<f64>], radii: &[f64]) -> Result<()> {
    if centers.is_empty() || radii.is_empty() {
        return Err(invalid("growth estimate needs at least one center and one radius"));
    }
    for &r in radii {
        if !(r.is_finite() && r >= mu.resolution()) {
            return Err(Error::ResolutionFloor {
                value: r,
                floor: mu.resolution(),
            });
        }
    }
    for c in centers {
        check_dim(mu.dim(), c.len())?;
    }
    Ok(())
}

fn density_ratios(mu: &DiscreteMeasure, centers: &[Vec<f64>], radii: &[f64]) -> Result<Vec<f64>> {
    check_radii(mu, centers, radii)?;
    let p = (mu.dim() - 1) as i32;
    let per_center: Vec<Vec<f64>> = centers
        .par_iter()
        .map(|c| {
            ball_masses(mu, c, radii).map(|m| {
                m.iter()
                    .zip(radii)
                    .map(|(mass, r)| mass / r.powi(p))
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_center.into_iter().flatten().collect())
}

/// `max mu(B(x, r)) / r^{n-1}` over the given centers and radii.
///
/// Every radius must be at least the measure's resolution.
pub fn growth_constant(mu: &DiscreteMeasure, centers: &[Vec<f64>], radii: &[f64]) -> Result<f64> {
    Ok(density_ratios(mu, centers, radii)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// `min mu(B(x, r)) / r^{n-1}` over the given centers and radii.
pub fn lower_density(mu: &DiscreteMeasure, centers: &[Vec<f64>], radii: &[f64]) -> Result<f64> {
    Ok(density_ratios(mu, centers, radii)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// `count` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(invalid("geometric grid needs 0 < lo <= hi and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| lo * (ratio * i as f64).exp()).collect();
    out[count - 1] = hi;
    Ok(out)
}
