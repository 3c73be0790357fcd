use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{LipschitzGraph, ParamBox, Shape};

use super::DiscreteMeasure;

/// Hard cap on atom counts for any built measure.
pub const MAX_ATOMS: u64 = 100_000_000;

/// Largest supported four-corners generation (`4^10` atoms).
pub const MAX_CANTOR_GENERATION: u32 = 10;

/// Catalog of measure families.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    /// Surface measure on the graph over `domain`: one atom per grid cell at
    /// `(u_c, f(u_c) + shift)` weighted by the cell volume times the surface
    /// element `sqrt(1 + |grad f(u_c)|^2)`.
    Graph {
        graph: LipschitzGraph,
        domain: ParamBox,
        cells: usize,
        shift: f64,
    },
    /// Four-corners Cantor set of contraction ratio 1/4 on the unit square,
    /// generation `g`: `4^g` atoms of mass `4^-g` at the sub-square centers.
    CantorFourCorners { generation: u32 },
    /// Grid atoms of spacing at most `spacing` inside a closed shape, equal
    /// weights of total mass 1.
    UniformOnShape { shape: Shape, spacing: f64 },
    /// Lebesgue measure on `{(u, t) : f(u) + gap < t <= f(u) + gap + thickness}`
    /// divided by `thickness`, sampled at cell and layer midpoints; mirrored
    /// to the other side of the graph when `below` is set.
    Slab {
        graph: LipschitzGraph,
        domain: ParamBox,
        cells: usize,
        layers: usize,
        thickness: f64,
        gap: f64,
        below: bool,
    },
}

fn guard(count: u128) -> Result<()> {
    if count > MAX_ATOMS as u128 {
        return Err(Error::TooManyAtoms {
            count: count.min(u64::MAX as u128) as u64,
            limit: MAX_ATOMS,
        });
    }
    Ok(())
}

/// Iterate all multi-indices of a grid (last axis fastest).
fn for_each_cell(counts: &[usize], mut f: impl FnMut(&[usize])) {
    if counts.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; counts.len()];
    loop {
        f(&idx);
        let mut k = counts.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn cell_centers(domain: &ParamBox, cells: usize) -> (Vec<f64>, impl Fn(&[usize]) -> Vec<f64> + '_) {
    let steps: Vec<f64> = domain
        .lo
        .iter()
        .zip(&domain.hi)
        .map(|(a, b)| (b - a) / cells as f64)
        .collect();
    let s2 = steps.clone();
    let center = move |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| domain.lo[k] + (i as f64 + 0.5) * s2[k])
            .collect()
    };
    (steps, center)
}

fn surface_element(graph: &LipschitzGraph, u: &[f64], steps: &[f64]) -> f64 {
    let mut v = u.to_vec();
    let mut g2 = 0.0;
    for k in 0..u.len() {
        let h = steps[k] / 100.0;
        v[k] = u[k] + h;
        let plus = graph.f(&v);
        v[k] = u[k] - h;
        let minus = graph.f(&v);
        v[k] = u[k];
        let d = (plus - minus) / (2.0 * h);
        g2 += d * d;
    }
    (1.0 + g2).sqrt()
}

pub fn build(spec: &MeasureSpec) -> Result<DiscreteMeasure> {
    match spec {
        MeasureSpec::Graph {
            graph,
            domain,
            cells,
            shift,
        } => {
            let n = graph.dim();
            check_dim(n - 1, domain.dim())?;
            if *cells == 0 || !shift.is_finite() {
                return Err(invalid("graph measure needs cells >= 1 and a finite shift"));
            }
            guard((*cells as u128).pow((n - 1) as u32))?;
            let (steps, center) = cell_centers(domain, *cells);
            let volume: f64 = steps.iter().product();
            let mut coords = Vec::new();
            let mut weights = Vec::new();
            for_each_cell(&vec![*cells; n - 1], |idx| {
                let u = center(idx);
                coords.extend(graph.point_at(&u, *shift));
                weights.push(volume * surface_element(graph, &u, &steps));
            });
            let h = steps.iter().map(|s| s * s).sum::<f64>().sqrt();
            DiscreteMeasure::new(n, coords, weights, h)
        }
        MeasureSpec::CantorFourCorners { generation } => {
            if *generation > MAX_CANTOR_GENERATION {
                return Err(invalid(format!(
                    "Cantor generation {generation} exceeds {MAX_CANTOR_GENERATION}"
                )));
            }
            let mut squares = vec![(0.0f64, 0.0f64)];
            let mut side = 1.0f64;
            for _ in 0..*generation {
                let step = 0.75 * side;
                squares = squares
                    .iter()
                    .flat_map(|&(x, y)| {
                        [(x, y), (x + step, y), (x, y + step), (x + step, y + step)]
                    })
                    .collect();
                side *= 0.25;
            }
            let coords = squares
                .iter()
                .flat_map(|&(x, y)| [x + 0.5 * side, y + 0.5 * side])
                .collect();
            let weights = vec![side; squares.len()];
            DiscreteMeasure::new(2, coords, weights, side)
        }
        MeasureSpec::UniformOnShape { shape, spacing } => {
            if !(spacing.is_finite() && *spacing > 0.0) {
                return Err(invalid("uniform measure spacing must be positive"));
            }
            let n = shape.dim();
            let half: Vec<f64> = match shape {
                Shape::Ball { radius, .. } => vec![*radius; n],
                Shape::Rectangle { half_widths, .. } => half_widths.clone(),
            };
            let counts: Vec<usize> = half
                .iter()
                .map(|h| ((2.0 * h / spacing).ceil() as usize).max(1))
                .collect();
            guard(counts.iter().map(|&c| c as u128).product())?;
            let steps: Vec<f64> = half
                .iter()
                .zip(&counts)
                .map(|(h, &c)| 2.0 * h / c as f64)
                .collect();
            let mut coords = Vec::new();
            for_each_cell(&counts, |idx| {
                let q: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| -half[k] + (i as f64 + 0.5) * steps[k])
                    .collect();
                let p = shape.from_local(&q);
                if shape.contains(&p) {
                    coords.extend(p);
                }
            });
            let count = coords.len() / n;
            if count == 0 {
                return Err(invalid("uniform measure grid has no atoms inside the shape"));
            }
            let weights = vec![1.0 / count as f64; count];
            let h = steps.iter().map(|s| s * s).sum::<f64>().sqrt();
            DiscreteMeasure::new(n, coords, weights, h)
        }
        MeasureSpec::Slab {
            graph,
            domain,
            cells,
            layers,
            thickness,
            gap,
            below,
        } => {
            let n = graph.dim();
            check_dim(n - 1, domain.dim())?;
            if *cells == 0 || *layers == 0 {
                return Err(invalid("slab needs cells >= 1 and layers >= 1"));
            }
            if !(thickness.is_finite() && *thickness > 0.0 && gap.is_finite() && *gap >= 0.0) {
                return Err(invalid("slab needs thickness > 0 and gap >= 0"));
            }
            guard((*cells as u128).pow((n - 1) as u32) * *layers as u128)?;
            let (steps, center) = cell_centers(domain, *cells);
            let dt = thickness / *layers as f64;
            let w = steps.iter().product::<f64>() / *layers as f64;
            let sign = if *below { -1.0 } else { 1.0 };
            let mut coords = Vec::new();
            let mut weights = Vec::new();
            for_each_cell(&vec![*cells; n - 1], |idx| {
                let u = center(idx);
                for j in 0..*layers {
                    coords.extend(graph.point_at(&u, sign * (gap + (j as f64 + 0.5) * dt)));
                    weights.push(w);
                }
            });
            let h = (steps.iter().map(|s| s * s).sum::<f64>() + dt * dt).sqrt();
            DiscreteMeasure::new(n, coords, weights, h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;

    #[test]
    fn cantor_generation_one() {
        let mu = build(&MeasureSpec::CantorFourCorners { generation: 1 }).unwrap();
        assert_eq!(mu.len(), 4);
        let pts: Vec<&[f64]> = mu.positions().collect();
        assert_eq!(pts, vec![&[0.125, 0.125][..], &[0.875, 0.125], &[0.125, 0.875], &[0.875, 0.875]]);
        assert!(mu.weights().iter().all(|&w| w == 0.25));
        assert!(build(&MeasureSpec::CantorFourCorners { generation: 11 }).is_err());
    }

    #[test]
    fn cantor_mass_is_one() {
        for g in 0..=6 {
            let mu = build(&MeasureSpec::CantorFourCorners { generation: g }).unwrap();
            assert_eq!(mu.len(), 4usize.pow(g));
            assert_eq!(mu.total_mass(), 1.0);
        }
    }

    #[test]
    fn flat_graph_measure() {
        let spec = MeasureSpec::Graph {
            graph: LipschitzGraph::flat(2),
            domain: ParamBox::cube(1, 0.0, 1.0).unwrap(),
            cells: 4,
            shift: 0.0,
        };
        let mu = build(&spec).unwrap();
        assert_eq!(mu.len(), 4);
        for (i, p) in mu.positions().enumerate() {
            assert_eq!(p, &[0.125 + 0.25 * i as f64, 0.0]);
        }
        assert!(mu.weights().iter().all(|&w| w == 0.25));
        assert_eq!(mu.resolution(), 0.25);
    }

    #[test]
    fn sloped_graph_measure_mass() {
        for cells in [2usize, 4, 37] {
            let graph = LipschitzGraph::new(
                2,
                Profile::Affine {
                    slope: vec![1.0],
                    offset: 0.0,
                },
            )
            .unwrap();
            let mu = build(&MeasureSpec::Graph {
                graph,
                domain: ParamBox::cube(1, 0.0, 1.0).unwrap(),
                cells,
                shift: 0.0,
            })
            .unwrap();
            let w = std::f64::consts::SQRT_2 / cells as f64;
            assert!(mu.weights().iter().all(|x| (x - w).abs() < 1e-12));
            assert!((mu.total_mass() - std::f64::consts::SQRT_2).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_surface_mass_in_three_dimensions() {
        let graph = LipschitzGraph::new(
            3,
            Profile::Affine {
                slope: vec![0.3, -0.4],
                offset: 1.0,
            },
        )
        .unwrap();
        let mu = build(&MeasureSpec::Graph {
            graph,
            domain: ParamBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(),
            cells: 8,
            shift: 0.0,
        })
        .unwrap();
        let exact = 2.0 * (1.0f64 + 0.09 + 0.16).sqrt();
        assert!((mu.total_mass() - exact).abs() < 1e-9);
    }

    #[test]
    fn bump_graph_mass_converges_to_arc_length() {
        let graph = LipschitzGraph::new(
            2,
            Profile::SmoothBump {
                amplitude: 0.3,
                width: 0.5,
            },
        )
        .unwrap();
        let domain = ParamBox::cube(1, -1.0, 1.0).unwrap();
        // arc length by composite Simpson on a fine grid
        let fp = |u: f64| -2.0 * 0.3 * u / 0.25 * (-u * u / 0.25).exp();
        let m = 200_000;
        let hh = 2.0 / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let u = -1.0 + i as f64 * hh;
            let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += c * (1.0 + fp(u) * fp(u)).sqrt();
        }
        let exact = s * hh / 3.0;
        let mut prev = f64::INFINITY;
        for cells in [16usize, 64, 256, 1024] {
            let mu = build(&MeasureSpec::Graph {
                graph: graph.clone(),
                domain: domain.clone(),
                cells,
                shift: 0.0,
            })
            .unwrap();
            let err = (mu.total_mass() - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn uniform_on_shapes() {
        let ball = Shape::ball(vec![1.0, 2.0], 0.5).unwrap();
        let mu = build(&MeasureSpec::UniformOnShape {
            shape: ball.clone(),
            spacing: 0.05,
        })
        .unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!(mu.positions().all(|p| ball.contains(p)));
        // area fraction of the bounding square filled by the disk
        let frac = mu.len() as f64 / 400.0;
        assert!((frac - std::f64::consts::FRAC_PI_4).abs() < 0.03);
    }

    #[test]
    fn slab_is_strictly_above_graph() {
        let graph = LipschitzGraph::new(
            2,
            Profile::Sawtooth {
                amplitude: 0.1,
                period: 0.5,
            },
        )
        .unwrap();
        let mu = build(&MeasureSpec::Slab {
            graph: graph.clone(),
            domain: ParamBox::cube(1, -1.0, 1.0).unwrap(),
            cells: 32,
            layers: 4,
            thickness: 0.25,
            gap: 0.0,
            below: false,
        })
        .unwrap();
        assert_eq!(mu.len(), 128);
        assert!(mu.positions().all(|p| graph.height_above(p) > 0.0));
        // Lebesgue / thickness: mass equals the parameter length
        assert!((mu.total_mass() - 2.0).abs() < 1e-12);
        let under = build(&MeasureSpec::Slab {
            graph: graph.clone(),
            domain: ParamBox::cube(1, -1.0, 1.0).unwrap(),
            cells: 32,
            layers: 4,
            thickness: 0.25,
            gap: 0.01,
            below: true,
        })
        .unwrap();
        assert!(under.positions().all(|p| graph.height_above(p) < -0.01));
    }

    #[test]
    fn atom_count_guard() {
        let err = build(&MeasureSpec::Graph {
            graph: LipschitzGraph::flat(3),
            domain: ParamBox::cube(2, 0.0, 1.0).unwrap(),
            cells: 20_000,
            shift: 0.0,
        });
        assert!(matches!(err, Err(Error::TooManyAtoms { .. })));
    }
}
