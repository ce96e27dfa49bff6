//! Finite δ-nets of polytopes inside the probability simplex.

use serde::{Deserialize, Serialize};

use super::lp::{solve_lp, LpProblem, Relation, Sense};
use super::prob::{tv_slices, Distribution};
use crate::error::{out_of_range, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexNet {
    pub points: Vec<Distribution>,
    pub delta: f64,
}

impl SimplexNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `p` to the nearest net point.
    pub fn distance_to(&self, p: &Distribution) -> f64 {
        self.points
            .iter()
            .map(|q| tv_slices(p.probs(), q.probs()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// All points `k / m` of the simplex over `d` symbols, in lexicographic order of `k`.
pub fn simplex_grid(d: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(d: usize, left: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / m as f64).collect());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(d, left - k, m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, m, m.max(1), &mut Vec::with_capacity(d), &mut out);
    out
}

/// Worst-case TV distance from a simplex point over `d` symbols to the grid of
/// resolution `1/m` is `floor(d/2)·ceil(d/2) / (d·m)`.
fn grid_radius_constant(d: usize) -> f64 {
    ((d / 2) * d.div_ceil(2)) as f64 / d as f64
}

/// Grid resolution whose covering radius is at most `radius`.
pub fn grid_resolution(d: usize, radius: f64) -> usize {
    ((grid_radius_constant(d) / radius).ceil() as usize).max(1)
}

/// A δ-net of the convex hull of `vertices`.
///
/// Every hull point lies within `delta` (TV) of some net point. The full simplex
/// is covered by a regular grid; other polytopes by projecting a finer grid onto
/// the hull and keeping the projections.
pub fn simplex_net(vertices: &[Distribution], delta: f64) -> Result<SimplexNet> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(out_of_range("delta", format!("{delta} not in (0,1]")));
    }
    let first = vertices
        .first()
        .ok_or_else(|| out_of_range("vertices", "empty vertex list"))?;
    let d = first.len();
    if vertices.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: vertices.iter().find(|v| v.len() != d).unwrap().len(),
        });
    }

    // TV to a fixed point is convex, so its maximum over the hull sits at a vertex
    let mut centroid = vec![0.0; d];
    for v in vertices {
        for (c, p) in centroid.iter_mut().zip(v.probs()) {
            *c += p / vertices.len() as f64;
        }
    }
    let worst = vertices
        .iter()
        .map(|v| tv_slices(v.probs(), &centroid))
        .fold(0.0, f64::max);
    if worst <= delta {
        return Ok(SimplexNet {
            points: vec![Distribution::from_approx(centroid, 1e-12)?],
            delta,
        });
    }

    let is_full_simplex = (0..d).all(|i| vertices.iter().any(|v| v.get(i) == 1.0));
    let points = if is_full_simplex {
        simplex_grid(d, grid_resolution(d, delta))
            .into_iter()
            .map(|g| Distribution::from_approx(g, 1e-12))
            .collect::<Result<Vec<_>>>()?
    } else {
        let half = delta / 2.0;
        let mut kept: Vec<Distribution> = Vec::new();
        for g in simplex_grid(d, grid_resolution(d, half)) {
            let (dist, proj) = project_onto_hull(vertices, &g)?;
            if dist <= half + 1e-12 {
                let proj = Distribution::from_approx(proj, 1e-9)?;
                if !kept
                    .iter()
                    .any(|q| tv_slices(q.probs(), proj.probs()) <= 1e-12)
                {
                    kept.push(proj);
                }
            }
        }
        kept
    };
    Ok(SimplexNet { points, delta })
}

/// Nearest hull point to `g` in TV, by an LP over convex weights.
fn project_onto_hull(vertices: &[Distribution], g: &[f64]) -> Result<(f64, Vec<f64>)> {
    let nv = vertices.len();
    let d = g.len();
    let mut lp = LpProblem::new(nv + d);
    let mut obj = vec![0.0; nv + d];
    obj[nv..].iter_mut().for_each(|c| *c = 0.5);
    lp.set_objective(Sense::Minimize, obj);
    lp.add_constraint((0..nv).map(|v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    for y in 0..d {
        let mix: Vec<(usize, f64)> = (0..nv).map(|v| (v, vertices[v].get(y))).collect();
        let mut le = mix.clone();
        le.push((nv + y, -1.0));
        lp.add_constraint(le, Relation::Le, g[y]);
        let mut ge = mix;
        ge.push((nv + y, 1.0));
        lp.add_constraint(ge, Relation::Ge, g[y]);
    }
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Lp("projection onto hull did not solve".into()));
    }
    let mut proj = vec![0.0; d];
    for (v, w) in sol.point[..nv].iter().enumerate() {
        for (p, x) in proj.iter_mut().zip(vertices[v].probs()) {
            *p += w * x;
        }
    }
    Ok((sol.value, proj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex_vertices(d: usize) -> Vec<Distribution> {
        (0..d).map(|i| Distribution::point_mass(d, i)).collect()
    }

    #[test]
    fn single_vertex() {
        let v = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let net = simplex_net(&[v.clone()], 0.01).unwrap();
        assert_eq!(net.points, vec![v]);
    }

    #[test]
    fn binary_simplex_delta_one_is_one_point() {
        let net = simplex_net(&simplex_vertices(2), 1.0).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.points[0].probs(), &[0.5, 0.5]);
    }

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 2).len(), 6);
        assert!(simplex_grid(3, 5).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn radius_constant_matches_worst_grid_point() {
        // brute force: finest sampled point farthest from a resolution-m grid
        for d in 2..=4 {
            let m = 3;
            let grid = simplex_grid(d, m);
            let probe = simplex_grid(d, 60);
            let worst = probe
                .iter()
                .map(|p| grid.iter().map(|g| tv_slices(p, g)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            let bound = grid_radius_constant(d) / m as f64;
            assert!(worst <= bound + 1e-12, "d={d} worst={worst} bound={bound}");
        }
    }

    #[test]
    fn segment_inside_simplex() {
        let a = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let b = Distribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let net = simplex_net(&[a.clone(), b.clone()], 0.1).unwrap();
        for p in &net.points {
            assert!((p.get(0) - 0.5).abs() < 1e-9);
        }
        for k in 0..=100 {
            let q = a.mix(&b, k as f64 / 100.0).unwrap();
            assert!(net.distance_to(&q) <= 0.1 + 1e-12);
        }
        assert!((net.len() as f64) < (1.0f64 / 0.1).powi(3));
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(simplex_net(&simplex_vertices(2), 0.0).is_err());
        assert!(simplex_net(&simplex_vertices(2), 1.5).is_err());
        assert!(simplex_net(&[], 0.5).is_err());
    }
}
