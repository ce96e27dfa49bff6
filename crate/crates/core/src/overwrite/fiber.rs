//! Classes of input distributions the adversary cannot tell apart.
//!
//! The class of `p` is the polytope `{P ≥ 0 : Σ P = 1, P·U = p·U}`. Its vertices
//! are the basic feasible solutions of that system: supports whose columns of
//! `[Uᵀ; 1ᵀ]` are linearly independent and whose unique solution is non-negative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::MyopicAvc;
use crate::error::{Error, Result};
use crate::math::linalg::solve_columns;
use crate::math::prob::tv_slices;
use crate::math::{push_forward, solve_lp, Distribution, LpProblem, LpStatus, Relation, Sense};

/// Largest input alphabet handled by exact vertex enumeration.
pub const MAX_EXACT_INPUTS: usize = 6;

const SOLVE_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberPolytope {
    pub representative: Distribution,
    pub vertices: Vec<Distribution>,
    pub image: Distribution,
    /// False when vertices were sampled rather than enumerated.
    pub exact: bool,
}

/// True iff `p1` and `p2` induce the same adversary observation distribution.
pub fn are_indistinguishable(p1: &Distribution, p2: &Distribution, avc: &MyopicAvc) -> Result<bool> {
    let a = push_forward(p1, avc.u())?;
    let b = push_forward(p2, avc.u())?;
    Ok(a.probs().iter().zip(b.probs()).all(|(x, y)| (x - y).abs() <= 1e-9))
}

fn system(avc: &MyopicAvc, image: &Distribution) -> (Vec<Vec<f64>>, Vec<f64>) {
    // column x of [Uᵀ; 1ᵀ]
    let columns = (0..avc.x_size())
        .map(|x| {
            let mut c: Vec<f64> = avc.u().row(x).probs().to_vec();
            c.push(1.0);
            c
        })
        .collect();
    let mut b = image.probs().to_vec();
    b.push(1.0);
    (columns, b)
}

fn push_unique(vertices: &mut Vec<Distribution>, v: Distribution) {
    if !vertices.iter().any(|w| tv_slices(w.probs(), v.probs()) <= DEDUP_TOL) {
        vertices.push(v);
    }
}

/// Exact vertex enumeration of the class of `p`. Fails for alphabets above
/// [`MAX_EXACT_INPUTS`].
pub fn fiber_polytope(p: &Distribution, avc: &MyopicAvc) -> Result<FiberPolytope> {
    let nx = avc.x_size();
    if nx > MAX_EXACT_INPUTS {
        return Err(Error::Enumeration(format!(
            "input alphabet of size {nx} exceeds the exact-enumeration limit {MAX_EXACT_INPUTS}"
        )));
    }
    if p.len() != nx {
        return Err(Error::DimensionMismatch {
            expected: nx,
            actual: p.len(),
        });
    }
    let image = push_forward(p, avc.u())?;
    let (columns, b) = system(avc, &image);
    let mut vertices = Vec::new();
    for mask in 1u32..(1 << nx) {
        let support: Vec<usize> = (0..nx).filter(|x| mask & (1 << x) != 0).collect();
        if support.len() > b.len() {
            continue;
        }
        let cols: Vec<Vec<f64>> = support.iter().map(|&x| columns[x].clone()).collect();
        let Some(sol) = solve_columns(&cols, &b, SOLVE_TOL) else {
            continue;
        };
        if sol.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut full = vec![0.0; nx];
        for (&x, v) in support.iter().zip(&sol) {
            full[x] = v.max(0.0);
        }
        let Ok(v) = Distribution::from_approx(full, 1e-8) else {
            continue;
        };
        push_unique(&mut vertices, v);
    }
    if vertices.is_empty() {
        return Err(Error::Enumeration(
            "no vertex found; representative violates its own constraints".into(),
        ));
    }
    Ok(FiberPolytope {
        representative: p.clone(),
        vertices,
        image,
        exact: true,
    })
}

/// Vertices found by maximizing random linear objectives over the class.
/// Used for alphabets too large for exact enumeration; may miss vertices.
pub fn fiber_polytope_sampled(
    p: &Distribution,
    avc: &MyopicAvc,
    directions: usize,
    seed: u64,
) -> Result<FiberPolytope> {
    let nx = avc.x_size();
    let image = push_forward(p, avc.u())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::new();
    for _ in 0..directions.max(1) {
        let mut lp = LpProblem::new(nx);
        let obj: Vec<f64> = (0..nx).map(|_| rng.random::<f64>() - 0.5).collect();
        lp.set_objective(Sense::Maximize, obj);
        lp.add_constraint((0..nx).map(|x| (x, 1.0)).collect(), Relation::Eq, 1.0);
        for z in 0..avc.z_size() {
            lp.add_constraint(
                (0..nx).map(|x| (x, avc.u().get(x, z))).collect(),
                Relation::Eq,
                image.get(z),
            );
        }
        let sol = solve_lp(&lp)?;
        if sol.status == LpStatus::Optimal {
            push_unique(&mut vertices, Distribution::from_approx(sol.point, 1e-8)?);
        }
    }
    if vertices.is_empty() {
        vertices.push(p.clone());
    }
    Ok(FiberPolytope {
        representative: p.clone(),
        vertices,
        image,
        exact: false,
    })
}

/// Exact enumeration when possible, otherwise sampling.
pub fn fiber_polytope_auto(p: &Distribution, avc: &MyopicAvc, seed: u64) -> Result<FiberPolytope> {
    if avc.x_size() <= MAX_EXACT_INPUTS {
        fiber_polytope(p, avc)
    } else {
        fiber_polytope_sampled(p, avc, 64 * avc.x_size(), seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_r_ow_bsc_bec;
    use crate::math::StochasticMatrix;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn indistinguishability_in_examples() {
        let (a, b) = (d(&[0.3, 0.7]), d(&[0.9, 0.1]));
        let erased = make_r_ow_bsc_bec(0.1, 0.3, 1.0).unwrap();
        let half = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
        assert!(are_indistinguishable(&a, &a, &half).unwrap());
        assert!(are_indistinguishable(&a, &b, &erased).unwrap());
        assert!(!are_indistinguishable(&a, &b, &half).unwrap());
    }

    #[test]
    fn injective_view_gives_singleton() {
        let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
        let p = d(&[0.3, 0.7]);
        let f = fiber_polytope(&p, &avc).unwrap();
        assert_eq!(f.vertices.len(), 1);
        assert!(tv_slices(f.vertices[0].probs(), p.probs()) < 1e-12);
    }

    #[test]
    fn erased_view_gives_whole_simplex() {
        let avc = make_r_ow_bsc_bec(0.1, 0.3, 1.0).unwrap();
        let f = fiber_polytope(&d(&[0.3, 0.7]), &avc).unwrap();
        assert_eq!(f.vertices, vec![d(&[1.0, 0.0]), d(&[0.0, 1.0])]);
    }

    #[test]
    fn collapsed_symbols_give_segment() {
        let w = StochasticMatrix::identity(3);
        let u = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let avc = MyopicAvc::new(vec![w], u).unwrap();
        let f = fiber_polytope(&d(&[0.2, 0.5, 0.3]), &avc).unwrap();
        assert_eq!(f.vertices.len(), 2);
        for want in [d(&[0.2, 0.8, 0.0]), d(&[0.2, 0.0, 0.8])] {
            assert!(f.vertices.iter().any(|v| tv_slices(v.probs(), want.probs()) < 1e-12));
        }
        for v in &f.vertices {
            assert!(are_indistinguishable(v, &f.representative, &avc).unwrap());
        }
    }

    #[test]
    fn sampled_fallback_finds_segment_endpoints() {
        let w = StochasticMatrix::identity(3);
        let u = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let avc = MyopicAvc::new(vec![w], u).unwrap();
        let f = fiber_polytope_sampled(&d(&[0.2, 0.5, 0.3]), &avc, 32, 1).unwrap();
        assert!(!f.exact);
        assert_eq!(f.vertices.len(), 2);
    }

    #[test]
    fn large_alphabet_is_reported() {
        let avc = MyopicAvc::new(vec![StochasticMatrix::identity(7)], StochasticMatrix::identity(7)).unwrap();
        let err = fiber_polytope(&Distribution::uniform(7), &avc).unwrap_err();
        assert!(matches!(err, Error::Enumeration(_)));
    }
}
