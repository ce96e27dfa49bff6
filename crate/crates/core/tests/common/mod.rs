//! Independent reference computations shared by the integration and acceptance tests.
#![allow(dead_code)]

use myopic_auth::channel::MyopicAvc;
use myopic_auth::math::StochasticMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random row-stochastic matrix; roughly a third of the entries are zeroed to
/// create ties and boundary optima.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
    let data = (0..rows)
        .map(|_| loop {
            let r: Vec<f64> = (0..cols)
                .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() })
                .collect();
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                break r.iter().map(|v| v / s).collect::<Vec<f64>>();
            }
        })
        .collect();
    StochasticMatrix::with_tolerance(data, 1e-9).unwrap()
}

pub fn random_avc(seed: u64, x: usize, y: usize, z: usize, s: usize) -> MyopicAvc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..s).map(|_| random_matrix(&mut rng, x, y)).collect();
    let u = random_matrix(&mut rng, x, z);
    MyopicAvc::new(w, u).unwrap()
}

/// Output distribution induced by input `p` and strategy `q[z][s]`.
pub fn induced(avc: &MyopicAvc, p: &[f64], q: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; avc.y_size()];
    for (x, px) in p.iter().enumerate() {
        for (z, qz) in q.iter().enumerate() {
            let pz = px * avc.u().get(x, z);
            for (s, qs) in qz.iter().enumerate() {
                for (y, o) in out.iter_mut().enumerate() {
                    *o += pz * qs * avc.w_prob(y, x, s);
                }
            }
        }
    }
    out
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn target(avc: &MyopicAvc, x_prime: usize) -> Vec<f64> {
    avc.no_adversary().row(x_prime).probs().to_vec()
}

/// Free coordinates of a strategy: for each `z`, the first `|S|−1` masses.
fn free_dims(avc: &MyopicAvc) -> usize {
    avc.z_size() * (avc.s_size() - 1)
}

/// Strategy from free coordinates, or `None` if a row leaves the simplex.
fn strategy_from(avc: &MyopicAvc, c: &[f64]) -> Option<Vec<Vec<f64>>> {
    let k = avc.s_size() - 1;
    let mut q = Vec::with_capacity(avc.z_size());
    for z in 0..avc.z_size() {
        let mut row: Vec<f64> = c[z * k..(z + 1) * k].to_vec();
        if row.iter().any(|&v| v < -1e-12) {
            return None;
        }
        let last = 1.0 - row.iter().sum::<f64>();
        if last < -1e-12 {
            return None;
        }
        row.push(last.max(0.0));
        q.push(row);
    }
    Some(q)
}

/// Minimizes `f` over the box grid `centre ± radius` at `step` in every coordinate.
fn grid_search(dims: usize, centre: &[f64], radius: f64, step: f64, mut f: impl FnMut(&[f64]) -> Option<f64>) -> (f64, Vec<f64>) {
    let k = (radius / step).round() as i64;
    let mut idx = vec![-k; dims];
    let mut best = (f64::INFINITY, centre.to_vec());
    let mut point = vec![0.0; dims];
    loop {
        for d in 0..dims {
            point[d] = centre[d] + idx[d] as f64 * step;
        }
        if let Some(v) = f(&point) {
            if v < best.0 {
                best = (v, point.clone());
            }
        }
        let mut d = 0;
        loop {
            if d == dims {
                return best;
            }
            idx[d] += 1;
            if idx[d] <= k {
                break;
            }
            idx[d] = -k;
            d += 1;
        }
    }
}

/// Whether the literal strategy grid at step 0.01 is small enough to enumerate.
pub fn primal_grid_feasible(avc: &MyopicAvc) -> bool {
    free_dims(avc) <= 2
}

/// κ by direct minimization over strategies on a grid of step 0.01 followed by
/// two zoom passes (steps 0.001 and 0.0001). An upper bound on the true value.
pub fn kappa_primal_grid(avc: &MyopicAvc, p: &[f64], x_prime: usize) -> f64 {
    let dims = free_dims(avc);
    let t = target(avc, x_prime);
    let eval = |c: &[f64]| strategy_from(avc, c).map(|q| tv(&induced(avc, p, &q), &t));
    let (mut best, mut at) = grid_search(dims, &vec![0.5; dims], 0.5, 0.01, eval);
    for (radius, step) in [(0.02, 0.001), (0.002, 0.0001)] {
        let (v, a) = grid_search(dims, &at, radius, step, eval);
        if v < best {
            best = v;
            at = a;
        }
    }
    best
}

/// κ through the dual form `max_f Σ_z min_s c_f(z,s) − ⟨f, T⟩` over
/// `f ∈ [0,1]^Y` shifted so that `f(last) = 0` (so every spread is at most 1),
/// scanned at step 0.01 then zoomed. A lower bound.
pub fn kappa_dual_grid(avc: &MyopicAvc, p: &[f64], x_prime: usize) -> f64 {
    let ny = avc.y_size();
    let t = target(avc, x_prime);
    let dims = ny - 1;
    let value = |f: &[f64]| -> f64 {
        let fy = |y: usize| if y < dims { f[y] } else { 0.0 };
        let mut total = 0.0;
        for z in 0..avc.z_size() {
            let mut best = f64::INFINITY;
            for s in 0..avc.s_size() {
                let mut c = 0.0;
                for (x, px) in p.iter().enumerate() {
                    let pz = px * avc.u().get(x, z);
                    if pz == 0.0 {
                        continue;
                    }
                    for y in 0..ny {
                        c += pz * avc.w_prob(y, x, s) * fy(y);
                    }
                }
                best = best.min(c);
            }
            total += best;
        }
        total - (0..ny).map(|y| fy(y) * t[y]).sum::<f64>()
    };
    let neg = |f: &[f64]| {
        let hi = f.iter().fold(0.0f64, |a, &b| a.max(b));
        let lo = f.iter().fold(0.0f64, |a, &b| a.min(b));
        if hi - lo > 1.0 + 1e-12 {
            None
        } else {
            Some(-value(f))
        }
    };
    let (mut best, mut at) = grid_search(dims, &vec![0.0; dims], 1.0, 0.01, neg);
    for (radius, step) in [(0.02, 0.001), (0.002, 0.0001)] {
        let (v, a) = grid_search(dims, &at, radius, step, neg);
        if v < best {
            best = v;
            at = a;
        }
    }
    (-best).max(0.0)
}

/// The brute-force reference: primal grid when enumerable, dual grid otherwise.
pub fn kappa_oracle(avc: &MyopicAvc, p: &[f64], x_prime: usize) -> f64 {
    if primal_grid_feasible(avc) {
        kappa_primal_grid(avc, p, x_prime)
    } else {
        kappa_dual_grid(avc, p, x_prime)
    }
}

/// Random distribution with some zero entries.
pub fn random_distribution(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v = random_matrix(rng, 1, d);
    v.row(0).probs().to_vec()
}
