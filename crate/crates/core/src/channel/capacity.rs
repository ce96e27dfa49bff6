use serde::{Deserialize, Serialize};

use crate::math::{Distribution, StochasticMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// Bits per channel use.
    pub bits: f64,
    /// A capacity-achieving input distribution (to the stopping tolerance).
    pub input: Distribution,
    /// Gap between the upper and lower bound at termination, in bits.
    pub gap: f64,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration, stopped once the standard upper and lower bounds
/// on capacity are within `tol` bits.
pub fn blahut_arimoto(w: &StochasticMatrix, tol: f64, max_iter: usize) -> Capacity {
    let nx = w.in_size();
    let ny = w.out_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut gap = f64::INFINITY;
    let mut lower = 0.0;
    let mut iterations = 0;
    let mut c = vec![0.0; nx];
    while iterations < max_iter {
        iterations += 1;
        let mut q = vec![0.0; ny];
        for (x, px) in p.iter().enumerate() {
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += px * w.get(x, y);
            }
        }
        // c[x] = exp(D(W(·|x) || q)), in nats
        for (x, cx) in c.iter_mut().enumerate() {
            let d: f64 = (0..ny)
                .filter(|&y| w.get(x, y) > 0.0)
                .map(|y| w.get(x, y) * (w.get(x, y) / q[y]).ln())
                .sum();
            *cx = d.exp();
        }
        let z: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        lower = z.ln();
        let upper = c.iter().cloned().fold(0.0, f64::max).ln();
        gap = (upper - lower) / std::f64::consts::LN_2;
        if gap < tol {
            break;
        }
        for (px, cx) in p.iter_mut().zip(&c) {
            *px *= cx / z;
        }
    }
    Capacity {
        bits: (lower / std::f64::consts::LN_2).max(0.0),
        input: Distribution::from_approx(p, 1e-9).expect("iterates stay on the simplex"),
        gap,
        iterations,
    }
}

/// Capacity of a discrete memoryless channel in bits per use.
pub fn channel_capacity_no_adversary(w: &StochasticMatrix) -> f64 {
    blahut_arimoto(w, 1e-7, 100_000).bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;

    fn h2(p: f64) -> f64 {
        if p == 0.0 || p == 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    #[test]
    fn bsc_matches_closed_form() {
        for k in 1..=9 {
            let p = 0.05 * k as f64;
            let c = channel_capacity_no_adversary(&bsc(p).unwrap());
            assert!((c - (1.0 - h2(p))).abs() < 1e-4, "p={p} c={c}");
        }
        assert!((channel_capacity_no_adversary(&bsc(0.1).unwrap()) - 0.531).abs() < 1e-3);
    }

    #[test]
    fn trivial_channels() {
        assert!((channel_capacity_no_adversary(&StochasticMatrix::identity(2)) - 1.0).abs() < 1e-9);
        let constant = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(channel_capacity_no_adversary(&constant).abs() < 1e-9);
    }

    #[test]
    fn z_channel_is_asymmetric() {
        // Z channel with 0.5 crossover: C = log2(1 + 2^{-2}) ≈ 0.3219
        let z = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let cap = blahut_arimoto(&z, 1e-9, 100_000);
        assert!((cap.bits - (1.25f64).log2()).abs() < 1e-6);
        assert!(cap.input.get(0) > 0.5);
    }
}
