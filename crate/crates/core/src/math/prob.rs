//! Finite probability vectors and channels (row-stochastic matrices).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// A probability vector over `0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, Tolerances::DEFAULT.stochasticity)
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a non-negative number"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Clamps entries above `-tol` to zero and rescales to unit mass. Intended for
    /// vectors produced by floating-point computation (LP optima, mixtures).
    pub fn from_approx(probs: Vec<f64>, tol: f64) -> Result<Self> {
        let mut probs = probs;
        for p in probs.iter_mut() {
            if *p < 0.0 {
                if *p < -tol {
                    return Err(Error::InvalidDistribution(format!(
                        "entry {p} is negative beyond tolerance {tol}"
                    )));
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > tol.max(1e-12) * probs.len() as f64 {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        probs.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { probs })
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        assert!(at < size, "point mass index {at} outside alphabet of size {size}");
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0);
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Distribution, lambda: f64) -> Result<Distribution> {
        check_dims(self.len(), other.len())?;
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Distribution::from_approx(probs, 1e-12)
    }

    pub fn sampler(&self) -> CategoricalSampler {
        CategoricalSampler::new(self)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Distribution::new(value)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// Inverse-CDF sampler. One uniform draw per sample, so streams stay aligned
/// across runs.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // guard against the last partial sum landing just below 1
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // zero-probability symbols have an empty interval and are never chosen
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

/// A channel: one output distribution per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StochasticMatrix {
    rows: Vec<Distribution>,
    out_size: usize,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(rows, Tolerances::DEFAULT.stochasticity)
    }

    pub fn with_tolerance(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("matrix has no rows".into()));
        }
        let out_size = rows[0].len();
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != out_size {
                return Err(Error::NotStochastic {
                    row: i.to_string(),
                    reason: format!("has {} entries, expected {out_size}", row.len()),
                });
            }
            let d = Distribution::with_tolerance(row, tol).map_err(|e| Error::NotStochastic {
                row: i.to_string(),
                reason: e.to_string(),
            })?;
            out.push(d);
        }
        Ok(Self {
            rows: out,
            out_size,
        })
    }

    pub fn from_rows(rows: Vec<Distribution>) -> Result<Self> {
        let out_size = rows
            .first()
            .map(Distribution::len)
            .ok_or_else(|| Error::InvalidDistribution("matrix has no rows".into()))?;
        for r in &rows {
            check_dims(out_size, r.len())?;
        }
        Ok(Self { rows, out_size })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            rows: (0..size).map(|i| Distribution::point_mass(size, i)).collect(),
            out_size: size,
        }
    }

    pub fn in_size(&self) -> usize {
        self.rows.len()
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn row(&self, input: usize) -> &Distribution {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input].probs[output]
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.probs.clone()).collect()
    }

    pub fn samplers(&self) -> Vec<CategoricalSampler> {
        self.rows.iter().map(Distribution::sampler).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for StochasticMatrix {
    type Error = Error;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        StochasticMatrix::new(value)
    }
}

impl From<StochasticMatrix> for Vec<Vec<f64>> {
    fn from(m: StochasticMatrix) -> Self {
        m.to_nested()
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Half the L1 distance.
pub fn variational_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims(p.len(), q.len())?;
    Ok(tv_slices(p.probs(), q.probs()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Output distribution of `channel` when its input is drawn from `p`.
pub fn push_forward(p: &Distribution, channel: &StochasticMatrix) -> Result<Distribution> {
    check_dims(channel.in_size(), p.len())?;
    let mut out = vec![0.0; channel.out_size()];
    for (px, row) in p.probs().iter().zip(channel.rows()) {
        if *px == 0.0 {
            continue;
        }
        for (o, w) in out.iter_mut().zip(row.probs()) {
            *o += px * w;
        }
    }
    Distribution::from_approx(out, 1e-12)
}

/// Exact symbol counts over a set of positions. `counts` always sums to `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalCounts {
    pub fn tally(seq: &[usize], positions: &[usize], alphabet_size: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyPositions);
        }
        let mut counts = vec![0u64; alphabet_size];
        for &i in positions {
            let sym = *seq.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: seq.len(),
            })?;
            let slot = counts.get_mut(sym).ok_or(Error::IndexOutOfRange {
                index: sym,
                len: alphabet_size,
            })?;
            *slot += 1;
        }
        Ok(Self {
            counts,
            total: positions.len() as u64,
        })
    }

    pub fn to_distribution(&self) -> Distribution {
        let n = self.total as f64;
        Distribution {
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }

    /// TV distance of the empirical distribution from `target`.
    pub fn distance_to(&self, target: &Distribution) -> f64 {
        let n = self.total as f64;
        0.5 * self
            .counts
            .iter()
            .zip(target.probs())
            .map(|(&c, t)| (c as f64 / n - t).abs())
            .sum::<f64>()
    }
}

/// Fraction of `positions` (0-based) at which `seq` carries each symbol.
pub fn empirical_distribution(
    seq: &[usize],
    positions: &[usize],
    alphabet_size: usize,
) -> Result<Distribution> {
    Ok(EmpiricalCounts::tally(seq, positions, alphabet_size)?.to_distribution())
}
