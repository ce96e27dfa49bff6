use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use crate::adversary::{select_states, AdversaryStrategy, Scheme};
use crate::channel::MyopicAvc;
use crate::error::{Error, Result};
use crate::math::CategoricalSampler;

/// Stream `trial` of the master `seed`. Trials never share a stream, so their
/// results do not depend on evaluation order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Precomputed samplers for `U` and every `W[s]`.
#[derive(Debug, Clone)]
pub struct AvcSampler {
    u: Vec<CategoricalSampler>,
    /// `w[s][x]`.
    w: Vec<Vec<CategoricalSampler>>,
}

/// One use of the channel over a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub z: Vec<usize>,
    pub s: Vec<usize>,
    pub y: Vec<usize>,
}

impl AvcSampler {
    pub fn new(avc: &MyopicAvc) -> Self {
        Self {
            u: avc.u().samplers(),
            w: avc.w_all().iter().map(|w| w.samplers()).collect(),
        }
    }

    pub fn observe<R: Rng + ?Sized>(&self, x: &[usize], rng: &mut R) -> Vec<usize> {
        x.iter().map(|&xi| self.u[xi].sample(rng)).collect()
    }

    pub fn output<R: Rng + ?Sized>(&self, x: &[usize], s: &[usize], rng: &mut R) -> Vec<usize> {
        x.iter().zip(s).map(|(&xi, &si)| self.w[si][xi].sample(rng)).collect()
    }

    /// `z ~ U(·|x)`, then `s` from the strategy given all of `z`, then
    /// `y ~ W(·|x,s)`. `y` depends on `z` only through `s`.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        avc: &MyopicAvc,
        x: &[usize],
        strategy: &AdversaryStrategy,
        scheme: Scheme<'_>,
        rng: &mut R,
    ) -> Result<Transmission> {
        if let Some(&bad) = x.iter().find(|&&xi| xi >= avc.x_size()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: avc.x_size(),
            });
        }
        let z = self.observe(x, rng);
        let s = select_states(strategy, avc, &z, scheme, rng)?;
        if s.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: s.len(),
            });
        }
        let y = self.output(x, &s, rng);
        Ok(Transmission { z, s, y })
    }
}
