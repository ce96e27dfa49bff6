use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::{build_set_family_with, FamilyParams};
use super::scheme::{check_alphabeta, Decision, TagScheme};
use crate::channel::MyopicAvc;
use crate::error::{out_of_range, Error, Result};
use crate::math::{simplex_net, Distribution};
use crate::overwrite::FiberPolytope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub mu: f64,
    /// Decoder threshold; `μ/4` when absent.
    pub rho: Option<f64>,
    /// Net radius over the class.
    pub delta: f64,
    /// Sub-block length.
    pub n: usize,
    /// Number of sub-blocks `L`.
    pub sub_blocks: usize,
    pub alpha: f64,
    pub beta: f64,
    pub target_count: usize,
    pub seed: u64,
    pub max_retries: usize,
}

/// `L` sub-blocks, each encoded by a tag whose off-set input distribution is a
/// uniformly chosen net point of the class. All components share one family,
/// `x′` and `ρ`, so the decoder never needs the chosen index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTagScheme {
    /// Shared family, `x′`, `ρ` and target; its `p_x` is the first component.
    pub base: TagScheme,
    /// Off-set input distribution of each component.
    pub components: Vec<Distribution>,
    pub sub_block_len: usize,
    pub sub_block_count: usize,
}

pub fn build_mixture_tag(
    avc: &MyopicAvc,
    fiber: &FiberPolytope,
    x_prime: usize,
    params: &MixtureParams,
) -> Result<MixtureTagScheme> {
    let rho = params.rho.unwrap_or(params.mu / 4.0);
    check_alphabeta(params.alpha, params.beta, params.mu, rho)?;
    if params.sub_blocks == 0 {
        return Err(out_of_range("sub_blocks", "at least one sub-block is required"));
    }
    let net = simplex_net(&fiber.vertices, params.delta)?;
    let mut fp = FamilyParams::new(params.n, params.alpha, params.beta, params.target_count, params.seed);
    fp.max_retries = params.max_retries;
    let family = build_set_family_with(&fp)?;
    let base = TagScheme::new(avc, net.points[0].clone(), x_prime, family, params.mu, Some(rho))?;
    Ok(MixtureTagScheme {
        base,
        components: net.points,
        sub_block_len: params.n,
        sub_block_count: params.sub_blocks,
    })
}

impl MixtureTagScheme {
    pub fn block_len(&self) -> usize {
        self.sub_block_len * self.sub_block_count
    }

    pub fn message_count(&self) -> usize {
        self.base.message_count()
    }

    /// Encodes and also returns the private component index of each sub-block.
    pub fn encode_traced<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
        let samplers: Vec<_> = self.components.iter().map(Distribution::sampler).collect();
        let mut x = Vec::with_capacity(self.block_len());
        let mut ks = Vec::with_capacity(self.sub_block_count);
        for _ in 0..self.sub_block_count {
            let k = rng.random_range(0..self.components.len());
            x.extend(self.base.encode_with(m, &samplers[k], rng)?);
            ks.push(k);
        }
        Ok((x, ks))
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        Ok(self.encode_traced(m, rng)?.0)
    }

    /// Accepts iff every sub-block passes the shared threshold test.
    pub fn decode(&self, m_hat: usize, y: &[usize]) -> Result<Decision> {
        if y.len() != self.block_len() {
            return Err(Error::DimensionMismatch {
                expected: self.block_len(),
                actual: y.len(),
            });
        }
        for block in y.chunks(self.sub_block_len) {
            if self.base.decode(m_hat, block)? == Decision::Reject {
                return Ok(Decision::Reject);
            }
        }
        Ok(Decision::Accept)
    }
}
